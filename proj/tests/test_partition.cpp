#include <cmath>

#include <gtest/gtest.h>

#include "ais/daisee.hpp"
#include "ais/errors.hpp"
#include "ais/oracle.hpp"
#include "ais/partition.hpp"

namespace ais {
namespace {

TEST(Partition, FourEqualCells) {
  const auto arms = make_equal_partition(Rectangle::interval(0.0, 1.0), 4, TauShared{1.0});
  ASSERT_EQ(arms.size(), 4u);
  const double edges[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_EQ(arms[a].cell, Rectangle::interval(edges[a], edges[a + 1]));
    EXPECT_DOUBLE_EQ(arms[a].g_density, 4.0);
    EXPECT_NEAR(arms[a].g_density * arms[a].cell.volume(), 1.0, 1e-12);
  }
}

TEST(Partition, AutoTau) {
  const auto arms = make_equal_partition(Rectangle::interval(0.0, 1.0), 5, TauAuto{}, 20.0);
  for (const auto& a : arms) EXPECT_NEAR(a.tau, 20.0 / 2.0 * 0.2, 1e-12);
  EXPECT_THROW(make_equal_partition(Rectangle::interval(0.0, 1.0), 5, TauAuto{}), ConfigError);
}

TEST(Partition, PerArmTauAndErrors) {
  const auto arms = make_equal_partition(Rectangle::interval(0.0, 1.0), 2, TauPerArm{{0.5, 2.0}});
  EXPECT_EQ(arms[0].tau, 0.5);
  EXPECT_EQ(arms[1].tau, 2.0);
  EXPECT_THROW(make_equal_partition(Rectangle::interval(0.0, 1.0), 3, TauPerArm{{0.5, 2.0}}), ConfigError);
  EXPECT_THROW(make_equal_partition(Rectangle::interval(0.0, 1.0), 2, TauShared{0.0}), ConfigError);
  EXPECT_THROW(make_equal_partition(Rectangle::interval(0.0, 1.0), 0, TauShared{1.0}), ConfigError);
}

TEST(Partition, SingleCell) {
  const auto arms = make_equal_partition(Rectangle({0.0, 0.0}, {2.0, 3.0}), 1, TauShared{1.0});
  ASSERT_EQ(arms.size(), 1u);
  EXPECT_EQ(arms[0].cell, Rectangle({0.0, 0.0}, {2.0, 3.0}));
  EXPECT_DOUBLE_EQ(arms[0].g_density, 1.0 / 6.0);
}

TEST(Partition, TwoDimensionalCutsAlongFirstAxis) {
  const auto cells = equal_cells(Rectangle({0.0, 0.0}, {1.0, 2.0}), 2);
  EXPECT_EQ(cells[0], Rectangle({0.0, 0.0}, {0.5, 2.0}));
  EXPECT_EQ(cells[1], Rectangle({0.5, 0.0}, {1.0, 2.0}));
}

TEST(Partition, CellIndexUsesHalfOpenCells) {
  const auto domain = Rectangle::interval(0.0, 1.0);
  const double x0[] = {0.25}, x1[] = {0.2499999}, x2[] = {1.0}, x3[] = {0.0};
  EXPECT_EQ(equal_cell_index(domain, 4, x0), 1u);
  EXPECT_EQ(equal_cell_index(domain, 4, x1), 0u);
  EXPECT_EQ(equal_cell_index(domain, 4, x2), 3u);
  EXPECT_EQ(equal_cell_index(domain, 4, x3), 0u);
  const auto cells = equal_cells(domain, 7);
  for (std::size_t a = 0; a < 7; ++a) {
    const double lo[] = {cells[a].lo(0)};
    EXPECT_EQ(equal_cell_index(domain, 7, lo), a);
  }
}

TEST(ArmState, RecordPull) {
  ArmState s;
  EXPECT_THROW(s.z_hat(), PreconditionError);
  s = record_pull(s, 3.0);
  EXPECT_EQ(s.n(), 1u);
  EXPECT_EQ(s.z_hat(), 3.0);
  s = record_pull(s, 1.0);
  EXPECT_EQ(s.n(), 2u);
  EXPECT_EQ(s.z_hat(), 2.0);

  ArmState t;
  for (double y : {1.0, 2.0, 3.0}) t = record_pull(t, y);
  EXPECT_EQ(t.sum_y2(), 14.0);
  EXPECT_EQ(t.z_hat(), 2.0);
}

TEST(ArmState, RejectsBadWeightsNamingArm) {
  ArmState s;
  try {
    record_pull(s, std::numeric_limits<double>::infinity(), 7, 123);
    FAIL();
  } catch (const SamplingError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("7"), std::string::npos);
    EXPECT_NE(what.find("123"), std::string::npos);
  }
  EXPECT_THROW(record_pull(s, -1.0), SamplingError);
  EXPECT_THROW(record_pull(s, std::nan("")), SamplingError);
}

TEST(ArmState, CompensatedSumsStayAccurate) {
  ArmState s;
  s.record(1e16);
  for (int i = 0; i < 1000; ++i) s.record(1.0);
  EXPECT_EQ(s.sum_y(), 1e16 + 1000.0);
  EXPECT_GE(s.sum_y2() * s.n(), s.sum_y() * s.sum_y() * (1 - 1e-12));
}

TEST(Partition, UnbiasedUnderFrozenUniformProposal) {
  const auto target = builtin_target("exp-flat");
  const auto arms = make_equal_partition(target.domain(), 4, TauAuto{}, target.sup_bound());
  std::vector<Rectangle> cells;
  for (const auto& a : arms) cells.push_back(a.cell);
  const auto oracle = oracle_table(target, cells);
  const int replicates = 200;
  const TargetPulls pulls(target);
  std::vector<std::vector<double>> z_hat(4);
  for (int r = 0; r < replicates; ++r) {
    Daisee engine(arms, {.boost = {}, .alpha = std::nullopt, .adapt = false}, 1000 + r);
    engine.initialize(pulls);
    for (int i = 0; i < 400; ++i) engine.step(pulls);
    for (std::size_t a = 0; a < 4; ++a) z_hat[a].push_back(engine.states()[a].z_hat());
  }
  for (std::size_t a = 0; a < 4; ++a) {
    double mean = 0.0, var = 0.0;
    for (double v : z_hat[a]) mean += v;
    mean /= replicates;
    for (double v : z_hat[a]) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (replicates - 1)) / std::sqrt(replicates);
    EXPECT_LE(std::abs(mean - oracle.z_a[a]), 4.0 * se + 1e-15) << "arm " << a;
  }
}

}  // namespace
}  // namespace ais
