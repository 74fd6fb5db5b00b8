#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ais/errors.hpp"
#include "ais/metrics.hpp"
#include "ais/partition.hpp"
#include "ais/rng.hpp"

namespace ais {
namespace {

std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& v : p) total += (v = e(gen));
  for (auto& v : p) v /= total;
  return p;
}

TEST(KlRegret, Examples) {
  const std::vector<double> half = {0.5, 0.5}, one = {1.0}, skew = {0.75, 0.25};
  EXPECT_EQ(kl_regret(half, half), 0.0);
  EXPECT_EQ(kl_regret(one, one), 0.0);
  const long double expected = 0.75L * std::log(1.5L) + 0.25L * std::log(0.5L);
  EXPECT_NEAR(kl_regret(skew, half), static_cast<double>(expected), 1e-15);
  EXPECT_NEAR(kl_regret(skew, half), 0.130812, 1e-6);
}

TEST(KlRegret, ZeroMassConventions) {
  const std::vector<double> pi = {1.0, 0.0}, q = {0.5, 0.5}, bad = {0.0, 1.0};
  EXPECT_NEAR(kl_regret(pi, q), std::log(2.0), 1e-15);
  EXPECT_TRUE(std::isinf(kl_regret(pi, bad)));
  const std::vector<double> short_q = {1.0};
  EXPECT_THROW(kl_regret(pi, short_q), PreconditionError);
}

TEST(KlRegret, GibbsInequality) {
  std::mt19937_64 gen(12);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = 2 + i % 9;
    const auto p = random_simplex(gen, k), q = random_simplex(gen, k);
    ASSERT_GE(kl_regret(p, q), 0.0);
    ASSERT_NEAR(kl_regret(p, p), 0.0, 1e-15);
  }
}

TEST(TotalVariation, Basics) {
  const std::vector<double> a = {0.5, 0.5}, b = {1.0, 0.0};
  EXPECT_DOUBLE_EQ(total_variation(a, b), 0.5);
  EXPECT_DOUBLE_EQ(total_variation(a, a), 0.0);
}

TEST(EffectiveSampleSize, Weights) {
  const std::vector<double> w = {1, 2, 3}, eq = {2, 2, 2, 2}, single = {1, 0, 0};
  EXPECT_NEAR(effective_sample_size(w), 36.0 / 14.0, 1e-15);
  EXPECT_DOUBLE_EQ(effective_sample_size(eq), 4.0);
  EXPECT_DOUBLE_EQ(effective_sample_size(single), 1.0);
}

TEST(IsEstimates, UniformProposalOnUniformTarget) {
  Rng rng(1);
  std::vector<ProposalDraw> draws;
  for (int i = 0; i < 100; ++i) draws.push_back({{rng.uniform()}, 1.0, 1.0});
  const std::vector<TestFunction> fns = {{"one", [](std::span<const double>) { return 1.0; }},
                                         {"x", [](std::span<const double> x) { return x[0]; }}};
  const auto est = is_estimates(draws, fns);
  EXPECT_EQ(est.z_hat, 1.0);
  EXPECT_DOUBLE_EQ(est.expect.at("one"), 1.0);
  EXPECT_NEAR(est.expect.at("x"), 0.5, 0.1);
}

TEST(IsEstimates, ErrorsOnZeroWeightAndEmpty) {
  const std::vector<ProposalDraw> zero = {{{0.1}, 0.0, 1.0}};
  const std::vector<TestFunction> fns = {{"one", [](std::span<const double>) { return 1.0; }}};
  EXPECT_THROW(is_estimates(zero, fns), EstimatorError);
  EXPECT_THROW(is_estimates(std::span<const ProposalDraw>{}, fns), PreconditionError);
}

TEST(IsEstimates, ExpFlatUnbiasedUnderUniformProposal) {
  const auto target = builtin_target("exp-flat");
  const double z = 0.125 - 0.1 * std::expm1(-7.5);
  const int seeds = 50;
  std::vector<double> est;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(500 + s);
    std::vector<ProposalDraw> draws(100000);
    for (auto& d : draws) {
      d.x = target.domain().sample_uniform(rng);
      d.f_val = target(d.x);
      d.q_density = 1.0;
    }
    est.push_back(is_estimates(draws).z_hat);
  }
  double mean = 0.0, var = 0.0;
  for (double v : est) mean += v;
  mean /= seeds;
  for (double v : est) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (seeds - 1) / seeds);
  EXPECT_LE(std::abs(mean - z), 4.0 * se);
}

TEST(FullKl, SingleUniformCellIsZero) {
  const auto t = builtin_target("uniform");
  const auto oracle = oracle_table(t, {t.domain()});
  const std::vector<double> q = {1.0};
  EXPECT_NEAR(full_kl(t, oracle.partition, q, oracle), 0.0, 1e-14);
}

TEST(FullKl, AtOptimumOnlyWithinCellTermRemains) {
  const auto t = builtin_target("exp-flat");
  const auto oracle = oracle_table(t, {Rectangle::interval(0.0, 0.25), Rectangle::interval(0.25, 1.0)});
  // Within-cell conditional KL of the exponential piece, closed form: the
  // flat cell contributes nothing.
  const double lam = 10.0, w = 0.75, mass = -std::expm1(-lam * w) / lam;  // integral of exp(-lam u) on [0, w]
  // E[log p] for p(u) = exp(-lam u) / mass on [0, w], relative to uniform 1/w.
  const double mean_u = (1.0 / lam) - w * std::exp(-lam * w) / (lam * mass);
  const double conditional = -lam * mean_u - std::log(mass) + std::log(w);
  const double expected = oracle.pi_a[1] * conditional;
  EXPECT_NEAR(full_kl(t, oracle.partition, oracle.pi_a, oracle), expected, 1e-9);
  const std::vector<double> off = {0.3, 0.7};
  EXPECT_NEAR(full_kl(t, oracle.partition, off, oracle), expected + kl_regret(oracle.pi_a, off), 1e-9);
}

TEST(FullKl, AlignedRefinementAtOptimumIsZero) {
  const auto t = builtin_target("per-arm-tau");
  const std::vector<Rectangle> cells = {Rectangle::interval(0.0, 0.25), Rectangle::interval(0.25, 0.5),
                                        Rectangle::interval(0.5, 0.99), Rectangle::interval(0.99, 1.0)};
  const auto oracle = oracle_table(t, cells);
  EXPECT_NEAR(full_kl(t, cells, oracle.pi_a, oracle), 0.0, 1e-12);
  // Same value through the quadrature path.
  TargetDensity opaque("opaque", t.domain(), [&](std::span<const double> x) { return t(x); }, 20.0);
  opaque.with_discontinuities(0, {0.25, 0.5, 0.99});
  EXPECT_NEAR(full_kl(opaque, cells, oracle.pi_a, oracle), 0.0, 1e-8);
}

TEST(FullKl, RefinementNeverHurtsTheOptimum) {
  for (auto name : {"exp-flat", "per-arm-tau", "vary-k"}) {
    const auto t = builtin_target(name, std::string(name) == "vary-k" ? nlohmann::json{{"K", 10}} : nlohmann::json::object());
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k : {1u, 2u, 4u, 8u, 16u}) {
      const auto oracle = oracle_table(t, equal_cells(t.domain(), k));
      const double kl = full_kl(t, oracle.partition, oracle.pi_a, oracle);
      EXPECT_LE(kl, previous + 1e-10) << name << " K=" << k;
      EXPECT_GE(kl, -1e-12);
      previous = kl;
    }
  }
}

TEST(RegretAccumulator, Nondecreasing) {
  RegretAccumulator acc;
  double prev = 0.0;
  for (double r : {0.1, 0.0, 0.3, 1e-9}) {
    const double now = acc.add(r);
    EXPECT_GE(now, prev);
    prev = now;
  }
  EXPECT_NEAR(acc.total(), 0.400000001, 1e-15);
}

}  // namespace
}  // namespace ais
