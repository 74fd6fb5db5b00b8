#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ais/boost.hpp"
#include "ais/metrics.hpp"
#include "ais/oracle.hpp"
#include "ais/partition.hpp"
#include "ais/rng.hpp"
#include "ais/targets.hpp"

namespace ais {

/// Produces draws for a given cell. Implementations must be stateless apart
/// from the caller's Rng so replicates stay independent.
class PullSource {
 public:
  virtual ~PullSource() = default;
  /// Draws x in `arm.cell`, evaluates f and fills x, f_val, y = f / g and
  /// the arm index. `t` is left for the caller.
  virtual WeightedSample draw(const Arm& arm, std::size_t index, Rng& rng) const = 0;
};

/// Draws uniformly inside the cell and evaluates the target there.
class TargetPulls final : public PullSource {
 public:
  explicit TargetPulls(const TargetDensity& target) : target_(&target) {}
  WeightedSample draw(const Arm& arm, std::size_t index, Rng& rng) const override;

 private:
  const TargetDensity* target_;
};

/// Arms whose localized weight is 2(a+1)/(K+1) * Bernoulli(p) for arm index
/// a = 0..K-1 on an equal partition of [0, 1]; no density is evaluated.
class SyntheticArms final : public PullSource {
 public:
  explicit SyntheticArms(std::size_t k = 100, double p = 0.01);
  WeightedSample draw(const Arm& arm, std::size_t index, Rng& rng) const override;

  std::size_t arm_count() const noexcept { return k_; }
  double success_probability() const noexcept { return p_; }
  double reward(std::size_t index) const;
  /// Equal cells on [0, 1] with a shared tau.
  std::vector<Arm> arms(double tau) const;
  /// Exact Z_a = 2(a+1)p/(K+1).
  OracleTable oracle() const;

 private:
  std::size_t k_;
  double p_;
};

struct DaiseeOptions {
  BoostSpec boost;
  /// When set, weights become (f/g)^alpha and the proposal takes the
  /// 1/alpha power; alpha = 1 reduces to the plain engine.
  std::optional<double> alpha;
  /// false freezes the proposal at uniform (plain stratified IS).
  bool adapt = true;
};

/// Partition-based adaptive importance sampler. Each arm is pulled once to
/// initialize, then arms are drawn from q_t and q is refreshed from the arm
/// estimates plus an optimism boost. Single-owner; not thread-safe.
class Daisee {
 public:
  Daisee(std::vector<Arm> arms, DaiseeOptions options, std::uint64_t seed);

  /// Draws one sample from each arm in index order; afterwards t() == K.
  std::vector<WeightedSample> initialize(const PullSource& source);
  /// One adaptive iteration: draw an arm from q, sample inside it, update its
  /// statistics, advance t and refresh q.
  WeightedSample step(const PullSource& source);

  bool initialized() const noexcept { return initialized_; }
  std::uint64_t t() const noexcept { return t_; }
  std::size_t arm_count() const noexcept { return arms_.size(); }
  std::span<const Arm> arms() const noexcept { return arms_; }
  std::span<const ArmState> states() const noexcept { return states_; }
  /// Proposal used for the next draw.
  std::span<const double> proposal() const noexcept { return q_; }
  const DaiseeOptions& options() const noexcept { return options_; }

  /// Boost values at the current t.
  std::vector<double> boosts() const;
  /// q rebuilt from the current statistics, boosts and t.
  std::vector<double> recompute_proposal() const;
  /// Inverse-CDF arm choice for a uniform variate u in [0, 1): the first arm
  /// with u <= cumulative mass, so ties go to the lower index. Arms with zero
  /// mass are skipped.
  std::size_t select_arm(double u) const;

 private:
  void record(std::size_t arm, const WeightedSample& sample);
  void refresh();

  std::vector<Arm> arms_;
  std::vector<ArmState> states_;
  std::vector<double> q_;
  DaiseeOptions options_;
  Rng rng_;
  std::uint64_t t_ = 0;
  bool initialized_ = false;
};

/// Initialization followed by iterations - K adaptive steps, one record per
/// draw. With an oracle, adaptive rows carry the KL regret of the proposal
/// that produced them (and the alpha regret in alpha mode); initialization
/// rows carry none.
std::vector<RunRecord> run_daisee(Daisee& engine, const PullSource& source, std::uint64_t iterations,
                                  const OracleTable* oracle = nullptr);

}  // namespace ais
