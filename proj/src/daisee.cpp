#include "ais/daisee.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "ais/alpha.hpp"
#include "ais/errors.hpp"

namespace ais {

WeightedSample TargetPulls::draw(const Arm& arm, std::size_t index, Rng& rng) const {
  WeightedSample s;
  s.x = arm.cell.sample_uniform(rng);
  s.f_val = (*target_)(s.x);
  if (!std::isfinite(s.f_val) || s.f_val < 0.0) {
    std::ostringstream msg;
    msg << "target '" << target_->family() << "' returned " << s.f_val << " at x = (";
    for (std::size_t d = 0; d < s.x.size(); ++d) msg << (d ? ", " : "") << s.x[d];
    msg << ")";
    throw SamplingError(msg.str());
  }
  if (const auto sup = target_->sup_bound(); sup && s.f_val > *sup * (1.0 + 1e-12)) {
    throw SamplingError("target '" + target_->family() + "' exceeded its declared sup_bound");
  }
  s.y = s.f_val / arm.g_density;
  s.arm = index;
  return s;
}

SyntheticArms::SyntheticArms(std::size_t k, double p) : k_(k), p_(p) {
  if (k == 0) throw ConfigError("synthetic arms: need at least one arm");
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("synthetic arms: p must lie in (0, 1]");
}

double SyntheticArms::reward(std::size_t index) const {
  return 2.0 * static_cast<double>(index + 1) / static_cast<double>(k_ + 1);
}

WeightedSample SyntheticArms::draw(const Arm& arm, std::size_t index, Rng& rng) const {
  WeightedSample s;
  s.x = arm.cell.sample_uniform(rng);
  s.y = rng.uniform() < p_ ? reward(index) : 0.0;
  s.f_val = s.y * arm.g_density;
  s.arm = index;
  return s;
}

std::vector<Arm> SyntheticArms::arms(double tau) const {
  return make_equal_partition(Rectangle::interval(0.0, 1.0), k_, TauShared{tau});
}

OracleTable SyntheticArms::oracle() const {
  std::vector<double> z(k_);
  for (std::size_t a = 0; a < k_; ++a) z[a] = reward(a) * p_;
  return oracle_from_masses(equal_cells(Rectangle::interval(0.0, 1.0), k_), std::move(z));
}

Daisee::Daisee(std::vector<Arm> arms, DaiseeOptions options, std::uint64_t seed)
    : arms_(std::move(arms)), states_(arms_.size()), options_(options), rng_(seed) {
  if (arms_.empty()) throw ConfigError("daisee: need at least one arm");
  validate(options_.boost);
  if (options_.alpha) validate_alpha(*options_.alpha);
  q_.assign(arms_.size(), 1.0 / static_cast<double>(arms_.size()));
}

std::vector<WeightedSample> Daisee::initialize(const PullSource& source) {
  if (initialized_) throw PreconditionError("daisee: already initialized");
  std::vector<WeightedSample> draws;
  draws.reserve(arms_.size());
  for (std::size_t a = 0; a < arms_.size(); ++a) {
    auto s = source.draw(arms_[a], a, rng_);
    ++t_;
    s.t = t_;
    record(a, s);
    draws.push_back(std::move(s));
  }
  initialized_ = true;
  refresh();
  return draws;
}

WeightedSample Daisee::step(const PullSource& source) {
  if (!initialized_) throw PreconditionError("daisee: step() before initialize()");
  const std::size_t a = select_arm(rng_.uniform());
  auto s = source.draw(arms_[a], a, rng_);
  ++t_;
  s.t = t_;
  record(a, s);
  refresh();
  return s;
}

void Daisee::record(std::size_t arm, const WeightedSample& sample) {
  const double y = options_.alpha ? alpha_weight(sample.f_val, arms_[arm].g_density, *options_.alpha)
                                  : sample.f_val / arms_[arm].g_density;
  states_[arm] = record_pull(states_[arm], y, arm, t_);
}

std::vector<double> Daisee::boosts() const {
  std::vector<double> b(arms_.size());
  for (std::size_t a = 0; a < arms_.size(); ++a) b[a] = boost(options_.boost, arms_[a].tau, t_, states_[a].n());
  return b;
}

std::vector<double> Daisee::recompute_proposal() const {
  if (arms_.size() == 1) return {1.0};
  if (!options_.adapt) return std::vector<double>(arms_.size(), 1.0 / static_cast<double>(arms_.size()));
  const auto b = boosts();
  return options_.alpha ? alpha_proposal(states_, b, *options_.alpha) : compute_proposal(states_, b);
}

void Daisee::refresh() {
  try {
    q_ = recompute_proposal();
  } catch (const DegenerateProposalError&) {
    // Without a boost every estimate can still be zero; keep drawing from the
    // previous proposal until some arm sees mass.
    if (options_.boost.form != BoostForm::none) throw;
  }
}

std::size_t Daisee::select_arm(double u) const {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < q_.size(); ++a) {
    if (q_[a] <= 0.0) continue;
    cumulative += q_[a];
    last_positive = a;
    if (u <= cumulative) return a;
  }
  return last_positive;
}

std::vector<RunRecord> run_daisee(Daisee& engine, const PullSource& source, std::uint64_t iterations,
                                  const OracleTable* oracle) {
  const std::size_t k = engine.arm_count();
  if (iterations < k) {
    throw ConfigError("daisee: T = " + std::to_string(iterations) + " is smaller than K = " + std::to_string(k));
  }
  if (oracle && oracle->pi_a.size() != k) throw PreconditionError("daisee: oracle does not match the partition");
  const auto& alpha = engine.options().alpha;
  const bool alpha_regret_on = oracle && alpha && *alpha != 1.0 && oracle->alpha_masses;

  std::vector<RunRecord> trace;
  trace.reserve(iterations);
  double weight_sum = 0.0;
  RegretAccumulator cumulative;

  auto push = [&](const WeightedSample& s, double q_mass) {
    RunRecord r;
    r.t = s.t;
    r.arm = s.arm;
    r.x = s.x;
    r.y = s.y;
    r.proposal_density = q_mass * engine.arms()[s.arm].g_density;
    weight_sum += s.f_val / r.proposal_density;
    r.z_hat_total = weight_sum / static_cast<double>(s.t);
    r.partition_count = k;
    trace.push_back(std::move(r));
  };

  // The initialization sweep is one stratified draw per cell, equivalent in
  // expectation to a uniform mixture over the cells.
  for (const auto& s : engine.initialize(source)) push(s, 1.0 / static_cast<double>(k));

  for (std::uint64_t i = k; i < iterations; ++i) {
    const std::vector<double> q(engine.proposal().begin(), engine.proposal().end());
    const auto s = engine.step(source);
    push(s, q[s.arm]);
    if (oracle) {
      auto& r = trace.back();
      r.instant_regret = kl_regret(oracle->pi_a, q);
      r.cum_regret = cumulative.add(*r.instant_regret);
      if (alpha_regret_on) r.alpha_regret = alpha_regret(q, *oracle, *alpha);
    }
  }
  return trace;
}

}  // namespace ais
