#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ais/errors.hpp"
#include "ais/geometry.hpp"
#include "ais/oracle.hpp"
#include "ais/targets.hpp"

namespace ais {

/// Raised when a self-normalized estimate has zero total weight.
class EstimatorError : public Error {
 public:
  using Error::Error;
};

/// One row of a run trace.
struct RunRecord {
  std::uint64_t t = 0;
  std::size_t arm = 0;  ///< arm index (Daisee) or leaf node id (HiDaisee)
  Point x;
  double y = 0.0;                 ///< localized weight of the draw
  double proposal_density = 0.0;  ///< q_t(x_t) of the mixture that produced x
  double z_hat_total = 0.0;       ///< running IS estimate of Z
  std::optional<double> instant_regret;
  std::optional<double> cum_regret;
  std::optional<double> alpha_regret;
  std::size_t partition_count = 0;
};

/// sum_a pi_a ln(pi_a / q_a) with 0 ln 0 = 0; +inf when q_a = 0 < pi_a.
double kl_regret(std::span<const double> pi, std::span<const double> q);

/// Half the L1 distance between two probability vectors.
double total_variation(std::span<const double> p, std::span<const double> q);

/// (sum w)^2 / sum w^2 over raw weights; 0 for an empty or all-zero range.
double effective_sample_size(std::span<const double> weights);

/// A draw from the mixture proposal with its density there.
struct ProposalDraw {
  Point x;
  double f_val = 0.0;
  double q_density = 0.0;
};

struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> fn;
};

struct IsEstimates {
  double z_hat = 0.0;
  std::map<std::string, double> expect;
};

/// Z ~ mean of w_t and E_pi[phi] ~ sum w phi / sum w, with w = f / q_t(x).
IsEstimates is_estimates(std::span<const ProposalDraw> draws, std::span<const TestFunction> functions = {});

/// integral over `cell` of pi log(pi / g) with pi = f / z and g uniform on
/// the cell.
double within_cell_kl(const TargetDensity& target, const Rectangle& cell, double z, double tol = 0.0);

/// Full KL(pi || q) for the mixture of uniform cells with masses q:
///   sum_a integral_a pi log(pi / g_a) - sum_a pi_a log q_a.
/// +inf if some q_a = 0 < pi_a.
double full_kl(const TargetDensity& target, std::span<const Rectangle> partition, std::span<const double> q,
               const OracleTable& oracle, double tol = 0.0);

/// Running cumulative regret; accumulation starts with the first recorded
/// adaptive iteration.
class RegretAccumulator {
 public:
  double add(double instant) {
    total_ += instant;
    return total_;
  }
  double total() const noexcept { return total_; }

 private:
  double total_ = 0.0;
};

}  // namespace ais
