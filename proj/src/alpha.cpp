#include "ais/alpha.hpp"

#include <cmath>
#include <limits>

#include "ais/boost.hpp"
#include "ais/errors.hpp"

namespace ais {

void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("alpha must lie in (0, 2]");
}

double alpha_weight(double f_val, double g_density, double alpha) {
  if (alpha == 1.0) return f_val / g_density;
  if (!(alpha > 0.0)) throw PreconditionError("alpha_weight: alpha must be positive");
  return std::pow(f_val / g_density, alpha);
}

std::vector<double> alpha_proposal(std::span<const ArmState> states, std::span<const double> boosts, double alpha) {
  if (alpha == 1.0) return compute_proposal(states, boosts);
  if (states.size() != boosts.size()) throw PreconditionError("alpha_proposal: states/boosts size mismatch");
  std::vector<double> numerators(states.size());
  const double inv = 1.0 / alpha;
  for (std::size_t a = 0; a < states.size(); ++a) {
    numerators[a] = std::pow(states[a].z_hat() + boosts[a], inv);
  }
  return normalize_numerators(numerators);
}

std::vector<double> alpha_optimal_proposal(std::span<const double> alpha_masses, double alpha) {
  std::vector<double> numerators(alpha_masses.size());
  for (std::size_t a = 0; a < numerators.size(); ++a) numerators[a] = std::pow(alpha_masses[a], 1.0 / alpha);
  return normalize_numerators(numerators);
}

double alpha_loss(std::span<const double> q, std::span<const double> alpha_masses, double alpha) {
  if (alpha == 1.0) throw PreconditionError("alpha_loss: alpha = 1 is the KL case");
  if (q.size() != alpha_masses.size()) throw PreconditionError("alpha_loss: size mismatch");
  double acc = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (alpha_masses[a] == 0.0) continue;
    if (q[a] <= 0.0 && alpha > 1.0) return std::numeric_limits<double>::infinity();
    acc += std::pow(q[a], 1.0 - alpha) * alpha_masses[a];
  }
  return (acc - 1.0) / (alpha * (alpha - 1.0));
}

double alpha_regret(std::span<const double> q, const OracleTable& oracle, double alpha) {
  if (alpha == 1.0) throw PreconditionError("alpha_regret: use kl_regret for alpha = 1");
  if (!oracle.alpha_masses || !oracle.alpha || *oracle.alpha != alpha) {
    throw PreconditionError("alpha_regret: oracle table lacks alpha masses for this alpha");
  }
  const auto& masses = *oracle.alpha_masses;
  if (q.size() != masses.size()) throw PreconditionError("alpha_regret: size mismatch");
  double loss_term = 0.0;
  double root_sum = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) {
    const double z_a = oracle.z * masses[a];
    if (z_a == 0.0) continue;
    root_sum += std::pow(z_a, 1.0 / alpha);
    if (q[a] <= 0.0) {
      if (alpha > 1.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    loss_term += std::pow(q[a], 1.0 - alpha) * z_a;
  }
  return (loss_term - std::pow(root_sum, alpha)) / (alpha * (alpha - 1.0) * oracle.z);
}

}  // namespace ais
