#pragma once

#include <span>
#include <vector>

#include "ais/oracle.hpp"
#include "ais/partition.hpp"

namespace ais {

/// Throws ConfigError unless alpha lies in (0, 2].
void validate_alpha(double alpha);

/// (f_val / g_density)^alpha. alpha = 1 returns the plain localized weight.
double alpha_weight(double f_val, double g_density, double alpha);

/// q_a proportional to (z_hat_a + boost_a)^(1/alpha). alpha = 1 is exactly
/// compute_proposal.
std::vector<double> alpha_proposal(std::span<const ArmState> states, std::span<const double> boosts, double alpha);

/// Optimal cell masses q*_a proportional to (pi_a^(alpha))^(1/alpha).
std::vector<double> alpha_optimal_proposal(std::span<const double> alpha_masses, double alpha);

/// alpha-divergence loss D_alpha(pi || q) of the mixture with cell masses q,
///   (sum_a q_a^(1-alpha) pi_a^(alpha) - 1) / (alpha (alpha - 1)),
/// given pi_a^(alpha) from the oracle. alpha != 1.
double alpha_loss(std::span<const double> q, std::span<const double> alpha_masses, double alpha);

/// Regret of q against the best mixture in its class:
///   (sum_a q_a^(1-alpha) Z_a - (sum_a Z_a^(1/alpha))^alpha) / (alpha (alpha - 1) Z)
/// with Z_a = Z pi_a^(alpha). Returns +inf if some q_a = 0 while alpha > 1.
double alpha_regret(std::span<const double> q, const OracleTable& oracle, double alpha);

}  // namespace ais
