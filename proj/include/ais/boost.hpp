#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ais/partition.hpp"

namespace ais {

/// Optimism boost families.
///   ucb_sqrt    scale * c * tau * sqrt(ln t / n)
///   power       scale * (ln t / n)^exponent
///   log_over_n  scale * ln t / n
///   inverse_n   scale / n
///   none        0
enum class BoostForm { ucb_sqrt, power, log_over_n, inverse_n, none };

struct BoostSpec {
  BoostForm form = BoostForm::ucb_sqrt;
  double scale = 1.0;
  double exponent = 0.5;  ///< used by BoostForm::power, must lie in (0, 1]

  bool operator==(const BoostSpec&) const = default;
};

/// c = sqrt(4.14 * log2(2e)).
double ucb_constant();

std::string_view to_string(BoostForm form);
BoostForm boost_form_from_string(std::string_view name);

/// Throws ConfigError on a nonpositive scale or an exponent outside (0, 1].
void validate(const BoostSpec& spec);

/// Boost for an arm pulled n >= 1 times after t >= 1 draws (natural log).
double boost(const BoostSpec& spec, double tau, std::uint64_t t, std::uint64_t n);

/// Same with ln t supplied directly.
double boost_from_log(const BoostSpec& spec, double tau, double log_t, std::uint64_t n);

/// q_a = (z_hat_a + boost_a) / sum_b (z_hat_b + boost_b). Every state must
/// have n >= 1. Throws DegenerateProposalError when all numerators vanish.
std::vector<double> compute_proposal(std::span<const ArmState> states, std::span<const double> boosts);

/// Normalizes nonnegative numerators into a probability vector.
std::vector<double> normalize_numerators(std::span<const double> numerators);

}  // namespace ais
