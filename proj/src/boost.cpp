#include "ais/boost.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ais/errors.hpp"

namespace ais {

double ucb_constant() {
  static const double c = std::sqrt(4.14 * std::log2(2.0 * std::numbers::e));
  return c;
}

std::string_view to_string(BoostForm form) {
  switch (form) {
    case BoostForm::ucb_sqrt: return "ucb_sqrt";
    case BoostForm::power: return "power";
    case BoostForm::log_over_n: return "log_over_n";
    case BoostForm::inverse_n: return "inverse_n";
    case BoostForm::none: return "none";
  }
  return "none";
}

BoostForm boost_form_from_string(std::string_view name) {
  for (auto form : {BoostForm::ucb_sqrt, BoostForm::power, BoostForm::log_over_n, BoostForm::inverse_n,
                    BoostForm::none}) {
    if (to_string(form) == name) return form;
  }
  throw ConfigError("unknown boost form '" + std::string(name) + "'");
}

void validate(const BoostSpec& spec) {
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) throw ConfigError("boost: scale must be positive");
  if (spec.form == BoostForm::power && !(spec.exponent > 0.0 && spec.exponent <= 1.0)) {
    throw ConfigError("boost: power exponent must lie in (0, 1]");
  }
}

double boost_from_log(const BoostSpec& spec, double tau, double log_t, std::uint64_t n) {
  if (n == 0) throw PreconditionError("boost: arm has not been pulled yet (n = 0)");
  const double ratio = log_t / static_cast<double>(n);
  switch (spec.form) {
    case BoostForm::ucb_sqrt: return spec.scale * ucb_constant() * tau * std::sqrt(ratio);
    case BoostForm::power: return spec.scale * std::pow(ratio, spec.exponent);
    case BoostForm::log_over_n: return spec.scale * ratio;
    case BoostForm::inverse_n: return spec.scale / static_cast<double>(n);
    case BoostForm::none: return 0.0;
  }
  return 0.0;
}

double boost(const BoostSpec& spec, double tau, std::uint64_t t, std::uint64_t n) {
  if (t == 0) throw PreconditionError("boost: iteration counter must be >= 1");
  return boost_from_log(spec, tau, std::log(static_cast<double>(t)), n);
}

std::vector<double> normalize_numerators(std::span<const double> numerators) {
  double total = 0.0;
  for (double v : numerators) total += v;
  if (!(total > 0.0)) {
    throw DegenerateProposalError(
        "proposal: every numerator is zero (all estimates vanish and no boost); use a nonzero boost");
  }
  std::vector<double> q(numerators.size());
  for (std::size_t a = 0; a < q.size(); ++a) q[a] = numerators[a] / total;
  return q;
}

std::vector<double> compute_proposal(std::span<const ArmState> states, std::span<const double> boosts) {
  if (states.size() != boosts.size()) throw PreconditionError("proposal: states/boosts size mismatch");
  std::vector<double> numerators(states.size());
  for (std::size_t a = 0; a < states.size(); ++a) numerators[a] = states[a].z_hat() + boosts[a];
  return normalize_numerators(numerators);
}

}  // namespace ais
