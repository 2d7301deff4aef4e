#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pushgne/errors.hpp"

namespace pushgne {

/// Exponents of the power-law schedule alpha_t = t^-a1, beta_t = t^-a2,
/// gamma_t = t^-a3 (t >= 1), with all three equal to 1 at t = 0.
struct PowerLaw {
  double a1 = 0.8;
  double a2 = 0.2;
  double a3 = 0.2;
};

/// Primal (alpha), regularization (beta) and dual (gamma) step sequences.
class StepsizeSchedule {
 public:
  explicit StepsizeSchedule(PowerLaw exponents);
  /// Explicit sequences; the last entry is held past the end. Throws
  /// PreconditionError unless every entry is in (0, 1] and nonincreasing.
  StepsizeSchedule(std::vector<double> alpha, std::vector<double> beta, std::vector<double> gamma);

  double alpha(std::size_t t) const;
  double beta(std::size_t t) const;
  double gamma(std::size_t t) const;

  bool power_law() const noexcept { return exponents_.has_value(); }
  const std::optional<PowerLaw>& exponents() const noexcept { return exponents_; }

 private:
  std::optional<PowerLaw> exponents_;
  std::vector<double> alpha_, beta_, gamma_;
};

enum class Regime {
  kOnline,             // sublinear regret and violation
  kOfflineAsymptotic,  // almost-sure convergence, alpha == gamma
  kOfflineRate,        // averaged-iterate rate
};

std::string to_string(Regime r);
/// Accepts "online", "offline-asymptotic", "offline-rate" and the short tags
/// "online-T1", "offline-T2", "offline-T3". Throws ConfigError.
Regime parse_regime(const std::string& s);

ValidationReport validate_regime(const StepsizeSchedule& schedule, Regime regime);

}  // namespace pushgne
