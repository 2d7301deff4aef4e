#include "pushgne/stepsize.hpp"

#include <cmath>
#include <sstream>

namespace pushgne {

namespace {

double power_step(std::size_t t, double a) {
  if (t == 0) return 1.0;
  return std::pow(static_cast<double>(t), -a);
}

double held(const std::vector<double>& seq, std::size_t t) {
  return t < seq.size() ? seq[t] : seq.back();
}

void check_sequence(const std::vector<double>& seq, const char* name) {
  if (seq.empty()) throw PreconditionError(std::string(name) + " sequence is empty");
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (!(seq[t] > 0.0 && seq[t] <= 1.0))
      throw PreconditionError(std::string(name) + " step " + std::to_string(t) + " outside (0, 1]");
    if (t > 0 && seq[t] > seq[t - 1])
      throw PreconditionError(std::string(name) + " sequence increases at step " + std::to_string(t));
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace

StepsizeSchedule::StepsizeSchedule(PowerLaw exponents) : exponents_(exponents) {
  if (!(exponents.a1 >= 0 && exponents.a2 >= 0 && exponents.a3 >= 0))
    throw PreconditionError("power-law exponents must be nonnegative");
}

StepsizeSchedule::StepsizeSchedule(std::vector<double> alpha, std::vector<double> beta,
                                   std::vector<double> gamma)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), gamma_(std::move(gamma)) {
  check_sequence(alpha_, "alpha");
  check_sequence(beta_, "beta");
  check_sequence(gamma_, "gamma");
}

double StepsizeSchedule::alpha(std::size_t t) const {
  return exponents_ ? power_step(t, exponents_->a1) : held(alpha_, t);
}
double StepsizeSchedule::beta(std::size_t t) const {
  return exponents_ ? power_step(t, exponents_->a2) : held(beta_, t);
}
double StepsizeSchedule::gamma(std::size_t t) const {
  return exponents_ ? power_step(t, exponents_->a3) : held(gamma_, t);
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::kOnline: return "online";
    case Regime::kOfflineAsymptotic: return "offline-asymptotic";
    case Regime::kOfflineRate: return "offline-rate";
  }
  return "?";
}

Regime parse_regime(const std::string& s) {
  if (s == "online" || s == "online-T1") return Regime::kOnline;
  if (s == "offline-asymptotic" || s == "offline-T2") return Regime::kOfflineAsymptotic;
  if (s == "offline-rate" || s == "offline-T3") return Regime::kOfflineRate;
  throw ConfigError("unknown regime '" + s + "'");
}

ValidationReport validate_regime(const StepsizeSchedule& schedule, Regime regime) {
  ValidationReport report;
  const std::string name = to_string(regime);
  report.subject = "stepsize regime '" + name + "'";
  if (!schedule.power_law()) {
    report.add("power-law", false, "explicit sequences are accepted but not regime-checked");
    return report;
  }
  const auto [a1, a2, a3] = *schedule.exponents();
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    report.add(name, ok, detail);
  };

  switch (regime) {
    case Regime::kOnline:
    case Regime::kOfflineRate:
      check("0 < a1 < 1", a1 > 0 && a1 < 1, "a1 = " + fmt(a1));
      check("0 < a3 < 1", a3 > 0 && a3 < 1, "a3 = " + fmt(a3));
      check("a1 > 2 a2 > 0", a1 > 2 * a2 && a2 > 0, fmt(a1) + " vs " + fmt(2 * a2));
      check("2 a2 + a3 < 1", 2 * a2 + a3 < 1, "2 a2 + a3 = " + fmt(2 * a2 + a3));
      break;
    case Regime::kOfflineAsymptotic:
      // alpha == gamma, plus the p-series conditions: sum alpha = inf,
      // sum alpha^2, alpha^2/beta^2, alpha*beta, alpha^2/beta < inf.
      check("a1 == a3", std::abs(a1 - a3) <= 1e-12, fmt(a1) + " vs " + fmt(a3));
      check("a1 <= 1", a1 <= 1, "a1 = " + fmt(a1));
      check("2 a1 > 1", 2 * a1 > 1, "2 a1 = " + fmt(2 * a1));
      check("2 (a1 - a2) > 1", 2 * (a1 - a2) > 1, "2 (a1 - a2) = " + fmt(2 * (a1 - a2)));
      check("a1 + a2 > 1", a1 + a2 > 1, "a1 + a2 = " + fmt(a1 + a2));
      check("2 a1 - a2 > 1", 2 * a1 - a2 > 1, "2 a1 - a2 = " + fmt(2 * a1 - a2));
      break;
  }
  return report;
}

}  // namespace pushgne
