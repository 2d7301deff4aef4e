#pragma once

#include <memory>

#include "pushgne/scenarios.hpp"

namespace testing_helpers {

inline Eigen::VectorXd s(double v) { return Eigen::VectorXd::Constant(1, v); }

/// Electricity market whose coefficient ranges are collapsed to points.
inline std::shared_ptr<const pushgne::ElectricityMarket> pinned_market(std::size_t n, double b, double c, double r,
                                                                       double u, double v) {
  pushgne::MarketParams p;
  p.a = {5, 5};
  p.b = {b, b};
  p.c = {c, c};
  p.r = {r, r};
  p.u = {u, u};
  p.v = {v, v};
  return pushgne::make_electricity_market(n, 1, p);
}

/// Scalar custom game with f_i = w (x - c_i)^2 + k sigma x, psi = id,
/// g_i = x - cap / N.
struct ScalarGame {
  std::vector<double> targets;
  double weight = 1.0;
  double coupling = 0.0;
  double lo = -100, hi = 100;
  double cap = 1e6;
  bool constraint_free = false;  // g == -1
  pushgne::DeclaredConstants constants;

  std::shared_ptr<const pushgne::GameModel> build() const {
    using Eigen::VectorXd;
    pushgne::CustomGameSpec spec;
    const auto self = *this;
    const double n = static_cast<double>(targets.size());
    spec.players = targets.size();
    spec.constants = constants;
    spec.sets = {pushgne::LocalSet::interval(lo, hi)};
    spec.cost = [self](std::size_t i, std::size_t, const VectorXd& x, const VectorXd& sg) {
      return self.weight * (x(0) - self.targets[i]) * (x(0) - self.targets[i]) + self.coupling * sg(0) * x(0);
    };
    spec.grad_own = [self](std::size_t i, std::size_t, const VectorXd& x, const VectorXd& sg) {
      return s(2 * self.weight * (x(0) - self.targets[i]) + self.coupling * sg(0));
    };
    spec.grad_aggregate = [self](std::size_t, std::size_t, const VectorXd& x, const VectorXd&) {
      return s(self.coupling * x(0));
    };
    spec.contribution = [](std::size_t, const VectorXd& x) { return VectorXd(x); };
    spec.contribution_jacobian = [](std::size_t, const VectorXd&) { return Eigen::MatrixXd::Identity(1, 1); };
    spec.constraint = [self, n](std::size_t, std::size_t, const VectorXd& x) {
      return self.constraint_free ? s(-1.0) : s(x(0) - self.cap / n);
    };
    spec.constraint_jacobian = [self](std::size_t, std::size_t, const VectorXd&) {
      return Eigen::MatrixXd::Constant(1, 1, self.constraint_free ? 0.0 : 1.0);
    };
    return std::make_shared<pushgne::CustomGame>(spec);
  }
};

}  // namespace testing_helpers
