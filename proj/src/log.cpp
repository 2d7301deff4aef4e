#include "pushgne/log.hpp"

#include <cstring>

namespace pushgne {

std::string monitor_name(Monitor m) {
  switch (m) {
    case Monitor::kWeightLower: return "weight-lower";
    case Monitor::kWeightUpper: return "weight-upper";
    case Monitor::kDualBound: return "dual-bound";
    case Monitor::kDualMixBound: return "dual-mix-bound";
    case Monitor::kWeightMass: return "weight-mass";
    case Monitor::kTrackingMass: return "tracking-mass";
  }
  return "?";
}

MetricsLog MetricsLog::for_model(const GameModel& model) {
  MetricsLog log;
  log.players = model.players();
  log.aggregate_dim = model.aggregate_dim();
  log.constraint_dim = model.constraint_dim();
  for (std::size_t i = 0; i < log.players; ++i) {
    log.offsets.push_back(log.total_dim);
    log.dims.push_back(model.dim(i));
    log.total_dim += model.dim(i);
  }
  return log;
}

void MetricsLog::reserve(std::size_t horizon) {
  decisions.reserve((horizon + 1) * total_dim);
  constraint_totals.reserve((horizon + 1) * constraint_dim);
  z_next.reserve(horizon * players);
  mu.reserve(horizon * players * constraint_dim);
  mu_hat.reserve(horizon * players * constraint_dim);
  sigma.reserve(horizon * players * aggregate_dim);
  sigma_hat.reserve(horizon * players * aggregate_dim);
  noise.reserve(horizon * total_dim);
  alpha.reserve(horizon);
  beta.reserve(horizon);
  gamma.reserve(horizon);
  r_estimate.reserve(horizon);
  monitor_flags.reserve(horizon);
}

namespace {
using CMap = Eigen::Map<const Eigen::VectorXd>;
CMap view(const std::vector<double>& v, std::size_t off, std::size_t len) {
  return CMap(v.data() + off, static_cast<Eigen::Index>(len));
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}
}  // namespace

Eigen::Map<const Eigen::VectorXd> MetricsLog::x(std::size_t t, std::size_t i) const {
  return view(decisions, t * total_dim + offsets[i], dims[i]);
}

JointDecision MetricsLog::decision(std::size_t t) const {
  JointDecision out;
  out.reserve(players);
  for (std::size_t i = 0; i < players; ++i) out.emplace_back(x(t, i));
  return out;
}

Eigen::Map<const Eigen::VectorXd> MetricsLog::g(std::size_t t) const {
  return view(constraint_totals, t * constraint_dim, constraint_dim);
}

Eigen::Map<const Eigen::VectorXd> MetricsLog::mu_at(std::size_t t, std::size_t i) const {
  return view(mu, (t * players + i) * constraint_dim, constraint_dim);
}
Eigen::Map<const Eigen::VectorXd> MetricsLog::mu_hat_at(std::size_t t, std::size_t i) const {
  return view(mu_hat, (t * players + i) * constraint_dim, constraint_dim);
}
Eigen::Map<const Eigen::VectorXd> MetricsLog::sigma_at(std::size_t t, std::size_t i) const {
  return view(sigma, (t * players + i) * aggregate_dim, aggregate_dim);
}
Eigen::Map<const Eigen::VectorXd> MetricsLog::sigma_hat_at(std::size_t t, std::size_t i) const {
  return view(sigma_hat, (t * players + i) * aggregate_dim, aggregate_dim);
}
Eigen::Map<const Eigen::VectorXd> MetricsLog::noise_at(std::size_t t, std::size_t i) const {
  return view(noise, t * total_dim + offsets[i], dims[i]);
}

bool MetricsLog::identical(const MetricsLog& o) const {
  return players == o.players && steps == o.steps && seed == o.seed && same_bits(decisions, o.decisions) &&
         same_bits(constraint_totals, o.constraint_totals) && same_bits(z_next, o.z_next) &&
         same_bits(mu, o.mu) && same_bits(mu_hat, o.mu_hat) && same_bits(sigma, o.sigma) &&
         same_bits(sigma_hat, o.sigma_hat) && same_bits(noise, o.noise) && same_bits(alpha, o.alpha) &&
         same_bits(beta, o.beta) && same_bits(gamma, o.gamma) && same_bits(r_estimate, o.r_estimate) &&
         monitor_flags == o.monitor_flags;
}

}  // namespace pushgne
