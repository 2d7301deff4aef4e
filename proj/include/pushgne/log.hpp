#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pushgne/game.hpp"

namespace pushgne {

/// Runtime bound monitors evaluated on every step.
enum class Monitor : std::uint8_t {
  kWeightLower = 0,   // z_{i,t+1} >= r
  kWeightUpper = 1,   // z_{i,t+1} <= N
  kDualBound = 2,     // ||mu_{i,t}|| <= z_{i,t+1} L / (beta_t r^2 w_min)
  kDualMixBound = 3,  // ||mu_hat_{i,t}|| <= z_{i,t+1} L / (beta_t r^2)
  kWeightMass = 4,    // sum_i z_{i,t+1} = N
  kTrackingMass = 5,  // sum_i sigma_{i,t+1} = sum_i psi_i(x_{i,t+1})
};
inline constexpr std::size_t kMonitorCount = 6;

std::string monitor_name(Monitor m);

struct MonitorSummary {
  std::array<std::size_t, kMonitorCount> violations{};
  std::array<std::optional<std::size_t>, kMonitorCount> first_step{};
  /// Dual-bound monitors need a declared L; false when it was missing.
  bool dual_bounds_evaluated = true;
  double worst_weight_mass = 0.0;    // relative
  double worst_tracking_mass = 0.0;  // relative

  std::size_t total() const {
    std::size_t s = 0;
    for (auto v : violations) s += v;
    return s;
  }
};

/// Everything a run recorded. Transition t (0 <= t < T) stores the pre-step
/// state (x_t, mu_t, sigma_t), the mixed quantities (z_{t+1}, mu_hat_t,
/// sigma_hat_t), the oracle noise q - p, and the steps used. Decisions and
/// coupled-constraint totals are stored for t = 0..T.
struct MetricsLog {
  std::size_t players = 0;
  std::size_t aggregate_dim = 0;
  std::size_t constraint_dim = 0;
  std::vector<std::size_t> dims;
  std::vector<std::size_t> offsets;
  std::size_t total_dim = 0;
  std::size_t steps = 0;

  std::uint64_t seed = 0;
  std::string config_hash;
  double min_weight = 0.0;

  std::vector<double> decisions;          // (T+1) x total_dim
  std::vector<double> constraint_totals;  // (T+1) x m, g_t(x_t)
  std::vector<double> z_next;             // T x N
  std::vector<double> mu;                 // T x N x m
  std::vector<double> mu_hat;             // T x N x m
  std::vector<double> sigma;              // T x N x n
  std::vector<double> sigma_hat;          // T x N x n
  std::vector<double> noise;              // T x total_dim, q - p
  std::vector<double> alpha, beta, gamma;  // T
  std::vector<double> r_estimate;          // T, after mixing with W_t
  std::vector<std::uint8_t> monitor_flags; // T, bit k set = Monitor k violated
  MonitorSummary monitors;

  static MetricsLog for_model(const GameModel& model);
  void reserve(std::size_t horizon);

  Eigen::Map<const Eigen::VectorXd> x(std::size_t t, std::size_t i) const;
  JointDecision decision(std::size_t t) const;
  Eigen::Map<const Eigen::VectorXd> g(std::size_t t) const;
  Eigen::Map<const Eigen::VectorXd> mu_at(std::size_t t, std::size_t i) const;
  Eigen::Map<const Eigen::VectorXd> mu_hat_at(std::size_t t, std::size_t i) const;
  Eigen::Map<const Eigen::VectorXd> sigma_at(std::size_t t, std::size_t i) const;
  Eigen::Map<const Eigen::VectorXd> sigma_hat_at(std::size_t t, std::size_t i) const;
  Eigen::Map<const Eigen::VectorXd> noise_at(std::size_t t, std::size_t i) const;
  double z_next_at(std::size_t t, std::size_t i) const { return z_next[t * players + i]; }

  /// Bitwise equality of every recorded series.
  bool identical(const MetricsLog& other) const;
};

}  // namespace pushgne
