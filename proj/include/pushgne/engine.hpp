#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pushgne/game.hpp"
#include "pushgne/graph.hpp"
#include "pushgne/log.hpp"
#include "pushgne/stepsize.hpp"

namespace pushgne {

struct PlayerState {
  Eigen::VectorXd x;      // decision, always in X_i
  double z = 1.0;         // push-sum weight
  Eigen::VectorXd mu;     // local multiplier, componentwise >= 0
  Eigen::VectorXd sigma;  // aggregate tracker
};

struct RunState {
  std::size_t t = 0;
  std::vector<PlayerState> players;
  MixConstants mix;

  // Quantities formed during the most recent step.
  Eigen::VectorXd z_next;     // N
  Eigen::MatrixXd mu_hat;     // N x m
  Eigen::MatrixXd sigma_hat;  // N x n

  JointDecision decisions() const;
};

/// z = 1, mu = 0, sigma_i = psi_i(x_i). `x0` defaults to the projected
/// center of every local set. Throws DomainError for an infeasible x0.
RunState init(const GameModel& model, const std::optional<JointDecision>& x0 = std::nullopt);

struct StepSizes {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
};

/// Per-step side outputs consumed by the run log.
struct StepTrace {
  Eigen::VectorXd constraint_total;  // g_t(x_t), m
  Eigen::VectorXd noise;             // q - p stacked, total_dim
};

/// One synchronous round: weight mix, dual/tracker mix, search direction,
/// projected primal step, regularized dual step, tracker update. Every
/// player reads only pre-step values. Throws DivergedRun on NaN/Inf.
RunState step(RunState state, const WeightMatrix& w, StepSizes steps, const GameModel& model,
              const NoiseSource& noise, StepTrace* trace = nullptr);

RunState step(RunState state, const WeightMatrix& w, const StepsizeSchedule& schedule,
              const GameModel& model, const NoiseSource& noise, StepTrace* trace = nullptr);

enum class MonitorMode { kRecord, kStrict };

struct RunOptions {
  std::size_t horizon = 1000;  // T
  std::uint64_t seed = 0;      // noise stream seed
  MonitorMode monitors = MonitorMode::kRecord;
  std::optional<JointDecision> x0;
  /// When set, the schedule must satisfy this regime before the run starts.
  std::optional<Regime> regime;
  /// From this step on alpha and gamma are forced to 0, freezing decisions
  /// and multipliers so only mixing acts. Used to probe consensus decay.
  std::optional<std::size_t> freeze_after;
  std::string config_hash;
};

struct RunResult {
  RunState final_state;
  MetricsLog log;
};

/// Executes T steps. Throws PreconditionError for T < 4, an invalid graph
/// schedule or a regime mismatch; DivergedRun on NaN/Inf; MonitorViolation
/// in strict mode.
RunResult run(const GameModel& model, const GraphSchedule& graphs, const StepsizeSchedule& schedule,
              const RunOptions& options);

}  // namespace pushgne
