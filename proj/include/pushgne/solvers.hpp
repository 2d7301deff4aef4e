#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pushgne/game.hpp"
#include "pushgne/log.hpp"

namespace pushgne {

// ---------------------------------------------------------------------------
// Variational GNE of a time-invariant game

struct KktResidual {
  double primal = 0.0;           // || x - P_X[x - (G(x) + grad g(x) mu)] ||
  double dual = 0.0;             // || mu - [mu + g(x)]_+ ||
  double complementarity = 0.0;  // |<mu, g(x)>|
  double max_violation = 0.0;    // max_k g_k(x), clipped at 0
  double total() const { return std::hypot(primal, dual); }
};

/// Natural-map KKT residual at (x, mu) with unit probe step.
KktResidual kkt_residual(const GameModel& model, const JointDecision& x, const Eigen::VectorXd& mu,
                         std::size_t t = 0);

struct GridVgne {
  JointDecision x;
  Eigen::VectorXd mu;
  double resolution = 0.0;
  double merit = 0.0;
  std::size_t evaluations = 0;
};

/// Brute-force vGNE for scalar-decision games with box sets and at most one
/// coupled constraint. For a fixed multiplier, the penalized Nash point is
/// located by Gauss-Seidel sweeps in which every best response is a 1-D
/// grid search refined down to `resolution`; the multiplier is then found by
/// bisection on the total constraint. `merit` is the squared natural
/// residual at the result. Throws PreconditionError outside that class and
/// SolverError when the sweeps do not settle.
GridVgne grid_refine_vgne(const GameModel& model, double resolution = 2e-5, std::size_t points_per_axis = 11,
                          std::size_t t = 0);

struct VgneOptions {
  double tol = 1e-10;            // on KktResidual::total()
  std::size_t max_iters = 500000;
  double step_scale = 1.0;       // multiplies the initial extragradient step
  bool grid_cross_check = true;  // scalar decisions, N <= 6, m <= 1
  double grid_resolution = 2e-5;
  double grid_agreement = 1e-4;  // per coordinate
};

struct VgneSolution {
  JointDecision x_star;
  Eigen::VectorXd mu_star;
  KktResidual residual;
  std::string method;
  std::size_t iterations = 0;
  double tol = 0.0;
  std::vector<double> residual_trace;  // KKT residual total, one entry per iteration
  // ||z_{k+1} - z_k|| / eta_k per iteration. Unlike the KKT total this is
  // non-increasing once the step size has settled.
  std::vector<double> step_trace;
  std::optional<GridVgne> grid;
  double grid_max_gap = 0.0;
  bool grid_agrees = true;
};

/// Centralized projected extragradient on the KKT operator
/// (x, mu) -> (G(x) + grad g(x) mu, -g(x)) over X x R^m_+, with exact
/// gradients and a backtracked constant step. Throws SolverError (with the
/// residual trace) on non-convergence and PreconditionError for
/// time-varying models.
VgneSolution solve_vgne(const GameModel& model, const VgneOptions& options = {});

// ---------------------------------------------------------------------------
// Static comparator in hindsight

/// What player i needs from the others' trajectory for t = 1..T: their
/// constraint sum and aggregate share at each step.
struct ComparatorInputs {
  std::size_t player = 0;
  std::size_t horizon = 0;
  std::vector<double> others_constraint;  // T x m, row t-1
  std::vector<double> others_aggregate;   // T x n, row t-1
  std::vector<double> own_cost;           // T, f_{i,t}(x_{i,t}, sigma(x_t))
};

ComparatorInputs comparator_inputs(const GameModel& model, const MetricsLog& log, std::size_t i,
                                   std::size_t horizon);
/// `trajectory[k]` is the joint decision at t = k + 1.
ComparatorInputs comparator_inputs(const GameModel& model, const std::vector<JointDecision>& trajectory,
                                   std::size_t i);

struct FeasibleInterval {
  std::size_t t = 0;
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return lo > hi; }
};

/// Treatment of steps at which no fixed decision of player i is feasible
/// (the others alone already exceed the shared constraint). Under kStrict
/// any such step makes the comparator infeasible. kSkipEmptySteps drops the
/// constraint of those steps, keeps their costs, and lists them in
/// `skipped_steps`; it needs scalar box decisions.
enum class EmptyStepPolicy { kStrict, kSkipEmptySteps };

struct ComparatorSolution {
  std::size_t player = 0;
  std::size_t horizon = 0;
  bool feasible = true;
  Eigen::VectorXd x_star;
  double objective = 0.0;  // sum_t f_{i,t}(x*, psi_i(x*)/N + sigma_{-i,t})
  std::string method;
  // Scalar decisions only.
  std::vector<FeasibleInterval> intervals;
  FeasibleInterval intersection;
  std::vector<std::size_t> skipped_steps;
  double max_violation = 0.0;  // over the steps that were not skipped
};

/// Best fixed decision for player i over t = 1..horizon (horizon <= inputs
/// horizon) subject to feasibility at every step. Scalar decisions use
/// per-step feasible intervals (closed form for quadratic constraints) and
/// golden-section search; vector decisions use an augmented-Lagrangian
/// projected-gradient method. An empty feasible set is reported with
/// feasible = false, not thrown.
ComparatorSolution solve_comparator(const GameModel& model, const ComparatorInputs& inputs,
                                    std::size_t horizon, double tol = 1e-10,
                                    EmptyStepPolicy policy = EmptyStepPolicy::kStrict);

/// Objective of the comparator problem at x over t = 1..horizon.
double comparator_objective(const GameModel& model, const ComparatorInputs& inputs, std::size_t horizon,
                            const Eigen::VectorXd& x);

/// Feasible interval of {x in X_i : g_{i,t}(x) + others <= 0} for scalar x.
FeasibleInterval scalar_feasible_interval(const GameModel& model, std::size_t i, std::size_t t,
                                          const Eigen::VectorXd& others_constraint);

}  // namespace pushgne
