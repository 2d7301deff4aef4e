#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pushgne/errors.hpp"
#include "pushgne/rng.hpp"
#include "pushgne/sets.hpp"

namespace pushgne {

using JointDecision = std::vector<Eigen::VectorXd>;

/// Additive zero-mean gradient noise, one independent component per
/// decision coordinate.
struct NoiseModel {
  enum class Kind { kNone, kUniform, kGaussian };

  Kind kind = Kind::kNone;
  double half_width = 0.0;  // uniform on [-half_width, half_width]
  double stddev = 0.0;      // gaussian
  double clip = std::numeric_limits<double>::infinity();  // gaussian truncation

  static NoiseModel none() { return {}; }
  /// Throws PreconditionError unless lo == -hi (zero mean).
  static NoiseModel uniform(double lo, double hi);
  static NoiseModel gaussian(double stddev, double clip = std::numeric_limits<double>::infinity());

  bool degenerate() const;
  bool bounded_support() const;
  /// Sup |xi| per component; inf for untruncated gaussians.
  double support_bound() const;
  double variance() const;
  double draw(const CounterRng& rng, std::size_t player, std::size_t t, std::size_t k) const;
  std::string describe() const;
};

/// Problem-level bounds used by the runtime monitors.
struct DeclaredConstants {
  std::optional<double> set_and_constraint_bound;  // L: ||x_i||, ||g_i|| <= L
  std::optional<double> jacobian_bound;            // M: ||grad g_i|| <= M
  std::optional<double> gradient_bound;            // S: ||q_i|| <= S
  std::optional<double> aggregation_lipschitz;     // L_sigma
};

/// Scalar-decision quadratic constraint component c0 + c1 x + c2 x^2.
struct ScalarQuadratic {
  double c0 = 0, c1 = 0, c2 = 0;
};

/// An aggregative game instance. Costs are the expectation costs
/// f_{i,t}(x_i, sigma); noise enters only through `noisy_gradient`.
/// Implementations are immutable after construction.
class GameModel {
 public:
  virtual ~GameModel() = default;

  virtual std::string id() const = 0;
  virtual std::size_t players() const = 0;
  virtual std::size_t dim(std::size_t i) const = 0;
  virtual std::size_t aggregate_dim() const = 0;
  virtual std::size_t constraint_dim() const = 0;
  virtual bool time_varying() const = 0;
  virtual const LocalSet& local_set(std::size_t i) const = 0;

  virtual double cost(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& sigma) const = 0;
  /// Partial gradient in the own decision, d_i entries.
  virtual Eigen::VectorXd cost_grad_own(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& sigma) const = 0;
  /// Partial gradient in the aggregate, n entries.
  virtual Eigen::VectorXd cost_grad_aggregate(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& sigma) const = 0;

  /// psi_i(x_i), n entries.
  virtual Eigen::VectorXd contribution(std::size_t i, const Eigen::VectorXd& x) const = 0;
  /// d_i x n Jacobian of psi_i.
  virtual Eigen::MatrixXd contribution_jacobian(std::size_t i, const Eigen::VectorXd& x) const = 0;

  /// g_{i,t}(x_i) in the canonical sum-to-nonpositive form, m entries.
  virtual Eigen::VectorXd constraint(std::size_t i, std::size_t t, const Eigen::VectorXd& x) const = 0;
  /// d_i x m Jacobian of g_{i,t}.
  virtual Eigen::MatrixXd constraint_jacobian(std::size_t i, std::size_t t,
                                              const Eigen::VectorXd& x) const = 0;

  virtual const NoiseModel& noise(std::size_t i) const = 0;

  /// q_{i,t}(x_i, y, xi). Default: pseudo-gradient plus xi.
  virtual Eigen::VectorXd noisy_gradient(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& y, const Eigen::VectorXd& xi) const;

  /// Closed form of constraint component `k` when it is a scalar quadratic.
  virtual std::optional<ScalarQuadratic> scalar_constraint_form(std::size_t /*i*/, std::size_t /*t*/,
                                                                std::size_t /*k*/) const {
    return std::nullopt;
  }

  virtual DeclaredConstants declared_constants() const { return {}; }
  /// Scenario parameters worth recording in a manifest.
  virtual std::map<std::string, double> metadata() const { return {}; }

  std::size_t total_dim() const;
  /// Time index the model actually reads: 0 for time-invariant models.
  std::size_t effective_time(std::size_t t) const { return time_varying() ? t : 0; }
};

/// sigma(x) = (1/N) sum_i psi_i(x_i).
Eigen::VectorXd aggregate(const GameModel& model, const JointDecision& x);

/// (1/N) sum_{j != i} psi_j(x_j).
Eigen::VectorXd aggregate_excluding(const GameModel& model, const JointDecision& x, std::size_t i);

/// p_{i,t}(x_i, y) = grad_1 f + (grad psi_i / N) grad_2 f at sigma = y.
/// Throws DomainError if x_i is outside X_i.
Eigen::VectorXd pseudo_gradient(const GameModel& model, std::size_t i, std::size_t t,
                                const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Noise draws keyed on (seed, player, time, coordinate).
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : rng_(seed) {}
  Eigen::VectorXd draw(const GameModel& model, std::size_t i, std::size_t t) const;
  std::uint64_t seed() const noexcept { return rng_.seed(); }

 private:
  CounterRng rng_;
};

/// q_{i,t}(x_i, y, xi_{i,t}) with xi_{i,t} drawn from `noise`.
Eigen::VectorXd sample_gradient(const GameModel& model, std::size_t i, std::size_t t,
                                const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                const NoiseSource& noise);

struct ConstraintValue {
  Eigen::VectorXd value;     // m
  Eigen::MatrixXd jacobian;  // d_i x m
};

ConstraintValue constraint_eval(const GameModel& model, std::size_t i, std::size_t t,
                                const Eigen::VectorXd& x);

Eigen::VectorXd project_local(const GameModel& model, std::size_t i, const Eigen::VectorXd& v);

/// Sum over players of g_{i,t}(x_i).
Eigen::VectorXd total_constraint(const GameModel& model, std::size_t t, const JointDecision& x);

/// G(x) = col(p_{i,t}(x_i, sigma(x))) stacked over players.
Eigen::VectorXd pseudo_gradient_map(const GameModel& model, std::size_t t, const JointDecision& x);

JointDecision split_joint(const GameModel& model, const Eigen::VectorXd& stacked);
Eigen::VectorXd stack_joint(const JointDecision& x);

// Numerical probes used by tests and by registration of user models.

/// Central-difference check of p_{i,t} against f_{i,t}(x, psi_i(x)/N + rest).
/// Returns the relative error ||p - fd|| / max(1, ||p||).
double gradient_fd_error(const GameModel& model, std::size_t i, std::size_t t,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& rest, double h = 1e-5);

/// Largest observed ||psi(x) - psi(x')|| / ||x - x'|| over sampled pairs in X_i.
double estimate_contribution_lipschitz(const GameModel& model, std::size_t i, std::mt19937_64& gen,
                                       std::size_t pairs);

/// Largest observed g((u+v)/2) - (g(u)+g(v))/2 over components and sampled
/// pairs in X_i. Nonpositive (to rounding) for convex constraints.
double constraint_convexity_gap(const GameModel& model, std::size_t i, std::size_t t,
                                std::mt19937_64& gen, std::size_t pairs);

/// Smallest observed <G(x)-G(x'), x-x'> / ||x-x'||^2 over sampled pairs.
double estimate_strong_monotonicity(const GameModel& model, std::size_t t, std::mt19937_64& gen,
                                    std::size_t pairs);

/// Smallest iota with mean(exp(||xi||^2 / iota^2)) <= e over `draws`
/// samples of the player's noise. Zero for degenerate noise.
double estimate_subgaussian_scale(const GameModel& model, std::size_t i, std::size_t draws,
                                  std::uint64_t seed);

}  // namespace pushgne
