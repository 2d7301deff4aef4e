#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pushgne/errors.hpp"

namespace pushgne {

/// A(i, j) is true iff node i receives from node j (edge j -> i).
using Adjacency = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Directed edge `from -> to`.
struct Edge {
  std::size_t from;
  std::size_t to;
};

Adjacency adjacency_from_edges(std::size_t n, const std::vector<Edge>& edges,
                               bool add_self_loops = false);

/// Mixing matrix. Entry (i, j) is the weight node i puts on the value pushed
/// by node j. Holds any square matrix; `build_weights` is the constructor
/// that guarantees column-stochasticity, and `validate_schedule` reports on
/// anything else.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {}

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return entries_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// max_j |sum_i w_ij - 1|
  double column_sum_error() const;
  /// Smallest strictly positive entry; +inf for an all-zero matrix.
  double min_positive_entry() const;
  Adjacency support() const;

 private:
  Eigen::MatrixXd entries_;
};

/// Out-degree weights: w_ij = 1 / outdeg(j) for every edge j -> i, self-loop
/// included in the degree. Throws InvalidGraph if a self-loop is missing.
WeightMatrix build_weights(const Adjacency& adjacency);

/// Time-indexed sequence of mixing matrices. Either a finite list repeated
/// cyclically, or a generator t -> W_t that must be a pure function of t.
class GraphSchedule {
 public:
  using Generator = std::function<WeightMatrix(std::size_t)>;

  GraphSchedule(std::string name, std::vector<WeightMatrix> cycle, std::size_t window);
  GraphSchedule(std::string name, std::size_t nodes, Generator generator,
                std::size_t window, std::size_t validation_horizon);

  const std::string& name() const noexcept { return name_; }
  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t window() const noexcept { return window_; }
  bool cyclic() const noexcept { return !generator_; }
  /// Cycle length for cyclic schedules, validation horizon otherwise.
  std::size_t period() const noexcept;

  WeightMatrix at(std::size_t t) const;
  /// Minimum nonzero weight over the cycle (or the validation horizon).
  double min_weight() const;

 private:
  std::string name_;
  std::size_t nodes_ = 0;
  std::size_t window_ = 1;
  std::vector<WeightMatrix> cycle_;
  Generator generator_;
  std::size_t horizon_ = 0;
};

ValidationReport validate_schedule(const GraphSchedule& schedule);

/// Strong connectivity of a single directed support.
bool strongly_connected(const Adjacency& support);

/// Push-sum mixing primitive: row i of the result is sum_j w_ij * row j.
Eigen::MatrixXd mix(const Eigen::MatrixXd& values, const WeightMatrix& w);

/// Running push-sum constants. `product` is W_t ... W_0 1; `r_estimate` its
/// smallest entry seen so far (1 before any mixing).
struct MixConstants {
  Eigen::VectorXd product;
  double r_estimate = 1.0;
  double theta_estimate = 0.0;

  static MixConstants initial(std::size_t nodes);
};

MixConstants update_mix_constants(const MixConstants& state, const WeightMatrix& w);

/// (1 - N^{-NU})^{1/(NU)}. Rounds to 1.0 in double for most useful N, U.
double analytic_theta_ceiling(std::size_t nodes, std::size_t window);

struct ThetaFit {
  double theta = 1.0;      // exp(slope) of log consensus error per step
  double r_squared = 0.0;
  std::size_t steps_used = 0;
  std::vector<double> error_trace;
};

/// Runs ratio consensus on a fixed probe (node i starts at value i, weight 1)
/// with no injections and fits the per-step geometric decay of
/// max_i |v_i / z_i - mean|.
ThetaFit estimate_theta(const GraphSchedule& schedule, std::size_t max_steps = 4000);

// Built-in schedules.

/// Four sparse digraphs on n nodes cycled in order. Individually disconnected,
/// strongly connected in union over any 4 consecutive slots, with unequal
/// out-degrees so the weights are column- but not row-stochastic.
GraphSchedule paper_fig1_schedule(std::size_t n);
GraphSchedule complete_schedule(std::size_t n);
/// Directed ring 0 -> 1 -> ... -> n-1 -> 0 with self-loops, static.
GraphSchedule ring_schedule(std::size_t n);
/// Slot t carries the ring edge (t mod n) -> (t+1 mod n) plus each other
/// off-diagonal edge with probability `p`, keyed on (seed, t).
GraphSchedule random_ring_schedule(std::size_t n, std::uint64_t seed, double p,
                                   std::size_t validation_horizon = 1024);

/// Resolves a built-in schedule id ("paper-fig1", "complete", "ring",
/// "random-ring").
GraphSchedule builtin_schedule(const std::string& id, std::size_t n, std::uint64_t seed = 0);

/// Parses the JSON graph-schedule format:
///   {"nodes": N, "window": U, "name": "...",
///    "slots": [{"edges": [[from, to], ...], "self_loops": true},
///              {"matrix": [[w00, w01, ...], ...]}, ...]}
/// Edge slots get out-degree weights. Throws InvalidGraph or ConfigError.
GraphSchedule parse_schedule(const std::string& text);
GraphSchedule load_schedule_file(const std::string& path);

}  // namespace pushgne
