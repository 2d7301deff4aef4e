#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "pushgne/errors.hpp"

namespace pushgne {

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct Ball {
  Eigen::VectorXd center;
  double radius = 1.0;
};

/// User-supplied convex set. `project` must be the Euclidean projection;
/// `sample` draws points from a bounding region used by the property checks.
struct CustomSet {
  std::size_t dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> project;
  std::function<bool(const Eigen::VectorXd&, double)> contains;
  Eigen::VectorXd anchor;   // a point of the set
  double bound_radius = 0;  // max ||x|| over the set
};

/// Nonempty, convex, compact local decision set X_i.
class LocalSet {
 public:
  using Repr = std::variant<Box, Ball, CustomSet>;

  static LocalSet box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static LocalSet interval(double lower, double upper);
  static LocalSet ball(Eigen::VectorXd center, double radius);
  /// Throws PreconditionError if the projector fails the projection
  /// property checks on `samples` random pairs.
  static LocalSet custom(CustomSet set, std::size_t samples = 2000, unsigned seed = 7);

  std::size_t dim() const;
  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;
  /// Box center, ball center, or the custom anchor.
  Eigen::VectorXd center() const;
  /// max ||x|| over the set.
  double norm_bound() const;
  /// Draws a point from a region containing the set (the set itself for
  /// boxes and balls).
  Eigen::VectorXd sample(std::mt19937_64& gen, double spread = 1.0) const;
  const Repr& repr() const noexcept { return repr_; }
  const Box* as_box() const noexcept { return std::get_if<Box>(&repr_); }

 private:
  explicit LocalSet(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

struct ProjectionCheck {
  std::size_t samples = 0;
  double worst_expansion = 0.0;    // max ||P(x)-P(y)|| - ||x-y||
  double worst_obtuse = 0.0;       // max <x - P(x), y - P(x)> for y in the set
  double worst_idempotence = 0.0;  // max ||P(P(x)) - P(x)||
  bool passed(double tol = 1e-9) const {
    return worst_expansion <= tol && worst_obtuse <= tol && worst_idempotence <= tol;
  }
};

/// Samples pairs around the set and measures non-expansiveness, the
/// obtuse-angle characterization, and idempotence of `set.project`.
ProjectionCheck check_projection(const LocalSet& set, std::size_t samples, std::mt19937_64& gen);

}  // namespace pushgne
