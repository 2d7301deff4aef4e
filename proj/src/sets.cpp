#include "pushgne/sets.hpp"

#include <algorithm>
#include <cmath>

namespace pushgne {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Eigen::VectorXd gaussian(std::size_t dim, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = nd(gen);
  return v;
}

}  // namespace

LocalSet LocalSet::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw DimensionMismatch("box bounds must be nonempty and of equal length");
  if ((lower.array() > upper.array()).any()) throw PreconditionError("box is empty: lower > upper");
  return LocalSet(Box{std::move(lower), std::move(upper)});
}

LocalSet LocalSet::interval(double lower, double upper) {
  return box(Eigen::VectorXd::Constant(1, lower), Eigen::VectorXd::Constant(1, upper));
}

LocalSet LocalSet::ball(Eigen::VectorXd center, double radius) {
  if (center.size() == 0) throw DimensionMismatch("ball center must be nonempty");
  if (!(radius >= 0.0)) throw PreconditionError("ball radius must be nonnegative");
  return LocalSet(Ball{std::move(center), radius});
}

LocalSet LocalSet::custom(CustomSet set, std::size_t samples, unsigned seed) {
  if (!set.project || !set.contains) throw PreconditionError("custom set needs project and contains");
  if (static_cast<std::size_t>(set.anchor.size()) != set.dim)
    throw DimensionMismatch("custom set anchor has the wrong dimension");
  LocalSet s{Repr(std::move(set))};
  std::mt19937_64 gen(seed);
  const auto check = check_projection(s, samples, gen);
  if (!check.passed(1e-8))
    throw PreconditionError("custom projector violates projection properties (expansion " +
                            std::to_string(check.worst_expansion) + ", obtuse " +
                            std::to_string(check.worst_obtuse) + ")");
  return s;
}

std::size_t LocalSet::dim() const {
  return std::visit(overloaded{[](const Box& b) { return static_cast<std::size_t>(b.lower.size()); },
                               [](const Ball& b) { return static_cast<std::size_t>(b.center.size()); },
                               [](const CustomSet& c) { return c.dim; }},
                    repr_);
}

Eigen::VectorXd LocalSet::project(const Eigen::VectorXd& v) const {
  if (static_cast<std::size_t>(v.size()) != dim())
    throw DimensionMismatch("projection input has dimension " + std::to_string(v.size()) +
                            ", set has " + std::to_string(dim()));
  return std::visit(
      overloaded{[&](const Box& b) -> Eigen::VectorXd { return v.cwiseMax(b.lower).cwiseMin(b.upper); },
                 [&](const Ball& b) -> Eigen::VectorXd {
                   const Eigen::VectorXd d = v - b.center;
                   const double r = d.norm();
                   if (r <= b.radius) return v;
                   return b.center + d * (b.radius / r);
                 },
                 [&](const CustomSet& c) -> Eigen::VectorXd { return c.project(v); }},
      repr_);
}

bool LocalSet::contains(const Eigen::VectorXd& x, double tol) const {
  if (static_cast<std::size_t>(x.size()) != dim()) return false;
  if (!x.allFinite()) return false;
  return std::visit(
      overloaded{[&](const Box& b) {
                   return ((x.array() >= b.lower.array() - tol) && (x.array() <= b.upper.array() + tol)).all();
                 },
                 [&](const Ball& b) { return (x - b.center).norm() <= b.radius + tol; },
                 [&](const CustomSet& c) { return c.contains(x, tol); }},
      repr_);
}

Eigen::VectorXd LocalSet::center() const {
  return std::visit(overloaded{[](const Box& b) -> Eigen::VectorXd { return 0.5 * (b.lower + b.upper); },
                               [](const Ball& b) -> Eigen::VectorXd { return b.center; },
                               [](const CustomSet& c) -> Eigen::VectorXd { return c.anchor; }},
                    repr_);
}

double LocalSet::norm_bound() const {
  return std::visit(overloaded{[](const Box& b) {
                                 return b.lower.cwiseAbs().cwiseMax(b.upper.cwiseAbs()).norm();
                               },
                               [](const Ball& b) { return b.center.norm() + b.radius; },
                               [](const CustomSet& c) { return c.bound_radius; }},
                    repr_);
}

Eigen::VectorXd LocalSet::sample(std::mt19937_64& gen, double spread) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::visit(
      overloaded{[&](const Box& b) -> Eigen::VectorXd {
                   const Eigen::VectorXd mid = 0.5 * (b.lower + b.upper);
                   const Eigen::VectorXd half = 0.5 * (b.upper - b.lower) * spread;
                   Eigen::VectorXd x(b.lower.size());
                   for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = mid(k) + half(k) * (2.0 * u(gen) - 1.0);
                   return x;
                 },
                 [&](const Ball& b) -> Eigen::VectorXd {
                   Eigen::VectorXd d = gaussian(static_cast<std::size_t>(b.center.size()), gen);
                   const double dn = d.norm();
                   if (dn > 0) d /= dn;
                   const double r = b.radius * spread *
                                    std::pow(u(gen), 1.0 / static_cast<double>(b.center.size()));
                   return b.center + r * d;
                 },
                 [&](const CustomSet& c) -> Eigen::VectorXd {
                   Eigen::VectorXd d = gaussian(c.dim, gen);
                   const double dn = d.norm();
                   if (dn > 0) d /= dn;
                   return c.anchor + d * (2.0 * c.bound_radius * spread * u(gen));
                 }},
      repr_);
}

ProjectionCheck check_projection(const LocalSet& set, std::size_t samples, std::mt19937_64& gen) {
  ProjectionCheck out;
  out.samples = samples;
  double scale = std::max(1.0, set.norm_bound());
  for (std::size_t k = 0; k < samples; ++k) {
    // Points both inside and well outside the set.
    const Eigen::VectorXd x = set.sample(gen, 3.0);
    const Eigen::VectorXd y = set.sample(gen, 3.0);
    const Eigen::VectorXd px = set.project(x);
    const Eigen::VectorXd py = set.project(y);
    out.worst_expansion = std::max(out.worst_expansion, ((px - py).norm() - (x - y).norm()) / scale);
    out.worst_obtuse = std::max(out.worst_obtuse, (x - px).dot(py - px) / (scale * scale));
    out.worst_idempotence = std::max(out.worst_idempotence, (set.project(px) - px).norm() / scale);
  }
  return out;
}

}  // namespace pushgne
