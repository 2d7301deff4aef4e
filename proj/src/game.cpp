#include "pushgne/game.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pushgne {

namespace {
constexpr double kDomainTol = 1e-9;
}

NoiseModel NoiseModel::uniform(double lo, double hi) {
  if (!(hi >= lo)) throw PreconditionError("uniform noise needs lo <= hi");
  if (std::abs(lo + hi) > 1e-15 * std::max(1.0, std::abs(hi)))
    throw PreconditionError("noise must be zero-mean: uniform support must be symmetric");
  NoiseModel n;
  n.kind = hi > 0 ? Kind::kUniform : Kind::kNone;
  n.half_width = hi;
  return n;
}

NoiseModel NoiseModel::gaussian(double stddev, double clip) {
  if (!(stddev >= 0.0)) throw PreconditionError("gaussian noise needs stddev >= 0");
  if (!(clip > 0.0)) throw PreconditionError("gaussian truncation must be positive");
  NoiseModel n;
  n.kind = stddev > 0 ? Kind::kGaussian : Kind::kNone;
  n.stddev = stddev;
  n.clip = clip;
  return n;
}

bool NoiseModel::degenerate() const { return kind == Kind::kNone; }

bool NoiseModel::bounded_support() const { return std::isfinite(support_bound()); }

double NoiseModel::support_bound() const {
  switch (kind) {
    case Kind::kNone: return 0.0;
    case Kind::kUniform: return half_width;
    case Kind::kGaussian: return clip;
  }
  return 0.0;
}

double NoiseModel::variance() const {
  switch (kind) {
    case Kind::kNone: return 0.0;
    case Kind::kUniform: return half_width * half_width / 3.0;
    case Kind::kGaussian: {
      if (!std::isfinite(clip)) return stddev * stddev;
      // Truncated normal on [-c, c].
      const double a = clip / stddev;
      const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
      const double mass = std::erf(a / std::numbers::sqrt2);
      return stddev * stddev * (1.0 - 2.0 * a * pdf / mass);
    }
  }
  return 0.0;
}

double NoiseModel::draw(const CounterRng& rng, std::size_t player, std::size_t t, std::size_t k) const {
  switch (kind) {
    case Kind::kNone: return 0.0;
    case Kind::kUniform:
      return rng.uniform(-half_width, half_width, streams::kNoise, player, t, k);
    case Kind::kGaussian: {
      // Rejection for the truncated case; attempt a lives in counter slot k + a * 2^32.
      for (std::uint64_t a = 0;; ++a) {
        const double v = stddev * rng.normal(streams::kNoise, player, t, k + (a << 32));
        if (std::abs(v) <= clip) return v;
      }
    }
  }
  return 0.0;
}

std::string NoiseModel::describe() const {
  std::ostringstream s;
  switch (kind) {
    case Kind::kNone: s << "none"; break;
    case Kind::kUniform: s << "uniform[" << -half_width << ", " << half_width << "]"; break;
    case Kind::kGaussian: s << "gaussian(sd=" << stddev << ", clip=" << clip << ")"; break;
  }
  return s.str();
}

Eigen::VectorXd GameModel::noisy_gradient(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& y, const Eigen::VectorXd& xi) const {
  return pseudo_gradient(*this, i, t, x, y) + xi;
}

std::size_t GameModel::total_dim() const {
  std::size_t d = 0;
  for (std::size_t i = 0; i < players(); ++i) d += dim(i);
  return d;
}

Eigen::VectorXd aggregate(const GameModel& model, const JointDecision& x) {
  if (x.size() != model.players()) throw DimensionMismatch("joint decision has the wrong player count");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.aggregate_dim()));
  for (std::size_t i = 0; i < x.size(); ++i) s += model.contribution(i, x[i]);
  return s / static_cast<double>(model.players());
}

Eigen::VectorXd aggregate_excluding(const GameModel& model, const JointDecision& x, std::size_t i) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.aggregate_dim()));
  for (std::size_t j = 0; j < x.size(); ++j)
    if (j != i) s += model.contribution(j, x[j]);
  return s / static_cast<double>(model.players());
}

Eigen::VectorXd pseudo_gradient(const GameModel& model, std::size_t i, std::size_t t,
                                const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (!model.local_set(i).contains(x, kDomainTol))
    throw DomainError("player " + std::to_string(i) + " decision outside its local set");
  const double n = static_cast<double>(model.players());
  return model.cost_grad_own(i, t, x, y) +
         model.contribution_jacobian(i, x) * model.cost_grad_aggregate(i, t, x, y) / n;
}

Eigen::VectorXd NoiseSource::draw(const GameModel& model, std::size_t i, std::size_t t) const {
  const auto& nm = model.noise(i);
  Eigen::VectorXd xi(static_cast<Eigen::Index>(model.dim(i)));
  for (Eigen::Index k = 0; k < xi.size(); ++k)
    xi(k) = nm.draw(rng_, i, t, static_cast<std::size_t>(k));
  return xi;
}

Eigen::VectorXd sample_gradient(const GameModel& model, std::size_t i, std::size_t t,
                                const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                const NoiseSource& noise) {
  if (!model.local_set(i).contains(x, kDomainTol))
    throw DomainError("player " + std::to_string(i) + " decision outside its local set");
  return model.noisy_gradient(i, t, x, y, noise.draw(model, i, t));
}

ConstraintValue constraint_eval(const GameModel& model, std::size_t i, std::size_t t,
                                const Eigen::VectorXd& x) {
  if (!model.local_set(i).contains(x, kDomainTol))
    throw DomainError("player " + std::to_string(i) + " decision outside its local set");
  return {model.constraint(i, t, x), model.constraint_jacobian(i, t, x)};
}

Eigen::VectorXd project_local(const GameModel& model, std::size_t i, const Eigen::VectorXd& v) {
  return model.local_set(i).project(v);
}

Eigen::VectorXd total_constraint(const GameModel& model, std::size_t t, const JointDecision& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.constraint_dim()));
  for (std::size_t i = 0; i < model.players(); ++i) g += model.constraint(i, t, x[i]);
  return g;
}

Eigen::VectorXd pseudo_gradient_map(const GameModel& model, std::size_t t, const JointDecision& x) {
  const Eigen::VectorXd s = aggregate(model, x);
  Eigen::VectorXd out(static_cast<Eigen::Index>(model.total_dim()));
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < model.players(); ++i) {
    const auto d = static_cast<Eigen::Index>(model.dim(i));
    out.segment(off, d) = pseudo_gradient(model, i, t, x[i], s);
    off += d;
  }
  return out;
}

JointDecision split_joint(const GameModel& model, const Eigen::VectorXd& stacked) {
  if (static_cast<std::size_t>(stacked.size()) != model.total_dim())
    throw DimensionMismatch("stacked decision has the wrong length");
  JointDecision x;
  Eigen::Index off = 0;
  for (std::size_t i = 0; i < model.players(); ++i) {
    const auto d = static_cast<Eigen::Index>(model.dim(i));
    x.push_back(stacked.segment(off, d));
    off += d;
  }
  return x;
}

Eigen::VectorXd stack_joint(const JointDecision& x) {
  Eigen::Index total = 0;
  for (const auto& xi : x) total += xi.size();
  Eigen::VectorXd out(total);
  Eigen::Index off = 0;
  for (const auto& xi : x) {
    out.segment(off, xi.size()) = xi;
    off += xi.size();
  }
  return out;
}

double gradient_fd_error(const GameModel& model, std::size_t i, std::size_t t,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& rest, double h) {
  const double n = static_cast<double>(model.players());
  auto f = [&](const Eigen::VectorXd& xi) { return model.cost(i, t, xi, model.contribution(i, xi) / n + rest); };
  const Eigen::VectorXd y = model.contribution(i, x) / n + rest;
  const Eigen::VectorXd p = pseudo_gradient(model, i, t, x, y);
  Eigen::VectorXd fd(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    fd(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return (p - fd).norm() / std::max(1.0, p.norm());
}

double estimate_contribution_lipschitz(const GameModel& model, std::size_t i, std::mt19937_64& gen,
                                       std::size_t pairs) {
  double best = 0.0;
  const auto& set = model.local_set(i);
  for (std::size_t k = 0; k < pairs; ++k) {
    const Eigen::VectorXd u = set.project(set.sample(gen));
    const Eigen::VectorXd v = set.project(set.sample(gen));
    const double dx = (u - v).norm();
    if (dx < 1e-12) continue;
    best = std::max(best, (model.contribution(i, u) - model.contribution(i, v)).norm() / dx);
  }
  return best;
}

double constraint_convexity_gap(const GameModel& model, std::size_t i, std::size_t t,
                                std::mt19937_64& gen, std::size_t pairs) {
  double worst = -std::numeric_limits<double>::infinity();
  const auto& set = model.local_set(i);
  for (std::size_t k = 0; k < pairs; ++k) {
    const Eigen::VectorXd u = set.project(set.sample(gen));
    const Eigen::VectorXd v = set.project(set.sample(gen));
    const Eigen::VectorXd mid = model.constraint(i, t, 0.5 * (u + v));
    const Eigen::VectorXd avg = 0.5 * (model.constraint(i, t, u) + model.constraint(i, t, v));
    worst = std::max(worst, (mid - avg).maxCoeff());
  }
  return worst;
}

double estimate_strong_monotonicity(const GameModel& model, std::size_t t, std::mt19937_64& gen,
                                    std::size_t pairs) {
  double best = std::numeric_limits<double>::infinity();
  auto draw = [&] {
    JointDecision x;
    for (std::size_t i = 0; i < model.players(); ++i)
      x.push_back(model.local_set(i).project(model.local_set(i).sample(gen)));
    return x;
  };
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto x = draw();
    const auto y = draw();
    const Eigen::VectorXd dx = stack_joint(x) - stack_joint(y);
    const double nn = dx.squaredNorm();
    if (nn < 1e-20) continue;
    const double inner = (pseudo_gradient_map(model, t, x) - pseudo_gradient_map(model, t, y)).dot(dx);
    best = std::min(best, inner / nn);
  }
  return best;
}

double estimate_subgaussian_scale(const GameModel& model, std::size_t i, std::size_t draws,
                                  std::uint64_t seed) {
  if (model.noise(i).degenerate() || draws == 0) return 0.0;
  const NoiseSource src(seed);
  std::vector<double> sq(draws);
  double max_sq = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    sq[k] = src.draw(model, i, k).squaredNorm();
    max_sq = std::max(max_sq, sq[k]);
  }
  if (max_sq == 0.0) return 0.0;
  // mean(exp(s / iota^2)) is decreasing in iota; bisect on log(iota).
  auto excess = [&](double iota) {
    const double inv = 1.0 / (iota * iota);
    double m = 0.0;
    for (double s : sq) m += std::exp(std::min(s * inv, 700.0));
    return m / static_cast<double>(draws) - std::numbers::e;
  };
  double lo = 1e-6 * std::sqrt(max_sq), hi = 10.0 * std::sqrt(max_sq);
  while (excess(hi) > 0) hi *= 2.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (excess(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace pushgne
