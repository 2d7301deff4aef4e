#include "pushgne/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pushgne {

namespace {

using Index = Eigen::Index;
Index idx(std::size_t i) { return static_cast<Index>(i); }

// Stacked sum_i grad g_i(x_i) mu, aligned with stack_joint.
Eigen::VectorXd constraint_gradient_times(const GameModel& model, std::size_t t, const JointDecision& x,
                                          const Eigen::VectorXd& mu) {
  Eigen::VectorXd out(idx(model.total_dim()));
  Index off = 0;
  for (std::size_t i = 0; i < model.players(); ++i) {
    const auto d = idx(model.dim(i));
    out.segment(off, d) = model.constraint_jacobian(i, t, x[i]) * mu;
    off += d;
  }
  return out;
}

JointDecision project_joint(const GameModel& model, const JointDecision& x) {
  JointDecision out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.push_back(model.local_set(i).project(x[i]));
  return out;
}

struct KktPoint {
  Eigen::VectorXd x;  // stacked
  Eigen::VectorXd mu;
};

struct KktOperator {
  const GameModel& model;
  std::size_t t;

  KktPoint operator()(const KktPoint& z) const {
    const JointDecision xs = split_joint(model, z.x);
    return {pseudo_gradient_map(model, t, xs) + constraint_gradient_times(model, t, xs, z.mu),
            -total_constraint(model, t, xs)};
  }
  KktPoint project(const KktPoint& z) const {
    return {stack_joint(project_joint(model, split_joint(model, z.x))), z.mu.cwiseMax(0.0)};
  }
};

double distance(const KktPoint& a, const KktPoint& b) {
  return std::sqrt((a.x - b.x).squaredNorm() + (a.mu - b.mu).squaredNorm());
}

}  // namespace

KktResidual kkt_residual(const GameModel& model, const JointDecision& x, const Eigen::VectorXd& mu,
                         std::size_t t) {
  if (static_cast<std::size_t>(mu.size()) != model.constraint_dim())
    throw DimensionMismatch("multiplier has the wrong dimension");
  const Eigen::VectorXd stacked = stack_joint(x);
  const Eigen::VectorXd direction =
      pseudo_gradient_map(model, t, x) + constraint_gradient_times(model, t, x, mu);
  const Eigen::VectorXd moved = stack_joint(project_joint(model, split_joint(model, stacked - direction)));
  const Eigen::VectorXd g = total_constraint(model, t, x);
  KktResidual r;
  r.primal = (stacked - moved).norm();
  r.dual = (mu - (mu + g).cwiseMax(0.0)).norm();
  r.complementarity = std::abs(mu.dot(g));
  r.max_violation = g.size() ? std::max(0.0, g.maxCoeff()) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct GridSolver {
  const GameModel& model;
  std::size_t t;
  double resolution;
  std::size_t points;
  std::vector<double> lo, hi;
  std::size_t evaluations = 0;

  double merit(const JointDecision& x, double mu) {
    ++evaluations;
    const Eigen::VectorXd s = aggregate(model, x);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double p = pseudo_gradient(model, i, t, x[i], s)(0) +
                       (mu != 0.0 ? model.constraint_jacobian(i, t, x[i])(0, 0) * mu : 0.0);
      const double moved = std::clamp(x[i](0) - p, lo[i], hi[i]);
      sum += (x[i](0) - moved) * (x[i](0) - moved);
    }
    return sum;
  }

  // Player i's penalized cost with the others held at x.
  double penalized_cost(JointDecision& x, std::size_t i, double v, double mu) {
    ++evaluations;
    x[i](0) = v;
    double f = model.cost(i, t, x[i], aggregate(model, x));
    if (mu != 0.0) f += mu * model.constraint(i, t, x[i])(0);
    return f;
  }

  // 1-D best response by successive grid refinement; the penalized cost is
  // convex in the own decision, so zooming around the best point is safe.
  double best_response(JointDecision& x, std::size_t i, double mu) {
    double a = lo[i], b = hi[i], arg = x[i](0);
    for (;;) {
      const double h = (b - a) / static_cast<double>(points - 1);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < points; ++k) {
        const double v = std::min(b, a + h * static_cast<double>(k));
        const double f = penalized_cost(x, i, v, mu);
        if (f < best) {
          best = f;
          arg = v;
        }
      }
      if (h <= resolution) break;
      a = std::max(lo[i], arg - 2.0 * h);
      b = std::min(hi[i], arg + 2.0 * h);
    }
    x[i](0) = arg;
    return arg;
  }

  // Penalized Nash point for a fixed multiplier: Gauss-Seidel sweeps of
  // grid best responses. Quantized responses can flip by a cell forever
  // near the fixed point, so a sweep moving nothing beyond two cells ends it.
  JointDecision nash(double mu, double* merit_out) {
    const std::size_t n = lo.size();
    JointDecision x(n, Eigen::VectorXd(1));
    for (std::size_t i = 0; i < n; ++i) x[i](0) = 0.5 * (lo[i] + hi[i]);
    for (std::size_t sweep = 0;; ++sweep) {
      if (sweep == kMaxSweeps) throw SolverError("grid best responses did not settle");
      double moved = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double before = x[i](0);
        moved = std::max(moved, std::abs(best_response(x, i, mu) - before));
      }
      if (moved <= 2.0 * resolution) break;
    }
    if (merit_out) *merit_out = merit(x, mu);
    return x;
  }

  static constexpr std::size_t kMaxSweeps = 2000;
};

}  // namespace

GridVgne grid_refine_vgne(const GameModel& model, double resolution, std::size_t points_per_axis,
                          std::size_t t) {
  const std::size_t n = model.players();
  if (model.constraint_dim() > 1) throw PreconditionError("grid refinement supports at most one constraint");
  if (n > 6) throw PreconditionError("grid refinement supports at most 6 players");
  if (points_per_axis < 5) throw PreconditionError("grid refinement needs at least 5 points per axis");
  if (!(resolution > 0.0)) throw PreconditionError("grid resolution must be positive");
  GridSolver solver{model, t, resolution, points_per_axis, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const Box* box = model.local_set(i).as_box();
    if (model.dim(i) != 1 || !box) throw PreconditionError("grid refinement needs scalar box decisions");
    solver.lo.push_back(box->lower(0));
    solver.hi.push_back(box->upper(0));
  }

  GridVgne out;
  out.resolution = resolution;
  out.mu = Eigen::VectorXd::Zero(idx(model.constraint_dim()));
  double merit = 0.0;
  JointDecision x = solver.nash(0.0, &merit);
  const bool coupled = model.constraint_dim() == 1;
  if (coupled && total_constraint(model, t, x)(0) > 0.0) {
    auto excess = [&](double mu, JointDecision* at, double* m) {
      *at = solver.nash(mu, m);
      return total_constraint(model, t, *at)(0);
    };
    double mu_lo = 0.0, mu_hi = 1.0;
    JointDecision x_hi;
    double m_hi = 0.0;
    while (excess(mu_hi, &x_hi, &m_hi) > 0.0) {
      mu_lo = mu_hi;
      mu_hi *= 2.0;
      if (mu_hi > 1e12) throw SolverError("grid refinement found no feasible multiplier");
    }
    x = x_hi;
    merit = m_hi;
    for (int it = 0; it < 60 && mu_hi - mu_lo > 1e-10 * (1.0 + mu_hi); ++it) {
      const double mid = 0.5 * (mu_lo + mu_hi);
      JointDecision x_mid;
      double m_mid = 0.0;
      if (excess(mid, &x_mid, &m_mid) > 0.0) {
        mu_lo = mid;
      } else {
        mu_hi = mid;
        x = x_mid;
        merit = m_mid;
      }
    }
    out.mu(0) = mu_hi;
  }
  out.x = std::move(x);
  out.merit = merit;
  out.evaluations = solver.evaluations;
  return out;
}

// ---------------------------------------------------------------------------

VgneSolution solve_vgne(const GameModel& model, const VgneOptions& options) {
  if (model.time_varying()) throw PreconditionError("the vGNE solver needs a time-invariant game");
  if (!(options.step_scale > 0.0)) throw PreconditionError("step_scale must be positive");
  const KktOperator op{model, 0};

  JointDecision x0;
  for (std::size_t i = 0; i < model.players(); ++i)
    x0.push_back(model.local_set(i).project(model.local_set(i).center()));
  KktPoint z{stack_joint(x0), Eigen::VectorXd::Zero(idx(model.constraint_dim()))};

  VgneSolution sol;
  sol.method = "projected extragradient";
  sol.tol = options.tol;
  double eta = options.step_scale;
  auto residual_of = [&](const KktPoint& p) { return kkt_residual(model, split_joint(model, p.x), p.mu); };

  KktResidual res = residual_of(z);
  sol.residual_trace.push_back(res.total());
  std::size_t it = 0;
  while (res.total() > options.tol) {
    if (it >= options.max_iters)
      throw SolverError("vGNE solver did not reach tolerance " + std::to_string(options.tol) + " in " +
                            std::to_string(options.max_iters) + " iterations (residual " +
                            std::to_string(res.total()) + ")",
                        sol.residual_trace);
    const KktPoint fz = op(z);
    KktPoint y, fy;
    for (int tries = 0;; ++tries) {
      y = op.project({z.x - eta * fz.x, z.mu - eta * fz.mu});
      fy = op(y);
      const double lhs = eta * distance(fz, fy);
      if (lhs <= 0.9 * distance(z, y) || distance(z, y) == 0.0) break;
      eta *= 0.5;
      if (tries > 200) throw SolverError("vGNE step size collapsed", sol.residual_trace);
    }
    KktPoint next = op.project({z.x - eta * fy.x, z.mu - eta * fy.mu});
    sol.step_trace.push_back(distance(next, z) / eta);
    z = std::move(next);
    if (!z.x.allFinite() || !z.mu.allFinite()) throw SolverError("vGNE iterate diverged", sol.residual_trace);
    res = residual_of(z);
    sol.residual_trace.push_back(res.total());
    ++it;
  }
  sol.x_star = split_joint(model, z.x);
  sol.mu_star = z.mu;
  sol.residual = res;
  sol.iterations = it;

  bool scalar = model.players() <= 6 && model.constraint_dim() <= 1;
  for (std::size_t i = 0; i < model.players() && scalar; ++i)
    scalar = model.dim(i) == 1 && model.local_set(i).as_box() != nullptr;
  if (options.grid_cross_check && scalar) {
    sol.grid = grid_refine_vgne(model, options.grid_resolution);
    double gap = 0.0;
    for (std::size_t i = 0; i < model.players(); ++i)
      gap = std::max(gap, std::abs(sol.grid->x[i](0) - sol.x_star[i](0)));
    sol.grid_max_gap = gap;
    sol.grid_agrees = gap <= options.grid_agreement;
  }
  return sol;
}

// ---------------------------------------------------------------------------

ComparatorInputs comparator_inputs(const GameModel& model, const MetricsLog& log, std::size_t i,
                                   std::size_t horizon) {
  if (i >= model.players()) throw DimensionMismatch("player index out of range");
  if (horizon > log.steps) throw PreconditionError("comparator horizon exceeds the recorded run");
  const std::size_t m = model.constraint_dim(), n = model.aggregate_dim();
  const double n_real = static_cast<double>(model.players());
  ComparatorInputs in;
  in.player = i;
  in.horizon = horizon;
  in.others_constraint.reserve(horizon * m);
  in.others_aggregate.reserve(horizon * n);
  in.own_cost.reserve(horizon);
  for (std::size_t t = 1; t <= horizon; ++t) {
    const Eigen::VectorXd xi = log.x(t, i);
    const Eigen::VectorXd own_g = model.constraint(i, t, xi);
    const Eigen::VectorXd others_g = log.g(t) - own_g;
    Eigen::VectorXd total_psi = Eigen::VectorXd::Zero(idx(n));
    for (std::size_t j = 0; j < model.players(); ++j) total_psi += model.contribution(j, log.x(t, j));
    const Eigen::VectorXd own_psi = model.contribution(i, xi);
    const Eigen::VectorXd others = (total_psi - own_psi) / n_real;
    in.others_constraint.insert(in.others_constraint.end(), others_g.data(), others_g.data() + m);
    in.others_aggregate.insert(in.others_aggregate.end(), others.data(), others.data() + n);
    in.own_cost.push_back(model.cost(i, t, xi, total_psi / n_real));
  }
  return in;
}

ComparatorInputs comparator_inputs(const GameModel& model, const std::vector<JointDecision>& trajectory,
                                   std::size_t i) {
  if (i >= model.players()) throw DimensionMismatch("player index out of range");
  const std::size_t m = model.constraint_dim(), n = model.aggregate_dim();
  ComparatorInputs in;
  in.player = i;
  in.horizon = trajectory.size();
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const std::size_t t = k + 1;
    const auto& x = trajectory[k];
    if (x.size() != model.players()) throw DimensionMismatch("trajectory entry has the wrong player count");
    Eigen::VectorXd others_g = Eigen::VectorXd::Zero(idx(m));
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) others_g += model.constraint(j, t, x[j]);
    const Eigen::VectorXd others = aggregate_excluding(model, x, i);
    in.others_constraint.insert(in.others_constraint.end(), others_g.data(), others_g.data() + m);
    in.others_aggregate.insert(in.others_aggregate.end(), others.data(), others.data() + n);
    in.own_cost.push_back(model.cost(i, t, x[i], aggregate(model, x)));
  }
  return in;
}

namespace {

Eigen::Map<const Eigen::VectorXd> row(const std::vector<double>& v, std::size_t t, std::size_t width) {
  return Eigen::Map<const Eigen::VectorXd>(v.data() + (t - 1) * width, idx(width));
}

constexpr double kInvPhi = 0.6180339887498949;
constexpr double kTouchTolerance = 1e-12;

template <class F>
double golden_min(F f, double a, double b, double tol) {
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

template <class F>
double bisect_root(F f, double inside, double outside, double tol) {
  // f(inside) <= 0 < f(outside)
  while (std::abs(outside - inside) > tol) {
    const double mid = 0.5 * (inside + outside);
    (f(mid) <= 0.0 ? inside : outside) = mid;
  }
  return inside;
}

// {x in [lo, hi] : c0 + c1 x + c2 x^2 <= 0}
FeasibleInterval quadratic_sublevel(double c0, double c1, double c2, double lo, double hi) {
  FeasibleInterval out{0, lo, hi};
  auto empty = [&] { return FeasibleInterval{0, 1.0, 0.0}; };
  if (c2 == 0.0) {
    if (c1 == 0.0) return c0 <= 0.0 ? out : empty();
    const double root = -c0 / c1;
    if (c1 > 0.0) out.hi = std::min(hi, root);
    else out.lo = std::max(lo, root);
    return out;
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return empty();
  const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  double r1 = q / c2, r2 = q != 0.0 ? c0 / q : r1;
  if (r1 > r2) std::swap(r1, r2);
  out.lo = std::max(lo, r1);
  out.hi = std::min(hi, r2);
  return out;
}

}  // namespace

FeasibleInterval scalar_feasible_interval(const GameModel& model, std::size_t i, std::size_t t,
                                          const Eigen::VectorXd& others_constraint) {
  const Box* box = model.local_set(i).as_box();
  if (model.dim(i) != 1 || !box) throw PreconditionError("feasible intervals need a scalar box decision");
  FeasibleInterval acc{t, box->lower(0), box->upper(0)};
  for (std::size_t k = 0; k < model.constraint_dim() && !acc.empty(); ++k) {
    const double shift = others_constraint(idx(k));
    FeasibleInterval piece;
    const auto form = model.scalar_constraint_form(i, t, k);
    if (form && form->c2 >= 0.0) {
      piece = quadratic_sublevel(form->c0 + shift, form->c1, form->c2, acc.lo, acc.hi);
    } else {
      // Convex but without a closed form: locate the minimizer, then the two roots.
      auto c = [&](double v) {
        Eigen::VectorXd x(1);
        x(0) = v;
        return model.constraint(i, t, x)(idx(k)) + shift;
      };
      const double x_min = golden_min(c, acc.lo, acc.hi, 1e-13 * (1.0 + acc.hi - acc.lo));
      const double c_min = c(x_min);
      if (c_min > kTouchTolerance) {
        piece = {0, 1.0, 0.0};
      } else if (c_min > 0.0) {
        // Minimum touches zero to rounding: the slice is a single point.
        piece = {0, x_min, x_min};
      } else {
        const double tol = 1e-14 * (1.0 + std::abs(acc.hi) + std::abs(acc.lo));
        piece.lo = c(acc.lo) <= 0.0 ? acc.lo : bisect_root(c, x_min, acc.lo, tol);
        piece.hi = c(acc.hi) <= 0.0 ? acc.hi : bisect_root(c, x_min, acc.hi, tol);
      }
    }
    acc.lo = std::max(acc.lo, piece.lo);
    acc.hi = std::min(acc.hi, piece.hi);
  }
  acc.t = t;
  return acc;
}

double comparator_objective(const GameModel& model, const ComparatorInputs& in, std::size_t horizon,
                            const Eigen::VectorXd& x) {
  const std::size_t i = in.player, n = model.aggregate_dim();
  const Eigen::VectorXd own = model.contribution(i, x) / static_cast<double>(model.players());
  double sum = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) sum += model.cost(i, t, x, own + row(in.others_aggregate, t, n));
  return sum;
}

namespace {

double max_violation_at(const GameModel& model, const ComparatorInputs& in, std::size_t horizon,
                        const Eigen::VectorXd& x, const std::vector<std::size_t>& skip = {}) {
  const std::size_t m = model.constraint_dim();
  double worst = 0.0;
  auto next_skip = skip.begin();
  for (std::size_t t = 1; t <= horizon && m > 0; ++t) {
    if (next_skip != skip.end() && *next_skip == t) {
      ++next_skip;
      continue;
    }
    worst = std::max(worst, (model.constraint(in.player, t, x) + row(in.others_constraint, t, m)).maxCoeff());
  }
  return worst;
}

Eigen::VectorXd objective_gradient(const GameModel& model, const ComparatorInputs& in, std::size_t horizon,
                                   const Eigen::VectorXd& x) {
  const std::size_t i = in.player, n = model.aggregate_dim();
  const Eigen::VectorXd own = model.contribution(i, x) / static_cast<double>(model.players());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
  for (std::size_t t = 1; t <= horizon; ++t)
    grad += pseudo_gradient(model, i, t, x, own + row(in.others_aggregate, t, n));
  return grad;
}

// Augmented Lagrangian with projected-gradient inner solves.
ComparatorSolution augmented_lagrangian(const GameModel& model, const ComparatorInputs& in,
                                        std::size_t horizon, double tol) {
  const std::size_t i = in.player, m = model.constraint_dim();
  const auto& set = model.local_set(i);
  const double scale = static_cast<double>(horizon);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(idx(m), idx(horizon));
  double rho = 10.0;
  Eigen::VectorXd x = set.project(set.center());

  auto value = [&](const Eigen::VectorXd& v) {
    double s = comparator_objective(model, in, horizon, v) / scale;
    for (std::size_t t = 1; t <= horizon; ++t) {
      const Eigen::VectorXd h = model.constraint(i, t, v) + row(in.others_constraint, t, m);
      for (std::size_t k = 0; k < m; ++k) {
        const double l = lambda(idx(k), idx(t - 1));
        const double a = std::max(0.0, l + rho * h(idx(k)));
        s += (a * a - l * l) / (2.0 * rho * scale);
      }
    }
    return s;
  };
  auto gradient = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd g = objective_gradient(model, in, horizon, v) / scale;
    for (std::size_t t = 1; t <= horizon; ++t) {
      const auto c = constraint_eval(model, i, t, v);
      const Eigen::VectorXd h = c.value + row(in.others_constraint, t, m);
      Eigen::VectorXd a(idx(m));
      for (std::size_t k = 0; k < m; ++k) a(idx(k)) = std::max(0.0, lambda(idx(k), idx(t - 1)) + rho * h(idx(k)));
      g += c.jacobian * a / scale;
    }
    return g;
  };

  for (int outer = 0; outer < 60; ++outer) {
    double step = 1.0;
    for (int inner = 0; inner < 5000; ++inner) {
      const Eigen::VectorXd g = gradient(x);
      if ((x - set.project(x - g)).norm() <= tol) break;
      const double f0 = value(x);
      Eigen::VectorXd next;
      for (int bt = 0; bt < 60; ++bt) {
        next = set.project(x - step * g);
        if (value(next) <= f0 - 0.5 / step * (next - x).squaredNorm() + 1e-15 * std::abs(f0)) break;
        step *= 0.5;
      }
      if ((next - x).norm() <= 1e-15 * (1.0 + x.norm())) break;
      x = next;
      step *= 2.0;
    }
    for (std::size_t t = 1; t <= horizon; ++t) {
      const Eigen::VectorXd h = model.constraint(i, t, x) + row(in.others_constraint, t, m);
      for (std::size_t k = 0; k < m; ++k)
        lambda(idx(k), idx(t - 1)) = std::max(0.0, lambda(idx(k), idx(t - 1)) + rho * h(idx(k)));
    }
    if (max_violation_at(model, in, horizon, x) <= tol) break;
    rho = std::min(rho * 4.0, 1e10);
  }

  ComparatorSolution sol;
  sol.method = "augmented lagrangian";
  sol.x_star = x;
  sol.max_violation = max_violation_at(model, in, horizon, x);
  sol.feasible = sol.max_violation <= 1e-6;
  return sol;
}

}  // namespace

ComparatorSolution solve_comparator(const GameModel& model, const ComparatorInputs& in, std::size_t horizon,
                                    double tol, EmptyStepPolicy policy) {
  if (horizon == 0 || horizon > in.horizon) throw PreconditionError("comparator horizon out of range");
  const std::size_t i = in.player, m = model.constraint_dim();
  const Box* box = model.local_set(i).as_box();
  if (policy == EmptyStepPolicy::kSkipEmptySteps && (model.dim(i) != 1 || !box))
    throw PreconditionError("skipping empty steps needs a scalar box decision");

  ComparatorSolution sol;
  if (model.dim(i) == 1 && box) {
    sol.method = "feasible intervals + golden section";
    sol.intersection = {0, box->lower(0), box->upper(0)};
    sol.intervals.reserve(horizon);
    for (std::size_t t = 1; t <= horizon; ++t) {
      const auto piece = scalar_feasible_interval(model, i, t, row(in.others_constraint, t, m));
      sol.intervals.push_back(piece);
      if (piece.empty() && policy == EmptyStepPolicy::kSkipEmptySteps) {
        sol.skipped_steps.push_back(t);
        continue;
      }
      sol.intersection.lo = std::max(sol.intersection.lo, piece.lo);
      sol.intersection.hi = std::min(sol.intersection.hi, piece.hi);
    }
    Eigen::VectorXd x(1);
    if (sol.intersection.empty()) {
      sol.feasible = false;
      x(0) = 0.5 * (sol.intersection.lo + sol.intersection.hi);
      x = model.local_set(i).project(x);
    } else {
      auto f = [&](double v) {
        Eigen::VectorXd p(1);
        p(0) = v;
        return comparator_objective(model, in, horizon, p);
      };
      x(0) = sol.intersection.lo == sol.intersection.hi
                 ? sol.intersection.lo
                 : golden_min(f, sol.intersection.lo, sol.intersection.hi, std::max(tol, 1e-15));
      // Golden section stops inside the bracket; snap to an endpoint when it wins.
      for (double end : {sol.intersection.lo, sol.intersection.hi})
        if (f(end) < f(x(0))) x(0) = end;
    }
    sol.x_star = x;
    sol.max_violation = max_violation_at(model, in, horizon, x, sol.skipped_steps);
  } else {
    sol = augmented_lagrangian(model, in, horizon, std::max(tol, 1e-10));
  }
  sol.player = i;
  sol.horizon = horizon;
  sol.objective = comparator_objective(model, in, horizon, sol.x_star);
  return sol;
}

}  // namespace pushgne
