#include "pushgne/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace pushgne {

namespace {
using Index = Eigen::Index;
Index idx(std::size_t i) { return static_cast<Index>(i); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::vector<std::size_t> checkpoints(std::size_t horizon, std::size_t first) {
  std::vector<std::size_t> out;
  for (std::size_t p = 1; p <= horizon; p *= 2)
    if (p >= first) out.push_back(p);
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

RegretEntry regret(const ComparatorInputs& in, const ComparatorSolution& comp) {
  if (comp.player != in.player) throw PreconditionError("comparator belongs to another player");
  if (comp.horizon > in.horizon) throw PreconditionError("comparator horizon exceeds the inputs");
  RegretEntry e;
  e.player = in.player;
  e.horizon = comp.horizon;
  double own = 0.0;
  for (std::size_t k = 0; k < comp.horizon; ++k) own += in.own_cost[k];
  e.regret = own - comp.objective;
  e.comparator_feasible = comp.feasible;
  e.skipped_steps = comp.skipped_steps.size();
  e.comparator = comp.x_star;
  e.comparator_method = comp.method;
  return e;
}

RegretEntry regret(const GameModel& model, const MetricsLog& log, std::size_t i, std::size_t horizon,
                   EmptyStepPolicy policy) {
  const auto in = comparator_inputs(model, log, i, horizon);
  return regret(in, solve_comparator(model, in, horizon, 1e-10, policy));
}

RegretReport regret_report(const GameModel& model, const MetricsLog& log, const std::vector<std::size_t>& horizons,
                           EmptyStepPolicy policy) {
  RegretReport rep;
  rep.horizons = horizons;
  if (horizons.empty()) return rep;
  const std::size_t last = *std::max_element(horizons.begin(), horizons.end());
  if (horizons.front() == 0) throw PreconditionError("checkpoint horizons start at 1");
  const auto rg = violation(log);
  for (std::size_t i = 0; i < model.players(); ++i) {
    const auto in = comparator_inputs(model, log, i, last);
    const bool scalar_box = model.dim(i) == 1 && model.local_set(i).as_box();
    const auto p = scalar_box ? policy : EmptyStepPolicy::kStrict;
    std::vector<RegretEntry> row;
    for (std::size_t h : horizons) row.push_back(regret(in, solve_comparator(model, in, h, 1e-10, p)));
    rep.players.push_back(std::move(row));
  }
  for (std::size_t h : horizons) rep.violation.push_back(rg[h]);
  return rep;
}

std::vector<double> violation(const std::vector<Eigen::VectorXd>& g) {
  std::vector<double> out{0.0};
  if (g.empty()) return out;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(g.front().size());
  for (const auto& v : g) {
    if (v.size() != sum.size()) throw DimensionMismatch("constraint values change dimension");
    sum += v;
    out.push_back(sum.cwiseMax(0.0).norm());
  }
  return out;
}

std::vector<double> violation(const MetricsLog& log) {
  std::vector<double> out{0.0};
  out.reserve(log.steps + 1);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(idx(log.constraint_dim));
  for (std::size_t t = 1; t <= log.steps; ++t) {
    sum += log.g(t);
    out.push_back(sum.cwiseMax(0.0).norm());
  }
  return out;
}

ConsensusSeries consensus_errors(const MetricsLog& log) {
  ConsensusSeries s;
  const std::size_t n_players = log.players;
  const double n_real = static_cast<double>(n_players);
  auto series = [&](auto pre, auto mixed, std::size_t width, std::vector<double>& sum_out,
                    std::vector<double>& max_out) {
    sum_out.reserve(log.steps);
    max_out.reserve(log.steps);
    for (std::size_t t = 0; t < log.steps; ++t) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(idx(width));
      for (std::size_t i = 0; i < n_players; ++i) mean += pre(t, i);
      mean /= n_real;
      double sum = 0.0, worst = 0.0;
      for (std::size_t i = 0; i < n_players; ++i) {
        const double e = (mixed(t, i) / log.z_next_at(t, i) - mean).norm();
        sum += e;
        worst = std::max(worst, e);
      }
      sum_out.push_back(sum);
      max_out.push_back(worst);
    }
  };
  series([&](std::size_t t, std::size_t i) { return log.mu_at(t, i); },
         [&](std::size_t t, std::size_t i) { return log.mu_hat_at(t, i); }, log.constraint_dim, s.dual, s.dual_max);
  series([&](std::size_t t, std::size_t i) { return log.sigma_at(t, i); },
         [&](std::size_t t, std::size_t i) { return log.sigma_hat_at(t, i); }, log.aggregate_dim, s.tracker,
         s.tracker_max);
  return s;
}

ResidualSeries residuals(const MetricsLog& log, const JointDecision& x_star) {
  if (x_star.size() != log.players) throw DimensionMismatch("solution has the wrong player count");
  for (std::size_t i = 0; i < log.players; ++i)
    if (static_cast<std::size_t>(x_star[i].size()) != log.dims[i])
      throw DimensionMismatch("solution entry " + std::to_string(i) + " has the wrong dimension");
  const Eigen::VectorXd star = stack_joint(x_star);
  ResidualSeries r;
  r.distance.reserve(log.steps);
  r.averaged_squared.reserve(log.steps);
  Eigen::VectorXd running = Eigen::VectorXd::Zero(star.size());
  for (std::size_t t = 1; t <= log.steps; ++t) {
    const Eigen::Map<const Eigen::VectorXd> xt(log.decisions.data() + t * log.total_dim, star.size());
    r.distance.push_back((xt - star).norm());
    running += xt;
    r.averaged_squared.push_back((running / static_cast<double>(t) - star).squaredNorm());
  }
  return r;
}

RateFit rate_fit(const std::vector<double>& times, const std::vector<double>& values, double t_min) {
  if (times.size() != values.size()) throw DimensionMismatch("rate fit needs one time per value");
  RateFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t in_window = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (times[k] < t_min || !(times[k] > 0.0)) continue;
    ++in_window;
    if (!(values[k] > 0.0) || !std::isfinite(values[k])) {
      ++fit.dropped;
      continue;
    }
    const double x = std::log(times[k]), y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++fit.used;
  }
  if (fit.used < 2) throw PreconditionError("rate fit needs at least two positive values after t_min");
  const double n = static_cast<double>(fit.used);
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  if (!(vx > 0.0)) throw PreconditionError("rate fit needs at least two distinct times");
  fit.slope = cxy / vx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  if (fit.dropped)
    fit.warning = "dropped " + std::to_string(fit.dropped) + " of " + std::to_string(in_window) +
                  " nonpositive values; fit covers the positive subsequence";
  return fit;
}

RateFit rate_fit(const std::vector<double>& series, double t_min) {
  std::vector<double> times(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) times[k] = static_cast<double>(k + 1);
  return rate_fit(times, series, t_min);
}

HpSample hp_sample(const MetricsLog& log, const std::vector<Eigen::VectorXd>& comparators) {
  if (comparators.size() != log.players) throw DimensionMismatch("need one comparator per player");
  HpSample s;
  s.martingale.assign(log.players, 0.0);
  for (std::size_t t = 1; t < log.steps; ++t) {
    const double a = log.alpha[t];
    s.alpha_squared_sum += a * a;
    for (std::size_t i = 0; i < log.players; ++i) {
      // noise = q - p, so p - q = -noise.
      s.martingale[i] -= a * log.noise_at(t, i).dot(log.x(t, i) - comparators[i]);
    }
  }
  return s;
}

HpBound hp_default_bound(double big_l, double iota) {
  return [big_l, iota](const HpSample& s, double delta) {
    return 2.0 * big_l * iota * (s.alpha_squared_sum + std::log(1.0 / delta));
  };
}

HpReport hp_quantile_check(const std::vector<HpSample>& batch, double delta, const HpBound& bound) {
  if (batch.size() < 50)
    throw PreconditionError("high-probability check needs K >= 50 runs, got " + std::to_string(batch.size()));
  if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("delta must lie in (0, 1]");
  HpReport rep;
  rep.runs = batch.size();
  rep.delta = delta;
  const double k = static_cast<double>(batch.size());
  rep.tolerance = delta + 2.0 * std::sqrt(delta * (1.0 - delta) / k);
  const std::size_t n_players = batch.front().martingale.size();
  std::vector<std::size_t> exceed(n_players, 0);
  for (const auto& s : batch) {
    if (s.martingale.size() != n_players) throw DimensionMismatch("batch mixes player counts");
    const double b = bound(s, delta);
    for (std::size_t i = 0; i < n_players; ++i)
      if (s.martingale[i] > b) ++exceed[i];
  }
  for (std::size_t c : exceed) rep.exceed_fraction.push_back(static_cast<double>(c) / k);
  for (double f : rep.exceed_fraction) rep.worst_fraction = std::max(rep.worst_fraction, f);
  rep.passed = rep.worst_fraction <= rep.tolerance;
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<std::string> series_csv_header(const MetricsLog& log) {
  std::vector<std::string> h{"t"};
  for (std::size_t i = 0; i < log.players; ++i) {
    if (log.dims[i] == 1) h.push_back("x_" + std::to_string(i));
    else
      for (std::size_t k = 0; k < log.dims[i]; ++k) h.push_back("x_" + std::to_string(i) + "_" + std::to_string(k));
  }
  for (std::size_t k = 0; k < log.constraint_dim; ++k) h.push_back("g_" + std::to_string(k));
  for (std::size_t i = 0; i < log.players; ++i) h.push_back("z_" + std::to_string(i));
  h.insert(h.end(), {"consensus_dual", "consensus_tracker", "r_estimate", "monitor_flags"});
  return h;
}

void write_series_csv(std::ostream& out, const MetricsLog& log) {
  const auto header = series_csv_header(log);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  const auto cons = consensus_errors(log);
  std::string line;
  for (std::size_t t = 0; t <= log.steps; ++t) {
    line = std::to_string(t);
    for (std::size_t d = 0; d < log.total_dim; ++d) line += "," + fmt(log.decisions[t * log.total_dim + d]);
    for (std::size_t k = 0; k < log.constraint_dim; ++k)
      line += "," + fmt(log.constraint_totals[t * log.constraint_dim + k]);
    if (t < log.steps) {
      for (std::size_t i = 0; i < log.players; ++i) line += "," + fmt(log.z_next_at(t, i));
      line += "," + fmt(cons.dual[t]) + "," + fmt(cons.tracker[t]) + "," + fmt(log.r_estimate[t]) + "," +
              std::to_string(log.monitor_flags[t]);
    } else {
      line += std::string(log.players + 4, ',');
    }
    out << line << '\n';
  }
}

MetricsLog read_series_csv(std::istream& in, const GameModel& model) {
  MetricsLog log = MetricsLog::for_model(model);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("series file is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto expected = series_csv_header(log);
  if (header != expected) throw ConfigError("series file header does not match the model");
  const std::size_t width = log.total_dim + log.constraint_dim;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    if (std::stoul(cell) != row)
      throw ConfigError("series file row " + std::to_string(row + 2) + ": expected t = " + std::to_string(row));
    for (std::size_t k = 0; k < width; ++k) {
      if (!std::getline(ss, cell, ','))
        throw ConfigError("series file row " + std::to_string(row + 2) + " is short");
      const double v = std::stod(cell);
      (k < log.total_dim ? log.decisions : log.constraint_totals).push_back(v);
    }
    ++row;
  }
  if (row < 2) throw ConfigError("series file has no steps");
  log.steps = row - 1;
  return log;
}

}  // namespace pushgne
