#include "pushgne/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "pushgne/rng.hpp"

namespace pushgne {

namespace {

constexpr double kColumnTolerance = 1e-12;

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::vector<bool> reach(const Adjacency& a, std::size_t source, bool forward) {
  const std::size_t n = static_cast<std::size_t>(a.rows());
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{source};
  seen[source] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      // a(i, j): edge j -> i.
      const bool edge = forward ? a(idx(v), idx(u)) : a(idx(u), idx(v));
      if (edge && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  out << subject << ": " << (ok() ? "PASS" : "FAIL") << '\n';
  for (const auto& c : checks) {
    out << "  [" << (c.passed ? "pass" : "FAIL") << "] " << c.name;
    if (c.first_offending_index) out << " (first offending index " << *c.first_offending_index << ')';
    if (!c.detail.empty()) out << ": " << c.detail;
    out << '\n';
  }
  return out.str();
}

Adjacency adjacency_from_edges(std::size_t n, const std::vector<Edge>& edges,
                               bool add_self_loops) {
  Adjacency a = Adjacency::Constant(idx(n), idx(n), false);
  for (const auto& e : edges) {
    if (e.from >= n || e.to >= n)
      throw InvalidGraph("edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                         " out of range for " + std::to_string(n) + " nodes");
    a(idx(e.to), idx(e.from)) = true;
  }
  if (add_self_loops)
    for (std::size_t i = 0; i < n; ++i) a(idx(i), idx(i)) = true;
  return a;
}

double WeightMatrix::column_sum_error() const {
  if (entries_.size() == 0) return 0.0;
  return (entries_.colwise().sum().array() - 1.0).abs().maxCoeff();
}

double WeightMatrix::min_positive_entry() const {
  double m = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < entries_.cols(); ++j)
    for (Index i = 0; i < entries_.rows(); ++i)
      if (entries_(i, j) > 0.0) m = std::min(m, entries_(i, j));
  return m;
}

Adjacency WeightMatrix::support() const { return (entries_.array() > 0.0).matrix(); }

WeightMatrix build_weights(const Adjacency& adjacency) {
  const Index n = adjacency.rows();
  if (n < 1 || adjacency.cols() != n) throw InvalidGraph("adjacency must be square and nonempty");
  for (Index i = 0; i < n; ++i)
    if (!adjacency(i, i)) throw InvalidGraph("node " + std::to_string(i) + " has no self-loop");

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const double out_degree = static_cast<double>(adjacency.col(j).count());
    for (Index i = 0; i < n; ++i)
      if (adjacency(i, j)) w(i, j) = 1.0 / out_degree;
  }
  return WeightMatrix(std::move(w));
}

GraphSchedule::GraphSchedule(std::string name, std::vector<WeightMatrix> cycle,
                             std::size_t window)
    : name_(std::move(name)), window_(window), cycle_(std::move(cycle)) {
  if (cycle_.empty()) throw InvalidGraph("schedule has no matrices");
  if (window_ == 0) throw InvalidGraph("connectivity window must be positive");
  nodes_ = cycle_.front().size();
}

GraphSchedule::GraphSchedule(std::string name, std::size_t nodes, Generator generator,
                             std::size_t window, std::size_t validation_horizon)
    : name_(std::move(name)),
      nodes_(nodes),
      window_(window),
      generator_(std::move(generator)),
      horizon_(validation_horizon) {
  if (!generator_) throw InvalidGraph("schedule generator is empty");
  if (window_ == 0) throw InvalidGraph("connectivity window must be positive");
  if (horizon_ == 0) throw InvalidGraph("validation horizon must be positive");
}

std::size_t GraphSchedule::period() const noexcept { return cyclic() ? cycle_.size() : horizon_; }

WeightMatrix GraphSchedule::at(std::size_t t) const {
  if (cyclic()) return cycle_[t % cycle_.size()];
  return generator_(t);
}

double GraphSchedule::min_weight() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < period(); ++t) m = std::min(m, at(t).min_positive_entry());
  return m;
}

bool strongly_connected(const Adjacency& support) {
  const std::size_t n = static_cast<std::size_t>(support.rows());
  if (n == 0) return false;
  const auto fwd = reach(support, 0, true);
  const auto bwd = reach(support, 0, false);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

ValidationReport validate_schedule(const GraphSchedule& schedule) {
  ValidationReport report;
  report.subject = "graph schedule '" + schedule.name() + "'";
  const std::size_t n = schedule.nodes();
  const std::size_t period = schedule.period();

  std::vector<WeightMatrix> mats;
  mats.reserve(period);
  for (std::size_t t = 0; t < period; ++t) mats.push_back(schedule.at(t));

  std::optional<std::size_t> bad_shape;
  for (std::size_t t = 0; t < period && !bad_shape; ++t)
    if (mats[t].size() != n || static_cast<std::size_t>(mats[t].matrix().cols()) != n) bad_shape = t;
  report.add("dimensions", !bad_shape, std::to_string(n) + " nodes", bad_shape);
  if (bad_shape) return report;

  std::optional<std::size_t> bad_sign, bad_diag, bad_column;
  double worst_column = 0.0;
  for (std::size_t t = 0; t < period; ++t) {
    const auto& w = mats[t].matrix();
    if (!bad_sign && (w.array() < 0.0).any()) bad_sign = t;
    if (!bad_diag && (w.diagonal().array() <= 0.0).any()) bad_diag = t;
    const double err = mats[t].column_sum_error();
    worst_column = std::max(worst_column, err);
    if (!bad_column && !(err <= kColumnTolerance)) bad_column = t;
  }
  report.add("nonnegative", !bad_sign, {}, bad_sign);
  report.add("self-loops", !bad_diag, "every diagonal weight positive", bad_diag);

  const double w_min = schedule.min_weight();
  const bool w_ok = w_min > 0.0 && w_min <= 1.0;
  {
    std::ostringstream d;
    d << "minimum nonzero weight " << w_min;
    report.add("min-weight", w_ok, d.str());
  }
  {
    std::ostringstream d;
    d << "max column-sum error " << worst_column << " (tolerance " << kColumnTolerance << ')';
    report.add("column-stochastic", !bad_column, d.str(), bad_column);
  }

  // Union over [s, s+U) for every start in one period (wrapping for cycles).
  std::optional<std::size_t> bad_window;
  const std::size_t u = schedule.window();
  const std::size_t starts = schedule.cyclic() ? period : (period >= u ? period - u + 1 : 1);
  for (std::size_t s = 0; s < starts && !bad_window; ++s) {
    Adjacency uni = Adjacency::Constant(idx(n), idx(n), false);
    for (std::size_t l = 0; l < u; ++l) {
      const std::size_t t = s + l;
      const Adjacency sup =
          schedule.cyclic() ? mats[t % period].support() : schedule.at(t).support();
      uni = uni.array() || sup.array();
    }
    if (!strongly_connected(uni)) bad_window = s;
  }
  std::string detail = "window U=" + std::to_string(u);
  if (!schedule.cyclic())
    detail += ", sampled validation over horizon " + std::to_string(period);
  report.add("connectivity", !bad_window, detail, bad_window);
  return report;
}

Eigen::MatrixXd mix(const Eigen::MatrixXd& values, const WeightMatrix& w) {
  if (values.rows() != w.matrix().cols())
    throw DimensionMismatch("mix: values have " + std::to_string(values.rows()) +
                            " rows, weights are " + std::to_string(w.size()) + " wide");
  return w.matrix() * values;
}

MixConstants MixConstants::initial(std::size_t nodes) {
  MixConstants c;
  c.product = Eigen::VectorXd::Ones(idx(nodes));
  c.r_estimate = 1.0;
  return c;
}

MixConstants update_mix_constants(const MixConstants& state, const WeightMatrix& w) {
  MixConstants next = state;
  next.product = w.matrix() * state.product;
  next.r_estimate = std::min(state.r_estimate, next.product.minCoeff());
  return next;
}

double analytic_theta_ceiling(std::size_t nodes, std::size_t window) {
  const double nu = static_cast<double>(nodes * window);
  const double log_term = std::log1p(-std::exp(-nu * std::log(static_cast<double>(nodes))));
  return std::exp(log_term / nu);
}

ThetaFit estimate_theta(const GraphSchedule& schedule, std::size_t max_steps) {
  const std::size_t n = schedule.nodes();
  ThetaFit fit;
  if (n < 2) {
    fit.theta = 0.0;
    fit.r_squared = 1.0;
    return fit;
  }
  Eigen::VectorXd v(idx(n));
  for (std::size_t i = 0; i < n; ++i) v(idx(i)) = static_cast<double>(i);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(idx(n));
  const double mean = v.mean();
  const double floor = 1e-11 * (v.array() - mean).abs().maxCoeff();

  for (std::size_t t = 0; t < max_steps; ++t) {
    const auto w = schedule.at(t);
    v = w.matrix() * v;
    z = w.matrix() * z;
    const double err = (v.array() / z.array() - mean).abs().maxCoeff();
    if (err <= floor) break;
    fit.error_trace.push_back(err);
  }

  // Skip the first window: the union graph has not mixed every node yet.
  const std::size_t burn = std::min(schedule.window(), fit.error_trace.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t m = 0;
  for (std::size_t t = burn; t < fit.error_trace.size(); ++t) {
    const double x = static_cast<double>(t);
    const double y = std::log(fit.error_trace[t]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++m;
  }
  fit.steps_used = m;
  if (m < 2) {
    fit.theta = 0.0;
    fit.r_squared = 1.0;
    return fit;
  }
  const double dm = static_cast<double>(m);
  const double cov = sxy - sx * sy / dm;
  const double varx = sxx - sx * sx / dm;
  const double vary = syy - sy * sy / dm;
  const double slope = cov / varx;
  fit.theta = std::exp(slope);
  fit.r_squared = vary > 0 ? (cov * cov) / (varx * vary) : 1.0;
  return fit;
}

GraphSchedule paper_fig1_schedule(std::size_t n) {
  if (n == 0) throw InvalidGraph("paper-fig1 needs at least one node");
  std::vector<std::vector<Edge>> slots(4);
  for (std::size_t i = 0; i + 1 < n; ++i) slots[i % 2].push_back({i, i + 1});
  if (n >= 2) slots[2].push_back({n - 1, 0});
  if (n >= 3) slots[2].push_back({0, n / 2});
  for (std::size_t k = 2; k < n; k += 2) slots[3].push_back({k, 0});
  if (n == 2) slots[3].push_back({1, 0});
  if (n >= 4) slots[3].push_back({n - 1, 1});

  std::vector<WeightMatrix> cycle;
  for (const auto& edges : slots) cycle.push_back(build_weights(adjacency_from_edges(n, edges, true)));
  return GraphSchedule("paper-fig1", std::move(cycle), 4);
}

GraphSchedule complete_schedule(std::size_t n) {
  return GraphSchedule("complete",
                       {build_weights(Adjacency::Constant(idx(n), idx(n), true))}, 1);
}

GraphSchedule ring_schedule(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n && n > 1; ++i) edges.push_back({i, (i + 1) % n});
  return GraphSchedule("ring", {build_weights(adjacency_from_edges(n, edges, true))}, 1);
}

GraphSchedule random_ring_schedule(std::size_t n, std::uint64_t seed, double p,
                                   std::size_t validation_horizon) {
  const CounterRng rng(seed);
  auto gen = [n, rng, p](std::size_t t) {
    Adjacency a = Adjacency::Constant(idx(n), idx(n), false);
    for (std::size_t i = 0; i < n; ++i) a(idx(i), idx(i)) = true;
    if (n > 1) a(idx((t + 1) % n), idx(t % n)) = true;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        if (i != j && rng.uniform01(streams::kGraph, j, t, i) < p) a(idx(i), idx(j)) = true;
    return build_weights(a);
  };
  return GraphSchedule("random-ring", n, std::move(gen), std::max<std::size_t>(n, 1),
                       validation_horizon);
}

GraphSchedule builtin_schedule(const std::string& id, std::size_t n, std::uint64_t seed) {
  if (id == "paper-fig1") return paper_fig1_schedule(n);
  if (id == "complete") return complete_schedule(n);
  if (id == "ring") return ring_schedule(n);
  if (id == "random-ring") return random_ring_schedule(n, seed, 0.2);
  throw ConfigError("unknown graph schedule id '" + id + "'");
}

GraphSchedule parse_schedule(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("graph file: ") + e.what());
  }
  try {
    const std::size_t n = doc.at("nodes").get<std::size_t>();
    const std::size_t window = doc.value("window", std::size_t{1});
    const std::string name = doc.value("name", std::string("file"));
    const auto& slots = doc.at("slots");
    if (!slots.is_array() || slots.empty()) throw ConfigError("graph file: 'slots' must be a nonempty array");

    std::vector<WeightMatrix> cycle;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const auto& slot = slots[s];
      if (slot.contains("matrix")) {
        const auto rows = slot.at("matrix").get<std::vector<std::vector<double>>>();
        if (rows.size() != n) throw ConfigError("graph file: slot " + std::to_string(s) + " matrix has wrong row count");
        Eigen::MatrixXd w(idx(n), idx(n));
        for (std::size_t i = 0; i < n; ++i) {
          if (rows[i].size() != n)
            throw ConfigError("graph file: slot " + std::to_string(s) + " row " + std::to_string(i) + " has wrong length");
          for (std::size_t j = 0; j < n; ++j) w(idx(i), idx(j)) = rows[i][j];
        }
        cycle.emplace_back(std::move(w));
      } else if (slot.contains("edges")) {
        std::vector<Edge> edges;
        for (const auto& e : slot.at("edges")) {
          const auto pair = e.get<std::vector<std::size_t>>();
          if (pair.size() != 2) throw ConfigError("graph file: edges are [from, to] pairs");
          edges.push_back({pair[0], pair[1]});
        }
        const bool loops = slot.value("self_loops", false);
        try {
          cycle.push_back(build_weights(adjacency_from_edges(n, edges, loops)));
        } catch (const InvalidGraph& e) {
          throw InvalidGraph("graph file slot " + std::to_string(s) + ": " + e.what());
        }
      } else {
        throw ConfigError("graph file: slot " + std::to_string(s) + " needs 'edges' or 'matrix'");
      }
    }
    return GraphSchedule(name, std::move(cycle), window);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("graph file: ") + e.what());
  }
}

GraphSchedule load_schedule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schedule(buf.str());
}

}  // namespace pushgne
