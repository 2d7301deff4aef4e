#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pushgne/game.hpp"
#include "pushgne/log.hpp"
#include "pushgne/solvers.hpp"

namespace pushgne {

/// Powers of two 2^k <= horizon, followed by horizon itself if it is not one.
std::vector<std::size_t> checkpoints(std::size_t horizon, std::size_t first = 1);

/// R_i(T) for T = comparator.horizon, from the inputs' recorded own costs.
struct RegretEntry {
  std::size_t player = 0;
  std::size_t horizon = 0;
  double regret = 0.0;
  bool comparator_feasible = true;
  std::size_t skipped_steps = 0;  // steps whose constraint the comparator ignored
  Eigen::VectorXd comparator;
  std::string comparator_method;
};

RegretEntry regret(const ComparatorInputs& inputs, const ComparatorSolution& comparator);
/// Convenience form solving the comparator over the first `horizon` steps.
RegretEntry regret(const GameModel& model, const MetricsLog& log, std::size_t i, std::size_t horizon,
                   EmptyStepPolicy policy = EmptyStepPolicy::kStrict);

struct RegretReport {
  std::vector<std::size_t> horizons;
  std::vector<std::vector<RegretEntry>> players;  // [player][checkpoint]
  std::vector<double> violation;                  // R_g at each checkpoint

  double regret_rate(std::size_t i, std::size_t k) const {
    return players[i][k].regret / static_cast<double>(horizons[k]);
  }
  double violation_rate(std::size_t k) const { return violation[k] / static_cast<double>(horizons[k]); }
};

/// Early transients can leave a step with no feasible fixed decision at
/// all, so reports skip such steps by default. Players without scalar box
/// decisions always get the strict treatment.
RegretReport regret_report(const GameModel& model, const MetricsLog& log, const std::vector<std::size_t>& horizons,
                           EmptyStepPolicy policy = EmptyStepPolicy::kSkipEmptySteps);

/// R_g(T) = ||[sum_{t=1}^T g_t(x_t)]_+|| for T = 0..steps (entry 0 is 0).
std::vector<double> violation(const MetricsLog& log);
/// Same, from raw per-step totals g_1..g_T (row-major, m per step).
std::vector<double> violation(const std::vector<Eigen::VectorXd>& g_per_step);

struct ConsensusSeries {
  std::vector<double> dual;     // sum_i ||mu_hat_i/z_i - mean_j mu_j||, per transition
  std::vector<double> tracker;  // sum_i ||sigma_hat_i/z_i - mean_j sigma_j||
  std::vector<double> dual_max;
  std::vector<double> tracker_max;
};

ConsensusSeries consensus_errors(const MetricsLog& log);

struct ResidualSeries {
  std::vector<double> distance;           // ||x_t - x*||, t = 1..T at index t-1
  std::vector<double> averaged_squared;  // ||x_bar_T - x*||^2, T = 1..T at index T-1
};

ResidualSeries residuals(const MetricsLog& log, const JointDecision& x_star);
inline ResidualSeries residuals(const MetricsLog& log, const VgneSolution& vgne) {
  return residuals(log, vgne.x_star);
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t used = 0;
  std::size_t dropped = 0;  // nonpositive values skipped
  std::string warning;
};

/// Least squares of log(value) on log(t) over points with t >= t_min.
/// `values[k]` belongs to `times[k]`.
RateFit rate_fit(const std::vector<double>& times, const std::vector<double>& values, double t_min);
/// Series indexed from t = 1.
RateFit rate_fit(const std::vector<double>& series, double t_min);

// ---------------------------------------------------------------------------
// High-probability check of the martingale noise term

/// Per-run reduction of a log, so large batches need not be kept in memory.
struct HpSample {
  std::vector<double> martingale;  // per player: sum_{t>=1} alpha_t <p - q, x_{i,t} - x_i>
  double alpha_squared_sum = 0.0;  // sum_{t>=1} alpha_t^2 over the same steps
};

/// `comparators[i]` is player i's fixed decision x_i.
HpSample hp_sample(const MetricsLog& log, const std::vector<Eigen::VectorXd>& comparators);

using HpBound = std::function<double(const HpSample&, double delta)>;
/// 2 L iota (sum alpha^2 + ln(1/delta)).
HpBound hp_default_bound(double big_l, double iota);

struct HpReport {
  std::size_t runs = 0;
  double delta = 0.0;
  double tolerance = 0.0;               // delta + 2 sqrt(delta (1 - delta) / K)
  std::vector<double> exceed_fraction;  // per player
  double worst_fraction = 0.0;
  bool passed = false;
};

/// Throws PreconditionError for fewer than 50 runs or delta outside (0, 1].
HpReport hp_quantile_check(const std::vector<HpSample>& batch, double delta, const HpBound& bound);

// ---------------------------------------------------------------------------
// CSV

/// Per-run series: t, x_<i>[_<k>], g_<k>, z_<i>, consensus_dual, consensus_tracker,
/// r_estimate, monitor_flags. Row t covers x_t, g_t(x_t) and the mixing of
/// transition t (empty on the final row).
void write_series_csv(std::ostream& out, const MetricsLog& log);
std::vector<std::string> series_csv_header(const MetricsLog& log);

/// Reads the x and g columns of a series file back into a log skeleton
/// (decisions, constraint totals, steps). Other fields are left empty.
MetricsLog read_series_csv(std::istream& in, const GameModel& model);

}  // namespace pushgne
