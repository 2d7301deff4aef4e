#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles/reference.hpp"
#include "pushgne/engine.hpp"
#include "pushgne/metrics.hpp"
#include "pushgne/scenarios.hpp"

using namespace pushgne;
using testing_helpers::s;

namespace {

Eigen::VectorXd v2(double a, double b) { return Eigen::Vector2d(a, b); }

// Log skeleton holding only decisions and constraint totals.
MetricsLog decisions_log(const GameModel& model, const std::vector<JointDecision>& xs) {
  MetricsLog log = MetricsLog::for_model(model);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    for (const auto& xi : xs[t]) log.decisions.insert(log.decisions.end(), xi.data(), xi.data() + xi.size());
    const auto g = total_constraint(model, t, xs[t]);
    log.constraint_totals.insert(log.constraint_totals.end(), g.data(), g.data() + g.size());
  }
  log.steps = xs.size() - 1;
  return log;
}

}  // namespace

TEST_CASE("violation clips the cumulative sum") {
  CHECK(violation({v2(1, -2), v2(-1, 1)}).back() == 0.0);
  CHECK(violation({v2(3, -4)}).back() == 3.0);
  CHECK(violation({v2(3, 4)}).back() == 5.0);
  CHECK(violation({v2(1, 1), v2(2, 3)}) == std::vector<double>{0.0, std::sqrt(2.0), 5.0});
}

TEST_CASE("appending feasible steps never increases R_g") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Eigen::VectorXd> g;
    for (int k = 0; k < 10; ++k) g.push_back(v2(u(gen), u(gen)));
    const double before = violation(g).back();
    g.push_back(v2(-std::abs(u(gen)), -std::abs(u(gen))));
    CHECK(violation(g).back() <= before);
    CHECK(before >= 0.0);
  }
}

TEST_CASE("consensus errors") {
  QuadraticToyParams q;
  q.players = 2;
  const auto model = make_quadratic_toy(q, 1);
  MetricsLog log = MetricsLog::for_model(*model);
  log.steps = 1;
  SUBCASE("hand-built N = 2 state") {
    // mu = (1, 3), W = [[1, 1/2], [0, 1/2]], z = W 1 = (1.5, 0.5).
    log.mu = {1, 3};
    log.mu_hat = {2.5, 1.5};
    log.z_next = {1.5, 0.5};
    log.sigma = {0, 0};
    log.sigma_hat = {0, 0};
    const auto c = consensus_errors(log);
    CHECK(c.dual[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(c.dual_max[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.tracker[0] == 0.0);
  }
  SUBCASE("exact consensus") {
    log.mu = {2, 2};
    log.mu_hat = {2, 2};
    log.z_next = {1, 1};
    log.sigma = {-1, -1};
    log.sigma_hat = {-1, -1};
    const auto c = consensus_errors(log);
    CHECK(c.dual[0] == 0.0);
    CHECK(c.tracker[0] == 0.0);
  }
}

TEST_CASE("consensus errors are invariant under relabeling") {
  const auto m = make_electricity_market(4, 6);
  RunOptions opts;
  opts.horizon = 100;
  const auto log = run(*m, paper_fig1_schedule(4), StepsizeSchedule(PowerLaw{}), opts).log;
  MetricsLog perm = log;
  const std::size_t order[4] = {2, 0, 3, 1};
  for (std::size_t t = 0; t < log.steps; ++t)
    for (std::size_t i = 0; i < 4; ++i) {
      const std::size_t src = t * 4 + order[i], dst = t * 4 + i;
      perm.mu[dst] = log.mu[src];
      perm.mu_hat[dst] = log.mu_hat[src];
      perm.sigma[dst] = log.sigma[src];
      perm.sigma_hat[dst] = log.sigma_hat[src];
      perm.z_next[dst] = log.z_next[src];
    }
  const auto a = consensus_errors(log), b = consensus_errors(perm);
  for (std::size_t t = 0; t < log.steps; ++t) {
    CHECK(a.dual[t] == doctest::Approx(b.dual[t]).epsilon(1e-12));
    CHECK(a.tracker[t] == doctest::Approx(b.tracker[t]).epsilon(1e-12));
  }
}

TEST_CASE("residual series") {
  testing_helpers::ScalarGame g;
  g.targets = {0, 0};
  const auto model = g.build();
  const JointDecision star{s(1), s(2)};
  SUBCASE("constant at the solution") {
    const auto r = residuals(decisions_log(*model, {star, star, star}), star);
    for (double v : r.distance) CHECK(v == 0.0);
    for (double v : r.averaged_squared) CHECK(v == 0.0);
  }
  SUBCASE("symmetric pair") {
    const auto r = residuals(decisions_log(*model, {star, {s(0), s(2)}, {s(2), s(2)}}), star);
    CHECK(r.distance[0] == 1.0);
    CHECK(r.distance[1] == 1.0);
    CHECK(r.averaged_squared[1] == 0.0);
  }
  SUBCASE("scripted three steps") {
    const auto r = residuals(decisions_log(*model, {star, {s(4), s(6)}, {s(1), s(-1)}, {s(1), s(5)}}), star);
    CHECK(r.distance[0] == 5.0);
    CHECK(r.distance[1] == 3.0);
    CHECK(r.distance[2] == 3.0);
    // Running means: (4,6), (2.5,2.5), (2,10/3).
    CHECK(r.averaged_squared[0] == doctest::Approx(25.0));
    CHECK(r.averaged_squared[1] == doctest::Approx(2.25 + 0.25));
    CHECK(r.averaged_squared[2] == doctest::Approx(1.0 + 16.0 / 9.0));
  }
  CHECK_THROWS_AS(residuals(decisions_log(*model, {star, star}), JointDecision{s(1)}), DimensionMismatch);
}

TEST_CASE("rate fits") {
  std::vector<double> power(10000), flat(10000), inv(10000);
  std::mt19937_64 gen(12);
  std::normal_distribution<double> noise(0, 1e-6);
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double t = static_cast<double>(k + 1);
    power[k] = 3.0 * std::pow(t, -0.25);
    flat[k] = 2.0;
    inv[k] = 5.0 / t + noise(gen);
  }
  const auto a = rate_fit(power, 10);
  CHECK(std::abs(a.slope + 0.25) <= 1e-9);
  CHECK(a.intercept == doctest::Approx(std::log(3.0)));
  CHECK(std::abs(rate_fit(flat, 1).slope) <= 1e-12);
  CHECK(std::abs(rate_fit(inv, 1).slope + 1.0) <= 1e-2);

  std::vector<double> mixed = power;
  mixed[50] = 0.0;
  mixed[60] = -1.0;
  const auto w = rate_fit(mixed, 1);
  CHECK(w.dropped == 2);
  CHECK_FALSE(w.warning.empty());
  CHECK(std::abs(w.slope + 0.25) <= 1e-9);
}

TEST_CASE("regret definitions") {
  SUBCASE("comparator equal to a constant trajectory") {
    const auto m = make_electricity_market(3, 5);
    std::vector<JointDecision> traj;
    std::mt19937_64 gen(2);
    for (int t = 0; t < 6; ++t) traj.push_back({s(4.0), s(std::uniform_real_distribution<double>(0, 20)(gen)), s(1)});
    const auto in = comparator_inputs(*m, traj, 0);
    ComparatorSolution c;
    c.player = 0;
    c.horizon = 6;
    c.x_star = s(4.0);
    c.objective = comparator_objective(*m, in, 6, c.x_star);
    CHECK(std::abs(regret(in, c).regret) <= 1e-12);
  }
  SUBCASE("cost independent of own decision") {
    testing_helpers::ScalarGame g;
    g.targets = {0, 0};
    g.weight = 0;
    const auto m = g.build();
    const auto in = comparator_inputs(*m, {{s(1), s(2)}, {s(3), s(4)}}, 0);
    CHECK(regret(in, solve_comparator(*m, in, 2)).regret == 0.0);
  }
  SUBCASE("toy, scripted 3-step run, hand sum") {
    // f_i = (x - c_i)^2 + k sigma x with c = (1, -1), k = 0.5, sigma = (x1 + x2) / 2.
    testing_helpers::ScalarGame g;
    g.targets = {1, -1};
    g.coupling = 0.5;
    g.cap = 100;
    const auto m = g.build();
    const std::vector<JointDecision> traj{{s(0), s(0)}, {s(2), s(-2)}, {s(1), s(1)}};
    const auto in = comparator_inputs(*m, traj, 0);
    ComparatorSolution c;
    c.player = 0;
    c.horizon = 3;
    c.x_star = s(0.5);
    c.objective = comparator_objective(*m, in, 3, c.x_star);
    // Own: (1 + 0) + (1 + 0) + (0 + 0.5) = 2.5.
    // At 0.5: sigma = 0.25, -0.75, 0.75 -> 0.25 + 0.0625, 0.25 - 0.1875, 0.25 + 0.1875.
    CHECK(regret(in, c).regret == doctest::Approx(2.5 - (0.75 + 0.0625)).epsilon(1e-14));
  }
}

TEST_CASE("regret agrees with the hand-summed oracle and replays bit-exactly") {
  const auto m = make_electricity_market(4, 17);
  RunOptions opts;
  opts.horizon = 64;
  opts.seed = 3;
  const auto log = run(*m, paper_fig1_schedule(4), StepsizeSchedule(PowerLaw{}), opts).log;
  const auto rep = regret_report(*m, log, checkpoints(64));
  CHECK(rep.horizons == std::vector<std::size_t>{1, 2, 4, 8, 16, 32, 64});
  std::vector<oracle::Vec> traj;
  for (std::size_t t = 1; t <= 64; ++t) {
    oracle::Vec row;
    for (std::size_t j = 0; j < 4; ++j) row.push_back(log.x(t, j)(0));
    traj.push_back(row);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& e = rep.players[i].back();
    const double hand = oracle::regret(*m, traj, i, e.comparator(0));
    CHECK(e.regret == doctest::Approx(hand).epsilon(1e-10));
  }
  const auto rg = violation(log);
  for (std::size_t k = 0; k < rep.horizons.size(); ++k) CHECK(rep.violation[k] == rg[rep.horizons[k]]);

  std::stringstream csv;
  write_series_csv(csv, log);
  const auto back = read_series_csv(csv, *m);
  CHECK(back.steps == 64);
  CHECK(back.decisions == log.decisions);
  CHECK(back.constraint_totals == log.constraint_totals);
  const auto replay = regret_report(*m, back, checkpoints(64));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < rep.horizons.size(); ++k) CHECK(replay.players[i][k].regret == rep.players[i][k].regret);
}

TEST_CASE("checkpoints") {
  CHECK(checkpoints(100) == std::vector<std::size_t>{1, 2, 4, 8, 16, 32, 64, 100});
  CHECK(checkpoints(64, 8) == std::vector<std::size_t>{8, 16, 32, 64});
}

TEST_CASE("high-probability check") {
  const auto bound = hp_default_bound(10.0, 0.5);
  SUBCASE("zero noise") {
    MarketParams p;
    p.noise = NoiseModel::none();
    const auto m = make_electricity_market(3, 1, p);
    std::vector<HpSample> batch;
    for (std::uint64_t k = 0; k < 50; ++k) {
      RunOptions opts;
      opts.horizon = 20;
      opts.seed = k;
      const auto log = run(*m, paper_fig1_schedule(3), StepsizeSchedule(PowerLaw{}), opts).log;
      batch.push_back(hp_sample(log, {s(1), s(2), s(3)}));
      for (double v : batch.back().martingale) CHECK(v == 0.0);
    }
    const auto rep = hp_quantile_check(batch, 0.05, bound);
    CHECK(rep.worst_fraction == 0.0);
    CHECK(rep.passed);
  }
  SUBCASE("delta = 1 and small batches") {
    std::vector<HpSample> batch(60, HpSample{{1e9}, 1.0});
    const auto rep = hp_quantile_check(batch, 1.0, bound);
    CHECK(rep.tolerance >= 1.0);
    CHECK(rep.passed);
    batch.resize(49);
    CHECK_THROWS_AS(hp_quantile_check(batch, 0.05, bound), PreconditionError);
  }
}
