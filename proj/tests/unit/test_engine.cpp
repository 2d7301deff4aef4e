#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles/reference.hpp"
#include "pushgne/engine.hpp"
#include "pushgne/metrics.hpp"
#include "pushgne/scenarios.hpp"

using namespace pushgne;
using testing_helpers::s;

TEST_CASE("init defaults to the box center") {
  const auto m = make_electricity_market(5, 1);
  const auto st = init(*m);
  for (const auto& p : st.players) {
    CHECK(p.x(0) == 10.0);
    CHECK(p.z == 1.0);
    CHECK(p.mu(0) == 0.0);
    CHECK(p.sigma(0) == 50.0);
  }
  CHECK_THROWS_AS(init(*m, JointDecision(5, s(30))), DomainError);
}

TEST_CASE("one hand-evaluated step") {
  testing_helpers::ScalarGame g;
  g.targets = {0.0};
  g.weight = 0.5;
  g.lo = -1;
  g.hi = 1;
  g.constraint_free = true;
  const auto model = g.build();
  auto st = init(*model, JointDecision{s(1.0)});
  st = step(st, WeightMatrix(Eigen::MatrixXd::Identity(1, 1)), StepSizes{1, 1, 1}, *model, NoiseSource(0));
  CHECK(st.players[0].x(0) == 0.0);
  CHECK(st.players[0].mu(0) == 0.0);
  CHECK(st.players[0].z == 1.0);
  CHECK(st.players[0].sigma(0) == 0.0);
}

TEST_CASE("zero gradient and zero constraint give a fixed point") {
  CustomGameSpec spec;
  spec.players = 2;
  spec.sets = {LocalSet::interval(0, 1)};
  spec.cost = [](std::size_t, std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };
  spec.grad_own = [](std::size_t, std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&) { return s(0); };
  spec.grad_aggregate = spec.grad_own;
  spec.contribution = [](std::size_t, const Eigen::VectorXd& x) { return Eigen::VectorXd(x); };
  spec.contribution_jacobian = [](std::size_t, const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(1, 1); };
  spec.constraint = [](std::size_t, std::size_t, const Eigen::VectorXd&) { return s(0); };
  spec.constraint_jacobian = [](std::size_t, std::size_t, const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(1, 1); };
  const CustomGame model(spec);
  auto st = init(model, JointDecision{s(0.25), s(0.75)});
  for (std::size_t t = 0; t < 10; ++t) st = step(st, complete_schedule(2).at(t), StepSizes{}, model, NoiseSource(1));
  CHECK(st.players[0].x(0) == 0.25);
  CHECK(st.players[1].x(0) == 0.75);
  CHECK(st.players[0].mu(0) == 0.0);
  CHECK(st.players[0].sigma(0) + st.players[1].sigma(0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two-player steps match a scripted evaluation") {
  QuadraticToyParams q;
  q.players = 2;
  q.capacity = -0.5;  // active from the start so the dual moves
  q.coupling = 0.3;
  const auto model = make_quadratic_toy(q, 42);
  Eigen::MatrixXd wm(2, 2);
  wm << 1, 0.5, 0, 0.5;
  const WeightMatrix w(wm);
  const double c[2] = {model->target(0, 0)(0), model->target(1, 0)(0)};
  const double rho = 0.3, n = 2, share = q.capacity / n;

  // Script: state (x, z, mu, sigma) per player.
  double x[2] = {0.4, -0.2}, z[2] = {1, 1}, mu[2] = {0, 0}, sg[2] = {0.4, -0.2};
  auto st = init(*model, JointDecision{s(0.4), s(-0.2)});
  const StepSizes steps[3] = {{1, 1, 1}, {0.5, 0.7, 0.6}, {0.25, 0.6, 0.4}};
  bool dual_moved = false;
  for (const auto& a : steps) {
    double zn[2], mh[2], sh[2], xn[2], mun[2], sn[2];
    zn[0] = z[0] + 0.5 * z[1];
    zn[1] = 0.5 * z[1];
    mh[0] = mu[0] + 0.5 * mu[1];
    mh[1] = 0.5 * mu[1];
    sh[0] = sg[0] + 0.5 * sg[1];
    sh[1] = 0.5 * sg[1];
    for (int i = 0; i < 2; ++i) {
      const double y = sh[i] / zn[i];
      const double p = x[i] - c[i] + rho * y + rho * x[i] / n;
      const double dir = p + 1.0 * mh[i] / zn[i];
      xn[i] = std::clamp(x[i] - a.alpha * dir, -10.0, 10.0);
      mun[i] = std::max(0.0, mh[i] + a.gamma * ((x[i] - share) - a.beta * mh[i]));
      dual_moved = dual_moved || mun[i] > 0.0;
      sn[i] = sh[i] + xn[i] - x[i];
    }
    for (int i = 0; i < 2; ++i) {
      x[i] = xn[i];
      z[i] = zn[i];
      mu[i] = mun[i];
      sg[i] = sn[i];
    }
    st = step(st, w, a, *model, NoiseSource(0));
    for (int i = 0; i < 2; ++i) {
      CHECK(st.players[i].x(0) == doctest::Approx(x[i]).epsilon(1e-12));
      CHECK(st.players[i].z == doctest::Approx(z[i]).epsilon(1e-12));
      CHECK(st.players[i].mu(0) == doctest::Approx(mu[i]).epsilon(1e-12));
      CHECK(st.players[i].sigma(0) == doctest::Approx(sg[i]).epsilon(1e-12));
    }
  }
  CHECK(dual_moved);
}

TEST_CASE("run matches the straight-line reference") {
  for (bool noisy : {false, true}) {
    MarketParams p;
    p.time_varying = !noisy;
    if (!noisy) p.noise = NoiseModel::none();
    const auto m = make_electricity_market(5, 31, p);
    const auto graphs = paper_fig1_schedule(5);
    const PowerLaw a{0.8, 0.2, 0.2};
    RunOptions opts;
    opts.horizon = 400;
    opts.seed = 77;
    const auto res = run(*m, graphs, StepsizeSchedule(a), opts);
    const auto ref = oracle::run(*m, graphs, a, opts.horizon, opts.seed);
    double worst = 0.0;
    for (std::size_t t = 0; t <= opts.horizon; ++t)
      for (std::size_t i = 0; i < 5; ++i) worst = std::max(worst, std::abs(res.log.x(t, i)(0) - ref.x[t][i]));
    for (std::size_t t = 0; t < opts.horizon; ++t)
      for (std::size_t i = 0; i < 5; ++i) {
        worst = std::max(worst, std::abs(res.log.z_next_at(t, i) - ref.z[t + 1][i]));
        worst = std::max(worst, std::abs(res.log.mu_at(t, i)(0) - ref.mu[t][i]));
        worst = std::max(worst, std::abs(res.log.sigma_hat_at(t, i)(0) - ref.sigma_hat[t][i]) / 100.0);
      }
    CHECK_MESSAGE(worst <= 1e-12, "noisy=" << noisy << " worst " << worst);
  }
}

TEST_CASE("run preconditions and determinism") {
  const auto m = make_electricity_market(5, 3);
  RunOptions opts;
  opts.horizon = 3;
  CHECK_THROWS_AS(run(*m, paper_fig1_schedule(5), StepsizeSchedule(PowerLaw{}), opts), PreconditionError);
  opts.horizon = 50;
  CHECK_THROWS_AS(run(*m, paper_fig1_schedule(4), StepsizeSchedule(PowerLaw{}), opts), PreconditionError);
  opts.regime = Regime::kOnline;
  CHECK_THROWS_AS(run(*m, paper_fig1_schedule(5), StepsizeSchedule(PowerLaw{0.5, 0.3, 0.2}), opts), PreconditionError);

  opts.horizon = 500;
  opts.seed = 9;
  const auto a = run(*m, paper_fig1_schedule(5), StepsizeSchedule(PowerLaw{}), opts);
  const auto b = run(*m, paper_fig1_schedule(5), StepsizeSchedule(PowerLaw{}), opts);
  CHECK(a.log.identical(b.log));
  opts.seed = 10;
  const auto c = run(*m, paper_fig1_schedule(5), StepsizeSchedule(PowerLaw{}), opts);
  CHECK_FALSE(a.log.identical(c.log));
}

TEST_CASE("bound monitors and conservation hold on the market") {
  const auto m = make_electricity_market(5, 14);
  RunOptions opts;
  opts.horizon = 3000;
  opts.seed = 2;
  opts.monitors = MonitorMode::kStrict;
  const auto res = run(*m, paper_fig1_schedule(5), StepsizeSchedule(PowerLaw{0.8, 0.2, 0.2}), opts);
  CHECK(res.log.monitors.total() == 0);
  CHECK(res.log.monitors.dual_bounds_evaluated);
  CHECK(res.log.monitors.worst_weight_mass <= 1e-9);
  CHECK(res.log.monitors.worst_tracking_mass <= 1e-9);
}

TEST_CASE("doubly stochastic mixing keeps unit weights") {
  const auto m = make_electricity_market(4, 5);
  RunOptions opts;
  opts.horizon = 200;
  const auto res = run(*m, complete_schedule(4), StepsizeSchedule(PowerLaw{}), opts);
  for (double z : res.log.z_next) CHECK(z == 1.0);
}

TEST_CASE("consensus errors decay geometrically once decisions freeze") {
  const auto m = make_electricity_market(5, 8);
  const auto graphs = paper_fig1_schedule(5);
  RunOptions opts;
  opts.horizon = 600;
  opts.freeze_after = 100;
  const auto res = run(*m, graphs, StepsizeSchedule(PowerLaw{}), opts);
  const auto cons = consensus_errors(res.log);
  for (const auto* series : {&cons.tracker_max, &cons.dual_max}) {
    std::vector<double> t, v;
    for (std::size_t k = 120; k < 400; ++k) {
      if ((*series)[k] <= 1e-13) break;
      t.push_back(static_cast<double>(k));
      v.push_back(std::log((*series)[k]));
    }
    if (t.size() < 20) continue;  // already at rounding level
    double mt = 0, mv = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      mt += t[k];
      mv += v[k];
    }
    mt /= t.size();
    mv /= t.size();
    double num = 0, den = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      num += (t[k] - mt) * (v[k] - mv);
      den += (t[k] - mt) * (t[k] - mt);
    }
    const double rate = std::exp(num / den);
    CHECK(rate < 1.0);
    CHECK(rate <= analytic_theta_ceiling(5, graphs.window()));
  }
}

TEST_CASE("strict mode stops on a monitor violation") {
  testing_helpers::ScalarGame g;
  g.targets = {5, 5};
  g.cap = -10;  // always violated, the multipliers grow
  g.lo = 0;
  g.hi = 10;
  g.constants.set_and_constraint_bound = 1e-6;  // deliberately too small
  const auto model = g.build();
  RunOptions opts;
  opts.horizon = 50;
  CHECK(run(*model, complete_schedule(2), StepsizeSchedule(PowerLaw{}), opts).log.monitors.total() > 0);
  opts.monitors = MonitorMode::kStrict;
  CHECK_THROWS_AS(run(*model, complete_schedule(2), StepsizeSchedule(PowerLaw{}), opts), MonitorViolation);
}

TEST_CASE("NaN aborts with the update named") {
  testing_helpers::ScalarGame g;
  g.targets = {std::nan(""), 0};
  const auto model = g.build();
  RunOptions opts;
  opts.horizon = 10;
  try {
    run(*model, complete_schedule(2), StepsizeSchedule(PowerLaw{}), opts);
    FAIL("expected divergence");
  } catch (const DivergedRun& e) {
    CHECK(std::string(e.what()).find("direction") != std::string::npos);
  }
}
