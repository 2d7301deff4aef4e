#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles/reference.hpp"
#include "pushgne/engine.hpp"
#include "pushgne/scenarios.hpp"
#include "pushgne/solvers.hpp"

using namespace pushgne;
using testing_helpers::s;

namespace {

std::shared_ptr<const ElectricityMarket> fixed_market(std::size_t n, std::uint64_t seed, double cap = 150) {
  MarketParams p;
  p.time_varying = false;
  p.capacity = cap;
  return make_electricity_market(n, seed, p);
}

std::vector<JointDecision> scripted(const std::vector<std::vector<double>>& rows) {
  std::vector<JointDecision> out;
  for (const auto& r : rows) {
    JointDecision x;
    for (double v : r) x.push_back(s(v));
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("vGNE of decoupled and boundary games") {
  testing_helpers::ScalarGame g;
  g.targets = {1.5, -2.0};
  g.constraint_free = true;
  const auto sol = solve_vgne(*g.build());
  CHECK(sol.x_star[0](0) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(sol.x_star[1](0) == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(sol.mu_star(0) == 0.0);
  CHECK(sol.residual.total() <= 1e-10);
  CHECK(sol.grid_agrees);

  testing_helpers::ScalarGame one;
  one.targets = {0.0};
  one.lo = 1;
  one.hi = 2;
  one.constraint_free = true;
  const auto b = solve_vgne(*one.build());
  CHECK(b.x_star[0](0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("vGNE with an active shared cap matches the closed form") {
  // f_i = (x - c_i)^2, sum x <= cap: x_i = c_i - mu/2, mu = 2 (sum c - cap) / N.
  testing_helpers::ScalarGame g;
  g.targets = {3, 5, 7};
  g.cap = 9;
  const auto sol = solve_vgne(*g.build());
  const double mu = 2.0 * (15.0 - 9.0) / 3.0;
  CHECK(sol.mu_star(0) == doctest::Approx(mu).epsilon(1e-9));
  for (int i = 0; i < 3; ++i) CHECK(sol.x_star[i](0) == doctest::Approx(g.targets[i] - mu / 2).epsilon(1e-9));
  CHECK(sol.residual.complementarity <= 1e-8);
}

TEST_CASE("market vGNE agrees with both grid oracles") {
  for (double cap : {150.0, 40.0}) {
    const auto m = fixed_market(5, 21, cap);
    const auto sol = solve_vgne(*m);
    CHECK(sol.residual.total() <= 1e-8);
    REQUIRE(sol.grid);
    CHECK_MESSAGE(sol.grid_agrees, "cap " << cap << " gap " << sol.grid_max_gap);
    const auto ref = oracle::vgne(*m);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(ref.x[i] - sol.x_star[i](0)) <= 1e-4);
    CHECK(std::abs(ref.mu - sol.mu_star(0)) <= 1e-3 * (1 + ref.mu));
    if (cap < 100) CHECK(sol.mu_star(0) > 0.0);
    else CHECK(sol.mu_star(0) == 0.0);
  }
}

TEST_CASE("vGNE is robust to the internal step") {
  const auto m = fixed_market(4, 5, 35);
  VgneOptions o;
  o.grid_cross_check = false;
  const auto a = solve_vgne(*m, o);
  o.step_scale = 0.5;
  const auto b = solve_vgne(*m, o);
  double gap = 0;
  for (std::size_t i = 0; i < 4; ++i) gap = std::max(gap, std::abs(a.x_star[i](0) - b.x_star[i](0)));
  CHECK(gap <= 2 * o.tol);
}

TEST_CASE("extragradient step residual decreases after burn-in") {
  // The KKT residual itself may wobble; the fixed-point step length of the
  // iteration is the quantity that settles monotonically.
  for (double cap : {35.0, 60.0, 150.0})
    for (std::uint64_t seed : {9, 10, 11}) {
      const auto m = fixed_market(5, seed, cap);
      VgneOptions o;
      o.grid_cross_check = false;
      const auto sol = solve_vgne(*m, o);
      const auto& tr = sol.step_trace;
      REQUIRE(tr.size() > 10);
      const std::size_t burn = tr.size() / 10;
      std::size_t increases = 0;
      for (std::size_t k = burn + 1; k < tr.size(); ++k)
        if (tr[k] > tr[k - 1] * (1 + 1e-9) && tr[k] > 1e-13) ++increases;
      CHECK_MESSAGE(increases == 0, "cap " << cap << " seed " << seed);
    }
}

TEST_CASE("vGNE errors") {
  const auto m = make_electricity_market(3, 1);  // time-varying
  CHECK_THROWS_AS(solve_vgne(*m), PreconditionError);
  VgneOptions o;
  o.max_iters = 2;
  o.tol = 1e-14;
  try {
    solve_vgne(*fixed_market(3, 1), o);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(e.residual_trace().size() == 3);
  }
}

TEST_CASE("feasible intervals in closed form") {
  const auto m = make_electricity_market(5, 4);
  for (std::size_t t = 1; t < 30; ++t) {
    const double others = -60.0 + static_cast<double>(t);
    const auto iv = scalar_feasible_interval(*m, 2, t, s(others));
    REQUIRE_FALSE(iv.empty());
    CHECK(iv.lo == 0.0);
    const double g_hi = m->constraint(2, t, s(iv.hi))(0) + others;
    CHECK((iv.hi == 20.0 ? g_hi <= 0.0 : std::abs(g_hi) <= 1e-9));
  }
  CHECK(scalar_feasible_interval(*m, 0, 1, s(500)).empty());
}

TEST_CASE("comparator with a singleton feasible set") {
  CustomGameSpec spec;
  spec.players = 1;
  spec.sets = {LocalSet::interval(-5, 5)};
  spec.cost = [](std::size_t, std::size_t, const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x(0) * x(0); };
  spec.grad_own = [](std::size_t, std::size_t, const Eigen::VectorXd& x, const Eigen::VectorXd&) { return s(2 * x(0)); };
  spec.grad_aggregate = [](std::size_t, std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&) { return s(0); };
  spec.contribution = [](std::size_t, const Eigen::VectorXd& x) { return Eigen::VectorXd(x); };
  spec.contribution_jacobian = [](std::size_t, const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(1, 1); };
  spec.constraint = [](std::size_t, std::size_t, const Eigen::VectorXd& x) { return s((x(0) - 1.25) * (x(0) - 1.25)); };
  spec.constraint_jacobian = [](std::size_t, std::size_t, const Eigen::VectorXd& x) {
    return Eigen::MatrixXd::Constant(1, 1, 2 * (x(0) - 1.25));
  };
  const CustomGame model(spec);
  const auto in = comparator_inputs(model, scripted({{3.0}}), 0);
  const auto sol = solve_comparator(model, in, 1);
  CHECK(sol.feasible);
  CHECK(sol.x_star(0) == doctest::Approx(1.25).epsilon(1e-6));
}

TEST_CASE("comparator when costs ignore the decision") {
  testing_helpers::ScalarGame g;
  g.targets = {0, 0};
  g.weight = 0;
  g.cap = 100;
  const auto model = g.build();
  const auto in = comparator_inputs(*model, scripted({{1, 2}, {3, 4}, {5, 6}}), 1);
  const auto sol = solve_comparator(*model, in, 3);
  double own = 0;
  for (double c : in.own_cost) own += c;
  CHECK(sol.objective == own);
}

TEST_CASE("toy comparator matches a dense 1-D grid") {
  QuadraticToyParams q;
  q.players = 2;
  q.capacity = 2.0;
  q.coupling = 0.4;
  q.time_varying = true;
  const auto model = make_quadratic_toy(q, 8);
  const auto traj = scripted({{0.3, 0.9}, {-0.5, 0.2}, {0.1, 0.6}});
  for (std::size_t i = 0; i < 2; ++i) {
    const auto in = comparator_inputs(*model, traj, i);
    const auto sol = solve_comparator(*model, in, 3);
    // Grid over [-10, 10] at 1e-5, feasibility checked step by step.
    double best = 1e300, arg = 0;
    for (long k = 0; k <= 2000000; ++k) {
      const double x = -10.0 + 1e-5 * static_cast<double>(k);
      bool ok = true;
      double f = 0;
      for (std::size_t t = 1; t <= 3 && ok; ++t) {
        const double other = traj[t - 1][1 - i](0);
        ok = (x - 1.0) + (other - 1.0) <= 0.0;
        const double ci = model->target(i, t)(0);
        f += 0.5 * (x - ci) * (x - ci) + 0.4 * ((x + other) / 2) * x;
      }
      if (ok && f < best) {
        best = f;
        arg = x;
      }
    }
    CHECK(sol.feasible);
    CHECK(std::abs(sol.x_star(0) - arg) <= 1e-4);
    CHECK(sol.objective <= best + 1e-9);
  }
}

TEST_CASE("market comparator matches the dense grid oracle and certifies optimality") {
  const auto m = make_electricity_market(4, 13);
  RunOptions opts;
  opts.horizon = 12;
  opts.seed = 4;
  const auto res = run(*m, paper_fig1_schedule(4), StepsizeSchedule(PowerLaw{}), opts);
  std::vector<oracle::Vec> traj;
  for (std::size_t t = 1; t <= 12; ++t) {
    oracle::Vec row;
    for (std::size_t j = 0; j < 4; ++j) row.push_back(res.log.x(t, j)(0));
    traj.push_back(row);
  }
  std::mt19937_64 gen(1);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto in = comparator_inputs(*m, res.log, i, 12);
    // The first steps overshoot to the box edges, where no fixed decision
    // fits under the cap.
    const auto strict = solve_comparator(*m, in, 12);
    CHECK_FALSE(strict.feasible);
    CHECK_FALSE(oracle::comparator(*m, traj, i).feasible);

    const auto sol = solve_comparator(*m, in, 12, 1e-10, EmptyStepPolicy::kSkipEmptySteps);
    const auto ref = oracle::comparator(*m, traj, i, true);
    REQUIRE(sol.feasible);
    REQUIRE(ref.feasible);
    CHECK_FALSE(sol.skipped_steps.empty());
    CHECK(sol.skipped_steps == ref.skipped);
    CHECK(std::abs(sol.x_star(0) - ref.x) <= 1e-4);
    CHECK(sol.max_violation <= 0.0);
    CHECK(sol.intervals.size() == 12);
    for (int k = 0; k < 200; ++k) {
      const double x = std::uniform_real_distribution<double>(sol.intersection.lo, sol.intersection.hi)(gen);
      CHECK(sol.objective <= comparator_objective(*m, in, 12, s(x)) + 1e-9);
    }
  }
}

TEST_CASE("market comparator on scripted feasible trajectories") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 2.5);
  for (int run = 0; run < 3; ++run) {
    MarketParams p;
    p.capacity = 40.0 + 20.0 * run;
    const auto m = make_electricity_market(3, 100 + run, p);
    std::vector<JointDecision> traj;
    std::vector<oracle::Vec> plain;
    for (int t = 0; t < 8; ++t) {
      oracle::Vec row{u(gen), u(gen), u(gen)};
      plain.push_back(row);
      traj.push_back({s(row[0]), s(row[1]), s(row[2])});
    }
    for (std::size_t i = 0; i < 3; ++i) {
      const auto sol = solve_comparator(*m, comparator_inputs(*m, traj, i), 8);
      const auto ref = oracle::comparator(*m, plain, i);
      REQUIRE(sol.feasible == ref.feasible);
      if (ref.feasible) CHECK(std::abs(sol.x_star(0) - ref.x) <= 1e-4);
    }
  }
}

TEST_CASE("empty comparator intersection is flagged") {
  const auto m = make_electricity_market(3, 2);
  const auto in = comparator_inputs(*m, scripted({{20, 20, 20}, {20, 20, 20}}), 0);
  const auto sol = solve_comparator(*m, in, 2);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.intersection.empty());
}

TEST_CASE("vector comparator via augmented Lagrangian") {
  QuadraticToyParams q;
  q.players = 2;
  q.dim = 2;
  q.capacity = 1.0;
  q.target = {0.5, 1.5};
  const auto model = make_quadratic_toy(q, 3);
  JointDecision a{Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.2, 0.1)};
  JointDecision b{Eigen::Vector2d(0.0, 0.3), Eigen::Vector2d(0.3, -0.2)};
  const auto in = comparator_inputs(*model, std::vector<JointDecision>{a, b}, 0);
  const auto sol = solve_comparator(*model, in, 2);
  CHECK(sol.feasible);
  CHECK(sol.max_violation <= 1e-8);
  // Binding step: others sum to 0.3, share 0.5 each, so x1 + x2 <= 0.5 - (0.3 - 0.5) = 0.7.
  CHECK(sol.x_star.sum() <= 0.7 + 1e-8);
  std::mt19937_64 gen(2);
  for (int k = 0; k < 500; ++k) {
    Eigen::Vector2d x = Eigen::Vector2d::Random() * 2;
    if (x.sum() > 0.7) continue;
    CHECK(sol.objective <= comparator_objective(*model, in, 2, x) + 1e-7);
  }
}
