#include "pushgne/engine.hpp"

#include <cmath>

namespace pushgne {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void require_finite(bool ok, std::size_t player, std::size_t t, const char* update) {
  if (!ok) throw DivergedRun(player, t, update);
}

}  // namespace

JointDecision RunState::decisions() const {
  JointDecision x;
  x.reserve(players.size());
  for (const auto& p : players) x.push_back(p.x);
  return x;
}

RunState init(const GameModel& model, const std::optional<JointDecision>& x0) {
  const std::size_t n_players = model.players();
  if (x0 && x0->size() != n_players) throw DimensionMismatch("x0 has the wrong player count");
  RunState s;
  s.players.resize(n_players);
  for (std::size_t i = 0; i < n_players; ++i) {
    auto& p = s.players[i];
    const auto& set = model.local_set(i);
    if (x0) {
      if (static_cast<std::size_t>((*x0)[i].size()) != model.dim(i))
        throw DimensionMismatch("x0 entry " + std::to_string(i) + " has the wrong dimension");
      if (!set.contains((*x0)[i])) throw DomainError("x0 entry " + std::to_string(i) + " is infeasible");
      p.x = (*x0)[i];
    } else {
      p.x = set.project(set.center());
    }
    p.z = 1.0;
    p.mu = Eigen::VectorXd::Zero(idx(model.constraint_dim()));
    p.sigma = model.contribution(i, p.x);
  }
  s.mix = MixConstants::initial(n_players);
  return s;
}

RunState step(RunState state, const WeightMatrix& w, StepSizes steps, const GameModel& model,
              const NoiseSource& noise, StepTrace* trace) {
  const std::size_t n_players = state.players.size();
  const std::size_t m = model.constraint_dim();
  const std::size_t n = model.aggregate_dim();
  const std::size_t t = state.t;
  if (w.size() != n_players) throw DimensionMismatch("weight matrix size does not match player count");

  Eigen::VectorXd z(idx(n_players));
  Eigen::MatrixXd mu(idx(n_players), idx(m));
  Eigen::MatrixXd sigma(idx(n_players), idx(n));
  for (std::size_t i = 0; i < n_players; ++i) {
    z(idx(i)) = state.players[i].z;
    mu.row(idx(i)) = state.players[i].mu.transpose();
    sigma.row(idx(i)) = state.players[i].sigma.transpose();
  }

  state.z_next = w.matrix() * z;
  state.mu_hat = mix(mu, w);
  state.sigma_hat = mix(sigma, w);
  state.mix = update_mix_constants(state.mix, w);

  if (trace) {
    trace->constraint_total = Eigen::VectorXd::Zero(idx(m));
    trace->noise.resize(idx(model.total_dim()));
  }

  Index noise_off = 0;
  for (std::size_t i = 0; i < n_players; ++i) {
    auto& p = state.players[i];
    const double zi = state.z_next(idx(i));
    require_finite(std::isfinite(zi) && zi > 0.0, i, t, "weight-mix");
    const Eigen::VectorXd mu_hat_i = state.mu_hat.row(idx(i)).transpose();
    const Eigen::VectorXd sigma_hat_i = state.sigma_hat.row(idx(i)).transpose();
    require_finite(mu_hat_i.allFinite(), i, t, "dual-mix");
    require_finite(sigma_hat_i.allFinite(), i, t, "tracker-mix");

    const Eigen::VectorXd y = sigma_hat_i / zi;
    const Eigen::VectorXd xi = noise.draw(model, i, t);
    const Eigen::VectorXd q = model.noisy_gradient(i, t, p.x, y, xi);
    const auto cons = constraint_eval(model, i, t, p.x);
    const Eigen::VectorXd direction = q + cons.jacobian * (mu_hat_i / zi);
    require_finite(direction.allFinite(), i, t, "direction");

    if (trace) {
      trace->constraint_total += cons.value;
      const auto d = static_cast<Index>(model.dim(i));
      trace->noise.segment(noise_off, d) = q - pseudo_gradient(model, i, t, p.x, y);
      noise_off += d;
    }

    Eigen::VectorXd x_next = model.local_set(i).project(p.x - steps.alpha * direction);
    require_finite(x_next.allFinite(), i, t, "primal");

    Eigen::VectorXd mu_next =
        (mu_hat_i + steps.gamma * (cons.value - steps.beta * mu_hat_i)).cwiseMax(0.0);
    require_finite(mu_next.allFinite(), i, t, "dual");

    Eigen::VectorXd sigma_next = sigma_hat_i + model.contribution(i, x_next) - model.contribution(i, p.x);
    require_finite(sigma_next.allFinite(), i, t, "tracker");

    p.x = std::move(x_next);
    p.mu = std::move(mu_next);
    p.sigma = std::move(sigma_next);
    p.z = zi;
  }
  state.t = t + 1;
  return state;
}

RunState step(RunState state, const WeightMatrix& w, const StepsizeSchedule& schedule,
              const GameModel& model, const NoiseSource& noise, StepTrace* trace) {
  const std::size_t t = state.t;
  return step(std::move(state), w, StepSizes{schedule.alpha(t), schedule.beta(t), schedule.gamma(t)},
              model, noise, trace);
}

namespace {

double relative_gap(double a, double b, double scale) {
  return std::abs(a - b) / std::max({1.0, std::abs(b), scale});
}

}  // namespace

RunResult run(const GameModel& model, const GraphSchedule& graphs, const StepsizeSchedule& schedule,
              const RunOptions& options) {
  if (options.horizon < 4) throw PreconditionError("horizon T must be at least 4");
  if (graphs.nodes() != model.players())
    throw PreconditionError("graph schedule has " + std::to_string(graphs.nodes()) + " nodes, game has " +
                            std::to_string(model.players()) + " players");
  const auto graph_report = validate_schedule(graphs);
  if (!graph_report.ok()) throw PreconditionError("graph schedule failed validation\n" + graph_report.to_string());
  if (options.regime) {
    const auto regime_report = validate_regime(schedule, *options.regime);
    if (!regime_report.ok()) throw PreconditionError("stepsizes failed validation\n" + regime_report.to_string());
  }

  const std::size_t n_players = model.players();
  const std::size_t m = model.constraint_dim();
  const std::size_t n = model.aggregate_dim();
  const double n_real = static_cast<double>(n_players);
  const auto constants = model.declared_constants();
  const double w_min = graphs.min_weight();

  RunResult out;
  auto& log = out.log;
  log = MetricsLog::for_model(model);
  log.seed = options.seed;
  log.config_hash = options.config_hash;
  log.min_weight = w_min;
  log.reserve(options.horizon);
  log.monitors.dual_bounds_evaluated = constants.set_and_constraint_bound.has_value();

  const NoiseSource noise(options.seed);
  RunState state = init(model, options.x0);

  auto append_decision = [&](const RunState& s) {
    for (const auto& p : s.players) log.decisions.insert(log.decisions.end(), p.x.data(), p.x.data() + p.x.size());
  };
  auto append_rows = [](std::vector<double>& dst, const Eigen::MatrixXd& rows) {
    for (Index i = 0; i < rows.rows(); ++i)
      for (Index k = 0; k < rows.cols(); ++k) dst.push_back(rows(i, k));
  };
  append_decision(state);

  StepTrace trace;
  for (std::size_t t = 0; t < options.horizon; ++t) {
    StepSizes steps{schedule.alpha(t), schedule.beta(t), schedule.gamma(t)};
    if (options.freeze_after && t >= *options.freeze_after) {
      steps.alpha = 0.0;
      steps.gamma = 0.0;
    }
    for (const auto& p : state.players) {
      log.mu.insert(log.mu.end(), p.mu.data(), p.mu.data() + p.mu.size());
      log.sigma.insert(log.sigma.end(), p.sigma.data(), p.sigma.data() + p.sigma.size());
    }
    // Norms of the pre-step multipliers for the dual-bound monitor.
    std::vector<double> mu_norm(n_players);
    for (std::size_t i = 0; i < n_players; ++i) mu_norm[i] = state.players[i].mu.norm();

    state = step(std::move(state), graphs.at(t), steps, model, noise, &trace);

    append_decision(state);
    log.constraint_totals.insert(log.constraint_totals.end(), trace.constraint_total.data(),
                                 trace.constraint_total.data() + m);
    log.noise.insert(log.noise.end(), trace.noise.data(), trace.noise.data() + trace.noise.size());
    log.z_next.insert(log.z_next.end(), state.z_next.data(), state.z_next.data() + n_players);
    append_rows(log.mu_hat, state.mu_hat);
    append_rows(log.sigma_hat, state.sigma_hat);
    log.alpha.push_back(steps.alpha);
    log.beta.push_back(steps.beta);
    log.gamma.push_back(steps.gamma);
    const double r = state.mix.r_estimate;
    log.r_estimate.push_back(r);

    // Monitors.
    std::uint8_t flags = 0;
    auto flag = [&](Monitor mon) {
      const auto k = static_cast<std::size_t>(mon);
      flags |= static_cast<std::uint8_t>(1u << k);
      ++log.monitors.violations[k];
      if (!log.monitors.first_step[k]) log.monitors.first_step[k] = t;
    };
    constexpr double kRel = 1e-9;
    double z_sum = 0.0;
    bool lower_bad = false, upper_bad = false, dual_bad = false, dual_mix_bad = false;
    for (std::size_t i = 0; i < n_players; ++i) {
      const double zi = state.z_next(idx(i));
      z_sum += zi;
      if (zi < r * (1.0 - 1e-12)) lower_bad = true;
      if (zi > n_real * (1.0 + 1e-12)) upper_bad = true;
      if (constants.set_and_constraint_bound) {
        const double big_l = *constants.set_and_constraint_bound;
        const double mix_bound = zi * big_l / (steps.beta * r * r);
        if (mu_norm[i] > mix_bound / w_min * (1.0 + 1e-12)) dual_bad = true;
        if (state.mu_hat.row(idx(i)).norm() > mix_bound * (1.0 + 1e-12)) dual_mix_bad = true;
      }
    }
    if (lower_bad) flag(Monitor::kWeightLower);
    if (upper_bad) flag(Monitor::kWeightUpper);
    if (dual_bad) flag(Monitor::kDualBound);
    if (dual_mix_bad) flag(Monitor::kDualMixBound);

    const double z_gap = std::abs(z_sum - n_real) / n_real;
    log.monitors.worst_weight_mass = std::max(log.monitors.worst_weight_mass, z_gap);
    if (z_gap > kRel) flag(Monitor::kWeightMass);

    Eigen::VectorXd tracked = Eigen::VectorXd::Zero(idx(n));
    Eigen::VectorXd actual = Eigen::VectorXd::Zero(idx(n));
    double scale = 0.0;
    for (std::size_t i = 0; i < n_players; ++i) {
      tracked += state.players[i].sigma;
      const Eigen::VectorXd psi = model.contribution(i, state.players[i].x);
      actual += psi;
      scale += psi.norm() + state.players[i].sigma.norm();
    }
    double track_gap = 0.0;
    for (Index k = 0; k < tracked.size(); ++k)
      track_gap = std::max(track_gap, relative_gap(tracked(k), actual(k), scale));
    log.monitors.worst_tracking_mass = std::max(log.monitors.worst_tracking_mass, track_gap);
    if (track_gap > kRel) flag(Monitor::kTrackingMass);

    log.monitor_flags.push_back(flags);
    if (flags && options.monitors == MonitorMode::kStrict) {
      std::string names;
      for (std::size_t k = 0; k < kMonitorCount; ++k)
        if (flags & (1u << k)) names += (names.empty() ? "" : ", ") + monitor_name(static_cast<Monitor>(k));
      throw MonitorViolation("monitor violation at step " + std::to_string(t) + ": " + names);
    }
  }

  // g_T(x_T) closes the constraint series.
  const JointDecision last = state.decisions();
  const Eigen::VectorXd g_last = total_constraint(model, options.horizon, last);
  log.constraint_totals.insert(log.constraint_totals.end(), g_last.data(), g_last.data() + m);
  log.steps = options.horizon;

  out.final_state = std::move(state);
  return out;
}

}  // namespace pushgne
