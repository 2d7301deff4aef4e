#include "pushgne/scenarios.hpp"

#include <cmath>
#include <set>

#include "pushgne/interval.hpp"

namespace pushgne {

namespace {

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }
Eigen::MatrixXd scalar_matrix(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

Interval range(const std::pair<double, double>& p) { return {p.first, p.second}; }

void check_range(const char* name, const std::pair<double, double>& p) {
  if (!(p.first <= p.second))
    throw PreconditionError(std::string("coefficient range '") + name + "' is empty");
}

}  // namespace

// ---------------------------------------------------------------------------
// Electricity market

ElectricityMarket::ElectricityMarket(MarketParams params, std::uint64_t seed)
    : params_(std::move(params)), rng_(seed), set_(LocalSet::interval(params_.lower, params_.upper)) {
  if (params_.players < 2) throw PreconditionError("electricity market needs at least 2 players");
  check_range("a", params_.a);
  check_range("b", params_.b);
  check_range("c", params_.c);
  check_range("r", params_.r);
  check_range("u", params_.u);
  check_range("v", params_.v);
  if (params_.v.first < 0 || params_.c.first < 0)
    throw PreconditionError("electricity market needs c >= 0 and v >= 0 for convexity");

  const double n = static_cast<double>(params_.players);
  const Interval x{params_.lower, params_.upper};
  const Interval total = Interval(n) * x;
  const Interval xi{-params_.noise.support_bound(), params_.noise.support_bound()};
  const Interval g = range(params_.r) + range(params_.u) * x + range(params_.v) * square(x) -
                     Interval(params_.capacity / n);
  const Interval jac = range(params_.u) + Interval(2.0) * range(params_.v) * x;
  const Interval grad = range(params_.b) + Interval(2.0) * range(params_.c) * x -
                        Interval(params_.base_price) + Interval(params_.price_sensitivity) * total +
                        Interval(params_.price_sensitivity) * x + xi;
  constants_.set_and_constraint_bound = std::max(set_.norm_bound(), g.magnitude());
  constants_.jacobian_bound = jac.magnitude();
  constants_.gradient_bound = grad.magnitude();
  constants_.aggregation_lipschitz = n;
}

MarketCoefficients ElectricityMarket::coefficients(std::size_t i, std::size_t t) const {
  const std::size_t te = effective_time(t);
  auto draw = [&](const std::pair<double, double>& p, std::size_t k) {
    return rng_.uniform(p.first, p.second, streams::kCoefficients, i, te, k);
  };
  return {draw(params_.a, 0), draw(params_.b, 1), draw(params_.c, 2),
          draw(params_.r, 3), draw(params_.u, 4), draw(params_.v, 5)};
}

double ElectricityMarket::cost(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& sigma) const {
  const auto k = coefficients(i, t);
  const double xi = x(0);
  const double price = params_.base_price - params_.price_sensitivity * sigma(0);
  return k.a + k.b * xi + k.c * xi * xi - price * xi;
}

Eigen::VectorXd ElectricityMarket::cost_grad_own(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& sigma) const {
  const auto k = coefficients(i, t);
  return scalar(k.b + 2.0 * k.c * x(0) - (params_.base_price - params_.price_sensitivity * sigma(0)));
}

Eigen::VectorXd ElectricityMarket::cost_grad_aggregate(std::size_t, std::size_t, const Eigen::VectorXd& x,
                                                       const Eigen::VectorXd&) const {
  return scalar(params_.price_sensitivity * x(0));
}

// psi_i(x) = N x, so that (1/N) sum_i psi_i = sum_i x_i.
Eigen::VectorXd ElectricityMarket::contribution(std::size_t, const Eigen::VectorXd& x) const {
  return x * static_cast<double>(params_.players);
}

Eigen::MatrixXd ElectricityMarket::contribution_jacobian(std::size_t, const Eigen::VectorXd&) const {
  return scalar_matrix(static_cast<double>(params_.players));
}

// The shared cap is split evenly so the players' terms sum to (load - cap).
Eigen::VectorXd ElectricityMarket::constraint(std::size_t i, std::size_t t, const Eigen::VectorXd& x) const {
  const auto k = coefficients(i, t);
  const double xi = x(0);
  return scalar(k.r + k.u * xi + k.v * xi * xi - params_.capacity / static_cast<double>(params_.players));
}

Eigen::MatrixXd ElectricityMarket::constraint_jacobian(std::size_t i, std::size_t t,
                                                       const Eigen::VectorXd& x) const {
  const auto k = coefficients(i, t);
  return scalar_matrix(k.u + 2.0 * k.v * x(0));
}

std::optional<ScalarQuadratic> ElectricityMarket::scalar_constraint_form(std::size_t i, std::size_t t,
                                                                         std::size_t) const {
  const auto k = coefficients(i, t);
  return ScalarQuadratic{k.r - params_.capacity / static_cast<double>(params_.players), k.u, k.v};
}

std::map<std::string, double> ElectricityMarket::metadata() const {
  return {{"players", static_cast<double>(params_.players)},
          {"p0", params_.base_price},
          {"gamma", params_.price_sensitivity},
          {"G", params_.capacity},
          {"lower", params_.lower},
          {"upper", params_.upper},
          {"time_varying", params_.time_varying ? 1.0 : 0.0}};
}

std::shared_ptr<const ElectricityMarket> make_electricity_market(std::size_t players, std::uint64_t seed,
                                                                 MarketParams overrides) {
  overrides.players = players;
  return std::make_shared<const ElectricityMarket>(std::move(overrides), seed);
}

// ---------------------------------------------------------------------------
// Quadratic toy

QuadraticToy::QuadraticToy(QuadraticToyParams params, std::uint64_t seed)
    : params_(std::move(params)),
      rng_(seed),
      set_(LocalSet::box(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(params_.dim), params_.lower),
                         Eigen::VectorXd::Constant(static_cast<Eigen::Index>(params_.dim), params_.upper))) {
  if (params_.players < 1) throw PreconditionError("quadratic toy needs at least one player");
  check_range("target", params_.target);
  if (params_.coupling < 0) throw PreconditionError("quadratic toy coupling must be nonnegative");
  const double n = static_cast<double>(params_.players);
  const double d = static_cast<double>(params_.dim);
  const Interval x{params_.lower, params_.upper};
  const Interval xi{-params_.noise.support_bound(), params_.noise.support_bound()};
  const Interval g = Interval(d) * x - Interval(params_.capacity / n);
  const Interval rho(params_.coupling);
  const Interval grad = x - range(params_.target) + rho * x + rho * x * Interval(1.0 / n) + xi;
  constants_.set_and_constraint_bound = std::max(set_.norm_bound(), g.magnitude());
  constants_.jacobian_bound = std::sqrt(d);
  constants_.gradient_bound = std::sqrt(d) * grad.magnitude();
  constants_.aggregation_lipschitz = 1.0;
}

Eigen::VectorXd QuadraticToy::target(std::size_t i, std::size_t t) const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(params_.dim));
  const std::size_t te = effective_time(t);
  for (Eigen::Index k = 0; k < c.size(); ++k)
    c(k) = rng_.uniform(params_.target.first, params_.target.second, streams::kCoefficients, i, te,
                        static_cast<std::size_t>(k));
  return c;
}

double QuadraticToy::cost(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& sigma) const {
  return 0.5 * (x - target(i, t)).squaredNorm() + params_.coupling * sigma.dot(x);
}

Eigen::VectorXd QuadraticToy::cost_grad_own(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& sigma) const {
  return x - target(i, t) + params_.coupling * sigma;
}

Eigen::VectorXd QuadraticToy::cost_grad_aggregate(std::size_t, std::size_t, const Eigen::VectorXd& x,
                                                  const Eigen::VectorXd&) const {
  return params_.coupling * x;
}

Eigen::VectorXd QuadraticToy::contribution(std::size_t, const Eigen::VectorXd& x) const { return x; }

Eigen::MatrixXd QuadraticToy::contribution_jacobian(std::size_t, const Eigen::VectorXd& x) const {
  return Eigen::MatrixXd::Identity(x.size(), x.size());
}

Eigen::VectorXd QuadraticToy::constraint(std::size_t, std::size_t, const Eigen::VectorXd& x) const {
  return scalar(x.sum() - params_.capacity / static_cast<double>(params_.players));
}

Eigen::MatrixXd QuadraticToy::constraint_jacobian(std::size_t, std::size_t, const Eigen::VectorXd& x) const {
  return Eigen::MatrixXd::Ones(x.size(), 1);
}

std::optional<ScalarQuadratic> QuadraticToy::scalar_constraint_form(std::size_t, std::size_t,
                                                                    std::size_t) const {
  if (params_.dim != 1) return std::nullopt;
  return ScalarQuadratic{-params_.capacity / static_cast<double>(params_.players), 1.0, 0.0};
}

std::map<std::string, double> QuadraticToy::metadata() const {
  return {{"players", static_cast<double>(params_.players)},
          {"dim", static_cast<double>(params_.dim)},
          {"coupling", params_.coupling},
          {"cap", params_.capacity},
          {"lower", params_.lower},
          {"upper", params_.upper},
          {"time_varying", params_.time_varying ? 1.0 : 0.0}};
}

std::shared_ptr<const QuadraticToy> make_quadratic_toy(QuadraticToyParams params, std::uint64_t seed) {
  return std::make_shared<const QuadraticToy>(std::move(params), seed);
}

// ---------------------------------------------------------------------------
// Custom

CustomGame::CustomGame(CustomGameSpec spec) : spec_(std::move(spec)) {
  if (spec_.sets.empty()) throw PreconditionError("custom game needs a local set");
  if (spec_.sets.size() != 1 && spec_.sets.size() != spec_.players)
    throw PreconditionError("custom game needs one local set or one per player");
  if (!spec_.cost || !spec_.grad_own || !spec_.grad_aggregate || !spec_.contribution ||
      !spec_.contribution_jacobian || !spec_.constraint || !spec_.constraint_jacobian)
    throw PreconditionError("custom game is missing a callback");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::pair<double, double> get_pair(const nlohmann::json& j, const std::string& key) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw ConfigError("field '" + key + "' must be a [lo, hi] pair");
  return {v[0], v[1]};
}

void reject_unknown(const nlohmann::json& def, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = def.begin(); it != def.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown field '" + it.key() + "'");
}

}  // namespace

NoiseModel parse_noise(const nlohmann::json& def) {
  try {
    const std::string kind = def.value("kind", std::string("none"));
    if (kind == "none") return NoiseModel::none();
    if (kind == "uniform") {
      if (def.contains("half_width")) {
        const double h = def.at("half_width").get<double>();
        return NoiseModel::uniform(-h, h);
      }
      return NoiseModel::uniform(def.at("lo").get<double>(), def.at("hi").get<double>());
    }
    if (kind == "gaussian") {
      const double clip = def.contains("clip") ? def.at("clip").get<double>()
                                               : std::numeric_limits<double>::infinity();
      return NoiseModel::gaussian(def.at("stddev").get<double>(), clip);
    }
    throw ConfigError("noise: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
}

nlohmann::json noise_to_json(const NoiseModel& noise) {
  switch (noise.kind) {
    case NoiseModel::Kind::kNone: return {{"kind", "none"}};
    case NoiseModel::Kind::kUniform: return {{"kind", "uniform"}, {"half_width", noise.half_width}};
    case NoiseModel::Kind::kGaussian: {
      nlohmann::json j{{"kind", "gaussian"}, {"stddev", noise.stddev}};
      if (std::isfinite(noise.clip)) j["clip"] = noise.clip;
      return j;
    }
  }
  return {};
}

std::shared_ptr<const GameModel> make_scenario(const nlohmann::json& def, std::uint64_t seed) {
  if (!def.is_object()) throw ConfigError("scenario: expected an object");
  const std::string id = def.value("id", std::string());
  try {
    if (id == "electricity-market") {
      reject_unknown(def,
                     {"id", "players", "time_varying", "bounds", "noise", "cap", "base_price",
                      "price_sensitivity", "ranges", "seed"},
                     "scenario");
      MarketParams p;
      p.players = def.value("players", p.players);
      p.time_varying = def.value("time_varying", p.time_varying);
      if (def.contains("bounds")) std::tie(p.lower, p.upper) = get_pair(def.at("bounds"), "bounds");
      if (def.contains("noise")) p.noise = parse_noise(def.at("noise"));
      p.capacity = def.value("cap", p.capacity);
      p.base_price = def.value("base_price", p.base_price);
      p.price_sensitivity = def.value("price_sensitivity", p.price_sensitivity);
      if (def.contains("ranges")) {
        const auto& r = def.at("ranges");
        reject_unknown(r, {"a", "b", "c", "r", "u", "v"}, "scenario.ranges");
        auto set = [&](const char* key, std::pair<double, double>& dst) {
          if (r.contains(key)) dst = get_pair(r.at(key), std::string("ranges.") + key);
        };
        set("a", p.a);
        set("b", p.b);
        set("c", p.c);
        set("r", p.r);
        set("u", p.u);
        set("v", p.v);
      }
      return std::make_shared<const ElectricityMarket>(std::move(p), seed);
    }
    if (id == "quadratic-toy") {
      reject_unknown(def,
                     {"id", "players", "time_varying", "bounds", "noise", "cap", "dim", "coupling",
                      "target", "seed"},
                     "scenario");
      QuadraticToyParams p;
      p.players = def.value("players", p.players);
      p.time_varying = def.value("time_varying", p.time_varying);
      p.dim = def.value("dim", p.dim);
      if (def.contains("bounds")) std::tie(p.lower, p.upper) = get_pair(def.at("bounds"), "bounds");
      if (def.contains("noise")) p.noise = parse_noise(def.at("noise"));
      p.capacity = def.value("cap", p.capacity);
      p.coupling = def.value("coupling", p.coupling);
      if (def.contains("target")) p.target = get_pair(def.at("target"), "target");
      return std::make_shared<const QuadraticToy>(std::move(p), seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario '" + id + "': " + e.what());
  } catch (const PreconditionError& e) {
    throw ConfigError("scenario '" + id + "': " + e.what());
  }
  throw ConfigError("unknown scenario id '" + id + "'");
}

}  // namespace pushgne
