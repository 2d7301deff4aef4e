#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "json.hpp"
#include "pushgne/game.hpp"

namespace pushgne {

/// Electricity market with N generators. Generator i produces x_i in
/// [lower, upper] at cost a + b x + c x^2 and sells at price
/// p0 - xi - gamma * sum_j x_j. Line-load constraint sum_i (r + u x_i + v x_i^2) <= cap.
struct MarketParams {
  std::size_t players = 5;
  double lower = 0.0;
  double upper = 20.0;
  double base_price = 40.0;        // p0
  double price_sensitivity = 0.8;  // gamma
  double capacity = 150.0;         // G
  std::pair<double, double> a{1, 9}, b{5, 15}, c{6, 10};
  std::pair<double, double> r{1, 2}, u{2, 5}, v{1, 3};
  NoiseModel noise = NoiseModel::uniform(-0.5, 0.5);
  bool time_varying = true;
};

struct MarketCoefficients {
  double a, b, c, r, u, v;
};

class ElectricityMarket final : public GameModel {
 public:
  ElectricityMarket(MarketParams params, std::uint64_t seed);

  std::string id() const override { return "electricity-market"; }
  std::size_t players() const override { return params_.players; }
  std::size_t dim(std::size_t) const override { return 1; }
  std::size_t aggregate_dim() const override { return 1; }
  std::size_t constraint_dim() const override { return 1; }
  bool time_varying() const override { return params_.time_varying; }
  const LocalSet& local_set(std::size_t) const override { return set_; }

  double cost(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
              const Eigen::VectorXd& sigma) const override;
  Eigen::VectorXd cost_grad_own(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& sigma) const override;
  Eigen::VectorXd cost_grad_aggregate(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& sigma) const override;
  Eigen::VectorXd contribution(std::size_t i, const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd contribution_jacobian(std::size_t i, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd constraint(std::size_t i, std::size_t t, const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd constraint_jacobian(std::size_t i, std::size_t t, const Eigen::VectorXd& x) const override;
  const NoiseModel& noise(std::size_t) const override { return params_.noise; }
  std::optional<ScalarQuadratic> scalar_constraint_form(std::size_t i, std::size_t t,
                                                        std::size_t k) const override;
  DeclaredConstants declared_constants() const override { return constants_; }
  std::map<std::string, double> metadata() const override;

  /// Replays the coefficient stream for (i, t); t is frozen at 0 for the
  /// time-invariant variant.
  MarketCoefficients coefficients(std::size_t i, std::size_t t) const;
  const MarketParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return rng_.seed(); }

 private:
  MarketParams params_;
  CounterRng rng_;
  LocalSet set_;
  DeclaredConstants constants_;
};

std::shared_ptr<const ElectricityMarket> make_electricity_market(std::size_t players, std::uint64_t seed,
                                                                 MarketParams overrides = {});

/// Closed-form testbed: f_i = 1/2 ||x_i - c_i||^2 + coupling * <sigma, x_i>,
/// psi_i = identity, X_i a box, one constraint sum_i 1'x_i <= cap.
struct QuadraticToyParams {
  std::size_t players = 2;
  std::size_t dim = 1;
  double lower = -10.0;
  double upper = 10.0;
  double coupling = 0.5;
  std::pair<double, double> target{-1.0, 1.0};
  double capacity = 100.0;
  NoiseModel noise = NoiseModel::none();
  bool time_varying = false;
};

class QuadraticToy final : public GameModel {
 public:
  QuadraticToy(QuadraticToyParams params, std::uint64_t seed);

  std::string id() const override { return "quadratic-toy"; }
  std::size_t players() const override { return params_.players; }
  std::size_t dim(std::size_t) const override { return params_.dim; }
  std::size_t aggregate_dim() const override { return params_.dim; }
  std::size_t constraint_dim() const override { return 1; }
  bool time_varying() const override { return params_.time_varying; }
  const LocalSet& local_set(std::size_t) const override { return set_; }

  double cost(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
              const Eigen::VectorXd& sigma) const override;
  Eigen::VectorXd cost_grad_own(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& sigma) const override;
  Eigen::VectorXd cost_grad_aggregate(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& sigma) const override;
  Eigen::VectorXd contribution(std::size_t i, const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd contribution_jacobian(std::size_t i, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd constraint(std::size_t i, std::size_t t, const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd constraint_jacobian(std::size_t i, std::size_t t, const Eigen::VectorXd& x) const override;
  const NoiseModel& noise(std::size_t) const override { return params_.noise; }
  std::optional<ScalarQuadratic> scalar_constraint_form(std::size_t i, std::size_t t,
                                                        std::size_t k) const override;
  DeclaredConstants declared_constants() const override { return constants_; }
  std::map<std::string, double> metadata() const override;

  Eigen::VectorXd target(std::size_t i, std::size_t t) const;
  const QuadraticToyParams& params() const noexcept { return params_; }

 private:
  QuadraticToyParams params_;
  CounterRng rng_;
  LocalSet set_;
  DeclaredConstants constants_;
};

std::shared_ptr<const QuadraticToy> make_quadratic_toy(QuadraticToyParams params, std::uint64_t seed);

/// Callback-defined game for ad hoc instances. Every callback receives the
/// player and (effective) time; unset gradient callbacks are not filled in.
struct CustomGameSpec {
  std::string name = "custom";
  std::size_t players = 1;
  std::size_t dim = 1;
  std::size_t aggregate_dim = 1;
  std::size_t constraint_dim = 1;
  bool time_varying = false;
  std::vector<LocalSet> sets;  // one per player, or a single shared set
  std::function<double(std::size_t, std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&)> cost;
  std::function<Eigen::VectorXd(std::size_t, std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&)> grad_own;
  std::function<Eigen::VectorXd(std::size_t, std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&)> grad_aggregate;
  std::function<Eigen::VectorXd(std::size_t, const Eigen::VectorXd&)> contribution;
  std::function<Eigen::MatrixXd(std::size_t, const Eigen::VectorXd&)> contribution_jacobian;
  std::function<Eigen::VectorXd(std::size_t, std::size_t, const Eigen::VectorXd&)> constraint;
  std::function<Eigen::MatrixXd(std::size_t, std::size_t, const Eigen::VectorXd&)> constraint_jacobian;
  NoiseModel noise = NoiseModel::none();
  DeclaredConstants constants;
};

class CustomGame final : public GameModel {
 public:
  explicit CustomGame(CustomGameSpec spec);

  std::string id() const override { return spec_.name; }
  std::size_t players() const override { return spec_.players; }
  std::size_t dim(std::size_t) const override { return spec_.dim; }
  std::size_t aggregate_dim() const override { return spec_.aggregate_dim; }
  std::size_t constraint_dim() const override { return spec_.constraint_dim; }
  bool time_varying() const override { return spec_.time_varying; }
  const LocalSet& local_set(std::size_t i) const override {
    return spec_.sets.size() == 1 ? spec_.sets.front() : spec_.sets.at(i);
  }
  double cost(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
              const Eigen::VectorXd& sigma) const override {
    return spec_.cost(i, effective_time(t), x, sigma);
  }
  Eigen::VectorXd cost_grad_own(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& sigma) const override {
    return spec_.grad_own(i, effective_time(t), x, sigma);
  }
  Eigen::VectorXd cost_grad_aggregate(std::size_t i, std::size_t t, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& sigma) const override {
    return spec_.grad_aggregate(i, effective_time(t), x, sigma);
  }
  Eigen::VectorXd contribution(std::size_t i, const Eigen::VectorXd& x) const override {
    return spec_.contribution(i, x);
  }
  Eigen::MatrixXd contribution_jacobian(std::size_t i, const Eigen::VectorXd& x) const override {
    return spec_.contribution_jacobian(i, x);
  }
  Eigen::VectorXd constraint(std::size_t i, std::size_t t, const Eigen::VectorXd& x) const override {
    return spec_.constraint(i, effective_time(t), x);
  }
  Eigen::MatrixXd constraint_jacobian(std::size_t i, std::size_t t, const Eigen::VectorXd& x) const override {
    return spec_.constraint_jacobian(i, effective_time(t), x);
  }
  const NoiseModel& noise(std::size_t) const override { return spec_.noise; }
  DeclaredConstants declared_constants() const override { return spec_.constants; }

 private:
  CustomGameSpec spec_;
};

/// Builds a scenario from its JSON definition:
///   {"id": "electricity-market" | "quadratic-toy", "players": N,
///    "time_varying": bool, "bounds": [lo, hi], "noise": {...},
///    "cap": G, "ranges": {"a": [lo, hi], ...}, ...}
/// `seed` keys the coefficient streams. Throws ConfigError.
std::shared_ptr<const GameModel> make_scenario(const nlohmann::json& def, std::uint64_t seed);

NoiseModel parse_noise(const nlohmann::json& def);
nlohmann::json noise_to_json(const NoiseModel& noise);

}  // namespace pushgne
