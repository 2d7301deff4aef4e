#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pushgne {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A point was handed to an oracle outside the player's local set.
class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf appeared in an update. Carries where it happened.
class DivergedRun : public Error {
 public:
  DivergedRun(std::size_t player, std::size_t step, std::string update)
      : Error("diverged: player " + std::to_string(player) + " step " +
              std::to_string(step) + " in " + update + " update"),
        player_(player),
        step_(step),
        update_(std::move(update)) {}

  std::size_t player() const noexcept { return player_; }
  std::size_t step() const noexcept { return step_; }
  const std::string& update() const noexcept { return update_; }

 private:
  std::size_t player_;
  std::size_t step_;
  std::string update_;
};

class MonitorViolation : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> residual_trace = {})
      : Error(what), residual_trace_(std::move(residual_trace)) {}
  const std::vector<double>& residual_trace() const noexcept { return residual_trace_; }

 private:
  std::vector<double> residual_trace_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Pass/fail list produced by the validators. Failures are entries, not throws.
struct ValidationReport {
  struct Check {
    std::string name;
    bool passed = true;
    std::string detail;
    std::optional<std::size_t> first_offending_index;
  };

  std::string subject;
  std::vector<Check> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  const Check* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  void add(std::string name, bool passed, std::string detail = {},
           std::optional<std::size_t> index = std::nullopt) {
    checks.push_back({std::move(name), passed, std::move(detail), index});
  }

  std::string to_string() const;
};

}  // namespace pushgne
