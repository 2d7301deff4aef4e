#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pushgne/engine.hpp"
#include "pushgne/game.hpp"
#include "pushgne/graph.hpp"
#include "pushgne/metrics.hpp"
#include "pushgne/stepsize.hpp"

namespace pushgne {

inline constexpr const char* kVersion = "0.1.0";

/// One experiment. Serialized as JSON:
///
///   {"name": "...",
///    "scenario": {"id": "electricity-market", ...overrides},
///    "graph": {"id": "paper-fig1"} | {"file": "graphs.json"},
///    "stepsizes": {"a1": 0.8, "a2": 0.2, "a3": 0.2},
///    "regime": "online",
///    "horizon": 100000, "seed": 1, "runs": 5,
///    "monitors": "record" | "strict",
///    "output": {"dir": "...", "regret": true, "residuals": true,
///               "checkpoint_min": 1, "rate_fit_min": 1000, "iota_draws": 100000}}
struct RunConfig {
  std::string name = "custom";
  nlohmann::json scenario = nlohmann::json::object();
  nlohmann::json graph = nlohmann::json::object();
  PowerLaw exponents;
  std::optional<Regime> regime;
  std::size_t horizon = 1000;
  std::uint64_t seed = 1;
  std::size_t runs = 1;
  MonitorMode monitors = MonitorMode::kRecord;
  std::string output_dir;
  bool regret = true;
  bool residuals = true;
  std::size_t checkpoint_min = 1;
  double rate_fit_min = 1000.0;
  std::size_t iota_draws = 100000;

  nlohmann::json to_json() const;
};

/// Parses a config document. Syntax errors and bad fields are reported as
/// ConfigError with the line (and field path) at fault.
RunConfig parse_config(const std::string& text);
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// "paper-online" or "paper-offline" as a JSON document.
nlohmann::json preset_json(const std::string& name);
RunConfig preset(const std::string& name);

/// Applies "a.b.c=value" to a config document; `value` is read as JSON when
/// it parses, as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
/// Hash of the canonical (sorted-key) JSON form.
std::string config_hash(const RunConfig& config);

struct RunSeeds {
  std::uint64_t run = 0;
  std::uint64_t model = 0;  // coefficients; scenario.seed overrides
  std::uint64_t noise = 0;
  std::uint64_t graph = 0;
};

RunSeeds seeds_for(const RunConfig& config, std::size_t k);
std::shared_ptr<const GameModel> build_model(const RunConfig& config, const RunSeeds& seeds);
GraphSchedule build_graphs(const RunConfig& config, std::size_t players, const RunSeeds& seeds);
StepsizeSchedule build_stepsizes(const RunConfig& config);

struct RunOutcome {
  std::size_t index = 0;
  RunSeeds seeds;
  std::shared_ptr<const GameModel> model;
  RunResult result;
};

/// Executes run k of the config in memory.
RunOutcome execute_run(const RunConfig& config, std::size_t k);

/// Validation of both the graph schedule (for run 0's seeds) and the
/// stepsize regime.
struct ConfigValidation {
  ValidationReport graph;
  ValidationReport regime;
  bool ok() const { return graph.ok() && regime.ok(); }
};
ConfigValidation validate_config(const RunConfig& config);

// ---------------------------------------------------------------------------
// Subcommands. Each returns a process exit status and writes diagnostics to
// `err`.

struct BatchOptions {
  std::size_t workers = 1;
  std::ostream* progress = nullptr;
};

/// Writes run_<k>_series.csv, summary.csv, rate_fits.csv and manifest.json
/// into config.output_dir. Nonzero status on divergence or, in strict mode,
/// a monitor violation.
int cmd_run(const RunConfig& config, const BatchOptions& options, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& config, std::ostream& out);
/// vgne.json for time-invariant scenarios; comparator.json when `log_path`
/// names a series file of run `run_index`.
int cmd_solve(const RunConfig& config, const std::optional<std::string>& log_path, std::size_t run_index,
              std::ostream& out, std::ostream& err);
/// Recomputes regret and violation reports from series files into
/// `<output_dir>/metrics_summary.csv`.
int cmd_metrics(const RunConfig& config, const std::vector<std::string>& log_paths, std::ostream& out,
                std::ostream& err);

nlohmann::json vgne_to_json(const VgneSolution& sol);
nlohmann::json comparator_to_json(const ComparatorSolution& sol);

/// Default output directory: $PUSHGNE_OUT_ROOT (or "runs") / <name>-<hash>.
std::string default_output_dir(const RunConfig& config);

}  // namespace pushgne
