// Command-line front end: run, validate, solve, metrics.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pushgne/experiment.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::string out;
  bool strict = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "experiment config (JSON)");
  cmd->add_option("--preset", c.preset, "built-in config")->check(CLI::IsMember({"paper-online", "paper-offline"}));
  cmd->add_option("--set", c.overrides, "override a config field, e.g. --set stepsizes.a1=0.7");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--runs", c.runs, "number of seeded runs");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_flag("--strict-monitors", c.strict, "abort a run on the first bound-monitor violation");
}

pushgne::RunConfig resolve(const Common& c) {
  using nlohmann::json;
  if (c.config_path.empty() == c.preset.empty())
    throw pushgne::ConfigError("give exactly one of --config or --preset");
  json doc;
  if (!c.preset.empty()) {
    doc = pushgne::preset_json(c.preset);
  } else {
    // Parse through the text path first so syntax and field errors carry lines.
    doc = pushgne::load_config(c.config_path).to_json();
  }
  for (const auto& o : c.overrides) pushgne::apply_override(doc, o);
  if (c.seed) doc["seed"] = *c.seed;
  if (c.runs) doc["runs"] = *c.runs;
  if (c.strict) doc["monitors"] = "strict";
  if (!c.out.empty()) doc["output"]["dir"] = c.out;
  return pushgne::config_from_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed online generalized Nash equilibrium seeking over directed graphs"};
  app.set_version_flag("--version", std::string(pushgne::kVersion));
  app.require_subcommand(1);

  Common run_opts, validate_opts, solve_opts, metrics_opts;
  std::size_t workers = 1;
  auto* run = app.add_subcommand("run", "execute a batch of seeded runs and write CSVs plus a manifest");
  add_common(run, run_opts);
  run->add_option("--workers", workers, "parallel runs")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "check the graph schedule and stepsize regime without running");
  add_common(validate, validate_opts);

  std::optional<std::string> solve_log;
  std::size_t solve_run = 0;
  auto* solve = app.add_subcommand("solve", "compute the vGNE and, given a series file, the static comparators");
  add_common(solve, solve_opts);
  solve->add_option("--log", solve_log, "run series CSV for comparator solves");
  solve->add_option("--run", solve_run, "run index the series file belongs to");

  std::vector<std::string> metric_logs;
  auto* metrics = app.add_subcommand("metrics", "recompute regret and violation reports from series files");
  add_common(metrics, metrics_opts);
  metrics->add_option("--log", metric_logs, "series CSVs (default: every run in the output directory)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      pushgne::BatchOptions batch;
      batch.workers = workers;
      batch.progress = &std::cerr;
      return pushgne::cmd_run(resolve(run_opts), batch, std::cout, std::cerr);
    }
    if (validate->parsed()) return pushgne::cmd_validate(resolve(validate_opts), std::cout);
    if (solve->parsed()) return pushgne::cmd_solve(resolve(solve_opts), solve_log, solve_run, std::cout, std::cerr);
    if (metrics->parsed()) return pushgne::cmd_metrics(resolve(metrics_opts), metric_logs, std::cout, std::cerr);
  } catch (const pushgne::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
