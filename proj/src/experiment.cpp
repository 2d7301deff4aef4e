#include "pushgne/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pushgne/rng.hpp"
#include "pushgne/scenarios.hpp"

namespace pushgne {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Line of the first occurrence of "key" in the source text, if any.
std::optional<std::size_t> line_of_key(const std::string* text, const std::string& path) {
  if (!text) return std::nullopt;
  const auto dot = path.find_last_of('.');
  const std::string key = "\"" + (dot == std::string::npos ? path : path.substr(dot + 1)) + "\"";
  const auto pos = text->find(key);
  if (pos == std::string::npos) return std::nullopt;
  return static_cast<std::size_t>(std::count(text->begin(), text->begin() + static_cast<long>(pos), '\n')) + 1;
}

struct FieldReader {
  const json& doc;
  const std::string* text;

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    const auto line = line_of_key(text, path);
    throw ConfigError((line ? "line " + std::to_string(*line) + ": " : std::string()) + "field '" + path +
                      "': " + msg);
  }

  const json* find(const std::string& path) const {
    const json* node = &doc;
    std::size_t start = 0;
    while (start <= path.size()) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->is_object() || !node->contains(key)) return nullptr;
      node = &(*node)[key];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    return node;
  }

  double number(const std::string& path, double fallback) const {
    const json* n = find(path);
    if (!n) return fallback;
    if (!n->is_number()) fail(path, "expected a number, got " + n->dump());
    return n->get<double>();
  }
  std::size_t count(const std::string& path, std::size_t fallback) const {
    const json* n = find(path);
    if (!n) return fallback;
    if (!n->is_number_unsigned() && !(n->is_number_integer() && n->get<long long>() >= 0))
      fail(path, "expected a nonnegative integer, got " + n->dump());
    return n->get<std::size_t>();
  }
  std::string string(const std::string& path, const std::string& fallback) const {
    const json* n = find(path);
    if (!n) return fallback;
    if (!n->is_string()) fail(path, "expected a string, got " + n->dump());
    return n->get<std::string>();
  }
  bool boolean(const std::string& path, bool fallback) const {
    const json* n = find(path);
    if (!n) return fallback;
    if (!n->is_boolean()) fail(path, "expected true or false, got " + n->dump());
    return n->get<bool>();
  }
  const json& object(const std::string& path) const {
    const json* n = find(path);
    if (!n) fail(path, "missing");
    if (!n->is_object()) fail(path, "expected an object");
    return *n;
  }
  void only(const json& node, std::initializer_list<const char*> keys, const std::string& where) const {
    for (auto it = node.begin(); it != node.end(); ++it) {
      bool known = false;
      for (const char* k : keys) known = known || it.key() == k;
      if (!known) fail(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
    }
  }
};

RunConfig config_from(const json& doc, const std::string* text) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object at the top level");
  FieldReader r{doc, text};
  r.only(doc, {"name", "scenario", "graph", "stepsizes", "regime", "horizon", "seed", "runs", "monitors", "output"},
         "");
  RunConfig c;
  c.name = r.string("name", c.name);
  c.scenario = r.object("scenario");
  if (!c.scenario.contains("id")) r.fail("scenario.id", "missing");
  c.graph = r.object("graph");
  r.only(c.graph, {"id", "file", "seed"}, "graph");
  if (c.graph.contains("id") == c.graph.contains("file")) r.fail("graph", "give exactly one of 'id' or 'file'");
  if (const json* s = r.find("stepsizes")) {
    if (!s->is_object()) r.fail("stepsizes", "expected an object");
    r.only(*s, {"a1", "a2", "a3"}, "stepsizes");
  }
  c.exponents.a1 = r.number("stepsizes.a1", c.exponents.a1);
  c.exponents.a2 = r.number("stepsizes.a2", c.exponents.a2);
  c.exponents.a3 = r.number("stepsizes.a3", c.exponents.a3);
  if (r.find("regime")) {
    try {
      c.regime = parse_regime(r.string("regime", ""));
    } catch (const ConfigError& e) {
      r.fail("regime", e.what());
    }
  }
  c.horizon = r.count("horizon", c.horizon);
  if (c.horizon < 4) r.fail("horizon", "must be at least 4");
  c.seed = static_cast<std::uint64_t>(r.count("seed", static_cast<std::size_t>(c.seed)));
  c.runs = r.count("runs", c.runs);
  if (c.runs == 0) r.fail("runs", "must be at least 1");
  const std::string mon = r.string("monitors", "record");
  if (mon == "record") c.monitors = MonitorMode::kRecord;
  else if (mon == "strict") c.monitors = MonitorMode::kStrict;
  else r.fail("monitors", "expected 'record' or 'strict', got '" + mon + "'");
  if (const json* o = r.find("output")) {
    if (!o->is_object()) r.fail("output", "expected an object");
    r.only(*o, {"dir", "regret", "residuals", "checkpoint_min", "rate_fit_min", "iota_draws"}, "output");
  }
  c.output_dir = r.string("output.dir", "");
  c.regret = r.boolean("output.regret", c.regret);
  c.residuals = r.boolean("output.residuals", c.residuals);
  c.checkpoint_min = r.count("output.checkpoint_min", c.checkpoint_min);
  c.rate_fit_min = r.number("output.rate_fit_min", c.rate_fit_min);
  c.iota_draws = r.count("output.iota_draws", c.iota_draws);
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

json RunConfig::to_json() const {
  json j;
  j["name"] = name;
  j["scenario"] = scenario;
  j["graph"] = graph;
  j["stepsizes"] = {{"a1", exponents.a1}, {"a2", exponents.a2}, {"a3", exponents.a3}};
  if (regime) j["regime"] = to_string(*regime);
  j["horizon"] = horizon;
  j["seed"] = seed;
  j["runs"] = runs;
  j["monitors"] = monitors == MonitorMode::kStrict ? "strict" : "record";
  j["output"] = {{"regret", regret},
                 {"residuals", residuals},
                 {"checkpoint_min", checkpoint_min},
                 {"rate_fit_min", rate_fit_min},
                 {"iota_draws", iota_draws}};
  if (!output_dir.empty()) j["output"]["dir"] = output_dir;
  return j;
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
    const auto begin = text.begin();
    const std::size_t line = static_cast<std::size_t>(std::count(begin, begin + static_cast<long>(upto), '\n')) + 1;
    const auto last_nl = text.rfind('\n', upto ? upto - 1 : 0);
    const std::size_t col = upto - (last_nl == std::string::npos || last_nl >= upto ? 0 : last_nl + 1) + 1;
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": syntax error: " + e.what());
  }
  return config_from(doc, &text);
}

RunConfig config_from_json(const json& doc) { return config_from(doc, nullptr); }

RunConfig load_config(const std::string& path) {
  try {
    return parse_config(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json preset_json(const std::string& name) {
  if (name == "paper-online") {
    return {{"name", "paper-online"},
            {"scenario",
             {{"id", "electricity-market"}, {"players", 5}, {"time_varying", true},
              {"noise", {{"kind", "uniform"}, {"half_width", 0.5}}}}},
            {"graph", {{"id", "paper-fig1"}}},
            {"stepsizes", {{"a1", 0.8}, {"a2", 0.2}, {"a3", 0.2}}},
            {"regime", "online"},
            {"horizon", 100000},
            {"seed", 1},
            {"runs", 5},
            {"monitors", "record"},
            {"output", {{"regret", true}, {"residuals", false}}}};
  }
  if (name == "paper-offline") {
    return {{"name", "paper-offline"},
            {"scenario",
             {{"id", "electricity-market"}, {"players", 5}, {"time_varying", false},
              {"noise", {{"kind", "uniform"}, {"half_width", 0.5}}}}},
            {"graph", {{"id", "paper-fig1"}}},
            {"stepsizes", {{"a1", 0.75}, {"a2", 0.25}, {"a3", 0.25}}},
            {"regime", "offline-rate"},
            {"horizon", 100000},
            {"seed", 1},
            {"runs", 5},
            {"monitors", "record"},
            {"output", {{"regret", false}, {"residuals", true}}}};
  }
  throw ConfigError("unknown preset '" + name + "' (expected paper-online or paper-offline)");
}

RunConfig preset(const std::string& name) { return config_from_json(preset_json(name)); }

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected key=value");
  const std::string path = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "': empty path segment");
    if (!node->is_object()) throw ConfigError("override '" + assignment + "': '" + key + "' is not inside an object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < size; ++k) {
    h ^= p[k];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_hash(const RunConfig& config) {
  json j = config.to_json();
  j["output"].erase("dir");  // where results land does not change them
  const std::string canon = j.dump();
  return hex64(fnv1a(canon.data(), canon.size()));
}

RunSeeds seeds_for(const RunConfig& config, std::size_t k) {
  RunSeeds s;
  s.run = split_seed(config.seed, k);
  s.model = config.scenario.contains("seed") ? config.scenario.at("seed").get<std::uint64_t>() : split_seed(s.run, 0);
  s.noise = split_seed(s.run, 1);
  s.graph = config.graph.contains("seed") ? config.graph.at("seed").get<std::uint64_t>() : split_seed(s.run, 2);
  return s;
}

std::shared_ptr<const GameModel> build_model(const RunConfig& config, const RunSeeds& seeds) {
  return make_scenario(config.scenario, seeds.model);
}

GraphSchedule build_graphs(const RunConfig& config, std::size_t players, const RunSeeds& seeds) {
  if (config.graph.contains("file")) {
    auto g = load_schedule_file(config.graph.at("file").get<std::string>());
    if (g.nodes() != players)
      throw ConfigError("graph file has " + std::to_string(g.nodes()) + " nodes, scenario has " +
                        std::to_string(players) + " players");
    return g;
  }
  return builtin_schedule(config.graph.at("id").get<std::string>(), players, seeds.graph);
}

StepsizeSchedule build_stepsizes(const RunConfig& config) { return StepsizeSchedule(config.exponents); }

RunOutcome execute_run(const RunConfig& config, std::size_t k) {
  RunOutcome o;
  o.index = k;
  o.seeds = seeds_for(config, k);
  o.model = build_model(config, o.seeds);
  const auto graphs = build_graphs(config, o.model->players(), o.seeds);
  RunOptions opts;
  opts.horizon = config.horizon;
  opts.seed = o.seeds.noise;
  opts.monitors = config.monitors;
  opts.regime = config.regime;
  opts.config_hash = config_hash(config);
  o.result = run(*o.model, graphs, build_stepsizes(config), opts);
  return o;
}

ConfigValidation validate_config(const RunConfig& config) {
  ConfigValidation v;
  const auto seeds = seeds_for(config, 0);
  const auto model = build_model(config, seeds);
  v.graph = validate_schedule(build_graphs(config, model->players(), seeds));
  if (config.regime) {
    v.regime = validate_regime(build_stepsizes(config), *config.regime);
  } else {
    v.regime.subject = "stepsizes";
    v.regime.add("regime", false, "no regime tag given");
  }
  return v;
}

std::string default_output_dir(const RunConfig& config) {
  const char* root = std::getenv("PUSHGNE_OUT_ROOT");
  const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
  return (base / (config.name + "-" + config_hash(config).substr(0, 8))).string();
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json file_record(const fs::path& path) {
  const std::string data = read_file(path.string());
  return {{"file", path.filename().string()}, {"bytes", data.size()}, {"fnv1a", hex64(fnv1a(data.data(), data.size()))}};
}

struct RunReport {
  std::size_t index = 0;
  RunSeeds seeds;
  bool ok = false;
  std::string error;
  std::size_t monitor_violations = 0;
  double min_r_estimate = 1.0;
  std::vector<std::string> summary_rows;
  std::vector<std::string> fit_rows;
  json constants;
};

void add_fit_row(RunReport& rep, const std::string& series, const std::string& player, const std::vector<double>& t,
                 const std::vector<double>& v, double t_min) {
  std::string row = std::to_string(rep.index) + "," + series + "," + player + "," + fmt(t_min) + "," +
                    fmt(t.empty() ? 0.0 : t.back()) + ",";
  try {
    const auto fit = rate_fit(t, v, t_min);
    row += fmt(fit.slope) + "," + fmt(fit.intercept) + "," + fmt(fit.r2) + "," + std::to_string(fit.used) + "," +
           (fit.warning.empty() ? "" : "\"" + fit.warning + "\"");
  } catch (const PreconditionError& e) {
    row += ",,,0,\"" + std::string(e.what()) + "\"";
  }
  rep.fit_rows.push_back(row);
}

void summarize(RunReport& rep, const RunConfig& config, const GameModel& model, const MetricsLog& log) {
  const std::string prefix = std::to_string(rep.index) + "," + std::to_string(rep.seeds.run) + ",";
  auto row = [&](const std::string& metric, const std::string& player, std::size_t horizon, double value) {
    rep.summary_rows.push_back(prefix + metric + "," + player + "," + std::to_string(horizon) + "," + fmt(value));
  };
  row("monitor_violations", "", log.steps, static_cast<double>(log.monitors.total()));
  row("worst_weight_mass", "", log.steps, log.monitors.worst_weight_mass);
  row("worst_tracking_mass", "", log.steps, log.monitors.worst_tracking_mass);

  const auto rg = violation(log);
  const auto cps = checkpoints(log.steps, config.checkpoint_min);
  std::vector<double> cp_t(cps.begin(), cps.end());
  std::vector<double> rg_rate;
  for (std::size_t h : cps) {
    row("violation", "", h, rg[h]);
    row("violation_rate", "", h, rg[h] / static_cast<double>(h));
    rg_rate.push_back(rg[h] / static_cast<double>(h));
  }
  add_fit_row(rep, "violation_rate", "", cp_t, rg_rate, config.rate_fit_min);

  if (config.regret) {
    const auto report = regret_report(model, log, cps);
    for (std::size_t i = 0; i < model.players(); ++i) {
      std::vector<double> rates;
      for (std::size_t k = 0; k < cps.size(); ++k) {
        const auto& e = report.players[i][k];
        row("regret", std::to_string(i), cps[k], e.regret);
        row("regret_rate", std::to_string(i), cps[k], report.regret_rate(i, k));
        if (!e.comparator_feasible) row("comparator_infeasible", std::to_string(i), cps[k], 1.0);
        if (e.skipped_steps > 0)
          row("comparator_skipped_steps", std::to_string(i), cps[k], static_cast<double>(e.skipped_steps));
        rates.push_back(report.regret_rate(i, k));
      }
      add_fit_row(rep, "regret_rate", std::to_string(i), cp_t, rates, config.rate_fit_min);
    }
  }
  if (config.residuals && !model.time_varying()) {
    VgneOptions vo;
    vo.grid_cross_check = false;
    const auto vgne = solve_vgne(model, vo);
    rep.constants["vgne_residual"] = vgne.residual.total();
    const auto res = residuals(log, vgne);
    for (std::size_t h : cps) {
      row("distance", "", h, res.distance[h - 1]);
      row("averaged_residual_sq", "", h, res.averaged_squared[h - 1]);
    }
    std::vector<double> steps(res.averaged_squared.size());
    for (std::size_t k = 0; k < steps.size(); ++k) steps[k] = static_cast<double>(k + 1);
    add_fit_row(rep, "averaged_residual_sq", "", steps, res.averaged_squared, config.rate_fit_min);
  }
}

}  // namespace

int cmd_run(const RunConfig& config, const BatchOptions& options, std::ostream& out, std::ostream& err) {
  if (config.regime) {
    const auto rep = validate_regime(build_stepsizes(config), *config.regime);
    if (!rep.ok()) {
      err << rep.to_string();
      return 2;
    }
  }
  const fs::path dir = config.output_dir.empty() ? fs::path(default_output_dir(config)) : fs::path(config.output_dir);
  fs::create_directories(dir);
  const auto started = std::chrono::steady_clock::now();
  const std::string hash = config_hash(config);

  std::vector<RunReport> reports(config.runs);
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t k = next++; k < config.runs; k = next++) {
      RunReport& rep = reports[k];
      rep.index = k;
      rep.seeds = seeds_for(config, k);
      try {
        const auto o = execute_run(config, k);
        const auto& log = o.result.log;
        {
          std::ofstream f(dir / ("run_" + std::to_string(k) + "_series.csv"));
          write_series_csv(f, log);
          if (!f) throw Error("failed writing series for run " + std::to_string(k));
        }
        rep.monitor_violations = log.monitors.total();
        for (double r : log.r_estimate) rep.min_r_estimate = std::min(rep.min_r_estimate, r);
        const auto c = o.model->declared_constants();
        rep.constants = {{"L", optional_number(c.set_and_constraint_bound)},
                         {"M", optional_number(c.jacobian_bound)},
                         {"S", optional_number(c.gradient_bound)},
                         {"L_sigma", optional_number(c.aggregation_lipschitz)},
                         {"r_estimate", rep.min_r_estimate},
                         {"iota", estimate_subgaussian_scale(*o.model, 0, config.iota_draws, split_seed(rep.seeds.run, 3))}};
        summarize(rep, config, *o.model, log);
        rep.ok = true;
      } catch (const std::exception& e) {
        rep.error = e.what();
      }
      if (options.progress) {
        std::lock_guard lock(io);
        *options.progress << "run " << k << (rep.ok ? " done" : " failed: " + rep.error) << '\n';
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(options.workers, config.runs));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  {
    std::ofstream f(dir / "summary.csv");
    f << "run,seed,metric,player,horizon,value\n";
    for (const auto& r : reports)
      for (const auto& row : r.summary_rows) f << row << '\n';
  }
  {
    std::ofstream f(dir / "rate_fits.csv");
    f << "run,series,player,t_min,t_max,slope,intercept,r2,points,warning\n";
    for (const auto& r : reports)
      for (const auto& row : r.fit_rows) f << row << '\n';
  }

  json manifest;
  manifest["tool"] = "pushgne";
  manifest["version"] = kVersion;
  manifest["config"] = config.to_json();
  manifest["config_hash"] = hash;
  manifest["master_seed"] = config.seed;
  json runs = json::array(), inventory = json::array();
  int status = 0;
  for (const auto& r : reports) {
    json j = {{"index", r.index},
              {"seed", r.seeds.run},
              {"model_seed", r.seeds.model},
              {"noise_seed", r.seeds.noise},
              {"graph_seed", r.seeds.graph},
              {"ok", r.ok},
              {"monitor_violations", r.monitor_violations},
              {"constants", r.constants}};
    if (!r.ok) {
      j["error"] = r.error;
      status = 1;
      err << "run " << r.index << ": " << r.error << '\n';
    } else {
      inventory.push_back(file_record(dir / ("run_" + std::to_string(r.index) + "_series.csv")));
    }
    runs.push_back(j);
  }
  inventory.push_back(file_record(dir / "summary.csv"));
  inventory.push_back(file_record(dir / "rate_fits.csv"));
  std::uint64_t outputs = 0xcbf29ce484222325ULL;
  for (const auto& f : inventory) {
    const std::string h = f["fnv1a"].get<std::string>();
    outputs = fnv1a(h.data(), h.size(), outputs);
  }
  manifest["runs"] = runs;
  manifest["outputs"] = inventory;
  manifest["outputs_hash"] = hex64(outputs);
  manifest["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  {
    std::ofstream f(dir / "manifest.json");
    f << manifest.dump(2) << '\n';
  }
  out << "wrote " << dir.string() << " (" << config.runs << " run(s), outputs " << hex64(outputs) << ")\n";
  return status;
}

int cmd_validate(const RunConfig& config, std::ostream& out) {
  const auto v = validate_config(config);
  out << v.graph.to_string() << v.regime.to_string();
  out << (v.ok() ? "valid\n" : "invalid\n");
  return v.ok() ? 0 : 1;
}

json vgne_to_json(const VgneSolution& sol) {
  json x = json::array();
  for (const auto& xi : sol.x_star) x.push_back(std::vector<double>(xi.data(), xi.data() + xi.size()));
  json j = {{"x_star", x},
            {"mu_star", std::vector<double>(sol.mu_star.data(), sol.mu_star.data() + sol.mu_star.size())},
            {"residuals",
             {{"primal", sol.residual.primal},
              {"dual", sol.residual.dual},
              {"complementarity", sol.residual.complementarity},
              {"total", sol.residual.total()}}},
            {"method", sol.method},
            {"tol", sol.tol},
            {"iterations", sol.iterations}};
  if (sol.grid) {
    json gx = json::array();
    for (const auto& xi : sol.grid->x) gx.push_back(xi(0));
    j["grid_check"] = {{"x", gx},
                       {"mu", std::vector<double>(sol.grid->mu.data(), sol.grid->mu.data() + sol.grid->mu.size())},
                       {"resolution", sol.grid->resolution},
                       {"max_gap", sol.grid_max_gap},
                       {"agrees", sol.grid_agrees}};
  }
  return j;
}

json comparator_to_json(const ComparatorSolution& sol) {
  json j = {{"player", sol.player},
            {"horizon", sol.horizon},
            {"feasible", sol.feasible},
            {"x_star", std::vector<double>(sol.x_star.data(), sol.x_star.data() + sol.x_star.size())},
            {"objective", sol.objective},
            {"method", sol.method},
            {"max_violation", sol.max_violation},
            {"skipped_steps", sol.skipped_steps}};
  if (!sol.intervals.empty()) {
    json iv = json::array();
    for (const auto& f : sol.intervals)
      iv.push_back({{"t", f.t}, {"lo", f.lo}, {"hi", f.hi}, {"empty", f.empty()}});
    j["intervals"] = iv;
    j["intersection"] = {{"lo", sol.intersection.lo}, {"hi", sol.intersection.hi}};
  }
  return j;
}

int cmd_solve(const RunConfig& config, const std::optional<std::string>& log_path, std::size_t run_index,
              std::ostream& out, std::ostream& err) {
  const fs::path dir = config.output_dir.empty() ? fs::path(default_output_dir(config)) : fs::path(config.output_dir);
  fs::create_directories(dir);
  const auto seeds = seeds_for(config, run_index);
  const auto model = build_model(config, seeds);
  int status = 0;
  if (!model->time_varying()) {
    try {
      const auto sol = solve_vgne(*model);
      std::ofstream(dir / "vgne.json") << vgne_to_json(sol).dump(2) << '\n';
      out << "vGNE residual " << sol.residual.total() << " after " << sol.iterations << " iterations\n";
      if (!sol.grid_agrees) {
        err << "grid cross-check disagrees by " << sol.grid_max_gap << '\n';
        status = 1;
      }
    } catch (const SolverError& e) {
      err << e.what() << '\n';
      return 1;
    }
  } else if (!log_path) {
    err << "scenario is time-varying: the vGNE is undefined; pass --log for comparators\n";
    return 2;
  }
  if (log_path) {
    std::ifstream in(*log_path);
    if (!in) {
      err << "cannot open '" << *log_path << "'\n";
      return 2;
    }
    const auto log = read_series_csv(in, *model);
    json all = json::array();
    for (std::size_t i = 0; i < model->players(); ++i) {
      const auto inputs = comparator_inputs(*model, log, i, log.steps);
      // Same treatment of empty steps as the regret reports.
      const bool scalar_box = model->dim(i) == 1 && model->local_set(i).as_box();
      const auto policy = scalar_box ? EmptyStepPolicy::kSkipEmptySteps : EmptyStepPolicy::kStrict;
      all.push_back(comparator_to_json(solve_comparator(*model, inputs, log.steps, 1e-10, policy)));
    }
    std::ofstream(dir / "comparator.json") << all.dump(2) << '\n';
    out << "comparators over " << log.steps << " steps written\n";
  }
  return status;
}

int cmd_metrics(const RunConfig& config, const std::vector<std::string>& log_paths, std::ostream& out,
                std::ostream& err) {
  const fs::path dir = config.output_dir.empty() ? fs::path(default_output_dir(config)) : fs::path(config.output_dir);
  std::vector<std::string> paths = log_paths;
  if (paths.empty())
    for (std::size_t k = 0; k < config.runs; ++k) paths.push_back((dir / ("run_" + std::to_string(k) + "_series.csv")).string());
  fs::create_directories(dir);
  std::ofstream f(dir / "metrics_summary.csv");
  f << "run,seed,metric,player,horizon,value\n";
  int status = 0;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    // Series files are named run_<k>_series.csv; fall back to position.
    std::size_t index = k;
    const std::string stem = fs::path(paths[k]).filename().string();
    if (std::sscanf(stem.c_str(), "run_%zu_series.csv", &index) != 1) index = k;
    std::ifstream in(paths[k]);
    if (!in) {
      err << "cannot open '" << paths[k] << "'\n";
      status = 1;
      continue;
    }
    const auto seeds = seeds_for(config, index);
    const auto model = build_model(config, seeds);
    try {
      const auto log = read_series_csv(in, *model);
      const auto rg = violation(log);
      const auto cps = checkpoints(log.steps, config.checkpoint_min);
      const std::string prefix = std::to_string(index) + "," + std::to_string(seeds.run) + ",";
      for (std::size_t h : cps) f << prefix << "violation,," << h << "," << fmt(rg[h]) << '\n';
      if (config.regret) {
        const auto rep = regret_report(*model, log, cps);
        for (std::size_t i = 0; i < model->players(); ++i)
          for (std::size_t c = 0; c < cps.size(); ++c)
            f << prefix << "regret," << i << "," << cps[c] << "," << fmt(rep.players[i][c].regret) << '\n';
      }
    } catch (const std::exception& e) {
      err << paths[k] << ": " << e.what() << '\n';
      status = 1;
    }
  }
  out << "wrote " << (dir / "metrics_summary.csv").string() << '\n';
  return status;
}

}  // namespace pushgne
