// thtlab: one binary, eight subcommands, each running one experiment driver
// and writing report.json (byte-stable), tables/*.csv, and metadata.json
// (timestamps live there so report.json is reproducible byte-for-byte).
//
// Configuration comes from flags plus an optional JSON config file whose
// keys mirror the flag names; flags override the file. Unknown config keys,
// keys that do not apply to the selected command, and malformed values are
// usage errors (exit 1) naming the offender. Suite commands (identity-suite,
// lower-bound-sweep, telescope-check) exit 2 when their pass contract fails.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tht/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tht;

namespace {

const std::vector<std::string> kCommands = {
    "norm-estimate", "decay-fit",      "telescope-check",   "sublevel-fit",
    "pattern-search", "dichotomy",     "lower-bound-sweep", "identity-suite"};

const std::set<std::string> kSuiteCommands = {"identity-suite",
                                              "lower-bound-sweep",
                                              "telescope-check"};

// Which config keys each command accepts (beyond command/out, valid
// everywhere). Shared storage would otherwise let a telescope flag leak
// into a pattern run silently.
const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> table = {
      {"identity-suite", {"n", "seed"}},
      {"lower-bound-sweep", {"n", "seed", "trials"}},
      {"telescope-check",
       {"n", "seed", "trees", "max-rects", "max-depth", "refine-trees",
        "lambda", "r", "pq-nodes", "t-nodes"}},
      {"norm-estimate",
       {"seed", "trials", "sizes", "growth-cap", "nodes-per-shell"}},
      {"decay-fit", {"n", "seed", "trials", "lambdas", "t-cells", "control"}},
      {"sublevel-fit",
       {"n", "seed", "trials", "max-depth", "t-cells", "epsilons", "control"}},
      {"pattern-search", {"n", "seed", "density", "t-min", "bitmap"}},
      {"dichotomy",
       {"n", "seed", "density", "bitmap", "k0", "m-factor", "max-iter", "eps",
        "c"}},
  };
  return table;
}

struct RawConfig {
  std::string command;
  std::string config_path;
  std::string out = ".";
  std::string bitmap_path;
  int n = 0;  // 0 = command default
  std::uint64_t seed = 1;
  int trials = -1;     // -1 = command default
  int max_depth = -1;  // telescope 3, sublevel 4
  int t_cells = -1;    // decay 384, sublevel 4096
  bool control = false;
  double density = 0.3;
  double t_min = 1.0 / 32.0;
  int k0 = 1;
  int m_factor = 2;
  int max_iter = 4;
  double eps = 0.1;
  double c = 1.0;
  std::vector<double> lambdas;
  std::vector<double> epsilons;
  std::vector<int> sizes;
  double growth_cap = 1.5;
  int nodes_per_shell = 32;
  int trees = 10;
  int max_rects = 6;
  int refine_trees = 2;
  double lambda = 1.5;
  double r = 0.5;
  int pq_nodes = 128;
  int t_nodes = 64;
};

struct KeyBinding {
  CLI::Option* opt = nullptr;
  std::function<void(const json&)> apply;  // throws std::invalid_argument
};

void expect(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string iso_utc(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  expect(in.good(), "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  expect(out.good(), "cannot write file: " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

BitmapSet load_bitmap(const std::string& path) {
  const std::string text = read_file(path);
  const size_t first = text.find_first_not_of(" \t\r\n");
  expect(first != std::string::npos, "bitmap file is empty: " + path);
  return text[first] == '{' ? bitmap_from_json(text) : bitmap_from_text(text);
}

// Binds every key once: the CLI option handle (to know whether a flag was
// set) and the typed setter used for config-file values.
std::map<std::string, KeyBinding> bind_options(CLI::App& app, RawConfig& cfg) {
  std::map<std::string, KeyBinding> keys;
  auto as_int = [](const json& v, const std::string& key) {
    expect(v.is_number_integer(), "config key '" + key + "': expected integer");
    return v.get<long long>();
  };
  auto as_double = [](const json& v, const std::string& key) {
    expect(v.is_number(), "config key '" + key + "': expected number");
    return v.get<double>();
  };

  auto add_int = [&](const std::string& key, const std::string& flag, int& ref,
                     const std::string& desc) {
    keys[key] = {app.add_option(flag, ref, desc),
                 [&ref, key, as_int](const json& v) {
                   ref = static_cast<int>(as_int(v, key));
                 }};
  };
  auto add_double = [&](const std::string& key, const std::string& flag,
                        double& ref, const std::string& desc) {
    keys[key] = {app.add_option(flag, ref, desc),
                 [&ref, key, as_double](const json& v) { ref = as_double(v, key); }};
  };

  keys["out"] = {app.add_option("--out", cfg.out, "output directory"),
                 [&cfg](const json& v) {
                   expect(v.is_string(), "config key 'out': expected string");
                   cfg.out = v.get<std::string>();
                 }};
  add_int("n", "--n", cfg.n, "grid side, power of two (default per command)");
  keys["seed"] = {app.add_option("--seed", cfg.seed, "rng seed"),
                  [&cfg](const json& v) {
                    expect(v.is_number_integer() && v.get<long long>() >= 0,
                           "config key 'seed': expected nonnegative integer");
                    cfg.seed = v.get<std::uint64_t>();
                  }};
  add_int("trials", "--trials", cfg.trials,
          "trial count (default per command)");
  add_int("max-depth", "--max-depth", cfg.max_depth,
          "partition/tree depth (default per command)");
  add_int("t-cells", "--t-cells", cfg.t_cells,
          "t-quadrature cells (default per command)");
  keys["control"] = {
      app.add_flag("--control", cfg.control,
                   "run the degenerate control configuration"),
      [&cfg](const json& v) {
        expect(v.is_boolean(), "config key 'control': expected boolean");
        cfg.control = v.get<bool>();
      }};
  keys["bitmap"] = {
      app.add_option("--bitmap", cfg.bitmap_path,
                     "bitmap file (text or JSON) instead of a random set"),
      [&cfg](const json& v) {
        expect(v.is_string(), "config key 'bitmap': expected string");
        cfg.bitmap_path = v.get<std::string>();
      }};
  add_double("density", "--density", cfg.density, "random bitmap density");
  add_double("t-min", "--t-min", cfg.t_min, "smallest pattern shift accepted");
  add_int("k0", "--k0", cfg.k0, "dichotomy base scale");
  add_int("m-factor", "--m-factor", cfg.m_factor, "dichotomy scale multiplier");
  add_int("max-iter", "--max-iter", cfg.max_iter, "dichotomy ladder length");
  add_double("eps", "--eps", cfg.eps, "dichotomy density scale");
  add_double("c", "--c", cfg.c, "dichotomy threshold constant");
  keys["lambdas"] = {
      app.add_option("--lambdas", cfg.lambdas, "decay sweep band scales")
          ->delimiter(','),
      [&cfg](const json& v) {
        expect(v.is_array(), "config key 'lambdas': expected array of numbers");
        cfg.lambdas.clear();
        for (const auto& x : v) {
          expect(x.is_number(), "config key 'lambdas': expected array of numbers");
          cfg.lambdas.push_back(x.get<double>());
        }
      }};
  keys["epsilons"] = {
      app.add_option("--epsilons", cfg.epsilons, "sublevel thresholds")
          ->delimiter(','),
      [&cfg](const json& v) {
        expect(v.is_array(), "config key 'epsilons': expected array of numbers");
        cfg.epsilons.clear();
        for (const auto& x : v) {
          expect(x.is_number(), "config key 'epsilons': expected array of numbers");
          cfg.epsilons.push_back(x.get<double>());
        }
      }};
  keys["sizes"] = {
      app.add_option("--sizes", cfg.sizes, "grid sides for the norm sweep")
          ->delimiter(','),
      [&cfg](const json& v) {
        expect(v.is_array(), "config key 'sizes': expected array of integers");
        cfg.sizes.clear();
        for (const auto& x : v) {
          expect(x.is_number_integer(),
                 "config key 'sizes': expected array of integers");
          cfg.sizes.push_back(static_cast<int>(x.get<long long>()));
        }
      }};
  add_double("growth-cap", "--growth-cap", cfg.growth_cap,
             "per-doubling growth bound");
  add_int("nodes-per-shell", "--nodes-per-shell", cfg.nodes_per_shell,
          "shell quadrature density");
  add_int("trees", "--trees", cfg.trees, "number of random trees");
  add_int("max-rects", "--max-rects", cfg.max_rects, "tree size bound");
  add_int("refine-trees", "--refine-trees", cfg.refine_trees,
          "trees given the 2x/4x refinement ladder");
  add_double("lambda", "--lambda", cfg.lambda, "telescoping form parameter");
  add_double("r", "--r", cfg.r, "telescoping form parameter");
  add_int("pq-nodes", "--pq-nodes", cfg.pq_nodes, "(p,q) quadrature nodes");
  add_int("t-nodes", "--t-nodes", cfg.t_nodes, "t quadrature nodes");
  return keys;
}

struct RunArtifacts {
  ExperimentReport report;
  std::string extra_csv_name;  // empty = none
  std::string extra_csv;
};

RunArtifacts dispatch(const std::string& cmd, const RawConfig& cfg) {
  RunArtifacts out;
  if (cmd == "identity-suite") {
    IdentityOptions o;
    if (cfg.n > 0) o.n = cfg.n;
    o.seed = cfg.seed;
    out.report = run_identity_suite(o);
  } else if (cmd == "lower-bound-sweep") {
    LowerBoundOptions o;
    if (cfg.n > 0) o.n = cfg.n;
    o.seed = cfg.seed;
    if (cfg.trials >= 0) o.trials = cfg.trials;
    out.report = run_lower_bound_sweep(o);
  } else if (cmd == "telescope-check") {
    TelescopeOptions o;
    if (cfg.n > 0) o.n = cfg.n;
    o.seed = cfg.seed;
    o.trees = cfg.trees;
    o.max_rects = cfg.max_rects;
    if (cfg.max_depth >= 0) o.max_depth = cfg.max_depth;
    o.refine_trees = cfg.refine_trees;
    o.lambda = cfg.lambda;
    o.r = cfg.r;
    o.quad.pq_nodes = cfg.pq_nodes;
    o.quad.t_nodes = cfg.t_nodes;
    out.report = run_telescope_check(o);
  } else if (cmd == "norm-estimate") {
    NormEstimateOptions o;
    if (!cfg.sizes.empty()) o.sizes = cfg.sizes;
    o.seed = cfg.seed;
    if (cfg.trials >= 0) o.trials = cfg.trials;
    o.growth_cap = cfg.growth_cap;
    o.quad.nodes_per_shell = cfg.nodes_per_shell;
    out.report = run_norm_estimate(o);
  } else if (cmd == "decay-fit") {
    DecayFitOptions o;
    if (cfg.n > 0) o.quad.n = cfg.n;
    o.quad.seed = cfg.seed;
    if (cfg.t_cells >= 0) o.quad.t_cells = cfg.t_cells;
    if (!cfg.lambdas.empty()) o.lambdas = cfg.lambdas;
    if (cfg.trials >= 0) o.trials = cfg.trials;
    o.control = cfg.control;
    out.report = run_decay_fit(o);
  } else if (cmd == "sublevel-fit") {
    SublevelOptions o;
    if (cfg.n > 0) o.n = cfg.n;
    o.seed = cfg.seed;
    if (cfg.trials >= 0) o.trials = cfg.trials;
    if (cfg.max_depth >= 0) o.max_depth = cfg.max_depth;
    if (cfg.t_cells >= 0) o.t_cells = cfg.t_cells;
    if (!cfg.epsilons.empty()) o.epsilons = cfg.epsilons;
    o.control = cfg.control;
    out.report = run_sublevel_fit(o);
  } else if (cmd == "pattern-search") {
    PatternSearchOptions o;
    if (cfg.n > 0) o.n = cfg.n;
    o.seed = cfg.seed;
    o.density = cfg.density;
    o.t_min = cfg.t_min;
    if (!cfg.bitmap_path.empty()) {
      o.bitmap = load_bitmap(cfg.bitmap_path);
      expect(cfg.n == 0 || cfg.n == o.bitmap->n,
             "--n disagrees with the bitmap side");
    }
    out.report = run_pattern_search(o);
    // Self-verification pass: re-read the file and look the corners up
    // again, independently of the in-memory copy the search used.
    if (o.bitmap && out.report.scalar("found") == 1.0) {
      const BitmapSet fresh = load_bitmap(cfg.bitmap_path);
      const int n = fresh.n;
      auto cell = [n](double u) {
        const double w = u - std::floor(u);
        const int idx = static_cast<int>(std::floor(w * n));
        return idx >= n ? 0 : idx;
      };
      const double x = out.report.scalar("x");
      const double y = out.report.scalar("y");
      const double t = out.report.scalar("t");
      expect(fresh.at(cell(x), cell(y)) && fresh.at(cell(x + t), cell(y)) &&
                 fresh.at(cell(x), cell(y + t * t)),
             "bitmap re-read failed to confirm the reported triple");
    }
  } else if (cmd == "dichotomy") {
    DichotomyOptions o;
    if (cfg.n > 0) o.n = cfg.n;
    o.seed = cfg.seed;
    o.density = cfg.density;
    if (!cfg.bitmap_path.empty()) {
      o.bitmap = load_bitmap(cfg.bitmap_path);
      expect(cfg.n == 0 || cfg.n == o.bitmap->n,
             "--n disagrees with the bitmap side");
    }
    o.k0 = cfg.k0;
    o.m_factor = cfg.m_factor;
    o.max_iter = cfg.max_iter;
    o.thresholds.eps = cfg.eps;
    o.thresholds.c = cfg.c;
    DichotomyExperiment d = run_dichotomy(o);
    out.report = d.report;
    out.extra_csv_name = "dichotomy.csv";
    out.extra_csv = dichotomy_to_csv(d.result);
  } else {
    expect(false, "unknown command '" + cmd + "'");
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"torus experiment harness"};
  app.require_subcommand(0, 1);
  RawConfig cfg;
  std::string command_flag;

  auto keys = bind_options(app, cfg);
  app.add_option("--command", command_flag,
                 "command to run (alternative to the subcommand form)");
  app.add_option("--config", cfg.config_path,
                 "JSON config file; explicit flags override its values");
  for (const std::string& name : kCommands)
    app.add_subcommand(name, "run " + name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  const auto started = std::chrono::system_clock::now();

  // Resolve the command: subcommand and --command must agree when both are
  // present; the config file fills in only when neither is given.
  std::string cmd;
  for (const auto* sub : app.get_subcommands()) cmd = sub->get_name();
  if (!command_flag.empty()) {
    if (!cmd.empty() && cmd != command_flag) {
      std::fprintf(stderr,
                   "error: subcommand '%s' conflicts with --command '%s'\n",
                   cmd.c_str(), command_flag.c_str());
      return 1;
    }
    cmd = command_flag;
  }

  json file_cfg = json::object();
  if (!cfg.config_path.empty()) {
    try {
      file_cfg = json::parse(read_file(cfg.config_path));
      expect(file_cfg.is_object(),
             "config file must hold a JSON object: " + cfg.config_path);
    } catch (const json::parse_error& e) {
      std::fprintf(stderr, "error: config file %s: %s\n",
                   cfg.config_path.c_str(), e.what());
      return 1;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  }

  try {
    if (cmd.empty() && file_cfg.contains("command")) {
      expect(file_cfg["command"].is_string(),
             "config key 'command': expected string");
      cmd = file_cfg["command"].get<std::string>();
    }
    expect(!cmd.empty(),
           "no command given (use a subcommand, --command, or a config file)");
    expect(allowed_keys().count(cmd) != 0, "unknown command '" + cmd + "'");
    const std::set<std::string>& allowed = allowed_keys().at(cmd);

    for (const auto& [key, binding] : keys) {
      const bool universal = key == "out";
      if (binding.opt->count() > 0 && !universal && allowed.count(key) == 0)
        expect(false, "flag --" + key + " does not apply to " + cmd);
    }
    for (const auto& [key, value] : file_cfg.items()) {
      if (key == "command") continue;
      const auto it = keys.find(key);
      expect(it != keys.end(), "unknown config key '" + key + "'");
      if (key != "out" && allowed.count(key) == 0)
        expect(false, "config key '" + key + "' does not apply to " + cmd);
      if (it->second.opt->count() == 0) it->second.apply(value);
    }

    const RunArtifacts art = dispatch(cmd, cfg);
    const auto finished = std::chrono::system_clock::now();

    const fs::path out_dir(cfg.out);
    fs::create_directories(out_dir / "tables");
    write_file(out_dir / "report.json", report_to_json(art.report));
    if (!art.report.rows.empty())
      write_file(out_dir / "tables" / "sweep.csv", report_to_csv(art.report));
    if (!art.extra_csv_name.empty())
      write_file(out_dir / "tables" / art.extra_csv_name, art.extra_csv);

    json meta;
    meta["command"] = cmd;
    meta["config_file"] = cfg.config_path;
    meta["started_at"] = iso_utc(started);
    meta["finished_at"] = iso_utc(finished);
    meta["elapsed_seconds"] =
        std::chrono::duration<double>(finished - started).count();
    write_file(out_dir / "metadata.json", meta.dump(2));

    std::printf("%s: n=%d seed=%llu\n", art.report.name.c_str(), art.report.n,
                static_cast<unsigned long long>(art.report.seed));
    for (const auto& [key, value] : art.report.scalars)
      std::printf("  %s = %.10g\n", key.c_str(), value);
    std::printf("wrote %s\n", (out_dir / "report.json").string().c_str());

    if (kSuiteCommands.count(cmd) != 0 && art.report.has_scalar("pass") &&
        art.report.scalar("pass") == 0.0) {
      std::fprintf(stderr, "%s: FAIL\n", cmd.c_str());
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
