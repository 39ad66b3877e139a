// Command-line front end: simulate multi-site datasets, run the federated
// ensemble and benchmark methods, and aggregate reports into plot-ready
// tables.
//
// Exit codes: 0 success, 1 usage/configuration error, 2 partial replicate
// failure, 3 oracle method requested without --allow-oracle.

#include "font/federation.hpp"
#include "font/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flat key=value config files, TOML-style lines or a JSON object. Values are
// applied as new defaults before the command line is parsed, so flags always
// win: flags > config file > built-in defaults.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError("config file not found: " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::map<std::string, std::string> values;
  const std::size_t first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '{') {
    const json j = json::parse(content);
    for (auto it = j.begin(); it != j.end(); ++it) {
      values[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    }
    return values;
  }
  std::istringstream lines(content);
  std::string line;
  while (std::getline(lines, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r\"");
      const auto b = s.find_last_not_of(" \t\r\"");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (!key.empty()) values[key] = trim(line.substr(eq + 1));
  }
  return values;
}

// The --config value must be known before CLI11 parses, since it sets the
// defaults that parsing starts from.
std::string prescan_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

class ConfigSetters {
 public:
  void add(const std::string& key, std::function<void(const std::string&)> set) {
    setters_[key] = std::move(set);
  }
  void add_int(const std::string& key, int& field) {
    add(key, [&field](const std::string& v) { field = std::stoi(v); });
  }
  void add_double(const std::string& key, double& field) {
    add(key, [&field](const std::string& v) { field = std::stod(v); });
  }
  void add_string(const std::string& key, std::string& field) {
    add(key, [&field](const std::string& v) { field = v; });
  }
  void add_bool(const std::string& key, bool& field) {
    add(key, [&field](const std::string& v) { field = v == "true" || v == "1"; });
  }
  void add_seed(const std::string& key, std::uint64_t& field) {
    add(key, [&field](const std::string& v) { field = std::stoull(v); });
  }

  void apply(const std::map<std::string, std::string>& values) const {
    for (const auto& [key, value] : values) {
      const auto it = setters_.find(key);
      if (it == setters_.end()) throw CLI::FileError("unknown config key: " + key);
      it->second(value);
    }
  }

 private:
  std::map<std::string, std::function<void(const std::string&)>> setters_;
};


struct SimArgs {
  std::string kind = "vector";
  std::string regime = "homogeneous";
  int m = 5;
  int k = 5;
  int p = 10;
  double sigma2 = 0.05;
  int n_min = 50;
  int n_max = 500;
  double dirichlet_alpha = 1.0;
  bool mu_interval = false;
  int s = 5;
  int len_min = 8;
  int len_max = 20;
  double separation = 0.8;
  std::uint64_t seed = 0;
  std::string out = "dataset";
};

struct RunArgs {
  std::string data;
  std::string methods = "font";
  std::string k = "5";
  int k_min = 2;
  int k_max = 8;
  int replicates = 1;
  bool allow_oracle = false;
  bool json_roundtrip = false;
  int pseudo_replicas = 0;
  double pseudo_frac = 0.8;
  int kfed_k_local = 0;
  int restarts = 10;
  int max_iter = 300;
  double tol = 1e-6;
  double smoothing = 1e-6;
  int threads = 0;
  std::uint64_t seed = 0;
  std::string out = "run";
  std::string export_consensus;  // dense consensus-distance CSV path
  SimArgs sim;  // used when --data is absent
};

void add_sim_setters(ConfigSetters& s, SimArgs& a) {
  s.add_string("kind", a.kind);
  s.add_string("regime", a.regime);
  s.add_int("m", a.m);
  s.add_int("sim-k", a.k);
  s.add_int("p", a.p);
  s.add_double("sigma2", a.sigma2);
  s.add_int("n-min", a.n_min);
  s.add_int("n-max", a.n_max);
  s.add_double("dirichlet-alpha", a.dirichlet_alpha);
  s.add_bool("mu-interval", a.mu_interval);
  s.add_int("s", a.s);
  s.add_int("len-min", a.len_min);
  s.add_int("len-max", a.len_max);
  s.add_double("separation", a.separation);
  s.add_seed("seed", a.seed);
  s.add_string("out", a.out);
}

json sim_args_echo(const SimArgs& a) {
  return json{{"kind", a.kind},       {"regime", a.regime},
              {"M", a.m},             {"K", a.k},
              {"p", a.p},             {"sigma2", a.sigma2},
              {"n_min", a.n_min},     {"n_max", a.n_max},
              {"dirichlet_alpha", a.dirichlet_alpha},
              {"mu_interval", a.mu_interval},
              {"S", a.s},             {"len_min", a.len_min},
              {"len_max", a.len_max}, {"separation", a.separation},
              {"seed", a.seed}};
}

font::SimulationConfig to_sim_config(const SimArgs& a) {
  font::SimulationConfig cfg;
  cfg.M = a.m;
  cfg.K = a.k;
  cfg.p = a.p;
  cfg.sigma2 = a.sigma2;
  cfg.n_min = a.n_min;
  cfg.n_max = a.n_max;
  cfg.regime = font::regime_from_string(a.regime);
  cfg.dirichlet_alpha = a.dirichlet_alpha;
  cfg.mu_interval = a.mu_interval;
  cfg.seed = a.seed;
  return cfg;
}

font::MarkovSimConfig to_markov_config(const SimArgs& a) {
  font::MarkovSimConfig cfg;
  cfg.M = a.m;
  cfg.K = a.k;
  cfg.S = a.s;
  cfg.n_min = a.n_min;
  cfg.n_max = a.n_max;
  cfg.len_min = a.len_min;
  cfg.len_max = a.len_max;
  cfg.separation = a.separation;
  cfg.seed = a.seed;
  return cfg;
}

int cmd_simulate(const SimArgs& args) {
  font::MultiSiteDataset ds;
  if (args.kind == "vector") {
    ds = font::gen_gaussian_sites(to_sim_config(args));
  } else if (args.kind == "sequence") {
    ds = font::gen_markov_sites(to_markov_config(args));
  } else {
    std::cerr << "simulate: --kind must be vector or sequence\n";
    return 1;
  }
  json echo = sim_args_echo(args);
  echo["tool_version"] = font::kToolVersion;
  font::write_dataset(ds, echo, args.out);
  int contaminated = 0;
  for (const auto& site : ds.vector_sites) {
    if (site.outlier_mask.size() > 0 && site.outlier_mask.any()) contaminated += 1;
  }
  std::cout << "wrote " << ds.n_sites() << " site files to " << args.out
            << " (n_total=" << ds.n_total() << ", contaminated_sites=" << contaminated << ")\n";
  return 0;
}

int cmd_run(const RunArgs& args) {
  font::SuiteConfig cfg;
  cfg.seed = args.seed;
  cfg.replicates = args.replicates;
  cfg.allow_oracle = args.allow_oracle;
  cfg.threads = args.threads;
  cfg.kfed_k_local = args.kfed_k_local;

  std::stringstream ms(args.methods);
  std::string item;
  while (std::getline(ms, item, ',')) {
    if (!item.empty()) cfg.methods.push_back(font::method_from_string(item));
  }

  cfg.font.fit.restarts = args.restarts;
  cfg.font.fit.max_iter = args.max_iter;
  cfg.font.fit.tol = args.tol;
  cfg.font.fit.smoothing = args.smoothing;
  if (args.k == "auto") {
    cfg.font.auto_k = true;
    for (int k = args.k_min; k <= args.k_max; ++k) cfg.font.k_range.push_back(k);
  } else {
    cfg.font.K = std::stoi(args.k);
  }
  if (args.pseudo_replicas > 0) {
    cfg.font.pseudo.enabled = true;
    cfg.font.pseudo.replicas = args.pseudo_replicas;
    cfg.font.pseudo.frac = args.pseudo_frac;
  }
  cfg.font.json_roundtrip = args.json_roundtrip;

  font::MultiSiteDataset fixed;
  json echo;
  if (!args.data.empty()) {
    if (!fs::exists(fs::path(args.data) / "manifest.json")) {
      std::cerr << "run: dataset directory " << args.data << " not found\n";
      return 1;
    }
    fixed = font::read_dataset(args.data);
    cfg.fixed_data = &fixed;
    echo["data"] = args.data;
    const json manifest = font::read_manifest(args.data);
    echo["dataset_manifest"] = manifest;
    if (manifest.contains("config")) {
      const json& mc = manifest["config"];
      cfg.fixed_label.setting = mc.value("regime", std::string("fixed"));
      cfg.fixed_label.sigma2 = mc.value("sigma2", 0.0);
      cfg.fixed_label.n_min = mc.value("n_min", 0);
      cfg.fixed_label.n_max = mc.value("n_max", 0);
    }
  } else if (args.sim.kind == "sequence") {
    cfg.markov_sim = to_markov_config(args.sim);
    echo["simulate"] = sim_args_echo(args.sim);
  } else {
    cfg.sim = to_sim_config(args.sim);
    echo["simulate"] = sim_args_echo(args.sim);
  }
  echo["methods"] = args.methods;
  echo["k"] = args.k;
  echo["replicates"] = args.replicates;
  echo["seed"] = args.seed;
  echo["threads"] = args.threads;
  echo["restarts"] = args.restarts;
  echo["max_iter"] = args.max_iter;
  echo["tol"] = args.tol;
  echo["smoothing"] = args.smoothing;
  echo["pseudo_replicas"] = args.pseudo_replicas;
  echo["pseudo_frac"] = args.pseudo_frac;
  echo["json_roundtrip"] = args.json_roundtrip;
  echo["allow_oracle"] = args.allow_oracle;

  font::RunReport report;
  try {
    report = font::run_benchmark_suite(cfg);
  } catch (const font::OracleGuard& e) {
    std::cerr << "run: " << e.what() << "\n";
    return 3;
  }

  if (!args.export_consensus.empty()) {
    if (cfg.fixed_data == nullptr) {
      std::cerr << "run: --export-consensus requires --data\n";
      return 1;
    }
    font::FontOptions opt = cfg.font;
    opt.fit.seed = args.seed;
    const font::FontRun fr = font::run_font(fixed, opt);
    const font::ConsensusDistance cd = font::ensemble_distance(fr.reps, fr.weights_full);
    font::write_consensus_csv(cd, args.export_consensus, args.seed, echo);
    std::cout << "wrote dense consensus distance to " << args.export_consensus << "\n";
  }
  report.tool_version = font::kToolVersion;
  report.master_seed = args.seed;
  report.config_echo = echo;
  font::write_report(report, args.out);
  int failed = 0;
  for (const auto& row : report.rows) failed += row.failed ? 1 : 0;
  std::cout << "wrote " << report.rows.size() << " result rows to " << args.out
            << (failed ? " (" + std::to_string(failed) + " failed)" : "") << "\n";
  return failed > 0 ? 2 : 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out,
               std::uint64_t seed) {
  std::vector<font::RunReport> reports;
  for (const auto& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) p /= "report.json";
    if (!fs::exists(p)) continue;
    std::ifstream f(p);
    json j;
    f >> j;
    reports.push_back(font::report_from_json(j));
  }
  if (reports.empty()) {
    std::cerr << "report: no report.json found in the given inputs\n";
    return 1;
  }
  std::ofstream f(out);
  if (!f) {
    std::cerr << "report: cannot write " << out << "\n";
    return 1;
  }
  json echo;
  echo["inputs"] = inputs;
  f << "# font " << font::kToolVersion << " seed=" << seed << " config=" << echo.dump() << "\n";
  f << font::aggregate_reports(reports);
  std::cout << "wrote " << out << " from " << reports.size() << " report(s)\n";
  return 0;
}

void add_sim_options(CLI::App* app, SimArgs& args) {
  app->add_option("--kind", args.kind, "Data kind: vector | sequence")
      ->check(CLI::IsMember({"vector", "sequence"}));
  app->add_option("--regime", args.regime, "homogeneous | imbalanced | contaminated")
      ->check(CLI::IsMember({"homogeneous", "imbalanced", "contaminated"}));
  app->add_option("--m", args.m, "Number of sites");
  app->add_option("--sim-k", args.k, "True cluster count");
  app->add_option("--p", args.p, "Feature dimension (vector data)");
  app->add_option("--sigma2", args.sigma2, "Per-coordinate noise variance");
  app->add_option("--n-min", args.n_min, "Smallest site size");
  app->add_option("--n-max", args.n_max, "Largest site size");
  app->add_option("--dirichlet-alpha", args.dirichlet_alpha, "Proportion concentration");
  app->add_flag("--mu-interval", args.mu_interval,
                "Draw cluster-mean entries uniformly on [-1,1] instead of {-1,+1}");
  app->add_option("--s", args.s, "State count (sequence data)");
  app->add_option("--len-min", args.len_min, "Shortest sequence length");
  app->add_option("--len-max", args.len_max, "Longest sequence length");
  app->add_option("--separation", args.separation, "Chain separation in (0,1]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"font: federated one-shot ensemble clustering"};
  app.set_version_flag("--version", std::string("font ") + font::kToolVersion);
  app.require_subcommand(1);
  std::string config_path;
  auto add_config = [&config_path](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "Flat key=value (TOML-style) or JSON config; flags take precedence");
  };

  SimArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a multi-site dataset");
  add_config(simulate);
  add_sim_options(simulate, sim_args);
  simulate->add_option("--seed", sim_args.seed, "Master seed")->envname("FONT_SEED");
  simulate->add_option("--out", sim_args.out, "Output directory");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run clustering methods and write a report");
  add_config(run);
  run->add_option("--data", run_args.data, "Dataset directory (from `simulate`)");
  add_sim_options(run, run_args.sim);
  run->add_option("--methods", run_args.methods,
                  "Comma-separated: font,local,consensus,kfed,pooled,best_local");
  run->add_option("--k", run_args.k, "Cluster count or `auto`");
  run->add_option("--k-min", run_args.k_min, "Smallest K tried with --k auto");
  run->add_option("--k-max", run_args.k_max, "Largest K tried with --k auto");
  run->add_option("--replicates", run_args.replicates, "Replicates per cell");
  run->add_flag("--allow-oracle", run_args.allow_oracle,
                "Permit pooled/best_local, which need information sites cannot share");
  run->add_flag("--json-roundtrip", run_args.json_roundtrip,
                "Serialize and re-parse every federation message");
  run->add_option("--pseudo-replicas", run_args.pseudo_replicas,
                  "Resampled models per site (0 = off)");
  run->add_option("--pseudo-frac", run_args.pseudo_frac, "Resampling fraction");
  run->add_option("--kfed-k-local", run_args.kfed_k_local, "Per-site centers for kfed (0 = K)");
  run->add_option("--restarts", run_args.restarts, "Fit restarts");
  run->add_option("--max-iter", run_args.max_iter, "Fit iteration cap");
  run->add_option("--tol", run_args.tol, "Fit convergence tolerance");
  run->add_option("--smoothing", run_args.smoothing, "Markov probability smoothing");
  run->add_option("--threads", run_args.threads, "Worker threads (0 = all cores)");
  run->add_option("--seed", run_args.seed, "Master seed")->envname("FONT_SEED");
  run->add_option("--out", run_args.out, "Report directory");
  run->add_option("--export-consensus", run_args.export_consensus,
                  "Also write the dense consensus distance CSV (N <= 10,000; needs --data)");

  std::vector<std::string> report_inputs;
  std::string report_out = "aggregate.csv";
  std::uint64_t report_seed = 0;
  CLI::App* report = app.add_subcommand("report", "Aggregate reports into a plot-ready CSV");
  add_config(report);
  report->add_option("inputs", report_inputs, "Report files or directories")->required();
  report->add_option("--out", report_out, "Aggregated CSV path");
  report->add_option("--seed", report_seed, "Echoed into the output header")->envname("FONT_SEED");

  try {
    const std::string config_file = prescan_config_path(argc, argv);
    if (!config_file.empty()) {
      std::string sub;
      for (int i = 1; i < argc; ++i) {
        if (argv[i][0] != '-') {
          sub = argv[i];
          break;
        }
      }
      ConfigSetters setters;
      if (sub == "simulate") {
        add_sim_setters(setters, sim_args);
      } else if (sub == "run") {
        add_sim_setters(setters, run_args.sim);
        setters.add_string("data", run_args.data);
        setters.add_string("methods", run_args.methods);
        setters.add_string("k", run_args.k);
        setters.add_int("k-min", run_args.k_min);
        setters.add_int("k-max", run_args.k_max);
        setters.add_int("replicates", run_args.replicates);
        setters.add_bool("allow-oracle", run_args.allow_oracle);
        setters.add_bool("json-roundtrip", run_args.json_roundtrip);
        setters.add_int("pseudo-replicas", run_args.pseudo_replicas);
        setters.add_double("pseudo-frac", run_args.pseudo_frac);
        setters.add_int("kfed-k-local", run_args.kfed_k_local);
        setters.add_int("restarts", run_args.restarts);
        setters.add_int("max-iter", run_args.max_iter);
        setters.add_double("tol", run_args.tol);
        setters.add_double("smoothing", run_args.smoothing);
        setters.add_int("threads", run_args.threads);
        setters.add_seed("seed", run_args.seed);
        setters.add_string("out", run_args.out);
        setters.add_string("export-consensus", run_args.export_consensus);
      } else if (sub == "report") {
        setters.add_string("out", report_out);
        setters.add_seed("seed", report_seed);
      }
      setters.apply(read_config_file(config_file));
    }
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_args);
    if (run->parsed()) return cmd_run(run_args);
    if (report->parsed()) return cmd_report(report_inputs, report_out, report_seed);
  } catch (const font::OracleGuard& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
