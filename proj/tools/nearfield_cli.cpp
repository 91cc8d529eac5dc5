#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nearfield/bench.hpp"
#include "nearfield/fresnel.hpp"
#include "nearfield/polar_dictionary.hpp"

using namespace nearfield;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  std::string methods;
  std::string values;
  std::string out;
  bool paper_scale = false;
  int threads = -1;
};

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s)) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("bad sweep value: " + item);
    out.push_back(v);
  }
  return out;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option_function<std::uint64_t>("--seed", [&o](const std::uint64_t& s) {
    o.seed = s;
    o.seed_set = true;
  }, "master seed");
  cmd->add_option("--trials", o.trials, "trials per sweep point")->check(CLI::PositiveNumber);
  cmd->add_option("--methods", o.methods, "comma-separated estimator tags");
  cmd->add_option("--values", o.values, "comma-separated sweep values");
  cmd->add_option("--out", o.out, "output path");
  cmd->add_flag("--paper-scale", o.paper_scale, "N = 256, M = 256, 200 trials");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

// Defaults, then --paper-scale, then the config file, then explicit flags.
ExperimentConfig resolve(const CommonOptions& o, ExperimentConfig cfg) {
  if (o.paper_scale) cfg.apply_full_scale();
  if (!o.config_path.empty()) load_config_file(cfg, o.config_path);
  if (o.seed_set) cfg.seed = o.seed;
  if (o.trials > 0) cfg.trials = o.trials;
  if (!o.methods.empty()) cfg.methods = split(o.methods);
  if (!o.values.empty()) cfg.values = parse_values(o.values);
  if (o.threads >= 0) cfg.threads = o.threads;
  return cfg;
}

int run_sweep(const CommonOptions& o, const ExperimentConfig& defaults, const std::string& stem) {
  const ExperimentConfig cfg = resolve(o, defaults);
  const std::string csv = o.out.empty() ? stem + ".csv" : o.out;
  const CampaignOutput out =
      run_campaign(cfg, csv, [](const std::string& line) { std::cerr << line << '\n'; });
  write_summary(std::cout, out.summary);
  if (out.skipped > 0) std::cerr << "resumed " << out.skipped << " rows from " << csv << '\n';
  if (out.failures > 0) {
    std::cerr << out.failures << " trial(s) failed\n";
    return kExitPartial;
  }
  return 0;
}

ExperimentConfig sweep_defaults(SweepKind kind, std::vector<double> values) {
  ExperimentConfig cfg;
  cfg.sweep = kind;
  cfg.values = std::move(values);
  return cfg;
}

int coherence_plot_cmd(const std::string& out_path, double beta_max, int points) {
  const std::string path = out_path.empty() ? "coherence.dat" : out_path;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  f << "# beta |G(beta)|\n";
  f.precision(17);
  for (const auto& [b, g] : coherence_plot(beta_max, points)) f << b << ' ' << g << '\n';
  std::cout << "wrote " << path << '\n';
  return 0;
}

int audit_cmd(const CommonOptions& o, bool full_mu) {
  ExperimentConfig cfg = resolve(o, ExperimentConfig{});
  const PolarDictionary dict =
      build_polar_dictionary({cfg.geometry(), cfg.beta_delta, cfg.rho_min});
  const CoherenceReport report = audit_coherence(dict, full_mu);
  const std::string stem = o.out.empty() ? "dictionary" : o.out;

  nlohmann::json j;
  j["rings"] = dict.rings;
  j["columns"] = dict.num_columns();
  j["coherence"] = report;
  j["metadata"] = dictionary_metadata(dict);
  std::ofstream(stem + ".json") << j.dump(2) << '\n';
  write_dictionary_binary(dict, stem + ".bin");

  std::cout << "S = " << dict.rings << ", Q = " << dict.num_columns()
            << ", design coherence = " << report.design_coherence;
  if (full_mu) std::cout << ", mu = " << report.max_coherence;
  std::cout << "\nwrote " << stem << ".json and " << stem << ".bin\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-field XL-MIMO channel estimation benchmark"};
  app.require_subcommand(1);

  CommonOptions opts;
  struct Sweep {
    const char* name;
    const char* help;
    ExperimentConfig defaults;
  };
  ExperimentConfig trace = sweep_defaults(SweepKind::kSnr, {0, 10, 20});
  trace.methods = {"ss_sigw", "p_sigw"};
  ExperimentConfig ablate = sweep_defaults(SweepKind::kSamplingAblation, {3, 4, 5, 6, 8, 10});
  ablate.methods = {"p_somp", "p_somp_uniform"};
  std::vector<Sweep> sweeps = {
      {"sweep-distance", "NMSE against user distance",
       sweep_defaults(SweepKind::kDistance, log_spaced(3.0, 120.0, 13))},
      {"sweep-snr", "NMSE against SNR", sweep_defaults(SweepKind::kSnr, {-5, 0, 5, 10, 15, 20})},
      {"sweep-pilots", "NMSE against pilot length", sweep_defaults(SweepKind::kPilots, {8, 16, 32, 64})},
      {"sweep-beta", "NMSE against the ring spacing parameter",
       sweep_defaults(SweepKind::kBeta, {0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 2.0})},
      {"trace-iterations", "per-iteration objective traces of the refinement", trace},
      {"ablate-sampling", "ring sampling against uniform distance sampling", ablate},
  };
  std::vector<std::pair<CLI::App*, const Sweep*>> sweep_cmds;
  for (const auto& s : sweeps) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, opts);
    sweep_cmds.emplace_back(cmd, &s);
  }

  double beta_max = 10.0;
  int points = 1001;
  CLI::App* coh = app.add_subcommand("coherence-plot", "|G(beta)| plot data");
  coh->add_option("--beta-max", beta_max, "upper end of the beta grid")->check(CLI::PositiveNumber);
  coh->add_option("--points", points, "grid points")->check(CLI::Range(2, 10000000));
  coh->add_option("--out", opts.out, "output .dat path");

  bool full_mu = false;
  CLI::App* audit = app.add_subcommand("audit-dictionary", "coherence audit and binary dump of the dictionary");
  add_common(audit, opts);
  audit->add_flag("--max-coherence", full_mu, "also compute the coherence over all column pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    for (const auto& [cmd, s] : sweep_cmds)
      if (cmd->parsed()) return run_sweep(opts, s->defaults, s->name);
    if (coh->parsed()) return coherence_plot_cmd(opts.out, beta_max, points);
    if (audit->parsed()) return audit_cmd(opts, full_mu);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
