#include "nearfield/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace nearfield {

double nmse(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& H_hat) {
  if (H.rows() != H_hat.rows() || H.cols() != H_hat.cols())
    throw std::invalid_argument("nmse: dimension mismatch");
  const double ref = H.squaredNorm();
  if (!(ref > 0.0)) throw std::invalid_argument("nmse: reference channel is zero");
  return (H - H_hat).squaredNorm() / ref;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter) {
  // splitmix64 finaliser applied to a keyed counter
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ stream) ^ counter);
}

std::uint64_t checksum(const Eigen::MatrixXcd& m) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
  const std::size_t n = sizeof(Complex) * static_cast<std::size_t>(m.size());
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t trial_seed(const ExperimentConfig& cfg, int trial) {
  return derive_seed(cfg.seed, 0, static_cast<std::uint64_t>(trial));
}

TrialInstance make_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const ArrayGeometry geom = cfg.geometry();
  PathSampling sampling{cfg.paths, cfg.angle_min, cfg.angle_max, cfg.distance_min,
                        cfg.distance_max};
  ChannelRealization channel = synthesize_channel(geom, cfg.grid(), sample_random_paths(rng, sampling));
  const Combiner comb = generate_combiner(rng, cfg.pilots, cfg.rf_chains, cfg.antennas);
  PilotObservation obs = observe(channel, comb, snr_db_to_noise_power(cfg.snr_db), rng);
  WhitenedObservation white = whiten(obs, build_whitener(comb));
  return TrialInstance{std::move(channel), std::move(obs), std::move(white)};
}

PointContext make_point_context(const ExperimentConfig& cfg) {
  const ArrayGeometry geom = cfg.geometry();
  PointContext ctx{cfg, geom, build_polar_dictionary(DictionaryConfig{geom, cfg.beta_delta, cfg.rho_min}),
                   std::nullopt};
  if (std::find(cfg.methods.begin(), cfg.methods.end(), "p_somp_uniform") != cfg.methods.end()) {
    const double rho_max = cfg.uniform_rho_max > 0.0 ? cfg.uniform_rho_max : rayleigh_distance(geom);
    ctx.uniform = uniform_dictionary(geom, cfg.uniform_rings, cfg.rho_min, rho_max);
  }
  return ctx;
}

EstimationResult run_method(const std::string& method, const PointContext& ctx,
                            const TrialInstance& trial, const Eigen::MatrixXcd* polar_sensing) {
  const ExperimentConfig& cfg = ctx.config;
  const WhitenedObservation& obs = trial.whitened;
  const int L = cfg.detected_paths;
  auto polar = [&]() { return polar_sensing ? *polar_sensing : sensing_matrix(obs, ctx.polar.W); };

  if (method == "genie_ls") return genie_ls(obs, ctx.geometry, trial.channel.paths);
  if (method == "ls") return ls_baseline(obs);
  if (method == "sw_omp") return sw_omp_baseline(obs, ctx.geometry, L);
  if (method == "ss_sigw") return ss_sigw_baseline(obs, ctx.geometry, L, cfg.iterations);
  if (method == "p_somp") return p_somp(obs, ctx.polar, polar(), L);
  if (method == "p_sigw") {
    RefinementOptions opt;
    opt.iterations = cfg.iterations;
    return p_sigw(obs, ctx.polar, polar(), L, opt);
  }
  if (method == "p_somp_uniform") {
    if (!ctx.uniform) throw std::logic_error("uniform dictionary not prepared");
    EstimationResult r = p_somp(obs, *ctx.uniform, L);
    r.method = "p_somp_uniform";
    return r;
  }
  throw std::invalid_argument("unknown method: " + method);
}

std::vector<ResultRecord> run_point(const PointContext& ctx, double sweep_value, int trial,
                                    const std::vector<std::string>& methods) {
  const ExperimentConfig& cfg = ctx.config;
  const std::uint64_t seed = trial_seed(cfg, trial);
  const TrialInstance inst = make_trial(cfg, seed);
  const std::uint64_t obs_sum = checksum(inst.observation.Y);

  const bool needs_polar = std::any_of(methods.begin(), methods.end(), [](const std::string& m) {
    return m == "p_somp" || m == "p_sigw";
  });
  Eigen::MatrixXcd sensing;
  if (needs_polar) sensing = sensing_matrix(inst.whitened, ctx.polar.W);

  // P-SIGW starts from the P-SOMP solution; reuse it when both are requested.
  std::optional<EstimationResult> somp_cache;

  std::vector<ResultRecord> out;
  for (const std::string& method : methods) {
    ResultRecord rec;
    rec.method = method;
    rec.sweep_name = sweep_name(cfg.sweep);
    rec.sweep_value = sweep_value;
    rec.trial = trial;
    rec.seed = seed;
    rec.observation_checksum = obs_sum;
    try {
      EstimationResult est;
      if (method == "p_sigw" && somp_cache && cfg.iterations >= 0) {
        RefinementOptions opt;
        opt.iterations = cfg.iterations;
        est = refine_gridless(inst.whitened, ctx.geometry, *somp_cache, cfg.rho_min,
                              ctx.polar.config.threshold_distance(), opt);
        est.method = "p_sigw";
      } else {
        est = run_method(method, ctx, inst, needs_polar ? &sensing : nullptr);
        if (method == "p_somp") somp_cache = est;
      }
      rec.nmse_linear = nmse(inst.channel.H, est.H);
      if (!std::isfinite(rec.nmse_linear)) throw std::runtime_error("non-finite estimate");
      rec.wall_ms = est.wall_ms;
      rec.objective_trace = std::move(est.objective_trace);
    } catch (const std::exception& e) {
      rec.nmse_linear = 1.0;
      rec.error = e.what();
    }
    rec.nmse_db = to_db(rec.nmse_linear);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ResultRecord> run_point(const ExperimentConfig& cfg, double sweep_value, int trial,
                                    const std::vector<std::string>& methods) {
  ExperimentConfig point = cfg.at(sweep_value);
  point.methods = methods;
  return run_point(make_point_context(point), sweep_value, trial, methods);
}

void canonical_sort(std::vector<ResultRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
    return std::tie(a.method, a.sweep_value, a.trial) < std::tie(b.method, b.sweep_value, b.trial);
  });
}

CampaignOutput run_campaign(const ExperimentConfig& cfg, const std::string& csv_path,
                            const std::function<void(const std::string&)>& log) {
  cfg.validate();
  namespace fs = std::filesystem;

  CampaignOutput result;
  using Key = std::tuple<std::string, double, int>;
  std::set<Key> done;
  if (!csv_path.empty() && fs::exists(csv_path) && fs::file_size(csv_path) > 0) {
    std::ifstream in(csv_path);
    for (ResultRecord& r : read_csv(in)) {
      done.emplace(r.method, r.sweep_value, r.trial);
      result.records.push_back(std::move(r));
    }
    result.skipped = static_cast<int>(result.records.size());
  }

  std::ofstream csv;
  if (!csv_path.empty()) {
    const bool fresh = result.records.empty();
    csv.open(csv_path, fresh ? std::ios::trunc : std::ios::app);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    if (fresh) csv << kCsvHeader << '\n';
  }

  const int threads = std::max(1, cfg.threads > 0 ? cfg.threads
                                                  : static_cast<int>(std::thread::hardware_concurrency()));

  for (double value : cfg.values) {
    ExperimentConfig point_cfg = cfg.at(value);
    const PointContext ctx = make_point_context(point_cfg);

    std::vector<std::pair<int, std::vector<std::string>>> tasks;
    for (int t = 0; t < cfg.trials; ++t) {
      std::vector<std::string> missing;
      for (const auto& m : cfg.methods)
        if (!done.count(Key{m, value, t})) missing.push_back(m);
      if (!missing.empty()) tasks.emplace_back(t, std::move(missing));
    }

    std::vector<std::vector<ResultRecord>> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++)
        slots[i] = run_point(ctx, value, tasks[i].first, tasks[i].second);
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(threads, static_cast<int>(tasks.size()));
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<ResultRecord> fresh;
    for (auto& s : slots)
      for (auto& r : s) fresh.push_back(std::move(r));
    canonical_sort(fresh);
    for (const auto& r : fresh) {
      if (!r.error.empty()) ++result.failures;
      if (csv) csv << to_csv_row(r) << '\n';
    }
    if (csv) csv.flush();
    if (log) {
      std::ostringstream msg;
      msg << sweep_name(cfg.sweep) << "=" << value << ": " << fresh.size() << " new rows";
      log(msg.str());
    }
    for (auto& r : fresh) result.records.push_back(std::move(r));
  }

  canonical_sort(result.records);
  result.summary = summarize(result.records);

  if (!csv_path.empty()) {
    const fs::path base(csv_path);
    const std::string stem = (base.parent_path() / base.stem()).string();
    {
      std::ofstream out(stem + ".summary.csv");
      write_summary(out, result.summary);
    }
    std::set<std::string> methods;
    for (const auto& row : result.summary) methods.insert(row.method);
    for (const auto& m : methods) {
      std::ofstream dat(stem + "." + m + ".dat");
      dat << "# " << sweep_name(cfg.sweep) << " mean_nmse_db ci_low_db ci_high_db\n";
      for (const auto& row : result.summary)
        if (row.method == m)
          dat << row.sweep_value << ' ' << row.mean_db << ' ' << row.ci_low_db << ' '
              << row.ci_high_db << '\n';
    }
    {
      std::ofstream svg(stem + ".svg");
      write_svg(svg, result.summary, sweep_name(cfg.sweep));
    }
    const bool any_trace = std::any_of(result.records.begin(), result.records.end(),
                                       [](const ResultRecord& r) { return !r.objective_trace.empty(); });
    if (any_trace) {
      std::ofstream tr(stem + ".traces.csv");
      write_traces(tr, result.records);
    }
  }
  return result;
}

std::vector<std::pair<double, double>> coherence_plot(double beta_max, int points) {
  if (points < 2 || !(beta_max > 0.0)) throw std::invalid_argument("bad plot grid");
  std::vector<std::pair<double, double>> out;
  out.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double beta = beta_max * i / (points - 1);
    out.emplace_back(beta, g_magnitude(beta));
  }
  return out;
}

}  // namespace nearfield
