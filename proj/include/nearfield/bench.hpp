#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nearfield/array_channel.hpp"
#include "nearfield/estimators.hpp"

namespace nearfield {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SweepKind { kNone, kDistance, kSnr, kPilots, kBeta, kIterations, kSamplingAblation };

std::string sweep_name(SweepKind kind);
SweepKind parse_sweep(const std::string& name);

// Known estimator tags.
inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods = {"genie_ls", "ls",      "sw_omp",        "ss_sigw",
                                                   "p_somp",   "p_sigw", "p_somp_uniform"};
  return methods;
}

struct ExperimentConfig {
  int antennas = 64;
  int rf_chains = 4;
  double carrier_hz = 100e9;
  double bandwidth_hz = 100e6;
  int subcarriers = 32;
  double rho_min = 3.0;
  int paths = 6;
  double beta_delta = 1.2;
  int iterations = 10;
  int detected_paths = 12;
  int pilots = 32;
  double snr_db = 10.0;
  double angle_min = -0.8660254037844386;
  double angle_max = 0.8660254037844386;
  double distance_min = 5.0;
  double distance_max = 10.0;
  int uniform_rings = 6;       // S for the uniform-sampling dictionary
  double uniform_rho_max = 0;  // 0 selects the Rayleigh distance
  int users = 4;               // documented only; users are estimated independently

  SweepKind sweep = SweepKind::kNone;
  std::vector<double> values;
  int trials = 50;
  std::vector<std::string> methods = {"genie_ls", "sw_omp", "ss_sigw", "p_somp", "p_sigw"};
  std::uint64_t seed = 20240101;
  int threads = 0;  // 0 selects hardware concurrency

  // Full scale: N = 256, M = 256, 200 trials.
  void apply_full_scale();
  // Copy with one sweep value applied.
  ExperimentConfig at(double sweep_value) const;
  void validate() const;

  ArrayGeometry geometry() const { return ArrayGeometry::half_wavelength(antennas, carrier_hz); }
  FrequencyGrid grid() const { return FrequencyGrid::ofdm(subcarriers, bandwidth_hz, carrier_hz); }
};

// key = value lines, '#' comments; keys mirror ExperimentConfig field names.
void apply_config_text(ExperimentConfig& cfg, std::istream& in);
void load_config_file(ExperimentConfig& cfg, const std::string& path);

struct ResultRecord {
  std::string method;
  std::string sweep_name;
  double sweep_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double nmse_linear = 0.0;
  double nmse_db = 0.0;
  double wall_ms = 0.0;
  std::string error;                    // non-empty when the estimator threw
  std::uint64_t observation_checksum = 0;
  std::vector<double> objective_trace;  // refinement methods only

  bool operator==(const ResultRecord&) const = default;
};

double nmse(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& H_hat);
inline double to_db(double linear) { return 10.0 * std::log10(linear); }

// Counter-based stream split of the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter);

// FNV-1a over the raw bytes of a complex matrix.
std::uint64_t checksum(const Eigen::MatrixXcd& m);

// Everything a trial needs before the estimators run. Deterministic in the seed.
struct TrialInstance {
  ChannelRealization channel;
  PilotObservation observation;
  WhitenedObservation whitened;
};
TrialInstance make_trial(const ExperimentConfig& cfg, std::uint64_t seed);

// Dictionaries are trial-independent and shared across trials of a point.
struct PointContext {
  ExperimentConfig config;
  ArrayGeometry geometry;
  PolarDictionary polar;
  std::optional<PolarDictionary> uniform;
};
PointContext make_point_context(const ExperimentConfig& cfg);

EstimationResult run_method(const std::string& method, const PointContext& ctx,
                            const TrialInstance& trial, const Eigen::MatrixXcd* polar_sensing);

// One paired trial: every method sees the same channel, combiner and noise.
std::vector<ResultRecord> run_point(const ExperimentConfig& cfg, double sweep_value, int trial,
                                    const std::vector<std::string>& methods);
std::vector<ResultRecord> run_point(const PointContext& ctx, double sweep_value, int trial,
                                    const std::vector<std::string>& methods);

// Trial t uses the same seed at every sweep value (common random numbers across points).
std::uint64_t trial_seed(const ExperimentConfig& cfg, int trial);

// CSV: method,sweep_name,sweep_value,trial,seed,nmse_linear,nmse_db,wall_ms
inline constexpr const char* kCsvHeader =
    "method,sweep_name,sweep_value,trial,seed,nmse_linear,nmse_db,wall_ms";
std::string to_csv_row(const ResultRecord& r);
void write_csv(std::ostream& out, const std::vector<ResultRecord>& records, bool header = true);
std::vector<ResultRecord> read_csv(std::istream& in);

struct SummaryRow {
  std::string method;
  double sweep_value = 0.0;
  int trials = 0;
  double mean_linear = 0.0;
  double mean_db = 0.0;
  double ci_low_db = 0.0;   // 95% bootstrap interval of the mean
  double ci_high_db = 0.0;
  int failures = 0;
};

std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records,
                                  std::uint64_t bootstrap_seed = 7, int resamples = 1000);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

// Canonical order: (method, sweep_value, trial).
void canonical_sort(std::vector<ResultRecord>& records);

struct CampaignOutput {
  std::vector<ResultRecord> records;  // all rows, including resumed ones
  std::vector<SummaryRow> summary;
  int failures = 0;
  int skipped = 0;  // rows found in an existing CSV
};

// Runs every (value, trial) of cfg. When `csv_path` names an existing CSV,
// rows already present are kept and not recomputed; new rows are appended as
// each sweep point completes. Plot-data files "<stem>.<method>.dat", a summary
// "<stem>.summary.csv" and "<stem>.svg" are written next to it.
CampaignOutput run_campaign(const ExperimentConfig& cfg, const std::string& csv_path,
                            const std::function<void(const std::string&)>& log = {});

// |G(beta)| on a uniform grid over [0, beta_max].
std::vector<std::pair<double, double>> coherence_plot(double beta_max = 10.0, int points = 1001);

// Per-iteration objective traces: method,sweep_value,trial,iteration,objective
void write_traces(std::ostream& out, const std::vector<ResultRecord>& records);

// Single-file SVG line chart of mean NMSE (dB) per method.
void write_svg(std::ostream& out, const std::vector<SummaryRow>& rows, const std::string& x_label);

}  // namespace nearfield
