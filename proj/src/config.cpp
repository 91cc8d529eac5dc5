#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "nearfield/bench.hpp"

namespace nearfield {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("bad number for '" + key + "': " + v);
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("bad integer for '" + key + "': " + v);
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("bad unsigned integer for '" + key + "': " + v);
  return out;
}

}  // namespace

std::string sweep_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::kNone: return "none";
    case SweepKind::kDistance: return "distance";
    case SweepKind::kSnr: return "snr_db";
    case SweepKind::kPilots: return "pilots";
    case SweepKind::kBeta: return "beta_delta";
    case SweepKind::kIterations: return "iterations";
    case SweepKind::kSamplingAblation: return "ablation_distance";
  }
  return "none";
}

SweepKind parse_sweep(const std::string& name) {
  for (SweepKind k : {SweepKind::kNone, SweepKind::kDistance, SweepKind::kSnr, SweepKind::kPilots,
                      SweepKind::kBeta, SweepKind::kIterations, SweepKind::kSamplingAblation}) {
    if (sweep_name(k) == name) return k;
  }
  throw ConfigError("unknown sweep: " + name);
}

void ExperimentConfig::apply_full_scale() {
  antennas = 256;
  subcarriers = 256;
  trials = 200;
}

ExperimentConfig ExperimentConfig::at(double v) const {
  ExperimentConfig c = *this;
  switch (sweep) {
    case SweepKind::kNone: break;
    case SweepKind::kDistance:
    case SweepKind::kSamplingAblation:
      c.distance_min = v;
      c.distance_max = v;
      break;
    case SweepKind::kSnr: c.snr_db = v; break;
    case SweepKind::kPilots: c.pilots = static_cast<int>(std::lround(v)); break;
    case SweepKind::kBeta: c.beta_delta = v; break;
    case SweepKind::kIterations: c.iterations = static_cast<int>(std::lround(v)); break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (values.empty()) throw ConfigError("sweep values are empty");
  if (methods.empty()) throw ConfigError("no methods selected");
  for (const auto& m : methods) {
    const auto& known = known_methods();
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw ConfigError("unknown method: " + m);
  }
  for (double v : values) {
    const ExperimentConfig c = at(v);
    if (c.antennas < 2) throw ConfigError("antennas must be >= 2");
    if (c.rf_chains < 1 || c.pilots < 1) throw ConfigError("pilots and rf_chains must be >= 1");
    if (c.subcarriers < 1) throw ConfigError("subcarriers must be >= 1");
    if (c.paths < 1) throw ConfigError("paths must be >= 1");
    if (c.detected_paths < 1 || c.detected_paths > c.pilots * c.rf_chains)
      throw ConfigError("detected_paths must lie in [1, pilots * rf_chains]");
    if (c.iterations < 0) throw ConfigError("iterations must be >= 0");
    if (!(c.beta_delta > 0.0) || !(c.rho_min > 0.0)) throw ConfigError("beta_delta and rho_min must be > 0");
    if (!(c.carrier_hz > 0.0) || !(c.bandwidth_hz >= 0.0)) throw ConfigError("bad carrier/bandwidth");
    if (!(c.angle_min <= c.angle_max) || c.angle_min < -1.0 || c.angle_max > 1.0)
      throw ConfigError("bad angle range");
    if (!(c.distance_min > 0.0) || !(c.distance_min <= c.distance_max))
      throw ConfigError("bad distance range");
    if (c.uniform_rings < 1) throw ConfigError("uniform_rings must be >= 1");
  }
}

void apply_config_text(ExperimentConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    auto as_int = [&] { return static_cast<int>(parse_int(key, val)); };
    auto as_double = [&] { return parse_double(key, val); };

    if (key == "antennas") cfg.antennas = as_int();
    else if (key == "rf_chains") cfg.rf_chains = as_int();
    else if (key == "carrier_hz") cfg.carrier_hz = as_double();
    else if (key == "bandwidth_hz") cfg.bandwidth_hz = as_double();
    else if (key == "subcarriers") cfg.subcarriers = as_int();
    else if (key == "rho_min") cfg.rho_min = as_double();
    else if (key == "paths") cfg.paths = as_int();
    else if (key == "beta_delta") cfg.beta_delta = as_double();
    else if (key == "iterations") cfg.iterations = as_int();
    else if (key == "detected_paths") cfg.detected_paths = as_int();
    else if (key == "pilots") cfg.pilots = as_int();
    else if (key == "snr_db") cfg.snr_db = as_double();
    else if (key == "angle_min") cfg.angle_min = as_double();
    else if (key == "angle_max") cfg.angle_max = as_double();
    else if (key == "distance_min") cfg.distance_min = as_double();
    else if (key == "distance_max") cfg.distance_max = as_double();
    else if (key == "uniform_rings") cfg.uniform_rings = as_int();
    else if (key == "uniform_rho_max") cfg.uniform_rho_max = as_double();
    else if (key == "users") cfg.users = as_int();
    else if (key == "sweep") cfg.sweep = parse_sweep(val);
    else if (key == "trials") cfg.trials = as_int();
    else if (key == "seed") cfg.seed = parse_u64(key, val);
    else if (key == "threads") cfg.threads = as_int();
    else if (key == "methods") cfg.methods = split_list(val);
    else if (key == "values") {
      cfg.values.clear();
      for (const auto& item : split_list(val)) cfg.values.push_back(parse_double(key, item));
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  apply_config_text(cfg, in);
}

}  // namespace nearfield
