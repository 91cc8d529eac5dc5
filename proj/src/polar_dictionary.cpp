#include "nearfield/polar_dictionary.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nearfield {

double DictionaryConfig::threshold_distance() const {
  const double N = geometry.num_antennas();
  const double d = geometry.spacing();
  return N * N * d * d / (2.0 * geometry.wavelength() * beta_delta * beta_delta);
}

void DictionaryConfig::validate() const {
  if (!(beta_delta > 0.0) || !std::isfinite(beta_delta))
    throw std::invalid_argument("beta_delta must be positive");
  if (!(rho_min > 0.0) || !std::isfinite(rho_min))
    throw std::invalid_argument("rho_min must be positive");
}

double grid_angle(int num_antennas, int n) {
  return (2.0 * n - num_antennas + 1) / static_cast<double>(num_antennas);
}

PolarDictionary build_polar_dictionary(const DictionaryConfig& config) {
  config.validate();
  const ArrayGeometry& geom = config.geometry;
  const int N = geom.num_antennas();
  const double z_delta = config.threshold_distance();

  // Ring 0 is the planar-wave ring; ring s >= 1 sits at Z_Delta / s and is
  // kept while Z_Delta / s >= rho_min.
  int rings = 1;
  while (z_delta / rings >= config.rho_min) ++rings;

  PolarDictionary dict{Eigen::MatrixXcd(N, static_cast<Eigen::Index>(N) * rings), {}, config,
                       DistanceSampling::kInverseRings, rings};
  dict.atoms.reserve(static_cast<std::size_t>(N) * rings);
  for (int s = 0; s < rings; ++s) {
    for (int n = 0; n < N; ++n) {
      const double theta = grid_angle(N, n);
      const double r = s == 0 ? kInfiniteDistance : z_delta * (1.0 - theta * theta) / s;
      dict.W.col(static_cast<Eigen::Index>(s) * N + n) = near_steering(geom, theta, r);
      dict.atoms.push_back(Atom{s, n, theta, r});
    }
  }
  return dict;
}

Eigen::MatrixXcd build_angular_dictionary(const ArrayGeometry& geom) {
  const int N = geom.num_antennas();
  Eigen::MatrixXcd F(N, N);
  for (int n = 0; n < N; ++n) F.col(n) = far_steering(geom, grid_angle(N, n));
  return F;
}

PolarDictionary uniform_dictionary(const ArrayGeometry& geom, int rings, double rho_min,
                                   double rho_max) {
  if (rings < 1) throw std::invalid_argument("need at least one ring");
  if (!(rho_min > 0.0) || !(rho_max > rho_min))
    throw std::invalid_argument("need 0 < rho_min < rho_max");
  const int N = geom.num_antennas();
  PolarDictionary dict{Eigen::MatrixXcd(N, static_cast<Eigen::Index>(N) * rings), {},
                       DictionaryConfig{geom, 0.0, rho_min}, DistanceSampling::kUniform, rings};
  dict.atoms.reserve(static_cast<std::size_t>(N) * rings);
  for (int s = 0; s < rings; ++s) {
    const double r = rho_min + static_cast<double>(s) / rings * (rho_max - rho_min);
    for (int n = 0; n < N; ++n) {
      const double theta = grid_angle(N, n);
      dict.W.col(static_cast<Eigen::Index>(s) * N + n) = near_steering(geom, theta, r);
      dict.atoms.push_back(Atom{s, n, theta, r});
    }
  }
  return dict;
}

double coherence_exact(const Eigen::VectorXcd& b1, const Eigen::VectorXcd& b2) {
  if (b1.size() != b2.size()) throw std::invalid_argument("coherence of vectors of unequal length");
  return std::abs(b1.dot(b2));
}

double coherence_approx_same_ring(int num_antennas, double theta_p, double theta_q) {
  const double diff = theta_q - theta_p;
  const double den = num_antennas * std::sin(0.5 * kPi * diff);
  if (std::abs(den) < 1e-12) return 1.0;
  return std::abs(std::sin(0.5 * num_antennas * kPi * diff) / den);
}

double coherence_beta(const ArrayGeometry& geom, double theta, double r_p, double r_q) {
  if (!(r_p > 0.0) || !(r_q > 0.0)) throw std::invalid_argument("distances must be positive");
  const double N = geom.num_antennas();
  const double d = geom.spacing();
  const double inv_p = r_p == kInfiniteDistance ? 0.0 : 1.0 / r_p;
  const double inv_q = r_q == kInfiniteDistance ? 0.0 : 1.0 / r_q;
  return std::sqrt(N * N * d * d * (1.0 - theta * theta) / (2.0 * geom.wavelength()) *
                   std::abs(inv_p - inv_q));
}

double coherence_approx_same_angle(const ArrayGeometry& geom, double theta, double r_p,
                                   double r_q) {
  return g_magnitude(coherence_beta(geom, theta, r_p, r_q));
}

CoherenceReport audit_coherence(const PolarDictionary& dict, bool compute_max_coherence) {
  const ArrayGeometry& geom = dict.config.geometry;
  const int N = geom.num_antennas();
  const double bound = fresnel_validity_bound(geom);

  CoherenceReport report;
  report.fresnel_bound = bound;
  report.design_coherence =
      dict.sampling == DistanceSampling::kInverseRings ? g_magnitude(dict.config.beta_delta) : 0.0;
  report.max_coherence = -1.0;

  auto inside = [bound](double r) { return std::isfinite(r) && r > bound; };

  for (int s = 0; s + 1 < dict.rings; ++s) {
    for (int n = 0; n < N; ++n) {
      const int p = s * N + n;
      const int q = (s + 1) * N + n;
      const Atom& ap = dict.atoms[p];
      const Atom& aq = dict.atoms[q];
      CoherencePair pair;
      pair.column_p = p;
      pair.column_q = q;
      pair.exact = coherence_exact(dict.W.col(p), dict.W.col(q));
      pair.approx = coherence_approx_same_angle(geom, ap.angle, ap.distance, aq.distance);
      pair.in_fresnel_region = inside(ap.distance) && inside(aq.distance);
      if (pair.in_fresnel_region) report.max_ring_error = std::max(report.max_ring_error, pair.error());
      report.adjacent_rings.push_back(pair);
    }
  }

  for (int s = 0; s < dict.rings; ++s) {
    for (int n = 0; n + 1 < N; ++n) {
      const int p = s * N + n;
      const int q = p + 1;
      CoherencePair pair;
      pair.column_p = p;
      pair.column_q = q;
      pair.exact = coherence_exact(dict.W.col(p), dict.W.col(q));
      pair.approx = coherence_approx_same_ring(N, dict.atoms[p].angle, dict.atoms[q].angle);
      pair.in_fresnel_region = (s == 0) || (inside(dict.atoms[p].distance) &&
                                            inside(dict.atoms[q].distance));
      report.max_angle_error = std::max(report.max_angle_error, pair.error());
      report.adjacent_angles.push_back(pair);
    }
  }

  if (compute_max_coherence) {
    Eigen::MatrixXd gram = (dict.W.adjoint() * dict.W).cwiseAbs();
    gram.diagonal().setZero();
    report.max_coherence = gram.maxCoeff();
  }
  return report;
}

void to_json(nlohmann::json& j, const CoherencePair& p) {
  j = nlohmann::json{{"column_p", p.column_p},
                     {"column_q", p.column_q},
                     {"exact", p.exact},
                     {"approx", p.approx},
                     {"in_fresnel_region", p.in_fresnel_region}};
}

void from_json(const nlohmann::json& j, CoherencePair& p) {
  j.at("column_p").get_to(p.column_p);
  j.at("column_q").get_to(p.column_q);
  j.at("exact").get_to(p.exact);
  j.at("approx").get_to(p.approx);
  j.at("in_fresnel_region").get_to(p.in_fresnel_region);
}

void to_json(nlohmann::json& j, const CoherenceReport& r) {
  j = nlohmann::json{{"max_coherence", r.max_coherence},
                     {"design_coherence", r.design_coherence},
                     {"fresnel_bound", r.fresnel_bound},
                     {"max_ring_error", r.max_ring_error},
                     {"max_angle_error", r.max_angle_error},
                     {"adjacent_rings", r.adjacent_rings},
                     {"adjacent_angles", r.adjacent_angles}};
}

void from_json(const nlohmann::json& j, CoherenceReport& r) {
  j.at("max_coherence").get_to(r.max_coherence);
  j.at("design_coherence").get_to(r.design_coherence);
  j.at("fresnel_bound").get_to(r.fresnel_bound);
  j.at("max_ring_error").get_to(r.max_ring_error);
  j.at("max_angle_error").get_to(r.max_angle_error);
  j.at("adjacent_rings").get_to(r.adjacent_rings);
  j.at("adjacent_angles").get_to(r.adjacent_angles);
}

nlohmann::json dictionary_metadata(const PolarDictionary& dict) {
  const bool rings = dict.sampling == DistanceSampling::kInverseRings;
  nlohmann::json meta;
  meta["format"] = "NFDICT01";
  meta["layout"] = "column-major complex128 little-endian";
  meta["rows"] = dict.W.rows();
  meta["cols"] = dict.W.cols();
  meta["rings"] = dict.rings;
  meta["sampling"] = rings ? "inverse_rings" : "uniform";
  meta["beta_delta"] = rings ? nlohmann::json(dict.config.beta_delta) : nlohmann::json(nullptr);
  meta["rho_min"] = dict.config.rho_min;
  meta["threshold_distance"] =
      rings ? nlohmann::json(dict.config.threshold_distance()) : nlohmann::json(nullptr);
  meta["antennas"] = dict.config.geometry.num_antennas();
  meta["spacing"] = dict.config.geometry.spacing();
  meta["wavelength"] = dict.config.geometry.wavelength();
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t i = 0; i < dict.atoms.size(); ++i) {
    const Atom& a = dict.atoms[i];
    // JSON has no infinity; the planar-wave ring is written as null.
    cols.push_back({{"index", i},
                    {"ring", a.ring},
                    {"angle", a.angle},
                    {"distance", std::isfinite(a.distance) ? nlohmann::json(a.distance)
                                                           : nlohmann::json(nullptr)}});
  }
  meta["columns"] = std::move(cols);
  return meta;
}

namespace {

constexpr char kMagic[8] = {'N', 'F', 'D', 'I', 'C', 'T', '0', '1'};
static_assert(std::endian::native == std::endian::little, "binary dump assumes little-endian");

}  // namespace

void write_dictionary_binary(const PolarDictionary& dict, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  const std::int64_t rows = dict.W.rows();
  const std::int64_t cols = dict.W.cols();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  out.write(reinterpret_cast<const char*>(dict.W.data()),
            static_cast<std::streamsize>(sizeof(Complex) * rows * cols));
  if (!out) throw std::runtime_error("write failed for " + path);
}

Eigen::MatrixXcd read_dictionary_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || rows < 0 || cols < 0)
    throw std::runtime_error("not a dictionary dump: " + path);
  Eigen::MatrixXcd W(rows, cols);
  in.read(reinterpret_cast<char*>(W.data()), static_cast<std::streamsize>(sizeof(Complex) * rows * cols));
  if (!in) throw std::runtime_error("truncated dictionary dump: " + path);
  return W;
}

}  // namespace nearfield
