#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "nearfield/array_channel.hpp"
#include "nearfield/fresnel.hpp"

namespace nearfield {

struct DictionaryConfig {
  ArrayGeometry geometry;
  double beta_delta = 1.2;
  double rho_min = 3.0;

  // Z_Delta = N^2 d^2 / (2 lambda beta_Delta^2)
  double threshold_distance() const;
  void validate() const;
};

enum class DistanceSampling { kInverseRings, kUniform };

// Metadata for one dictionary column.
struct Atom {
  int ring = 0;
  int angle_index = 0;
  double angle = 0.0;
  double distance = kInfiniteDistance;

  double inverse_distance() const { return distance == kInfiniteDistance ? 0.0 : 1.0 / distance; }
};

// Polar-domain transform W = [W_0, ..., W_{S-1}]. Column index = s * N + n.
struct PolarDictionary {
  Eigen::MatrixXcd W;
  std::vector<Atom> atoms;
  DictionaryConfig config;
  DistanceSampling sampling = DistanceSampling::kInverseRings;
  int rings = 0;

  int num_columns() const { return static_cast<int>(W.cols()); }
};

// theta_n = (2n - N + 1) / N
double grid_angle(int num_antennas, int n);

PolarDictionary build_polar_dictionary(const DictionaryConfig& config);

// F = [a(theta_0), ..., a(theta_{N-1})]
Eigen::MatrixXcd build_angular_dictionary(const ArrayGeometry& geom);

// Same angular grid, distances r_s = rho_min + s/S (rho_max - rho_min) for s = 0..S-1
// with no (1 - theta^2) shaping. Used to ablate the ring sampling rule.
PolarDictionary uniform_dictionary(const ArrayGeometry& geom, int rings, double rho_min,
                                   double rho_max);

double coherence_exact(const Eigen::VectorXcd& b1, const Eigen::VectorXcd& b2);

// Dirichlet-kernel coherence of two columns on a common distance ring.
double coherence_approx_same_ring(int num_antennas, double theta_p, double theta_q);

// Fresnel-integral coherence of two columns at a common angle. Either distance may be +inf.
double coherence_approx_same_angle(const ArrayGeometry& geom, double theta, double r_p,
                                   double r_q);

// beta = sqrt(N^2 d^2 (1 - theta^2) / (2 lambda) |1/r_p - 1/r_q|)
double coherence_beta(const ArrayGeometry& geom, double theta, double r_p, double r_q);

struct CoherencePair {
  int column_p = 0;
  int column_q = 0;
  double exact = 0.0;
  double approx = 0.0;
  // Both distances finite and beyond fresnel_validity_bound.
  bool in_fresnel_region = false;

  double error() const { return std::abs(exact - approx); }
  bool operator==(const CoherencePair&) const = default;
};

struct CoherenceReport {
  double max_coherence = 0.0;  // mu over all distinct column pairs; -1 when not computed
  double design_coherence = 0.0;  // |G(beta_Delta)|
  double fresnel_bound = 0.0;
  std::vector<CoherencePair> adjacent_rings;   // same angle, rings s and s+1
  std::vector<CoherencePair> adjacent_angles;  // same ring, angles n and n+1
  double max_ring_error = 0.0;   // over adjacent_rings inside the Fresnel region
  double max_angle_error = 0.0;  // over adjacent_angles

  bool operator==(const CoherenceReport&) const = default;
};

CoherenceReport audit_coherence(const PolarDictionary& dict, bool compute_max_coherence = true);

void to_json(nlohmann::json& j, const CoherencePair& p);
void from_json(const nlohmann::json& j, CoherencePair& p);
void to_json(nlohmann::json& j, const CoherenceReport& r);
void from_json(const nlohmann::json& j, CoherenceReport& r);

// Column metadata sidecar for a dictionary export.
nlohmann::json dictionary_metadata(const PolarDictionary& dict);

// Binary dump: "NFDICT01", int64 rows, int64 cols, then column-major
// complex128 (re, im) little-endian.
void write_dictionary_binary(const PolarDictionary& dict, const std::string& path);
Eigen::MatrixXcd read_dictionary_binary(const std::string& path);

}  // namespace nearfield
