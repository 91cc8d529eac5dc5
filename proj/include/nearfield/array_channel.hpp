#pragma once

#include <complex>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace nearfield {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 2.998e8;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

// Uniform linear array centred on the origin. Element n sits at offset
// delta_n * spacing with delta_n = (2n - N + 1) / 2.
class ArrayGeometry {
 public:
  ArrayGeometry(int num_antennas, double spacing, double wavelength);

  // Half-wavelength spacing at the given carrier.
  static ArrayGeometry half_wavelength(int num_antennas, double carrier_hz);

  int num_antennas() const { return num_antennas_; }
  double spacing() const { return spacing_; }
  double wavelength() const { return wavelength_; }
  double carrier_frequency() const { return kSpeedOfLight / wavelength_; }
  double wavenumber() const { return 2.0 * kPi / wavelength_; }
  double aperture() const { return num_antennas_ * spacing_; }
  double offset(int n) const { return (2.0 * n - num_antennas_ + 1) / 2.0; }

 private:
  int num_antennas_;
  double spacing_;
  double wavelength_;
};

// One propagation path. A distance of +inf encodes a planar-wave path.
struct PathParam {
  Complex gain{1.0, 0.0};
  double angle = 0.0;
  double distance = kInfiniteDistance;

  bool is_far_field() const { return distance == kInfiniteDistance; }
};

class FrequencyGrid {
 public:
  // Subcarriers f_m = f_c + B (2m - M - 1) / (2M), m = 1..M.
  static FrequencyGrid ofdm(int num_subcarriers, double bandwidth_hz, double carrier_hz);

  // A single tone at the carrier.
  static FrequencyGrid single(double carrier_hz);

  int num_subcarriers() const { return static_cast<int>(frequencies_.size()); }
  double bandwidth() const { return bandwidth_; }
  double carrier() const { return carrier_; }
  const std::vector<double>& frequencies() const { return frequencies_; }
  double wavenumber(int m) const { return 2.0 * kPi * frequencies_[m] / kSpeedOfLight; }

 private:
  FrequencyGrid(double bandwidth, double carrier, std::vector<double> frequencies);

  double bandwidth_;
  double carrier_;
  std::vector<double> frequencies_;
};

struct ChannelRealization {
  ArrayGeometry geometry;
  FrequencyGrid grid;
  std::vector<PathParam> paths;
  Eigen::MatrixXcd H;  // N x M, column m is the channel at subcarrier m
};

/// Exact distance from antenna n to a source at spatial angle theta and
/// range r from the array centre.
double element_distance(const ArrayGeometry& geom, int n, double theta, double r);

/// Planar-wave steering vector, element n = exp(j pi n theta) / sqrt(N).
Eigen::VectorXcd far_steering(const ArrayGeometry& geom, double theta);

/// Spherical-wave steering vector, element n = exp(-j k_c (r^(n) - r)) / sqrt(N).
/// r = +inf returns far_steering(theta).
Eigen::VectorXcd near_steering(const ArrayGeometry& geom, double theta, double r);

// Steering vector parameterised by inverse distance u = 1/r. The phase is
// evaluated in a form that stays smooth through u = 0, where it reduces to
// the array-centred planar wave exp(j k_c delta_n d theta). That differs from
// far_steering only by a common phase factor.
struct SteeringColumn {
  Eigen::VectorXcd value;
  Eigen::VectorXcd d_angle;
  Eigen::VectorXcd d_inv_distance;
};

Eigen::VectorXcd steering_inverse_distance(const ArrayGeometry& geom, double theta, double inv_r);
SteeringColumn steering_with_derivatives(const ArrayGeometry& geom, double theta, double inv_r);

double rayleigh_distance(const ArrayGeometry& geom);

// Range beyond which the second-order (Fresnel) expansion of r^(n) holds.
double fresnel_validity_bound(const ArrayGeometry& geom);

ChannelRealization synthesize_channel(const ArrayGeometry& geom, const FrequencyGrid& grid,
                                      std::vector<PathParam> paths);

struct PathSampling {
  int num_paths = 6;
  double angle_min = -0.8660254037844386;
  double angle_max = 0.8660254037844386;
  double distance_min = 5.0;
  double distance_max = 10.0;
};

// Angles and distances are uniform over their ranges; gains are CN(0, 1).
std::vector<PathParam> sample_random_paths(std::mt19937_64& rng, const PathSampling& spec);

}  // namespace nearfield
