#include "nearfield/array_channel.hpp"

#include <cmath>
#include <stdexcept>

namespace nearfield {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

void require_angle(double theta) {
  if (!(std::abs(theta) <= 1.0)) throw std::domain_error("spatial angle must lie in [-1, 1]");
}

// r^(n) - r rewritten as q = (a^2 u - 2 theta a) / (sqrt(1 + a^2 u^2 - 2 theta a u) + 1)
// with a = delta_n d and u = 1/r. No cancellation for large r, finite at u = 0.
struct PathDifference {
  double value;
  double d_angle;
  double d_inv;
};

PathDifference path_difference(double a, double theta, double u) {
  const double s = std::sqrt(1.0 + a * a * u * u - 2.0 * theta * a * u);
  const double num = a * a * u - 2.0 * theta * a;
  const double den = s + 1.0;
  PathDifference out;
  out.value = num / den;
  out.d_angle = -a / s;
  out.d_inv = a * a / den - num * (a * a * u - theta * a) / (s * den * den);
  return out;
}

}  // namespace

ArrayGeometry::ArrayGeometry(int num_antennas, double spacing, double wavelength)
    : num_antennas_(num_antennas), spacing_(spacing), wavelength_(wavelength) {
  if (num_antennas < 2) throw std::invalid_argument("array needs at least two antennas");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw std::invalid_argument("antenna spacing must be positive");
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    throw std::invalid_argument("wavelength must be positive");
}

ArrayGeometry ArrayGeometry::half_wavelength(int num_antennas, double carrier_hz) {
  if (!(carrier_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
  const double lambda = kSpeedOfLight / carrier_hz;
  return ArrayGeometry(num_antennas, lambda / 2.0, lambda);
}

FrequencyGrid::FrequencyGrid(double bandwidth, double carrier, std::vector<double> frequencies)
    : bandwidth_(bandwidth), carrier_(carrier), frequencies_(std::move(frequencies)) {}

FrequencyGrid FrequencyGrid::ofdm(int num_subcarriers, double bandwidth_hz, double carrier_hz) {
  if (num_subcarriers < 1) throw std::invalid_argument("need at least one subcarrier");
  if (!(bandwidth_hz >= 0.0) || !(carrier_hz > 0.0))
    throw std::invalid_argument("invalid bandwidth or carrier");
  std::vector<double> f(num_subcarriers);
  const double M = num_subcarriers;
  for (int m = 1; m <= num_subcarriers; ++m) {
    f[m - 1] = carrier_hz + bandwidth_hz * (2.0 * m - M - 1.0) / (2.0 * M);
  }
  return FrequencyGrid(bandwidth_hz, carrier_hz, std::move(f));
}

FrequencyGrid FrequencyGrid::single(double carrier_hz) { return ofdm(1, 0.0, carrier_hz); }

double element_distance(const ArrayGeometry& geom, int n, double theta, double r) {
  require_finite(theta, "angle");
  require_finite(r, "distance");
  if (n < 0 || n >= geom.num_antennas()) throw std::invalid_argument("antenna index out of range");
  if (!(r > 0.0)) throw std::invalid_argument("distance must be positive");
  const double a = geom.offset(n) * geom.spacing();
  return std::sqrt(r * r + a * a - 2.0 * r * theta * a);
}

Eigen::VectorXcd far_steering(const ArrayGeometry& geom, double theta) {
  require_angle(theta);
  const int N = geom.num_antennas();
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  Eigen::VectorXcd a(N);
  for (int n = 0; n < N; ++n) a[n] = std::polar(scale, kPi * n * theta);
  return a;
}

Eigen::VectorXcd near_steering(const ArrayGeometry& geom, double theta, double r) {
  require_angle(theta);
  if (r == kInfiniteDistance) return far_steering(geom, theta);
  if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("distance must be positive");
  return steering_inverse_distance(geom, theta, 1.0 / r);
}

Eigen::VectorXcd steering_inverse_distance(const ArrayGeometry& geom, double theta, double inv_r) {
  const int N = geom.num_antennas();
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  const double kc = geom.wavenumber();
  Eigen::VectorXcd b(N);
  for (int n = 0; n < N; ++n) {
    const double a = geom.offset(n) * geom.spacing();
    b[n] = std::polar(scale, -kc * path_difference(a, theta, inv_r).value);
  }
  return b;
}

SteeringColumn steering_with_derivatives(const ArrayGeometry& geom, double theta, double inv_r) {
  const int N = geom.num_antennas();
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  const double kc = geom.wavenumber();
  SteeringColumn col{Eigen::VectorXcd(N), Eigen::VectorXcd(N), Eigen::VectorXcd(N)};
  for (int n = 0; n < N; ++n) {
    const double a = geom.offset(n) * geom.spacing();
    const PathDifference q = path_difference(a, theta, inv_r);
    const Complex v = std::polar(scale, -kc * q.value);
    // d/dx exp(-j kc q(x)) = -j kc q'(x) exp(-j kc q(x))
    col.value[n] = v;
    col.d_angle[n] = Complex(0.0, -kc * q.d_angle) * v;
    col.d_inv_distance[n] = Complex(0.0, -kc * q.d_inv) * v;
  }
  return col;
}

double rayleigh_distance(const ArrayGeometry& geom) {
  const double D = geom.aperture();
  return 2.0 * D * D / geom.wavelength();
}

double fresnel_validity_bound(const ArrayGeometry& geom) {
  const double D = geom.aperture();
  return 0.5 * std::sqrt(D * D * D / geom.wavelength());
}

ChannelRealization synthesize_channel(const ArrayGeometry& geom, const FrequencyGrid& grid,
                                      std::vector<PathParam> paths) {
  if (paths.empty()) throw std::invalid_argument("channel needs at least one path");
  const int N = geom.num_antennas();
  const int M = grid.num_subcarriers();
  const double L = static_cast<double>(paths.size());
  const double prefactor = std::sqrt(N / L);

  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, M);
  for (const PathParam& p : paths) {
    const Eigen::VectorXcd b = near_steering(geom, p.angle, p.distance);
    for (int m = 0; m < M; ++m) {
      // Bulk delay of a planar-wave path is unobservable; its phase lives in the gain.
      const Complex delay = p.is_far_field() ? Complex(1.0, 0.0)
                                             : std::polar(1.0, -grid.wavenumber(m) * p.distance);
      H.col(m) += (prefactor * p.gain * delay) * b;
    }
  }
  return ChannelRealization{geom, grid, std::move(paths), std::move(H)};
}

std::vector<PathParam> sample_random_paths(std::mt19937_64& rng, const PathSampling& spec) {
  if (spec.num_paths < 1) throw std::invalid_argument("need at least one path");
  if (!(spec.angle_min <= spec.angle_max) || spec.angle_min < -1.0 || spec.angle_max > 1.0)
    throw std::invalid_argument("invalid angle range");
  if (!(spec.distance_min <= spec.distance_max) || !(spec.distance_min > 0.0))
    throw std::invalid_argument("invalid distance range");

  std::uniform_real_distribution<double> angle(spec.angle_min, spec.angle_max);
  std::uniform_real_distribution<double> distance(spec.distance_min, spec.distance_max);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));

  std::vector<PathParam> paths(spec.num_paths);
  for (PathParam& p : paths) {
    p.angle = angle(rng);
    p.distance = distance(rng);
    const double re = gauss(rng);
    const double im = gauss(rng);
    p.gain = Complex(re, im);
  }
  return paths;
}

}  // namespace nearfield
