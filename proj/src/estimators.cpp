#include "nearfield/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nearfield {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Eigen::MatrixXcd real_times_complex(const Eigen::MatrixXd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows(), b.cols());
  out.real() = a * b.real();
  out.imag() = a * b.imag();
  return out;
}

double to_inverse(double distance) {
  return distance == kInfiniteDistance ? 0.0 : 1.0 / distance;
}

double to_distance(double inv) { return inv <= 0.0 ? kInfiniteDistance : 1.0 / inv; }

void split_params(const std::vector<PathEstimate>& params, Eigen::VectorXd& angles,
                  Eigen::VectorXd& inv) {
  if (params.empty()) throw std::invalid_argument("need at least one path");
  angles.resize(static_cast<Eigen::Index>(params.size()));
  inv.resize(static_cast<Eigen::Index>(params.size()));
  for (std::size_t l = 0; l < params.size(); ++l) {
    if (!(std::abs(params[l].angle) <= 1.0)) throw std::domain_error("angle outside [-1, 1]");
    if (!(params[l].distance > 0.0)) throw std::domain_error("distance must be positive");
    angles[static_cast<Eigen::Index>(l)] = params[l].angle;
    inv[static_cast<Eigen::Index>(l)] = to_inverse(params[l].distance);
  }
}

}  // namespace

LeastSquares solve_least_squares(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                 double rcond) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod;
  cod.setThreshold(rcond);
  cod.compute(A);
  return LeastSquares{cod.solve(B), cod.rank() < std::min(A.rows(), A.cols())};
}

EstimationResult p_somp(const WhitenedObservation& obs, const PolarDictionary& dict,
                        const Eigen::MatrixXcd& sensing, int num_paths) {
  const auto start = Clock::now();
  const Eigen::MatrixXcd& Y = obs.Y;
  if (sensing.cols() != dict.W.cols() || sensing.rows() != Y.rows())
    throw std::invalid_argument("sensing matrix does not match dictionary and observation");
  if (num_paths < 1 || num_paths > sensing.cols() || num_paths > sensing.rows())
    throw std::invalid_argument("number of paths must be in [1, min(Q, P N_RF)]");

  EstimationResult result;
  result.method = "p_somp";
  std::vector<char> taken(static_cast<std::size_t>(sensing.cols()), 0);
  Eigen::MatrixXcd residual = Y;
  Eigen::MatrixXcd coeffs;
  bool warned = false;

  for (int it = 0; it < num_paths; ++it) {
    const Eigen::MatrixXcd gamma = sensing.adjoint() * residual;
    const Eigen::VectorXd energy = gamma.rowwise().squaredNorm();
    Eigen::Index best = -1;
    double best_energy = -1.0;
    for (Eigen::Index p = 0; p < energy.size(); ++p) {
      if (!taken[static_cast<std::size_t>(p)] && energy[p] > best_energy) {
        best = p;
        best_energy = energy[p];
      }
    }
    taken[static_cast<std::size_t>(best)] = 1;
    result.support.push_back(static_cast<int>(best));

    const Eigen::MatrixXcd psi = sensing(Eigen::all, result.support);
    LeastSquares ls = solve_least_squares(psi, Y);
    if (ls.rank_deficient && !warned) {
      result.warnings.push_back("rank-deficient support; using minimum-norm least squares");
      warned = true;
    }
    coeffs = std::move(ls.solution);
    residual = Y - psi * coeffs;
    result.residual_norms.push_back(residual.norm());
  }

  result.H = dict.W(Eigen::all, result.support) * coeffs;
  result.gains = coeffs;
  for (int q : result.support) {
    const Atom& atom = dict.atoms[static_cast<std::size_t>(q)];
    result.paths.push_back(PathEstimate{atom.angle, atom.distance});
  }
  result.wall_ms = elapsed_ms(start);
  return result;
}

EstimationResult p_somp(const WhitenedObservation& obs, const PolarDictionary& dict,
                        int num_paths) {
  return p_somp(obs, dict, sensing_matrix(obs, dict.W), num_paths);
}

EstimationResult sw_omp_baseline(const WhitenedObservation& obs, const ArrayGeometry& geom,
                                 int num_paths) {
  // rho_min above Z_Delta leaves only the planar-wave ring, i.e. W = F.
  DictionaryConfig cfg{geom, 1.0, std::numeric_limits<double>::max()};
  const PolarDictionary angular = build_polar_dictionary(cfg);
  EstimationResult result = p_somp(obs, angular, num_paths);
  result.method = "sw_omp";
  return result;
}

MlObjective::MlObjective(const ArrayGeometry& geom, const Eigen::MatrixXcd& y_white,
                         const Eigen::MatrixXd& a_white)
    : geom_(geom), y_(y_white), a_(a_white) {
  if (a_.rows() != y_.rows() || a_.cols() != geom.num_antennas())
    throw std::invalid_argument("objective dimensions do not agree");
}

Eigen::MatrixXcd MlObjective::steering_matrix(const Eigen::VectorXd& angles,
                                              const Eigen::VectorXd& inv_distances) const {
  Eigen::MatrixXcd W(geom_.num_antennas(), angles.size());
  for (Eigen::Index l = 0; l < angles.size(); ++l)
    W.col(l) = steering_inverse_distance(geom_, angles[l], inv_distances[l]);
  return W;
}

double MlObjective::value(const Eigen::VectorXd& angles,
                          const Eigen::VectorXd& inv_distances) const {
  return evaluate(angles, inv_distances, false).value;
}

MlObjective::Evaluation MlObjective::evaluate(const Eigen::VectorXd& angles,
                                              const Eigen::VectorXd& inv_distances,
                                              bool with_gradient) const {
  const Eigen::Index L = angles.size();
  if (L < 1 || inv_distances.size() != L) throw std::invalid_argument("parameter size mismatch");

  Eigen::MatrixXcd W(geom_.num_antennas(), L);
  Eigen::MatrixXcd dW_angle;
  Eigen::MatrixXcd dW_inv;
  if (with_gradient) {
    dW_angle.resize(W.rows(), L);
    dW_inv.resize(W.rows(), L);
    for (Eigen::Index l = 0; l < L; ++l) {
      SteeringColumn col = steering_with_derivatives(geom_, angles[l], inv_distances[l]);
      W.col(l) = col.value;
      dW_angle.col(l) = col.d_angle;
      dW_inv.col(l) = col.d_inv_distance;
    }
  } else {
    W = steering_matrix(angles, inv_distances);
  }

  const Eigen::MatrixXcd psi = real_times_complex(a_, W);
  // G = Psi^+ Y = (Psi^H Psi)^{-1} Psi^H Y, rank-truncated when columns collide.
  Evaluation out;
  out.gains = solve_least_squares(psi, y_).solution;
  const Eigen::MatrixXcd fitted = psi * out.gains;  // P Y
  out.value = -fitted.squaredNorm();
  if (!with_gradient) return out;

  // Product rule on P = Psi K Psi^H with K = (Psi^H Psi)^{-1}:
  //   dP = dPsi K Psi^H + Psi dK Psi^H + Psi K dPsi^H,
  //   dK = -K (dPsi^H Psi + Psi^H dPsi) K.
  // A parameter of path l only moves column l of Psi (dpsi_l = D^{-1} A dw_l), so
  //   Tr(Y^H dPsi K Psi^H Y) = sum_m G(l,m) (Y^H dpsi_l)_m       (outer terms, conjugate pair)
  //   Tr(Y^H Psi dK Psi^H Y) = -2 Re sum_m G(l,m) (F^H dpsi_l)_m (middle term, F = Psi G)
  auto gradient = [&](const Eigen::MatrixXcd& dW) {
    const Eigen::MatrixXcd dpsi = real_times_complex(a_, dW);
    const Eigen::MatrixXcd outer = y_.adjoint() * dpsi;     // M x L
    const Eigen::MatrixXcd middle = fitted.adjoint() * dpsi; // M x L
    Eigen::VectorXd grad(L);
    for (Eigen::Index l = 0; l < L; ++l) {
      const Complex t_outer = (out.gains.row(l).transpose().array() * outer.col(l).array()).sum();
      const Complex t_middle = (out.gains.row(l).transpose().array() * middle.col(l).array()).sum();
      const double trace_dp = 2.0 * t_outer.real() - 2.0 * t_middle.real();
      grad[l] = -trace_dp;
    }
    return grad;
  };
  out.grad_angle = gradient(dW_angle);
  out.grad_inv_distance = gradient(dW_inv);
  return out;
}

double ml_objective(const ArrayGeometry& geom, const std::vector<PathEstimate>& params,
                    const WhitenedObservation& obs) {
  Eigen::VectorXd angles;
  Eigen::VectorXd inv;
  split_params(params, angles, inv);
  return MlObjective(geom, obs.Y, obs.A).value(angles, inv);
}

Eigen::VectorXd gradient_theta(const ArrayGeometry& geom, const std::vector<PathEstimate>& params,
                               const WhitenedObservation& obs) {
  Eigen::VectorXd angles;
  Eigen::VectorXd inv;
  split_params(params, angles, inv);
  return MlObjective(geom, obs.Y, obs.A).evaluate(angles, inv, true).grad_angle;
}

Eigen::VectorXd gradient_inv_r(const ArrayGeometry& geom, const std::vector<PathEstimate>& params,
                               const WhitenedObservation& obs) {
  Eigen::VectorXd angles;
  Eigen::VectorXd inv;
  split_params(params, angles, inv);
  return MlObjective(geom, obs.Y, obs.A).evaluate(angles, inv, true).grad_inv_distance;
}

namespace {

// Projected Armijo backtracking on one parameter block. Returns true when a
// step was accepted; x and value are updated in place.
template <typename Objective>
bool armijo_step(Eigen::VectorXd& x, double& value, const Eigen::VectorXd& grad,
                 const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, double first_move,
                 const RefinementOptions& opt, Objective&& objective) {
  const double gmax = grad.cwiseAbs().maxCoeff();
  if (!(gmax > 0.0) || !std::isfinite(gmax)) return false;
  double t = first_move / gmax;
  for (int k = 0; k <= opt.max_halvings; ++k, t *= opt.backtrack) {
    const Eigen::VectorXd trial = (x - t * grad).cwiseMax(lower).cwiseMin(upper);
    const double decrease = grad.dot(trial - x);
    if (!(decrease < 0.0)) continue;
    const double f = objective(trial);
    if (f <= value + opt.armijo_c * decrease) {
      x = trial;
      value = f;
      return true;
    }
  }
  return false;
}

}  // namespace

EstimationResult refine_gridless(const WhitenedObservation& obs, const ArrayGeometry& geom,
                                 const EstimationResult& init, double rho_min,
                                 double threshold_distance, const RefinementOptions& options) {
  if (options.iterations < 0) throw std::invalid_argument("iteration count must be >= 0");
  if (options.iterations == 0) return init;

  const auto start = Clock::now();
  const MlObjective objective(geom, obs.Y, obs.A);
  Eigen::VectorXd angles;
  Eigen::VectorXd inv;
  split_params(init.paths, angles, inv);
  const Eigen::Index L = angles.size();

  const Eigen::VectorXd angle_lo = Eigen::VectorXd::Constant(L, -1.0);
  const Eigen::VectorXd angle_hi = Eigen::VectorXd::Constant(L, 1.0);
  const Eigen::VectorXd inv_lo = Eigen::VectorXd::Zero(L);
  // Grid columns at wide angles can sit closer than rho_min; never clamp a path
  // below its own starting point.
  const Eigen::VectorXd inv_hi = inv.cwiseMax(1.0 / rho_min);
  const double inv_step =
      options.inv_distance_step > 0.0 ? options.inv_distance_step : 0.5 / threshold_distance;

  EstimationResult result;
  result.method = init.method;
  result.support = init.support;
  result.residual_norms = init.residual_norms;
  result.warnings = init.warnings;

  MlObjective::Evaluation eval = objective.evaluate(angles, inv, true);
  result.objective_trace.push_back(eval.value);
  for (int it = 0; it < options.iterations; ++it) {
    double value = eval.value;
    armijo_step(angles, value, eval.grad_angle, angle_lo, angle_hi, options.angle_step, options,
                [&](const Eigen::VectorXd& a) { return objective.value(a, inv); });
    if (options.refine_distance) {
      eval = objective.evaluate(angles, inv, true);
      value = eval.value;
      armijo_step(inv, value, eval.grad_inv_distance, inv_lo, inv_hi, inv_step, options,
                  [&](const Eigen::VectorXd& u) { return objective.value(angles, u); });
    }
    eval = objective.evaluate(angles, inv, true);
    result.objective_trace.push_back(eval.value);
  }

  result.gains = eval.gains;
  result.H = objective.steering_matrix(angles, inv) * eval.gains;
  for (Eigen::Index l = 0; l < L; ++l)
    result.paths.push_back(PathEstimate{angles[l], to_distance(inv[l])});
  result.wall_ms = init.wall_ms + elapsed_ms(start);
  return result;
}

EstimationResult p_sigw(const WhitenedObservation& obs, const PolarDictionary& dict,
                        const Eigen::MatrixXcd& sensing, int num_paths,
                        const RefinementOptions& options) {
  const EstimationResult init = p_somp(obs, dict, sensing, num_paths);
  double z_delta;
  if (dict.sampling == DistanceSampling::kInverseRings) {
    z_delta = dict.config.threshold_distance();
  } else {
    z_delta = dict.config.rho_min * dict.rings;
  }
  EstimationResult result =
      refine_gridless(obs, dict.config.geometry, init, dict.config.rho_min, z_delta, options);
  result.method = "p_sigw";
  return result;
}

EstimationResult p_sigw(const WhitenedObservation& obs, const PolarDictionary& dict,
                        int num_paths, const RefinementOptions& options) {
  return p_sigw(obs, dict, sensing_matrix(obs, dict.W), num_paths, options);
}

EstimationResult ss_sigw_baseline(const WhitenedObservation& obs, const ArrayGeometry& geom,
                                  int num_paths, int iterations) {
  const EstimationResult init = sw_omp_baseline(obs, geom, num_paths);
  RefinementOptions options;
  options.iterations = iterations;
  options.refine_distance = false;
  EstimationResult result = refine_gridless(obs, geom, init, 1.0, 1.0, options);
  result.method = "ss_sigw";
  return result;
}

EstimationResult ls_baseline(const WhitenedObservation& obs) {
  const auto start = Clock::now();
  EstimationResult result;
  result.method = "ls";
  LeastSquares ls = solve_least_squares(obs.A.cast<Complex>(), obs.Y);
  result.H = std::move(ls.solution);
  result.wall_ms = elapsed_ms(start);
  return result;
}

EstimationResult genie_ls(const WhitenedObservation& obs, const ArrayGeometry& geom,
                          const std::vector<PathParam>& true_paths) {
  if (true_paths.empty()) throw std::invalid_argument("genie needs the true paths");
  const auto start = Clock::now();
  EstimationResult result;
  result.method = "genie_ls";
  Eigen::MatrixXcd W(geom.num_antennas(), static_cast<Eigen::Index>(true_paths.size()));
  for (std::size_t l = 0; l < true_paths.size(); ++l) {
    W.col(static_cast<Eigen::Index>(l)) =
        near_steering(geom, true_paths[l].angle, true_paths[l].distance);
    result.paths.push_back(PathEstimate{true_paths[l].angle, true_paths[l].distance});
  }
  LeastSquares ls = solve_least_squares(real_times_complex(obs.A, W), obs.Y);
  if (ls.rank_deficient) result.warnings.push_back("genie steering matrix is rank-deficient");
  result.gains = std::move(ls.solution);
  result.H = W * result.gains;
  result.wall_ms = elapsed_ms(start);
  return result;
}

}  // namespace nearfield
