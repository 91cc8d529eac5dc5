#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nearfield/array_channel.hpp"
#include "nearfield/observation.hpp"
#include "nearfield/polar_dictionary.hpp"

namespace nearfield {

struct PathEstimate {
  double angle = 0.0;
  double distance = kInfiniteDistance;
};

struct EstimationResult {
  std::string method;
  Eigen::MatrixXcd H;                 // N x M
  std::vector<PathEstimate> paths;    // one per detected path (empty for LS)
  Eigen::MatrixXcd gains;             // L_hat x M
  std::vector<int> support;           // dictionary columns, on-grid methods only
  std::vector<double> residual_norms; // ||R||_F after each greedy iteration
  std::vector<double> objective_trace;// ML objective at init and after each refinement step
  std::vector<std::string> warnings;
  double wall_ms = 0.0;
};

// Least squares with rank truncation at a relative singular-value cutoff.
struct LeastSquares {
  Eigen::MatrixXcd solution;
  bool rank_deficient = false;
};
LeastSquares solve_least_squares(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                 double rcond = 1e-10);

/// Simultaneous OMP over the columns of a dictionary. The support metric is
/// the row energy sum_m |Gamma(p, m)|^2 and selected columns are excluded
/// from later argmax steps.
///
/// `sensing` must be D^{-1} A W for this dictionary; the second overload
/// builds it.
EstimationResult p_somp(const WhitenedObservation& obs, const PolarDictionary& dict,
                        const Eigen::MatrixXcd& sensing, int num_paths);
EstimationResult p_somp(const WhitenedObservation& obs, const PolarDictionary& dict,
                        int num_paths);

// Angular-domain SOMP: p_somp with the S = 1 (Fourier) dictionary.
EstimationResult sw_omp_baseline(const WhitenedObservation& obs, const ArrayGeometry& geom,
                                 int num_paths);

// Concentrated ML objective L(theta, 1/r) = -Tr(Y^H P Y) where P projects onto
// the span of D^{-1} A W~(theta, 1/r). Gains are eliminated in closed form.
class MlObjective {
 public:
  MlObjective(const ArrayGeometry& geom, const Eigen::MatrixXcd& y_white,
              const Eigen::MatrixXd& a_white);

  struct Evaluation {
    double value = 0.0;
    Eigen::VectorXd grad_angle;
    Eigen::VectorXd grad_inv_distance;
    Eigen::MatrixXcd gains;  // Psi~^+ Y
  };

  double value(const Eigen::VectorXd& angles, const Eigen::VectorXd& inv_distances) const;
  Evaluation evaluate(const Eigen::VectorXd& angles, const Eigen::VectorXd& inv_distances,
                      bool with_gradient) const;

  Eigen::MatrixXcd steering_matrix(const Eigen::VectorXd& angles,
                                   const Eigen::VectorXd& inv_distances) const;
  double data_energy() const { return y_.squaredNorm(); }

 private:
  ArrayGeometry geom_;
  Eigen::MatrixXcd y_;
  Eigen::MatrixXd a_;
};

// Free-function forms taking distances (+inf allowed) rather than inverse distances.
double ml_objective(const ArrayGeometry& geom, const std::vector<PathEstimate>& params,
                    const WhitenedObservation& obs);
Eigen::VectorXd gradient_theta(const ArrayGeometry& geom, const std::vector<PathEstimate>& params,
                               const WhitenedObservation& obs);
Eigen::VectorXd gradient_inv_r(const ArrayGeometry& geom, const std::vector<PathEstimate>& params,
                               const WhitenedObservation& obs);

struct RefinementOptions {
  int iterations = 10;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_halvings = 30;
  // First trial step moves the largest-gradient coordinate by this much.
  double angle_step = 0.01;
  double inv_distance_step = 0.0;  // 0 selects 0.5 / Z_Delta
  bool refine_distance = true;
};

/// Gridless refinement of a P-SOMP initialisation: alternating Armijo
/// backtracking steps on the angles and on the inverse distances, followed by
/// the closed-form gain update. Angles are clamped to [-1, 1] and inverse
/// distances to [0, max(1/rho_min, initial value)].
EstimationResult p_sigw(const WhitenedObservation& obs, const PolarDictionary& dict,
                        const Eigen::MatrixXcd& sensing, int num_paths,
                        const RefinementOptions& options = {});
EstimationResult p_sigw(const WhitenedObservation& obs, const PolarDictionary& dict,
                        int num_paths, const RefinementOptions& options = {});

// Refinement starting from an arbitrary on-grid result (used by both gridless methods).
EstimationResult refine_gridless(const WhitenedObservation& obs, const ArrayGeometry& geom,
                                 const EstimationResult& init, double rho_min,
                                 double threshold_distance, const RefinementOptions& options);

// Angle-only refinement of SW-OMP; every distance stays at +inf.
EstimationResult ss_sigw_baseline(const WhitenedObservation& obs, const ArrayGeometry& geom,
                                  int num_paths, int iterations = 10);

// Minimum-norm solution of Y_bar = (D^{-1} A) H.
EstimationResult ls_baseline(const WhitenedObservation& obs);

// Gains fitted by least squares on the true angles and distances.
EstimationResult genie_ls(const WhitenedObservation& obs, const ArrayGeometry& geom,
                          const std::vector<PathParam>& true_paths);

}  // namespace nearfield
