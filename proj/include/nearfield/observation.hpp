#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "nearfield/array_channel.hpp"
#include "nearfield/polar_dictionary.hpp"

namespace nearfield {

// Analog combiner A = [A_1; ...; A_P], each A_p is N_RF x N with entries +-1/sqrt(N).
struct Combiner {
  int pilots = 0;
  int rf_chains = 0;
  int antennas = 0;
  Eigen::MatrixXd A;

  int rows() const { return pilots * rf_chains; }
  auto block(int p) const { return A.middleRows(static_cast<Eigen::Index>(p) * rf_chains, rf_chains); }
};

Combiner generate_combiner(std::mt19937_64& rng, int pilots, int rf_chains, int antennas);

// Block-diagonal lower-triangular D with D D^H = blkdiag(A_p A_p^H).
class Whitener {
 public:
  explicit Whitener(std::vector<Eigen::MatrixXd> blocks, int regularized_blocks = 0);

  int block_size() const { return block_size_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const Eigen::MatrixXd& block(int p) const { return blocks_[p]; }
  int regularized_blocks() const { return regularized_; }

  Eigen::MatrixXd dense() const;
  Eigen::MatrixXd covariance() const;

  // D^{-1} X by per-block forward substitution.
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& x) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& x) const;

 private:
  std::vector<Eigen::MatrixXd> blocks_;
  int block_size_ = 0;
  int regularized_ = 0;
};

// Singular blocks get 1e-10 added to the diagonal and are counted, not rejected.
Whitener build_whitener(const Combiner& comb);

struct PilotObservation {
  Combiner combiner;
  Eigen::MatrixXcd Y;  // (P N_RF) x M
  double noise_power = 0.0;
};

// y_m = A h_m + [A_1 n_{m,1}; ...; A_P n_{m,P}], n ~ CN(0, sigma^2 I_N), pilots x = 1.
PilotObservation observe(const ChannelRealization& channel, const Combiner& comb,
                         double noise_power, std::mt19937_64& rng);

// Pre-whitened measurement: Y_bar = D^{-1} Y and the whitened combiner D^{-1} A.
struct WhitenedObservation {
  Eigen::MatrixXcd Y;
  Eigen::MatrixXd A;
  double noise_power = 0.0;
};

WhitenedObservation whiten(const PilotObservation& obs, const Whitener& whitener);

// Psi_bar = D^{-1} A W
Eigen::MatrixXcd sensing_matrix(const WhitenedObservation& obs, const Eigen::MatrixXcd& W);

inline double snr_db_to_noise_power(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

}  // namespace nearfield
