#include "nearfield/observation.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace nearfield {

namespace {

// Real matrix times complex matrix as two real products.
Eigen::MatrixXcd real_times_complex(const Eigen::MatrixXd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows(), b.cols());
  out.real() = a * b.real();
  out.imag() = a * b.imag();
  return out;
}

}  // namespace

Combiner generate_combiner(std::mt19937_64& rng, int pilots, int rf_chains, int antennas) {
  if (pilots < 1 || rf_chains < 1 || antennas < 1)
    throw std::invalid_argument("combiner dimensions must be positive");
  const double mag = 1.0 / std::sqrt(static_cast<double>(antennas));
  std::bernoulli_distribution coin(0.5);
  Combiner comb{pilots, rf_chains, antennas, Eigen::MatrixXd(pilots * rf_chains, antennas)};
  for (Eigen::Index i = 0; i < comb.A.rows(); ++i) {
    for (Eigen::Index j = 0; j < comb.A.cols(); ++j) comb.A(i, j) = coin(rng) ? mag : -mag;
  }
  return comb;
}

Whitener::Whitener(std::vector<Eigen::MatrixXd> blocks, int regularized_blocks)
    : blocks_(std::move(blocks)), regularized_(regularized_blocks) {
  if (blocks_.empty()) throw std::invalid_argument("whitener needs at least one block");
  block_size_ = static_cast<int>(blocks_.front().rows());
  for (const auto& b : blocks_) {
    if (b.rows() != block_size_ || b.cols() != block_size_)
      throw std::invalid_argument("whitener blocks must be square and equal-sized");
  }
}

Eigen::MatrixXd Whitener::dense() const {
  const Eigen::Index n = static_cast<Eigen::Index>(block_size_) * num_blocks();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < num_blocks(); ++p)
    D.block(static_cast<Eigen::Index>(p) * block_size_, static_cast<Eigen::Index>(p) * block_size_,
            block_size_, block_size_) = blocks_[p];
  return D;
}

Eigen::MatrixXd Whitener::covariance() const {
  const Eigen::MatrixXd D = dense();
  return D * D.transpose();
}

Eigen::MatrixXcd Whitener::solve(const Eigen::MatrixXcd& x) const {
  if (x.rows() != static_cast<Eigen::Index>(block_size_) * num_blocks())
    throw std::invalid_argument("whitener dimension mismatch");
  Eigen::MatrixXcd out(x.rows(), x.cols());
  for (int p = 0; p < num_blocks(); ++p) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(p) * block_size_;
    const Eigen::MatrixXcd lower = blocks_[p].cast<Complex>();
    out.middleRows(r0, block_size_) =
        lower.triangularView<Eigen::Lower>().solve(x.middleRows(r0, block_size_));
  }
  return out;
}

Eigen::MatrixXd Whitener::solve(const Eigen::MatrixXd& x) const {
  if (x.rows() != static_cast<Eigen::Index>(block_size_) * num_blocks())
    throw std::invalid_argument("whitener dimension mismatch");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (int p = 0; p < num_blocks(); ++p) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(p) * block_size_;
    out.middleRows(r0, block_size_) =
        blocks_[p].triangularView<Eigen::Lower>().solve(x.middleRows(r0, block_size_));
  }
  return out;
}

Eigen::MatrixXcd Whitener::apply(const Eigen::MatrixXcd& x) const {
  if (x.rows() != static_cast<Eigen::Index>(block_size_) * num_blocks())
    throw std::invalid_argument("whitener dimension mismatch");
  Eigen::MatrixXcd out(x.rows(), x.cols());
  for (int p = 0; p < num_blocks(); ++p) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(p) * block_size_;
    out.middleRows(r0, block_size_) =
        blocks_[p].triangularView<Eigen::Lower>().toDenseMatrix().cast<Complex>() *
        x.middleRows(r0, block_size_);
  }
  return out;
}

Whitener build_whitener(const Combiner& comb) {
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(comb.pilots);
  int regularized = 0;
  for (int p = 0; p < comb.pilots; ++p) {
    Eigen::MatrixXd cov = comb.block(p) * comb.block(p).transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      cov.diagonal().array() += 1e-10;
      llt.compute(cov);
      ++regularized;
      std::cerr << "warning: combiner block " << p << " is singular; regularized by 1e-10\n";
      if (llt.info() != Eigen::Success) throw std::runtime_error("whitener block not factorable");
    }
    blocks.push_back(llt.matrixL().toDenseMatrix());
  }
  return Whitener(std::move(blocks), regularized);
}

PilotObservation observe(const ChannelRealization& channel, const Combiner& comb,
                         double noise_power, std::mt19937_64& rng) {
  const Eigen::MatrixXcd& H = channel.H;
  if (H.rows() != comb.antennas) throw std::invalid_argument("channel and combiner disagree on N");
  if (!(noise_power >= 0.0)) throw std::invalid_argument("noise power must be non-negative");

  PilotObservation obs{comb, real_times_complex(comb.A, H), noise_power};
  if (noise_power == 0.0) return obs;

  const Eigen::Index N = H.rows();
  const Eigen::Index M = H.cols();
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
  Eigen::MatrixXcd noise(N, M);
  for (int p = 0; p < comb.pilots; ++p) {
    for (Eigen::Index m = 0; m < M; ++m) {
      for (Eigen::Index n = 0; n < N; ++n) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        noise(n, m) = Complex(re, im);
      }
    }
    obs.Y.middleRows(static_cast<Eigen::Index>(p) * comb.rf_chains, comb.rf_chains) +=
        real_times_complex(comb.block(p), noise);
  }
  return obs;
}

WhitenedObservation whiten(const PilotObservation& obs, const Whitener& whitener) {
  return WhitenedObservation{whitener.solve(obs.Y), whitener.solve(obs.combiner.A),
                             obs.noise_power};
}

Eigen::MatrixXcd sensing_matrix(const WhitenedObservation& obs, const Eigen::MatrixXcd& W) {
  if (obs.A.cols() != W.rows()) throw std::invalid_argument("dictionary and combiner disagree on N");
  return real_times_complex(obs.A, W);
}

}  // namespace nearfield
