#pragma once

// Correlated complex Wiener channels: joint block covariance
// [[Sigma_AA, Sigma_AB], [Sigma_AB^+, Sigma_BB]], its factor, and
// reproducible joint increment sampling.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "dcov/errors.hpp"
#include "dcov/linalg.hpp"

namespace dcov {

enum class NoiseKind { Real, Circular };

// Counter-style per-trajectory stream: (seed, stream_index) fully determines
// the sequence, so ensembles reproduce regardless of worker scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index)
      : seed_(seed), stream_index_(stream_index) {
    std::seed_seq sseq{static_cast<std::uint32_t>(seed),
                       static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream_index),
                       static_cast<std::uint32_t>(stream_index >> 32),
                       0x9e3779b9u};
    engine_.seed(sseq);
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

struct NoiseModel {
  Index n_a = 0;
  Index n_b = 0;
  ComplexMatrix sigma_aa;  // n_a x n_a, units 1/time
  ComplexMatrix sigma_bb;  // n_b x n_b
  ComplexMatrix sigma_ab;  // n_a x n_b
  ComplexMatrix joint;     // (n_a+n_b)^2 Hermitian PSD block matrix
  ComplexMatrix factor;    // F with F F^+ = joint to 1e-10
  NoiseKind kind = NoiseKind::Real;

  bool is_zero() const { return joint.size() == 0 || joint.norm() == 0.0; }
};

// Joint PSD validated; Cholesky when positive definite, eigendecomposition
// with clipped negatives for the semidefinite case (perfect correlation is
// rank-deficient by design).
inline NoiseModel build_noise_model(const ComplexMatrix& sigma_aa,
                                    const ComplexMatrix& sigma_bb,
                                    const ComplexMatrix& sigma_ab,
                                    NoiseKind kind = NoiseKind::Real) {
  const Index na = sigma_aa.rows(), nb = sigma_bb.rows();
  if (sigma_aa.cols() != na || sigma_bb.cols() != nb ||
      sigma_ab.rows() != na || sigma_ab.cols() != nb)
    throw DimensionError("build_noise_model: inconsistent block dimensions");

  NoiseModel model;
  model.n_a = na;
  model.n_b = nb;
  model.sigma_aa = sigma_aa;
  model.sigma_bb = sigma_bb;
  model.sigma_ab = sigma_ab;
  model.kind = kind;

  const Index n = na + nb;
  ComplexMatrix joint(n, n);
  joint.topLeftCorner(na, na) = sigma_aa;
  joint.topRightCorner(na, nb) = sigma_ab;
  joint.bottomLeftCorner(nb, na) = sigma_ab.adjoint();
  joint.bottomRightCorner(nb, nb) = sigma_bb;

  const double scale = joint.norm();
  if (hermiticity_residual(joint) > 1e-10 * (1.0 + scale))
    throw IndefiniteCovarianceError(
        "build_noise_model: joint covariance is not Hermitian "
        "(check sigmaAA / sigmaBB)");
  model.joint = hermitian_part(joint);

  if (n == 0 || scale == 0.0) {
    model.factor = ComplexMatrix::Zero(n, n);
    return model;
  }

  Eigen::LLT<ComplexMatrix> llt(model.joint);
  if (llt.info() == Eigen::Success) {
    model.factor = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(model.joint);
    const auto& evals = es.eigenvalues();
    if (evals.minCoeff() < -1e-10 * scale)
      throw IndefiniteCovarianceError(
          "build_noise_model: joint covariance indefinite (min eigenvalue " +
          std::to_string(evals.minCoeff()) + "), unphysical noise spec");
    Eigen::VectorXd clipped = evals.cwiseMax(0.0);
    model.factor = es.eigenvectors() * clipped.cwiseSqrt().asDiagonal();
  }
  return model;
}

// Joint Gaussian increments with E[dW dW^+] = Sigma_joint * dt.
// kind = real: real driving normals (dW dW^T has the same covariance);
// kind = circular: E[dW dW^T] = 0.
inline std::pair<ComplexVector, ComplexVector> sample_increments(
    const NoiseModel& model, double dt, RngStream& stream) {
  const Index n = model.n_a + model.n_b;
  ComplexVector g(n);
  if (model.kind == NoiseKind::Real) {
    for (Index i = 0; i < n; ++i) g(i) = stream.normal();
  } else {
    const double s = 1.0 / std::sqrt(2.0);
    for (Index i = 0; i < n; ++i) {
      const double re = stream.normal();
      const double im = stream.normal();
      g(i) = Complex(re * s, im * s);
    }
  }
  ComplexVector dw = std::sqrt(dt) * (model.factor * g);
  return {dw.head(model.n_a), dw.tail(model.n_b)};
}

// (1 / (n dt)) sum_i dW_A dW_B^+ -- empirical check of the Ito identity.
inline ComplexMatrix empirical_cross_variation(const NoiseModel& model,
                                               double dt, long n_samples,
                                               RngStream& stream) {
  ComplexMatrix acc = ComplexMatrix::Zero(model.n_a, model.n_b);
  for (long i = 0; i < n_samples; ++i) {
    auto [dwa, dwb] = sample_increments(model, dt, stream);
    acc += dwa * dwb.adjoint();
  }
  return acc / (static_cast<double>(n_samples) * dt);
}

}  // namespace dcov
