#pragma once

// Sliding-window averaging of Z_t into C_Delta(tau), ensemble double
// covariance C(tau) = E[C_Delta C_Delta^+] with mergeable running moments,
// and normalization to rho(tau) = C / Tr C.
//
// The two-time double integral (1/Delta^2) int int E[Z_t Z_s^*] dt ds equals
// the outer product of single-window averages path by path, which is what
// gets accumulated here.

#include <cmath>
#include <vector>

#include "dcov/errors.hpp"
#include "dcov/linalg.hpp"
#include "dcov/micro.hpp"

namespace dcov {

struct WindowConfig {
  double epsilon = 0.1;
  double c_delta = 1.0;    // Delta = c_delta * epsilon
  double c_delta_t = 0.25; // dt = c_delta_t * epsilon^2
  std::vector<double> tau_grid;

  double delta() const { return c_delta * epsilon; }
  double dt_micro() const { return c_delta_t * epsilon * epsilon; }

  // Window length in micro steps (snapped); >= 10 enforced scale separation.
  long window_steps() const {
    return std::lround(delta() / dt_micro());
  }
  double delta_effective() const {
    return static_cast<double>(window_steps()) * dt_micro();
  }
  long tau_step_index(double tau) const {
    return std::lround(tau / dt_micro());
  }

  void validate() const {
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw ConfigError("window: epsilon must lie in (0,1)");
    if (!(c_delta > 0.0 && c_delta_t > 0.0))
      throw ConfigError("window: scale constants must be positive");
    if (!(dt_micro() < delta()))
      throw ConfigError("window: dtMicro must be smaller than delta");
    if (delta() / dt_micro() < 10.0 - 1e-9)
      throw ConfigError("window: delta/dtMicro must be >= 10 "
                        "(scale separation)");
    if (tau_grid.empty())
      throw ConfigError("window: tauGrid must be non-empty");
    double prev = -1.0;
    for (double t : tau_grid) {
      if (t < 0.0 || t <= prev)
        throw ConfigError("window: tauGrid must be nonnegative and "
                          "strictly increasing");
      prev = t;
    }
  }
};

// C_Delta(tau) = (1/Delta) int_tau^{tau+Delta} Z_t dt, trapezoidal rule over
// the recorded samples. tau and Delta are snapped to the sample grid.
inline ComplexVector window_average(const ZSeries& series, double tau,
                                    double delta) {
  const double spacing = series.sample_spacing();
  if (spacing <= 0.0 || series.values.empty())
    throw WindowUnderflowError("window_average: empty series");
  const long start = std::lround((tau - series.t0) / spacing);
  const long count = std::lround(delta / spacing);
  const long last = static_cast<long>(series.values.size()) - 1;
  if (start < 0 || count < 1 || start + count > last)
    throw WindowUnderflowError(
        "window_average: series does not cover [tau, tau+delta]");
  if (count + 1 < 10)
    throw WindowUnderflowError(
        "window_average: fewer than 10 samples in window");
  ComplexVector acc = 0.5 * (series.values[start] + series.values[start + count]);
  for (long i = start + 1; i < start + count; ++i) acc += series.values[i];
  return acc / static_cast<double>(count);
}

// Monte-Carlo estimate of C(tau) with Welford-style running moments.
// Uncentered second moment of C_Delta (never mean-subtracted). Tracks the
// entry-trace covariance so standard errors of rho = C/TrC come out of the
// delta method with the trace fluctuations cancelled.
class CovarianceEstimate {
 public:
  CovarianceEstimate() = default;
  CovarianceEstimate(double tau, Index dim)
      : tau_(tau),
        mean_(ComplexMatrix::Zero(dim, dim)),
        m2_(Eigen::MatrixXd::Zero(dim, dim)),
        cov_tr_(ComplexMatrix::Zero(dim, dim)) {}

  double tau() const { return tau_; }
  long n_samples() const { return n_; }
  Index dim() const { return mean_.rows(); }

  // Rank-1 update with C_Delta C_Delta^+.
  void accumulate(const ComplexVector& c_delta) {
    if (c_delta.size() != mean_.rows())
      throw DimensionError("CovarianceEstimate: sample dimension mismatch");
    const ComplexMatrix v = c_delta * c_delta.adjoint();
    const double tr = c_delta.squaredNorm();
    ++n_;
    const ComplexMatrix d = v - mean_;
    const double d_tr = tr - mean_tr_;
    mean_ += d / static_cast<double>(n_);
    mean_tr_ += d_tr / static_cast<double>(n_);
    const ComplexMatrix d2 = v - mean_;
    const double d2_tr = tr - mean_tr_;
    m2_ += (d.conjugate().cwiseProduct(d2)).real();
    m2_tr_ += d_tr * d2_tr;
    cov_tr_ += d * d2_tr;
  }

  // Pooled moments identical (to reordering roundoff) to sequential
  // accumulation of the union.
  void merge(const CovarianceEstimate& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    if (tau_ != other.tau_)
      throw ConfigError("CovarianceEstimate::merge: tau mismatch");
    if (mean_.rows() != other.mean_.rows())
      throw DimensionError("CovarianceEstimate::merge: dimension mismatch");
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const ComplexMatrix d = other.mean_ - mean_;
    const double d_tr = other.mean_tr_ - mean_tr_;
    mean_ += d * (nb / n);
    mean_tr_ += d_tr * (nb / n);
    m2_ += other.m2_ + (d.cwiseAbs2()) * (na * nb / n);
    m2_tr_ += other.m2_tr_ + d_tr * d_tr * (na * nb / n);
    cov_tr_ += other.cov_tr_ + d * (d_tr * na * nb / n);
    n_ += other.n_;
  }

  const ComplexMatrix& c_mean() const { return mean_; }
  double trace_mean() const { return mean_tr_; }

  double presymmetrization_residual() const {
    return (mean_ - mean_.adjoint().eval()).norm();
  }

  // Per-entry standard error of the C estimate.
  Eigen::MatrixXd c_se() const {
    if (n_ < 2) return Eigen::MatrixXd::Zero(mean_.rows(), mean_.cols());
    const double n = static_cast<double>(n_);
    return (m2_ / (n * (n - 1.0))).cwiseSqrt();
  }

  ComplexMatrix rho() const {
    return normalize_to_density(hermitian_part(mean_));
  }

  // Delta-method standard error of each rho entry.
  Eigen::MatrixXd rho_se() const {
    const Index d = mean_.rows();
    if (n_ < 2) return Eigen::MatrixXd::Zero(d, d);
    const double n = static_cast<double>(n_);
    const double nm1 = n - 1.0;
    const double tr = mean_tr_;
    if (tr <= 0.0) return Eigen::MatrixXd::Constant(d, d, 0.0);
    Eigen::MatrixXd var(d, d);
    const ComplexMatrix ratio = mean_ / tr;
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        const double var_x = m2_(i, j) / nm1;
        const double var_y = m2_tr_ / nm1;
        const Complex cov_xy = cov_tr_(i, j) / nm1;
        const Complex r = ratio(i, j);
        double v = var_x + std::norm(r) * var_y -
                   2.0 * std::real(std::conj(r) * cov_xy);
        var(i, j) = std::max(v, 0.0) / (n * tr * tr);
      }
    return var.cwiseSqrt();
  }

  double max_se() const {
    if (n_ < 2) return 0.0;
    return rho_se().maxCoeff();
  }

 private:
  double tau_ = 0.0;
  long n_ = 0;
  ComplexMatrix mean_;
  double mean_tr_ = 0.0;
  Eigen::MatrixXd m2_;
  double m2_tr_ = 0.0;
  ComplexMatrix cov_tr_;  // running sum of (v - mean)(tr - tr_mean)
};

struct DensityRow {
  double tau = 0.0;
  ComplexMatrix rho;
  double trace = 0.0;
  double min_eig = 0.0;
  double max_se = 0.0;
  double presym_residual = 0.0;
  long n_samples = 0;
};

inline std::vector<DensityRow> density_series(
    const std::vector<CovarianceEstimate>& estimates) {
  std::vector<DensityRow> rows;
  rows.reserve(estimates.size());
  for (const auto& est : estimates) {
    DensityRow row;
    row.tau = est.tau();
    row.rho = est.rho();
    row.trace = est.trace_mean();
    row.min_eig = min_eigenvalue(est.c_mean());
    row.max_se = est.max_se();
    row.presym_residual = est.presymmetrization_residual();
    row.n_samples = est.n_samples();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dcov
