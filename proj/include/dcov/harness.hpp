#pragma once

// Orchestration: parallel ensemble pipeline (micro -> window -> double
// covariance), Monte-Carlo-vs-reference error metrics, epsilon sweeps with
// an SE-gated log-log slope fit and bootstrap CI, and noise Markovianity
// diagnostics.

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "dcov/coarse.hpp"
#include "dcov/errors.hpp"
#include "dcov/gksl.hpp"
#include "dcov/linalg.hpp"
#include "dcov/micro.hpp"
#include "dcov/noise.hpp"

namespace dcov {

struct InitialCondition {
  ComplexVector x;
  ComplexVector y;
  bool random_haar = false;

  void validate(const HilbertDims& dims) const {
    if (random_haar) return;
    if (x.size() != dims.dim_a || y.size() != dims.dim_b)
      throw ConfigError("initial: state dimensions do not match dims");
    if (x.norm() == 0.0 || y.norm() == 0.0)
      throw ConfigError("initial: zero state vector");
  }

  // E[Z0 Z0^+] normalized: the configured pure product state, or the
  // maximally mixed state for per-trajectory Haar randomization.
  ComplexMatrix reference_rho0(const HilbertDims& dims) const {
    if (random_haar) {
      const Index d = dims.composite();
      return ComplexMatrix::Identity(d, d) / static_cast<double>(d);
    }
    const ComplexVector z0 = tensor_product_vec(x, y);
    return normalize_to_density((z0 * z0.adjoint()).eval());
  }
};

inline ComplexVector haar_vector(Index dim, RngStream& stream) {
  ComplexVector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = Complex(stream.normal(), stream.normal());
  v /= v.norm();
  return v;
}

struct EnsembleResult {
  std::vector<CovarianceEstimate> estimates;  // one per tau grid point
  std::vector<double> tau_nominal;
  std::vector<double> tau_effective;
  double dt = 0.0;
  double delta_effective = 0.0;
  long ensemble_size = 0;
  // per-trajectory window averages, [trajectory][tau] (kept when requested,
  // feeds the bootstrap)
  std::vector<std::vector<ComplexVector>> c_delta_rows;
};

// Runs the micro ensemble and accumulates C_Delta per tau window.
// Trajectories are independent given their stream index; worker results
// merge in index order so results do not depend on scheduling.
inline EnsembleResult run_ensemble(const SystemSpec& spec,
                                   const WindowConfig& window, long ensemble,
                                   MicroMode mode, const InitialCondition& init,
                                   std::uint64_t seed, int workers,
                                   bool keep_rows = false) {
  spec.validate();
  window.validate();
  init.validate(spec.dims);
  if (ensemble < 1) throw ConfigError("run_ensemble: ensemble size must be >= 1");

  const double dt = window.dt_micro();
  const double guard = 0.1 / std::max(spec.hamiltonian_norm_bound(), 1e-12);
  if (dt > guard)
    throw ConfigError("run_ensemble: dt " + std::to_string(dt) +
                      " exceeds stability guard 0.1/||H|| = " +
                      std::to_string(guard));

  const long n_win = window.window_steps();
  std::vector<long> starts;
  starts.reserve(window.tau_grid.size());
  for (double tau : window.tau_grid) starts.push_back(window.tau_step_index(tau));
  const long n_steps = *std::max_element(starts.begin(), starts.end()) + n_win;
  const Index dim = spec.dims.composite();
  const std::size_t n_tau = starts.size();

  EnsembleResult result;
  result.dt = dt;
  result.delta_effective = window.delta_effective();
  result.ensemble_size = ensemble;
  result.tau_nominal = window.tau_grid;
  for (std::size_t k = 0; k < n_tau; ++k)
    result.tau_effective.push_back(static_cast<double>(starts[k]) * dt);
  if (keep_rows) result.c_delta_rows.resize(ensemble);

  if (workers < 1)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(std::min<long>(workers, ensemble));

  std::vector<std::vector<CovarianceEstimate>> locals(
      workers, std::vector<CovarianceEstimate>());
  for (int w = 0; w < workers; ++w)
    for (std::size_t k = 0; k < n_tau; ++k)
      locals[w].emplace_back(window.tau_grid[k], dim);

  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&](int w, long lo, long hi) {
    try {
      std::vector<ComplexVector> acc(n_tau);
      for (long traj = lo; traj < hi; ++traj) {
        RngStream stream(seed, static_cast<std::uint64_t>(traj));
        ComplexVector x0 = init.random_haar ? haar_vector(spec.dims.dim_a, stream)
                                            : init.x;
        ComplexVector y0 = init.random_haar ? haar_vector(spec.dims.dim_b, stream)
                                            : init.y;
        MicroState state{std::move(x0), std::move(y0), 0.0, std::move(stream)};
        for (auto& a : acc) a = ComplexVector::Zero(dim);
        ComplexVector z = tensor_state(state);
        for (std::size_t k = 0; k < n_tau; ++k)
          if (starts[k] == 0) acc[k] += 0.5 * z;
        for (long step = 1; step <= n_steps; ++step) {
          detail::step_impl(state, spec, dt, mode == MicroMode::Interacting);
          z = tensor_state(state);
          for (std::size_t k = 0; k < n_tau; ++k) {
            const long s = starts[k];
            if (step >= s && step <= s + n_win)
              acc[k] += (step == s || step == s + n_win) ? 0.5 * z : z;
          }
        }
        const double inv = dt / result.delta_effective;
        if (keep_rows) result.c_delta_rows[traj].resize(n_tau);
        for (std::size_t k = 0; k < n_tau; ++k) {
          const ComplexVector cd = acc[k] * inv;
          locals[w][k].accumulate(cd);
          if (keep_rows) result.c_delta_rows[traj][k] = cd;
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0, 0, ensemble);
  } else {
    std::vector<std::thread> threads;
    const long chunk = (ensemble + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long lo = static_cast<long>(w) * chunk;
      const long hi = std::min<long>(lo + chunk, ensemble);
      if (lo >= hi) break;
      threads.emplace_back(work, w, lo, hi);
    }
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  result.estimates = std::move(locals[0]);
  for (int w = 1; w < workers; ++w)
    for (std::size_t k = 0; k < n_tau; ++k)
      result.estimates[k].merge(locals[w][k]);
  return result;
}

struct PointResult {
  EnsembleResult ensemble;
  std::vector<DensityRow> density;      // pipeline rho per tau
  MasterSeries reference;               // rho_ref at tau_eff + delta_eff/2
  std::vector<double> errors;           // per-tau Frobenius distance
  double sup_error = 0.0;
  double max_se = 0.0;
  MasterVariant variant = MasterVariant::GenericGksl;
};

// Full pipeline point: micro -> coarse-grain -> rho_MC, deterministic
// reference via gksl, sup-tau Frobenius error. The reference is evaluated at
// the effective window centers, which cancels the first-order window lag and
// leaves the O(Delta^2) + O(dt) bias the scaling harness fits.
inline PointResult run_point(const SystemSpec& spec, const WindowConfig& window,
                             long ensemble, MasterVariant variant,
                             const InitialCondition& init, std::uint64_t seed,
                             int workers = 0, bool keep_rows = false,
                             MicroMode mode = MicroMode::Interacting) {
  if (ensemble < 100)
    throw ConfigError("run_point: ensembleSize must be >= 100");
  PointResult out;
  out.variant = variant;
  out.ensemble = run_ensemble(spec, window, ensemble, mode, init, seed,
                              workers, keep_rows);
  out.density = density_series(out.ensemble.estimates);

  std::vector<double> ref_times;
  ref_times.reserve(out.ensemble.tau_effective.size());
  const double half = 0.5 * out.ensemble.delta_effective;
  for (double t : out.ensemble.tau_effective) ref_times.push_back(t + half);

  const MasterEquationSpec mspec = make_master_spec(spec, variant);
  out.reference = integrate_master(init.reference_rho0(spec.dims), mspec,
                                   ref_times);

  for (std::size_t k = 0; k < out.density.size(); ++k) {
    const double err = (out.density[k].rho - out.reference.rhos[k]).norm();
    out.errors.push_back(err);
    out.sup_error = std::max(out.sup_error, err);
    out.max_se = std::max(out.max_se, out.density[k].max_se);
  }
  return out;
}

struct SweepConfig {
  std::vector<double> epsilons;  // strictly decreasing, in (0,1)
  double c_delta = 1.0;
  double c_delta_t = 0.25;
  long ensemble_size = 10000;
  std::vector<double> tau_grid;
  MasterVariant reference_variant = MasterVariant::GenericGksl;
  long bootstrap_resamples = 200;
  std::uint64_t seed = 1;
  int workers = 0;
  MicroMode mode = MicroMode::Interacting;

  void validate() const {
    if (epsilons.size() < 3)
      throw ConfigError("sweep: need at least 3 epsilon points");
    double prev = 1.0;
    for (double e : epsilons) {
      if (!(e > 0.0 && e < 1.0) || e >= prev)
        throw ConfigError("sweep: epsilons must be strictly decreasing in (0,1)");
      prev = e;
    }
  }
};

struct SweepPoint {
  double epsilon = 0.0;
  double error = 0.0;
  double max_se = 0.0;
  bool resolved = false;
};

struct ScalingReport {
  std::vector<SweepPoint> per_epsilon;
  double fitted_slope = 0.0;
  double fitted_log_intercept = 0.0;
  double slope_ci_lo = 0.0;
  double slope_ci_hi = 0.0;
  long resolved_count = 0;
};

namespace detail {

inline std::pair<double, double> loglog_fit(const std::vector<double>& xs,
                                            const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(std::max(ys[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  const double slope = (dn * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / dn;
  return {slope, intercept};
}

}  // namespace detail

// Epsilon sweep: run_point per epsilon, SE-gated log-log slope fit with a
// trajectory bootstrap CI. Points with error <= 5 * maxSE are excluded from
// the fit as statistically unresolved.
inline ScalingReport run_sweep(const SweepConfig& sweep, const SystemSpec& spec,
                               const InitialCondition& init) {
  sweep.validate();
  ScalingReport report;
  std::vector<PointResult> points;
  points.reserve(sweep.epsilons.size());
  for (double eps : sweep.epsilons) {
    WindowConfig window{eps, sweep.c_delta, sweep.c_delta_t, sweep.tau_grid};
    points.push_back(run_point(spec, window, sweep.ensemble_size,
                               sweep.reference_variant, init, sweep.seed,
                               sweep.workers, /*keep_rows=*/true, sweep.mode));
    SweepPoint pt;
    pt.epsilon = eps;
    pt.error = points.back().sup_error;
    pt.max_se = points.back().max_se;
    pt.resolved = pt.error > 5.0 * pt.max_se;
    report.per_epsilon.push_back(pt);
    if (pt.resolved) ++report.resolved_count;
  }
  if (report.resolved_count < 2)
    throw InconclusiveSweepError(
        "run_sweep: all points noise-dominated; increase the ensemble size");

  std::vector<double> xs, ys;
  for (const auto& pt : report.per_epsilon)
    if (pt.resolved) {
      xs.push_back(pt.epsilon);
      ys.push_back(pt.error);
    }
  auto [slope, intercept] = detail::loglog_fit(xs, ys);
  report.fitted_slope = slope;
  report.fitted_log_intercept = intercept;

  // bootstrap over trajectories, deterministic given the sweep seed
  const long n_boot = sweep.bootstrap_resamples;
  if (n_boot > 0) {
    std::vector<double> slopes;
    slopes.reserve(n_boot);
    RngStream boot_stream(sweep.seed, 0xB007u);
    const long n_traj = sweep.ensemble_size;
    for (long b = 0; b < n_boot; ++b) {
      std::vector<long> idx(n_traj);
      for (long i = 0; i < n_traj; ++i)
        idx[i] = static_cast<long>(boot_stream.uniform() * n_traj) % n_traj;
      std::vector<double> bys;
      for (std::size_t p = 0; p < points.size(); ++p) {
        if (!report.per_epsilon[p].resolved) continue;
        const auto& rows = points[p].ensemble.c_delta_rows;
        const std::size_t n_tau = points[p].density.size();
        double sup = 0.0;
        for (std::size_t k = 0; k < n_tau; ++k) {
          const Index dim = rows[0][k].size();
          ComplexMatrix c = ComplexMatrix::Zero(dim, dim);
          for (long i : idx) c += rows[i][k] * rows[i][k].adjoint();
          c /= static_cast<double>(n_traj);
          const ComplexMatrix rho = normalize_to_density(hermitian_part(c));
          sup = std::max(sup, (rho - points[p].reference.rhos[k]).norm());
        }
        bys.push_back(sup);
      }
      slopes.push_back(detail::loglog_fit(xs, bys).first);
    }
    std::sort(slopes.begin(), slopes.end());
    const auto pick = [&](double q) {
      const long i = std::lround(q * (slopes.size() - 1));
      return slopes[static_cast<std::size_t>(i)];
    };
    report.slope_ci_lo = pick(0.025);
    report.slope_ci_hi = pick(0.975);
  } else {
    report.slope_ci_lo = report.slope_ci_hi = report.fitted_slope;
  }
  return report;
}

struct LagRow {
  long lag = 0;
  ComplexMatrix estimate;   // E[dW(t) dW^+(t + lag dt)] / dt
  Eigen::MatrixXd se;       // per-entry standard error (same 1/dt scale)
};

// Empirical lagged cross-covariance of the joint increments. Row k = 0
// reproduces Sigma_joint; rows k >= 1 probe temporal memory.
inline std::vector<LagRow> markov_diagnostics(const NoiseModel& model,
                                              double dt, long lags,
                                              long n_samples,
                                              RngStream& stream) {
  if (lags < 0) throw ConfigError("markov_diagnostics: lags must be >= 0");
  if (n_samples < lags + 2)
    throw ConfigError("markov_diagnostics: too few samples");
  const Index n = model.n_a + model.n_b;
  std::vector<LagRow> rows(lags + 1);
  std::vector<ComplexMatrix> mean(lags + 1, ComplexMatrix::Zero(n, n));
  std::vector<Eigen::MatrixXd> m2(lags + 1, Eigen::MatrixXd::Zero(n, n));
  std::vector<long> counts(lags + 1, 0);

  std::vector<ComplexVector> ring(lags + 1);
  for (long s = 0; s < n_samples; ++s) {
    auto [dwa, dwb] = sample_increments(model, dt, stream);
    ComplexVector w(n);
    w.head(model.n_a) = dwa;
    w.tail(model.n_b) = dwb;
    ring[s % (lags + 1)] = w;
    for (long k = 0; k <= lags; ++k) {
      if (s < k) continue;
      const ComplexVector& earlier = ring[(s - k) % (lags + 1)];
      const ComplexMatrix prod = earlier * w.adjoint();
      ++counts[k];
      const ComplexMatrix d = prod - mean[k];
      mean[k] += d / static_cast<double>(counts[k]);
      m2[k] += (d.conjugate().cwiseProduct(prod - mean[k])).real();
    }
  }
  for (long k = 0; k <= lags; ++k) {
    rows[k].lag = k;
    rows[k].estimate = mean[k] / dt;
    const double c = static_cast<double>(counts[k]);
    rows[k].se = (m2[k] / (c * (c - 1.0))).cwiseSqrt() / dt;
  }
  return rows;
}

// Isolates the feedback mechanism: interacting micro-dynamics with Sigma = 0
// compared against the von Neumann reference carrying the explicit tensor
// interaction.
inline PointResult interaction_emergence_test(const SystemSpec& spec,
                                              const WindowConfig& window,
                                              long ensemble,
                                              const InitialCondition& init,
                                              std::uint64_t seed,
                                              int workers = 0) {
  if (spec.interaction.empty())
    throw ConfigError("interaction_emergence_test: interaction list is empty");
  if (!spec.noise.is_zero())
    throw ConfigError("interaction_emergence_test: requires Sigma = 0");
  return run_point(spec, window, ensemble, MasterVariant::VonNeumann, init,
                   seed, workers, /*keep_rows=*/false, MicroMode::Interacting);
}

}  // namespace dcov
