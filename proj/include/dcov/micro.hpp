#pragma once

// Euler-Maruyama time stepping of the micro SDEs
//   dX = -i H_A X dt - i sum_m xi_A,m A_m X dt + sum_j L_j X dW_A,j
//   dY = -i H_B Y dt - i sum_m xi_B,m B_m Y dt + sum_k M_k Y dW_B,k
// with xi_A,m = (1/2) <B_m>_Y, xi_B,m = (1/2) <A_m>_X evaluated at the step
// start, plus the analytic drift operator of the tensor process Z = X (x) Y.

#include <string>
#include <utility>
#include <vector>

#include "dcov/errors.hpp"
#include "dcov/linalg.hpp"
#include "dcov/noise.hpp"

namespace dcov {

enum class MicroMode { Free, Interacting };

struct InteractionPair {
  ComplexMatrix op_a;  // Hermitian, acts on H_A
  ComplexMatrix op_b;  // Hermitian, acts on H_B
};

struct SystemSpec {
  HilbertDims dims;
  ComplexMatrix h_a;
  ComplexMatrix h_b;
  std::vector<ComplexMatrix> l_ops;  // one per A noise channel
  std::vector<ComplexMatrix> m_ops;  // one per B noise channel
  std::vector<InteractionPair> interaction;
  NoiseModel noise;

  void validate() const {
    if (h_a.rows() != dims.dim_a || h_a.cols() != dims.dim_a)
      throw DimensionError("SystemSpec: hA dimension mismatch");
    if (h_b.rows() != dims.dim_b || h_b.cols() != dims.dim_b)
      throw DimensionError("SystemSpec: hB dimension mismatch");
    if (!assert_hermitian(h_a, 1e-10))
      throw ConfigError("SystemSpec: hA not Hermitian to 1e-10");
    if (!assert_hermitian(h_b, 1e-10))
      throw ConfigError("SystemSpec: hB not Hermitian to 1e-10");
    if (static_cast<Index>(l_ops.size()) != noise.n_a)
      throw ConfigError("SystemSpec: lOps count must equal noise.nA");
    if (static_cast<Index>(m_ops.size()) != noise.n_b)
      throw ConfigError("SystemSpec: mOps count must equal noise.nB");
    for (const auto& l : l_ops)
      if (l.rows() != dims.dim_a || l.cols() != dims.dim_a)
        throw DimensionError("SystemSpec: L op dimension mismatch");
    for (const auto& m : m_ops)
      if (m.rows() != dims.dim_b || m.cols() != dims.dim_b)
        throw DimensionError("SystemSpec: M op dimension mismatch");
    for (const auto& p : interaction) {
      if (p.op_a.rows() != dims.dim_a || p.op_b.rows() != dims.dim_b)
        throw DimensionError("SystemSpec: interaction pair dimension mismatch");
      if (!assert_hermitian(p.op_a, 1e-10) || !assert_hermitian(p.op_b, 1e-10))
        throw ConfigError("SystemSpec: interaction pair not Hermitian");
    }
  }

  // H_A (x) I + I (x) H_B
  ComplexMatrix h_local() const {
    return tensor_product_op(h_a, identity_op(dims.dim_b)) +
           tensor_product_op(identity_op(dims.dim_a), h_b);
  }

  // sum_m A_m (x) B_m
  ComplexMatrix h_int() const {
    ComplexMatrix h = ComplexMatrix::Zero(dims.composite(), dims.composite());
    for (const auto& p : interaction) h += tensor_product_op(p.op_a, p.op_b);
    return h;
  }

  ComplexMatrix h_total() const { return h_local() + h_int(); }

  // Bound on the effective local generator norms; the explicit scheme's
  // stability guard rejects dt > 0.1 / this.
  double hamiltonian_norm_bound() const {
    double xi_bound = 0.0;
    for (const auto& p : interaction)
      xi_bound += 0.5 * operator_norm(p.op_a) * operator_norm(p.op_b);
    const double ha = h_a.size() ? operator_norm(h_a) : 0.0;
    const double hb = h_b.size() ? operator_norm(h_b) : 0.0;
    return std::max(ha, hb) + xi_bound;
  }
};

struct MicroState {
  ComplexVector x;
  ComplexVector y;
  double t = 0.0;
  RngStream stream;
};

struct DriftOperator {
  ComplexMatrix matrix;  // on H_A (x) H_B, units 1/time
};

// L = -i (H_A (x) I + I (x) H_B) + sum_jk Gamma_jk (L_j (x) M_k),
// Gamma = Sigma_AB.
inline DriftOperator build_drift_operator(const SystemSpec& spec) {
  ComplexMatrix l = Complex(0, -1) * spec.h_local();
  for (Index j = 0; j < spec.noise.n_a; ++j)
    for (Index k = 0; k < spec.noise.n_b; ++k)
      l += spec.noise.sigma_ab(j, k) *
           tensor_product_op(spec.l_ops[j], spec.m_ops[k]);
  return DriftOperator{std::move(l)};
}

inline ComplexVector tensor_state(const MicroState& state) {
  return tensor_product_vec(state.x, state.y);
}

// xi_A = (1/2) <B>_y / ||y||^2, xi_B = (1/2) <A>_x / ||x||^2 for one
// interaction pair; Rayleigh quotients of Hermitian operators, so real.
inline std::pair<double, double> interaction_fields(const ComplexVector& x,
                                                    const ComplexVector& y,
                                                    const InteractionPair& p) {
  const double nx2 = x.squaredNorm();
  const double ny2 = y.squaredNorm();
  if (nx2 <= 0.0 || ny2 <= 0.0)
    throw NormCollapseError("interaction_fields: zero state norm");
  return {0.5 * std::real(y.dot(p.op_b * y)) / ny2,
          0.5 * std::real(x.dot(p.op_a * x)) / nx2};
}

// || (I - P_y) B y || / || B y ||, the transverse component of the
// projector-collapse identity. Measured diagnostic, not assumed zero.
inline double projector_collapse_residual(const ComplexVector& y,
                                          const ComplexMatrix& b) {
  const double ny2 = y.squaredNorm();
  if (ny2 <= 0.0)
    throw ConfigError("projector_collapse_residual: zero state");
  const ComplexVector by = b * y;
  const double nby = by.norm();
  if (nby == 0.0) return 0.0;
  const ComplexVector transverse = by - (y.dot(by) / ny2) * y;
  return transverse.norm() / nby;
}

namespace detail {

inline void step_impl(MicroState& state, const SystemSpec& spec, double dt,
                      bool interacting) {
  const ComplexVector& x = state.x;
  const ComplexVector& y = state.y;

  ComplexVector drift_x = Complex(0, -1) * (spec.h_a * x);
  ComplexVector drift_y = Complex(0, -1) * (spec.h_b * y);

  if (interacting && !spec.interaction.empty()) {
    const double nx2 = x.squaredNorm();
    const double ny2 = y.squaredNorm();
    if (nx2 < 1e-12 * static_cast<double>(spec.dims.dim_a) ||
        ny2 < 1e-12 * static_cast<double>(spec.dims.dim_b))
      throw NormCollapseError(
          "state norm below floor at t=" + std::to_string(state.t) +
          "; dt is too large for the multiplicative scheme");
    for (const auto& p : spec.interaction) {
      // xi fields at the step start (explicit scheme)
      const auto [xi_a, xi_b] = interaction_fields(x, y, p);
      drift_x += Complex(0, -1) * xi_a * (p.op_a * x);
      drift_y += Complex(0, -1) * xi_b * (p.op_b * y);
    }
  }

  auto [dwa, dwb] = sample_increments(spec.noise, dt, state.stream);
  ComplexVector new_x = x + drift_x * dt;
  for (Index j = 0; j < spec.noise.n_a; ++j)
    new_x += dwa(j) * (spec.l_ops[j] * x);
  ComplexVector new_y = y + drift_y * dt;
  for (Index k = 0; k < spec.noise.n_b; ++k)
    new_y += dwb(k) * (spec.m_ops[k] * y);

  if (!new_x.allFinite() || !new_y.allFinite())
    throw NumericalBlowupError(
        "non-finite state after step at t=" + std::to_string(state.t + dt),
        state.t + dt, state.stream.stream_index());

  state.x = std::move(new_x);
  state.y = std::move(new_y);
  state.t += dt;
}

}  // namespace detail

inline void step_free(MicroState& state, const SystemSpec& spec, double dt) {
  if (dt <= 0) throw ConfigError("step_free: dt must be positive");
  detail::step_impl(state, spec, dt, false);
}

inline void step_interacting(MicroState& state, const SystemSpec& spec,
                             double dt) {
  if (dt <= 0) throw ConfigError("step_interacting: dt must be positive");
  detail::step_impl(state, spec, dt, true);
}

// Recorded tensor trajectory, values at t0 + i * stride * dt.
struct ZSeries {
  double t0 = 0.0;
  double dt = 0.0;       // micro step
  Index stride = 1;      // recording stride in steps
  std::vector<ComplexVector> values;

  double sample_spacing() const { return dt * static_cast<double>(stride); }
};

inline ZSeries evolve_trajectory(const SystemSpec& spec, MicroState state,
                                 double dt, long n_steps, MicroMode mode,
                                 Index record_stride = 1) {
  if (n_steps < 1) throw ConfigError("evolve_trajectory: nSteps must be >= 1");
  if (record_stride < 1)
    throw ConfigError("evolve_trajectory: record stride must be >= 1");
  ZSeries series;
  series.t0 = state.t;
  series.dt = dt;
  series.stride = record_stride;
  series.values.reserve(static_cast<std::size_t>(n_steps / record_stride) + 1);
  series.values.push_back(tensor_state(state));
  for (long i = 1; i <= n_steps; ++i) {
    try {
      detail::step_impl(state, spec, dt, mode == MicroMode::Interacting);
    } catch (const NumericalBlowupError& e) {
      throw NumericalBlowupError(
          std::string(e.what()) + " (step " + std::to_string(i) + ")", e.t,
          e.stream_index);
    } catch (const NormCollapseError& e) {
      throw NormCollapseError(std::string(e.what()) + " (step " +
                              std::to_string(i) + ")");
    }
    if (i % record_stride == 0) series.values.push_back(tensor_state(state));
  }
  return series;
}

}  // namespace dcov
