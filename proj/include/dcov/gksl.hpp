#pragma once

// Deterministic reference dynamics: Lindblad channel extraction from the
// joint noise covariance, fixed-step RK4 master-equation integration
// (generic GKSL, the literal interacting form, von Neumann), and
// positivity/trace monitors.

#include <algorithm>
#include <cmath>
#include <vector>

#include "dcov/errors.hpp"
#include "dcov/linalg.hpp"
#include "dcov/micro.hpp"

namespace dcov {

enum class MasterVariant { GenericGksl, InteractingEq60, VonNeumann };

struct LindbladChannels {
  std::vector<double> gammas;        // nonnegative rates
  std::vector<ComplexMatrix> v_ops;  // on H_A (x) H_B
};

struct MasterEquationSpec {
  ComplexMatrix h_tot;
  LindbladChannels channels;
  MasterVariant variant = MasterVariant::GenericGksl;
  // literal-form ingredients, used by the InteractingEq60 layout
  std::vector<ComplexMatrix> l_embedded;  // L_j (x) I
  std::vector<ComplexMatrix> m_embedded;  // I (x) M_k
  ComplexMatrix sigma_aa, sigma_bb, sigma_ab;
};

// Embed the channel operators as {L_j (x) I} u {I (x) M_k}, eigendecompose
// the joint Sigma over them: V_n = sum_a U(a,n) E_a with rate gamma_n the
// eigenvalue. This is the construction that makes
// sum_n gamma_n V_n rho V_n^+ equal the Sigma-weighted sandwich sums.
inline LindbladChannels extract_channels(const SystemSpec& spec) {
  std::vector<ComplexMatrix> embedded;
  const ComplexMatrix id_a = identity_op(spec.dims.dim_a);
  const ComplexMatrix id_b = identity_op(spec.dims.dim_b);
  for (const auto& l : spec.l_ops)
    embedded.push_back(tensor_product_op(l, id_b));
  for (const auto& m : spec.m_ops)
    embedded.push_back(tensor_product_op(id_a, m));

  LindbladChannels out;
  if (embedded.empty() || spec.noise.is_zero()) return out;

  const ComplexMatrix& joint = spec.noise.joint;
  const double scale = joint.norm();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(joint);
  if (es.eigenvalues().minCoeff() < -1e-10 * scale)
    throw IndefiniteCovarianceError(
        "extract_channels: joint covariance indefinite");
  for (Index n = 0; n < joint.rows(); ++n) {
    double gamma = es.eigenvalues()(n);
    if (gamma < 0.0) gamma = 0.0;  // clip roundoff above -1e-12 * scale
    if (gamma <= 1e-14 * std::max(scale, 1.0)) continue;
    ComplexMatrix v = ComplexMatrix::Zero(embedded[0].rows(),
                                          embedded[0].cols());
    for (std::size_t a = 0; a < embedded.size(); ++a)
      v += es.eigenvectors()(static_cast<Index>(a), n) * embedded[a];
    out.gammas.push_back(gamma);
    out.v_ops.push_back(std::move(v));
  }
  return out;
}

inline MasterEquationSpec make_master_spec(const SystemSpec& spec,
                                           MasterVariant variant) {
  MasterEquationSpec m;
  m.variant = variant;
  m.h_tot = spec.h_total();
  if (variant == MasterVariant::GenericGksl) m.channels = extract_channels(spec);
  if (variant == MasterVariant::InteractingEq60) {
    const ComplexMatrix id_a = identity_op(spec.dims.dim_a);
    const ComplexMatrix id_b = identity_op(spec.dims.dim_b);
    for (const auto& l : spec.l_ops)
      m.l_embedded.push_back(tensor_product_op(l, id_b));
    for (const auto& mm : spec.m_ops)
      m.m_embedded.push_back(tensor_product_op(id_a, mm));
    m.sigma_aa = spec.noise.sigma_aa;
    m.sigma_bb = spec.noise.sigma_bb;
    m.sigma_ab = spec.noise.sigma_ab;
  }
  return m;
}

inline ComplexMatrix gksl_rhs(const ComplexMatrix& rho,
                              const MasterEquationSpec& spec) {
  if (rho.rows() != spec.h_tot.rows() || rho.cols() != spec.h_tot.cols())
    throw DimensionError("gksl_rhs: dimension mismatch");
  ComplexMatrix out = Complex(0, -1) * commutator(spec.h_tot, rho);
  switch (spec.variant) {
    case MasterVariant::VonNeumann:
      break;
    case MasterVariant::GenericGksl:
      for (std::size_t n = 0; n < spec.channels.gammas.size(); ++n) {
        const ComplexMatrix& v = spec.channels.v_ops[n];
        const ComplexMatrix vdv = v.adjoint() * v;
        out += spec.channels.gammas[n] *
               (v * rho * v.adjoint() - 0.5 * anticommutator(vdv, rho));
      }
      break;
    case MasterVariant::InteractingEq60: {
      // literal layout: cross sandwich + the two self anticommutator drains
      const Index na = spec.sigma_aa.rows();
      const Index nb = spec.sigma_bb.rows();
      for (Index j = 0; j < na; ++j)
        for (Index k = 0; k < nb; ++k) {
          const Complex w = spec.sigma_ab(j, k);
          if (w == Complex(0, 0)) continue;
          const ComplexMatrix lm = spec.l_embedded[j] * spec.m_embedded[k];
          out += w * (lm * rho * lm.adjoint());
        }
      for (Index j = 0; j < na; ++j)
        for (Index jp = 0; jp < na; ++jp) {
          const Complex w = spec.sigma_aa(j, jp);
          if (w == Complex(0, 0)) continue;
          out -= 0.5 * w * anticommutator(
              spec.l_embedded[jp].adjoint() * spec.l_embedded[j], rho);
        }
      for (Index k = 0; k < nb; ++k)
        for (Index kp = 0; kp < nb; ++kp) {
          const Complex w = spec.sigma_bb(k, kp);
          if (w == Complex(0, 0)) continue;
          out -= 0.5 * w * anticommutator(
              spec.m_embedded[kp].adjoint() * spec.m_embedded[k], rho);
        }
      break;
    }
  }
  return out;
}

// Crude generator norm bound used for the RK4 step-size guard.
inline double generator_norm_bound(const MasterEquationSpec& spec) {
  double g = 2.0 * operator_norm(spec.h_tot);
  for (std::size_t n = 0; n < spec.channels.gammas.size(); ++n) {
    const double vn = operator_norm(spec.channels.v_ops[n]);
    g += 3.0 * spec.channels.gammas[n] * vn * vn;
  }
  for (std::size_t j = 0; j < spec.l_embedded.size(); ++j)
    for (std::size_t k = 0; k < spec.m_embedded.size(); ++k)
      g += 3.0 * std::abs(spec.sigma_ab(static_cast<Index>(j),
                                        static_cast<Index>(k))) *
           operator_norm(spec.l_embedded[j] * spec.m_embedded[k]);
  if (spec.sigma_aa.size())
    g += spec.sigma_aa.cwiseAbs().sum() + spec.sigma_bb.cwiseAbs().sum();
  return std::max(g, 1e-12);
}

struct MasterSeries {
  std::vector<double> times;
  std::vector<ComplexMatrix> rhos;
  long hermitize_events = 0;
  double step = 0.0;
};

// Fixed-step classical RK4 on the density operator. Step <= min(grid
// spacing, 0.01/||generator||); rho is re-symmetrized only when the
// Hermiticity residual exceeds 1e-12 (events counted).
inline MasterSeries integrate_master(const ComplexMatrix& rho0,
                                     const MasterEquationSpec& spec,
                                     const std::vector<double>& tau_grid,
                                     double step_override = 0.0) {
  if (!assert_hermitian(rho0, 1e-10))
    throw ConfigError("integrate_master: rho0 not Hermitian to 1e-10");
  if (std::abs(rho0.trace() - Complex(1, 0)) > 1e-10)
    throw ConfigError("integrate_master: rho0 trace must be 1 to 1e-10");
  if (min_eigenvalue(rho0) < -1e-10)
    throw ConfigError("integrate_master: rho0 not PSD to 1e-10");
  if (tau_grid.empty())
    throw ConfigError("integrate_master: empty tau grid");
  double prev = -1.0;
  double min_spacing = std::numeric_limits<double>::infinity();
  for (double t : tau_grid) {
    if (t < 0.0 || t <= prev)
      throw ConfigError("integrate_master: tau grid must be nonnegative "
                        "and strictly increasing");
    if (prev >= 0.0) min_spacing = std::min(min_spacing, t - prev);
    prev = t;
  }
  if (tau_grid.front() > 0.0) min_spacing = std::min(min_spacing, tau_grid.front());

  const double guard = 0.01 / generator_norm_bound(spec);
  double h = std::min(guard, std::isfinite(min_spacing) ? min_spacing : guard);
  if (step_override > 0.0) {
    if (step_override > guard * (1.0 + 1e-12))
      throw ConfigError("integrate_master: requested step violates the "
                        "0.01/||generator|| guard");
    h = step_override;
  }

  MasterSeries out;
  out.step = h;
  ComplexMatrix rho = rho0;
  double t = 0.0;
  for (double target : tau_grid) {
    const long n_steps = std::lround(std::ceil((target - t) / h - 1e-12));
    const double hh = n_steps > 0 ? (target - t) / static_cast<double>(n_steps)
                                  : 0.0;
    for (long i = 0; i < n_steps; ++i) {
      const ComplexMatrix k1 = gksl_rhs(rho, spec);
      const ComplexMatrix k2 = gksl_rhs(rho + 0.5 * hh * k1, spec);
      const ComplexMatrix k3 = gksl_rhs(rho + 0.5 * hh * k2, spec);
      const ComplexMatrix k4 = gksl_rhs(rho + hh * k3, spec);
      rho += (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (hermiticity_residual(rho) > 1e-12) {
        rho = hermitian_part(rho);
        ++out.hermitize_events;
      }
    }
    t = target;
    out.times.push_back(target);
    out.rhos.push_back(rho);
  }
  return out;
}

struct PositivityRow {
  double tau = 0.0;
  double trace_deviation = 0.0;
  double hermiticity_residual = 0.0;
  double min_eig = 0.0;
  bool flagged = false;
};

struct PositivityReport {
  std::vector<PositivityRow> rows;
  bool any_flagged = false;
};

inline PositivityReport positivity_monitor(const MasterSeries& series) {
  PositivityReport report;
  for (std::size_t i = 0; i < series.rhos.size(); ++i) {
    PositivityRow row;
    row.tau = series.times[i];
    row.trace_deviation = std::abs(series.rhos[i].trace() - Complex(1, 0));
    row.hermiticity_residual = hermiticity_residual(series.rhos[i]);
    row.min_eig = min_eigenvalue(series.rhos[i]);
    row.flagged = row.min_eig < -1e-8;
    report.any_flagged = report.any_flagged || row.flagged;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace dcov
