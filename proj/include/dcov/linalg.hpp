#pragma once

// Dense complex linear algebra over the subsystem spaces H_A, H_B and the
// composite H_A (x) H_B. Everything is small (composite dimension <= 16),
// so dense Eigen storage throughout.

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "dcov/errors.hpp"

namespace dcov {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

struct HilbertDims {
  Index dim_a = 1;
  Index dim_b = 1;
  Index composite() const { return dim_a * dim_b; }
};

// Kronecker convention: subsystem A is the slow (outer) index everywhere,
// entry (i*b + j) of x (x) y is x_i * y_j.
inline ComplexVector tensor_product_vec(const ComplexVector& x,
                                        const ComplexVector& y) {
  ComplexVector out(x.size() * y.size());
  for (Index i = 0; i < x.size(); ++i)
    out.segment(i * y.size(), y.size()) = x(i) * y;
  return out;
}

inline ComplexMatrix tensor_product_op(const ComplexMatrix& a,
                                       const ComplexMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw DimensionError("tensor_product_op: operators must be square");
  const Index na = a.rows(), nb = b.rows();
  ComplexMatrix out(na * nb, na * nb);
  for (Index i = 0; i < na; ++i)
    for (Index j = 0; j < na; ++j)
      out.block(i * nb, j * nb, nb, nb) = a(i, j) * b;
  return out;
}

inline ComplexMatrix commutator(const ComplexMatrix& a,
                                const ComplexMatrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows() || b.rows() != b.cols())
    throw DimensionError("commutator: dimension mismatch");
  return a * b - b * a;
}

inline ComplexMatrix anticommutator(const ComplexMatrix& a,
                                    const ComplexMatrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows() || b.rows() != b.cols())
    throw DimensionError("anticommutator: dimension mismatch");
  return a * b + b * a;
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

inline double hermiticity_residual(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint().eval()).cwiseAbs().maxCoeff();
}

inline bool assert_hermitian(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return hermiticity_residual(a) <= tol;
}

// PSD check on the Hermitian part; asymmetry beyond tol fails separately.
inline bool assert_psd(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  if (hermiticity_residual(a) > tol) return false;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

inline double min_eigenvalue(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// rho = C / Tr(C). |Tr C| < 1e-12 * ||C||_F counts as degenerate.
inline ComplexMatrix normalize_to_density(const ComplexMatrix& c) {
  if (c.rows() != c.cols())
    throw DimensionError("normalize_to_density: matrix must be square");
  const Complex tr = c.trace();
  const double floor = 1e-12 * c.norm();
  if (std::abs(tr) <= floor || std::abs(tr) == 0.0)
    throw DegenerateTraceError("normalize_to_density: trace modulus " +
                               std::to_string(std::abs(tr)) +
                               " below degenerate threshold");
  return c / tr;
}

inline ComplexMatrix identity_op(Index n) {
  return ComplexMatrix::Identity(n, n);
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Basis |0>, |1>; raising maps |0> -> |1>.
inline ComplexMatrix raising_op() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = 1;
  return m;
}

inline ComplexMatrix lowering_op() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}

inline double operator_norm(const ComplexMatrix& a) {
  return a.jacobiSvd().singularValues()(0);
}

}  // namespace dcov
