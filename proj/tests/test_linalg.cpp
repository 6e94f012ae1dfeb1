#include <catch2/catch_amalgamated.hpp>

#include "dcov/linalg.hpp"
#include "oracles.hpp"

using namespace dcov;

TEST_CASE("tensor product of vectors follows Kronecker ordering", "[linalg]") {
  ComplexVector e0(2), e1(2);
  e0 << 1, 0;
  e1 << 0, 1;

  ComplexVector r = tensor_product_vec(e0, e0);
  REQUIRE(r.size() == 4);
  CHECK(r(0) == Complex(1, 0));
  CHECK(r(1) == Complex(0, 0));
  CHECK(r(2) == Complex(0, 0));
  CHECK(r(3) == Complex(0, 0));

  // A is the slow index: e1 (x) e0 lands at entry 2
  r = tensor_product_vec(e1, e0);
  CHECK(r(2) == Complex(1, 0));
  CHECK(r.cwiseAbs().sum() == 1.0);
}

TEST_CASE("tensor_product_vec matches the nested-loop oracle", "[linalg]") {
  auto rng = oracle::test_rng(11);
  const ComplexVector x = oracle::random_vector(2, rng);
  const ComplexVector y = oracle::random_vector(2, rng);
  const ComplexVector got = tensor_product_vec(x, y);
  const ComplexVector want = oracle::kron_vec(x, y);
  for (Index i = 0; i < 4; ++i) CHECK(got(i) == want(i));
}

TEST_CASE("tensor product of operators", "[linalg]") {
  CHECK((tensor_product_op(identity_op(2), identity_op(2)) -
         identity_op(4)).norm() == 0.0);

  const ComplexMatrix zI = tensor_product_op(pauli_z(), identity_op(2));
  ComplexMatrix want = ComplexMatrix::Zero(4, 4);
  want.diagonal() << 1, 1, -1, -1;
  CHECK((zI - want).norm() == 0.0);

  auto rng = oracle::test_rng(12);
  const ComplexMatrix a = oracle::random_matrix(2, 2, rng);
  const ComplexMatrix b = oracle::random_matrix(2, 2, rng);
  const ComplexVector x = oracle::random_vector(2, rng);
  const ComplexVector y = oracle::random_vector(2, rng);
  const ComplexVector lhs = tensor_product_op(a, b) * tensor_product_vec(x, y);
  const ComplexVector rhs = tensor_product_vec((a * x).eval(), (b * y).eval());
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(tensor_product_op(oracle::random_matrix(2, 3, rng), b),
                  DimensionError);
}

TEST_CASE("commutators", "[linalg]") {
  auto rng = oracle::test_rng(13);
  const ComplexMatrix h = oracle::random_hermitian(3, rng);
  CHECK(commutator(h, h).norm() == 0.0);

  // [sigma_x, sigma_y] = 2i sigma_z by direct 2x2 multiplication
  const ComplexMatrix lhs = commutator(pauli_x(), pauli_y());
  const ComplexMatrix xy = pauli_x() * pauli_y();
  const ComplexMatrix yx = pauli_y() * pauli_x();
  CHECK((lhs - (xy - yx)).norm() == 0.0);
  CHECK((lhs - Complex(0, 2) * pauli_z()).norm() < 1e-15);

  const ComplexMatrix a = oracle::random_matrix(4, 4, rng);
  const ComplexMatrix b = oracle::random_matrix(4, 4, rng);
  CHECK(std::abs(commutator(a, b).trace()) < 1e-12);
  CHECK_THROWS_AS(commutator(a, oracle::random_matrix(3, 3, rng)),
                  DimensionError);

  const ComplexMatrix anti = anticommutator(a, b);
  CHECK((anti - (a * b + b * a)).norm() == 0.0);
}

TEST_CASE("commutator of Hermitian operators is anti-Hermitian", "[linalg]") {
  auto rng = oracle::test_rng(14);
  const ComplexMatrix a = oracle::random_hermitian(3, rng);
  const ComplexMatrix b = oracle::random_hermitian(3, rng);
  const ComplexMatrix c = commutator(a, b);
  CHECK((c.adjoint() + commutator(a.adjoint().eval(), b.adjoint().eval()))
            .norm() < 1e-12);
}

TEST_CASE("hermiticity and psd checks", "[linalg]") {
  CHECK(assert_hermitian(identity_op(3), 1e-12));
  CHECK(assert_psd(identity_op(3), 1e-12));

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -1e-3;
  CHECK(assert_hermitian(d, 1e-6));
  CHECK_FALSE(assert_psd(d, 1e-6));

  auto rng = oracle::test_rng(15);
  const ComplexVector v = oracle::random_vector(3, rng);
  const ComplexMatrix vv = v * v.adjoint();
  CHECK(assert_hermitian(vv, 1e-12));
  CHECK(assert_psd(vv, 1e-12));

  // asymmetry beyond tol fails the psd check even with benign eigenvalues
  ComplexMatrix skew = identity_op(2);
  skew(0, 1) = Complex(0, 1e-3);
  CHECK_FALSE(assert_psd(skew, 1e-6));
}

TEST_CASE("psd of nonnegative Gram sums", "[linalg]") {
  auto rng = oracle::test_rng(16);
  ComplexMatrix sum = ComplexMatrix::Zero(4, 4);
  for (int k = 0; k < 6; ++k) {
    const ComplexVector v = oracle::random_vector(4, rng);
    const double w = std::abs(oracle::random_complex(rng));
    sum += w * (v * v.adjoint());
  }
  CHECK(assert_psd(sum, 1e-10));
}

TEST_CASE("normalize_to_density", "[linalg]") {
  ComplexMatrix c = 2.0 * identity_op(2);
  const ComplexMatrix rho = normalize_to_density(c);
  CHECK((rho - 0.5 * identity_op(2)).norm() < 1e-15);

  auto rng = oracle::test_rng(17);
  const ComplexVector v = oracle::random_unit_vector(3, rng);
  const ComplexMatrix pure = v * v.adjoint();
  CHECK((normalize_to_density(pure) - pure).norm() < 1e-14);

  CHECK_THROWS_AS(normalize_to_density(ComplexMatrix::Zero(2, 2)),
                  DegenerateTraceError);
}

TEST_CASE("mixed product and trace factorization", "[linalg]") {
  auto rng = oracle::test_rng(18);
  const ComplexMatrix a = oracle::random_matrix(2, 2, rng);
  const ComplexMatrix b = oracle::random_matrix(3, 3, rng);
  const ComplexMatrix c = oracle::random_matrix(2, 2, rng);
  const ComplexMatrix d = oracle::random_matrix(3, 3, rng);

  const ComplexMatrix lhs = tensor_product_op(a, b) * tensor_product_op(c, d);
  const ComplexMatrix rhs = tensor_product_op((a * c).eval(), (b * d).eval());
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(std::abs(tensor_product_op(a, b).trace() - a.trace() * b.trace()) <
        1e-12);

  // and against the raw-index oracle
  CHECK((tensor_product_op(a, b) - oracle::kron(a, b)).norm() == 0.0);
}
