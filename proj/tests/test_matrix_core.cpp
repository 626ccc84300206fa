#include <doctest.h>

#include "qsuff/matrix_core.hpp"
#include "qsuff/rng.hpp"
#include "test_helpers.hpp"

using namespace qsuff;
using namespace qsuff::testing;

TEST_SUITE("matrix_core") {

TEST_CASE("hermitian construction and rejection") {
  CHECK_NOTHROW(HermitianMatrix(pauli_x()));
  Matrix bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(HermitianMatrix{bad}, NonHermitianInput);
}

TEST_CASE("density matrix invariants") {
  CHECK_NOTHROW(DensityMatrix(0.5 * identity(2)));
  CHECK_THROWS_AS(DensityMatrix{identity(2)}, DomainError);        // trace 2
  CHECK_THROWS_AS(DensityMatrix{-0.5 * identity(2)}, NegativeInput);
}

TEST_CASE("hermitian_eig known spectra") {
  EigSystem id2 = hermitian_eig(identity(2));
  CHECK(id2.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(id2.eigenvalues(1) == doctest::Approx(1.0));

  EigSystem ez = hermitian_eig(pauli_z());
  CHECK(ez.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(ez.eigenvalues(1) == doctest::Approx(1.0));

  Matrix d(2, 2);
  d << 0.25, 0, 0, 0.75;
  EigSystem ed = hermitian_eig(d);
  CHECK(ed.eigenvalues(0) == doctest::Approx(0.25));
  CHECK(ed.eigenvalues(1) == doctest::Approx(0.75));

  // Reconstruction and unitarity.
  Rng rng(2);
  Matrix h = rng.random_hermitian(5);
  EigSystem es = hermitian_eig(h);
  CHECK((es.reconstruct() - 0.5 * (h + h.adjoint().eval())).norm() < 1e-9 * std::max(1.0, h.norm()));
  CHECK((es.eigenvectors.adjoint() * es.eigenvectors - identity(5)).norm() < 1e-9);
}

TEST_CASE("fun_calc basics") {
  Matrix z2 = fun_calc(pauli_z(), [](double x) { return x * x; });
  CHECK((z2 - identity(2)).norm() < 1e-12);

  Matrix d(2, 2);
  d << 0.75, 0, 0, 0.25;
  Matrix pos = fun_calc(d, [](double x) { return std::max(x, 0.0); });
  CHECK((pos - d).norm() < 1e-12);

  Matrix mixed(2, 2);
  mixed << 0.25, 0, 0, -0.25;
  Matrix p = positive_part(mixed);
  CHECK(p(0, 0).real() == doctest::Approx(0.25));
  CHECK(p(1, 1).real() == doctest::Approx(0.0));
  CHECK(p.trace().real() == doctest::Approx(0.25));
}

TEST_CASE("positive and negative parts decompose") {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    Matrix h = rng.random_hermitian(4);
    Matrix p = positive_part(h), n = negative_part(h);
    CHECK((p - n - h).norm() < 1e-10);
    CHECK(std::abs(hs_inner(p, n)) < 1e-10);  // HS-orthogonal
    Eigen::SelfAdjointEigenSolver<Matrix> ep(p), en(n);
    CHECK(ep.eigenvalues().minCoeff() > -1e-12);
    CHECK(en.eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("exp-log roundtrip on full-rank PSD") {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    Matrix g = rng.ginibre(4, 4);
    Matrix h = g * g.adjoint() + 0.1 * identity(4);
    Matrix back = fun_calc(matrix_log_support(h), [](double x) { return std::exp(x); });
    CHECK((back - h).norm() < 1e-8 * h.norm());
  }
}

TEST_CASE("pseudo powers act as zero on the kernel") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 4.0;
  d(1, 1) = 1.0;
  Matrix inv_sqrt = matrix_pow(d, -0.5);
  CHECK(inv_sqrt(0, 0).real() == doctest::Approx(0.5));
  CHECK(inv_sqrt(1, 1).real() == doctest::Approx(1.0));
  CHECK(std::abs(inv_sqrt(2, 2)) < 1e-12);
}

TEST_CASE("inner products") {
  DensityMatrix tau = maximally_mixed(2);
  // <1,1>_sigma = 1 for any state.
  Rng rng(8);
  DensityMatrix sigma = rng.wishart_state(2);
  CHECK(std::abs(kms_inner(identity(2), identity(2), sigma) - Complex(1, 0)) < 1e-10);
  // <X,X>_tau = tr(X^2)/2 = 1, <X,Z>_tau = 0.
  CHECK(std::abs(kms_inner(pauli_x(), pauli_x(), tau) - Complex(1, 0)) < 1e-10);
  CHECK(std::abs(kms_inner(pauli_x(), pauli_z(), tau)) < 1e-10);
  // <1,a>_sigma = tr(sigma a).
  Matrix a = rng.random_hermitian(2);
  CHECK(std::abs(kms_inner(identity(2), a, sigma) - (sigma.mat() * a).trace()) < 1e-10);
  // Singular sigma rejected.
  DensityMatrix pure = bloch_state(0, 0, 1);
  CHECK_THROWS_AS((void)kms_inner(pauli_x(), pauli_x(), pure), SingularState);
}

TEST_CASE("kms cauchy-schwarz on random inputs") {
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    DensityMatrix sigma = rng.wishart_state(3);
    Matrix a = rng.ginibre(3, 3), b = rng.ginibre(3, 3);
    const double lhs = std::norm(kms_inner(a, b, sigma));
    const double rhs = kms_inner(a, a, sigma).real() * kms_inner(b, b, sigma).real();
    CHECK(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("support projector") {
  DensityMatrix faithful = maximally_mixed(3);
  CHECK((support_projector(faithful.base()).mat() - identity(3)).norm() < 1e-10);

  Matrix rank1 = Matrix::Zero(2, 2);
  rank1(0, 0) = 1;
  CHECK((support_projector(HermitianMatrix(rank1)).mat() - rank1).norm() < 1e-10);

  Matrix d3 = Matrix::Zero(3, 3);
  d3(0, 0) = 0.5;
  d3(1, 1) = 0.5;
  Matrix expect = Matrix::Zero(3, 3);
  expect(0, 0) = 1;
  expect(1, 1) = 1;
  CHECK((support_projector(HermitianMatrix(d3)).mat() - expect).norm() < 1e-10);

  CHECK_THROWS_AS((void)support_projector(HermitianMatrix(-identity(2))), NegativeInput);

  // p h p = h within tolerance.
  Rng rng(12);
  Matrix g = rng.ginibre(3, 2);
  Matrix h = g * g.adjoint();  // rank 2 PSD
  Matrix p = support_projector(HermitianMatrix(h)).mat();
  CHECK((p * h * p - h).norm() < 1e-9 * std::max(1.0, h.norm()));
}

TEST_CASE("vec round trip follows the elementary basis order") {
  Rng rng(14);
  Matrix a = rng.ginibre(3, 3);
  CVector v = vec_rm(a);
  CHECK(v(0 * 3 + 1) == a(0, 1));
  CHECK((unvec_rm(v) - a).norm() == 0.0);
}

}  // TEST_SUITE
