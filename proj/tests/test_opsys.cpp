#include <doctest.h>

#include "qsuff/opsys.hpp"
#include "qsuff/rng.hpp"
#include "test_helpers.hpp"

using namespace qsuff;
using namespace qsuff::testing;

TEST_SUITE("opsys") {

TEST_CASE("jordan product basics") {
  CHECK((jordan_product(pauli_x(), pauli_z())).norm() == doctest::Approx(0.0).epsilon(1e-12));
  Rng rng(5);
  Matrix a = rng.random_hermitian(3);
  CHECK((jordan_product(a, identity(3)) - a).norm() < 1e-12);
  CHECK((jordan_product(a, a) - a * a).norm() < 1e-12);
}

TEST_CASE("triple product identities") {
  Rng rng(7);
  Matrix a = rng.random_hermitian(3), b = rng.random_hermitian(3), c = rng.random_hermitian(3);
  Matrix lhs = triple_product(a, b, c);
  Matrix rhs = jordan_product(jordan_product(a, b), c) +
               jordan_product(jordan_product(b, c), a) -
               jordan_product(jordan_product(a, c), b);
  CHECK((lhs - rhs).norm() < 1e-10);

  // {p, x, p} = p x p for projections.
  Matrix p = Matrix::Zero(3, 3);
  p(0, 0) = 1;
  CHECK((triple_product(p, b, p) - p * b * p).norm() < 1e-12);
  CHECK((triple_product(identity(3), b, identity(3)) - b).norm() < 1e-12);
  // {X, Z, X} = -Z.
  CHECK((triple_product(pauli_x(), pauli_z(), pauli_x()) + pauli_z()).norm() < 1e-12);
}

TEST_CASE("close_jstar qubit pauli pair") {
  OperatorSubspace j = close_jstar(2, {pauli_x(), pauli_z()});
  CHECK(j.dim() == 3);
  CHECK(j.contains(identity(2)));
  CHECK(j.contains(pauli_x()));
  CHECK(j.contains(pauli_z()));
  CHECK_FALSE(j.contains(pauli_y()));
  CHECK(j.contains(jordan_product(pauli_x(), pauli_z())));  // = 0
  CHECK(is_jordan_closed(j));
}

TEST_CASE("close_jstar of the identity alone") {
  OperatorSubspace j = close_jstar(3, {identity(3)});
  CHECK(j.dim() == 1);
}

TEST_CASE("close_star completes the pauli basis") {
  OperatorSubspace a = close_star(2, {pauli_x(), pauli_z()});
  CHECK(a.dim() == 4);
  CHECK(a.contains(pauli_y()));
}

TEST_CASE("close_star of commuting diagonals stays diagonal") {
  Matrix d1 = Matrix::Zero(3, 3);
  d1(0, 0) = 1;
  d1(1, 1) = 2;
  d1(2, 2) = 3;
  OperatorSubspace a = close_star(3, {d1});
  CHECK(a.dim() == 3);
}

TEST_CASE("symmetric generator fixture dimensions d = 2..6") {
  for (int d = 2; d <= 6; ++d) {
    auto gens = symmetric_generators(d);
    OperatorSubspace j = close_jstar(d, gens);
    CAPTURE(d);
    CHECK(j.dim() == d * (d + 1) / 2);
    CHECK(is_jordan_closed(j));
  }
}

TEST_CASE("symmetric generators star-close to the full algebra at d = 3") {
  auto gens = symmetric_generators(3);
  OperatorSubspace a = close_star(3, gens);
  CHECK(a.dim() == 9);
}

TEST_CASE("majorana spin fixtures m = 1..6") {
  for (int m = 1; m <= 6; ++m) {
    auto gens = majorana_generators(m);
    REQUIRE(static_cast<int>(gens.size()) == m);
    for (size_t i = 0; i < gens.size(); ++i)
      for (size_t j = i + 1; j < gens.size(); ++j)
        CHECK((gens[i] * gens[j] + gens[j] * gens[i]).norm() < 1e-12);
    const int dim_h = static_cast<int>(gens.front().rows());
    OperatorSubspace j = close_jstar(dim_h, gens);
    CAPTURE(m);
    CHECK(j.dim() == m + 1);
  }
}

TEST_CASE("quaternionic fixture d=4 gives the symplectic factor") {
  auto gens = symplectic_generators(4);
  OperatorSubspace j = close_jstar(8, gens);
  CHECK(j.dim() == 28);  // d(2d-1) with d = 4
  FactorFingerprint fp = fingerprint(j);
  CHECK(fp.kind == FactorKind::Symplectic);
  CHECK(fp.j_dim == 28);
  CHECK(fp.a_dim == 64);
  REQUIRE(fp.block_sizes.size() == 1);
  CHECK(fp.block_sizes[0] == 8);
}

TEST_CASE("close_jstar subset of close_star") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = rng.uniform_int(2, 4);
    std::vector<Matrix> gens{rng.random_hermitian(d), rng.random_hermitian(d)};
    OperatorSubspace j = close_jstar(d, gens);
    OperatorSubspace a = close_star(d, gens);
    for (int i = 0; i < j.dim(); ++i) {
      double res = 0;
      CHECK(a.contains(j.basis_element(i), &res));
      CHECK(res <= 1e-8);
    }
  }
}

TEST_CASE("subspace invariants: gram and adjoint closure") {
  auto gens = symmetric_generators(4);
  OperatorSubspace j = close_jstar(4, gens);
  CHECK(j.gram_residual() < 1e-8);
  CHECK(j.adjoint_closure_residual() < 1e-8);
  CHECK(j.contains_identity());
}

TEST_CASE("tpce is an orthogonal projection and self-dual") {
  OperatorSubspace j = close_jstar(2, {pauli_x(), pauli_z()});
  SuperOperator e = tpce(j);
  CHECK((e.action() * e.action() - e.action()).norm() < 1e-10);
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    Matrix a = rng.ginibre(2, 2), b = rng.ginibre(2, 2);
    Complex lhs = (e.apply(a) * b).trace();
    Complex rhs = (a * e.apply(b)).trace();
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
  CHECK(e.apply(pauli_y()).norm() < 1e-10);
  for (int t = 0; t < 10; ++t) {
    Matrix g = rng.ginibre(2, 2);
    Matrix img = e.apply(g * g.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (img + img.adjoint().eval()));
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("tpce on the full algebra is the identity") {
  OperatorSubspace full = close_star(2, {pauli_x(), pauli_z()});
  SuperOperator e = tpce(full);
  CHECK((e.action() - Matrix::Identity(4, 4)).norm() < 1e-9);
}

TEST_CASE("tpce on the diagonal algebra is the pinching") {
  Matrix d1 = Matrix::Zero(2, 2);
  d1(0, 0) = 1;
  d1(1, 1) = 2;
  OperatorSubspace diag = close_star(2, {d1});
  SuperOperator e = tpce(diag);
  Rng rng(9);
  Matrix a = rng.ginibre(2, 2);
  Matrix pinched = e.apply(a);
  CHECK(std::abs(pinched(0, 0) - a(0, 0)) < 1e-10);
  CHECK(std::abs(pinched(0, 1)) < 1e-10);
}

TEST_CASE("tpce rejects non-closed subspaces") {
  Matrix nilp = Matrix::Zero(3, 3);
  nilp(0, 1) = 1;
  nilp(1, 2) = 1;
  Matrix h = nilp + nilp.adjoint().eval();
  OperatorSubspace s = OperatorSubspace::span_of(3, {identity(3), h});
  CHECK_THROWS_AS((void)tpce(s), NotJordanClosed);
}

TEST_CASE("factorization law for nested tpce") {
  OperatorSubspace j = close_jstar(2, {pauli_x(), pauli_z()});
  OperatorSubspace j0 = close_jstar(2, {pauli_z()});
  SuperOperator e = tpce(j), e0 = tpce(j0);
  CHECK((e0.action() * e.action() - e0.action()).norm() < 1e-10);
}

TEST_CASE("state_ce preserves its state and is KMS-hermitian") {
  OperatorSubspace j = close_jstar(2, {pauli_x(), pauli_z()});
  DensityMatrix sigma = bloch_state(0.5, 0.0, 0.0);
  SuperOperator f = state_ce(j, sigma);
  CHECK((f.action() * f.action() - f.action()).norm() < 1e-9);
  CHECK(f.unital());
  CHECK((f.dual().apply(sigma.mat()) - sigma.mat()).norm() < 1e-9);
  Rng rng(13);
  for (int t = 0; t < 8; ++t) {
    Matrix a = rng.ginibre(2, 2), b = rng.ginibre(2, 2);
    Complex lhs = kms_inner(f.apply(a), b, sigma);
    Complex rhs = kms_inner(a, f.apply(b), sigma);
    CHECK(std::abs(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("state_ce with maximally mixed state equals tpce") {
  OperatorSubspace j = close_jstar(2, {pauli_x(), pauli_z()});
  SuperOperator f = state_ce(j, maximally_mixed(2));
  SuperOperator e = tpce(j);
  CHECK((f.action() - e.action()).norm() < 1e-9);
}

TEST_CASE("center of factors and abelian algebras") {
  OperatorSubspace full = close_star(3, symmetric_generators(3));
  CHECK(center(full).dim() == 1);

  Matrix d1 = Matrix::Zero(3, 3);
  d1(0, 0) = 1;
  d1(1, 1) = 2;
  d1(2, 2) = 3;
  OperatorSubspace diag = close_star(3, {d1});
  CHECK(center(diag).dim() == 3);

  OperatorSubspace pauli_j = close_jstar(2, {pauli_x(), pauli_z()});
  CHECK(center(pauli_j).dim() == 1);
}

TEST_CASE("factor_decompose splits block sums") {
  Rng rng(21);
  Matrix a = Matrix::Zero(5, 5), b = Matrix::Zero(5, 5);
  a.block(0, 0, 2, 2) = rng.random_hermitian(2);
  a.block(2, 2, 3, 3) = rng.random_hermitian(3);
  b.block(0, 0, 2, 2) = rng.random_hermitian(2);
  b.block(2, 2, 3, 3) = rng.random_hermitian(3);
  OperatorSubspace alg = close_star(5, {a, b});
  CHECK(alg.dim() == 13);
  auto blocks = factor_decompose(alg);
  REQUIRE(blocks.size() == 2);
  std::vector<int> sizes{static_cast<int>(blocks[0].isometry.cols()),
                         static_cast<int>(blocks[1].isometry.cols())};
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes[0] == 2);
  CHECK(sizes[1] == 3);
  CHECK((blocks[0].projection + blocks[1].projection - identity(5)).norm() < 1e-8);

  auto single = factor_decompose(close_star(3, symmetric_generators(3)));
  CHECK(single.size() == 1);

  Matrix d1 = Matrix::Zero(3, 3);
  d1(0, 0) = 1;
  d1(1, 1) = 2;
  d1(2, 2) = 3;
  auto diag_blocks = factor_decompose(close_star(3, {d1}));
  CHECK(diag_blocks.size() == 3);
}

TEST_CASE("fingerprints of the classified families") {
  OperatorSubspace sym2 = close_jstar(2, {pauli_x(), pauli_z()});
  FactorFingerprint fp2 = fingerprint(sym2);
  CHECK(fp2.kind == FactorKind::Symmetric);
  CHECK(fp2.j_dim == 3);
  CHECK(fp2.a_dim == 4);
  REQUIRE(fp2.spin_alias.has_value());
  CHECK(*fp2.spin_alias == 2);

  FactorFingerprint fp_full = fingerprint(close_star(2, {pauli_x(), pauli_z()}));
  CHECK(fp_full.kind == FactorKind::FullMatrix);
  REQUIRE(fp_full.spin_alias.has_value());
  CHECK(*fp_full.spin_alias == 3);  // V3 ~ M_2

  FactorFingerprint fp_sym3 = fingerprint(close_jstar(3, symmetric_generators(3)));
  CHECK(fp_sym3.kind == FactorKind::Symmetric);
  CHECK_FALSE(fp_sym3.spin_alias.has_value());

  // Doubling {a (+) a^t : a in M_2}, spanned by the doubled Pauli images.
  std::vector<Matrix> doubled;
  for (const Matrix& p : {pauli_x(), pauli_y(), pauli_z()}) {
    Matrix d = Matrix::Zero(4, 4);
    d.block(0, 0, 2, 2) = p;
    d.block(2, 2, 2, 2) = p.transpose();
    doubled.push_back(d);
  }
  FactorFingerprint fp_dbl = fingerprint(close_jstar(4, doubled));
  CHECK(fp_dbl.kind == FactorKind::FullWithConjugateDoubling);
  CHECK(fp_dbl.j_dim == 4);
  CHECK(fp_dbl.a_dim == 8);
}

TEST_CASE("spin fingerprints: genuine spin at m=4,6, aliases at m=2,3,5") {
  auto fp_of = [&](int m) {
    auto gens = majorana_generators(m);
    const int dim_h = static_cast<int>(gens.front().rows());
    return fingerprint(close_jstar(dim_h, gens));
  };
  FactorFingerprint f2 = fp_of(2);
  CHECK(f2.kind == FactorKind::Symmetric);
  CHECK(f2.spin_alias.value_or(0) == 2);

  FactorFingerprint f3 = fp_of(3);
  CHECK(f3.kind == FactorKind::FullWithConjugateDoubling);
  CHECK(f3.spin_alias.value_or(0) == 3);

  FactorFingerprint f4 = fp_of(4);
  CHECK(f4.kind == FactorKind::Spin);
  CHECK(f4.j_dim == 5);

  FactorFingerprint f5 = fp_of(5);
  CHECK(f5.kind == FactorKind::Symplectic);
  CHECK(f5.spin_alias.value_or(0) == 5);

  FactorFingerprint f6 = fp_of(6);
  CHECK(f6.kind == FactorKind::Spin);
  CHECK(f6.j_dim == 7);
}

TEST_CASE("fingerprint rejects non-factors") {
  Matrix d1 = Matrix::Zero(2, 2);
  d1(0, 0) = 1;
  d1(1, 1) = 2;
  OperatorSubspace diag = close_star(2, {d1});
  CHECK_THROWS_AS((void)fingerprint(diag), NontrivialCenter);
}

TEST_CASE("random 2-generated factors avoid the irreversible spin family") {
  Rng rng(41);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = rng.uniform_int(2, 4);
    OperatorSubspace j = close_jstar(d, {rng.random_hermitian(d), rng.random_hermitian(d)});
    for (const FactorBlock& blk : factor_decompose(j)) {
      FactorFingerprint fp = fingerprint(blk.algebra);
      if (fp.kind == FactorKind::Spin) {
        const int m = fp.j_dim - 1;
        CHECK(m != 4);
        CHECK(m < 6);
      }
    }
  }
}

TEST_CASE("dichotomy algebras are reversible (probe)") {
  Rng rng(43);
  Matrix g1 = rng.random_hermitian(3), g2 = rng.random_hermitian(3);
  OperatorSubspace j = close_jstar(3, {g1, g2});
  CHECK(reversible_probe(j));
}

}  // TEST_SUITE
