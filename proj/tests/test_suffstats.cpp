#include <doctest.h>

#include <set>

#include "qsuff/suffstats.hpp"
#include "qsuff/rng.hpp"
#include "test_helpers.hpp"

using namespace qsuff;
using namespace qsuff::testing;

namespace {

StatisticalExperiment random_experiment(Rng& rng, int dim, int nstates) {
  std::vector<std::pair<std::string, DensityMatrix>> states;
  for (int i = 0; i < nstates; ++i)
    states.emplace_back("s" + std::to_string(i), rng.wishart_state(dim));
  return StatisticalExperiment(dim, std::move(states));
}

}  // namespace

TEST_SUITE("suffstats") {

TEST_CASE("restrict_to_support") {
  Rng rng(1);
  StatisticalExperiment e = random_experiment(rng, 3, 2);
  RestrictedExperiment r = restrict_to_support(e);
  CHECK(r.experiment.dim() == 3);

  Matrix p0 = Matrix::Zero(3, 3);
  p0(0, 0) = 1;
  StatisticalExperiment e1(3, {{"a", DensityMatrix(p0)}, {"b", DensityMatrix(p0)}});
  RestrictedExperiment r1 = restrict_to_support(e1);
  CHECK(r1.experiment.dim() == 1);

  Matrix mix = Matrix::Zero(3, 3);
  mix(0, 0) = 0.5;
  mix(1, 1) = 0.5;
  StatisticalExperiment e2(3, {{"a", DensityMatrix(p0)}, {"b", DensityMatrix(mix)}});
  RestrictedExperiment r2 = restrict_to_support(e2);
  CHECK(r2.experiment.dim() == 2);
  for (const auto& [label, st] : e2.states()) {
    Matrix rec = r2.isometry * r2.experiment.state(label).mat() * r2.isometry.adjoint();
    CHECK((rec - st.mat()).norm() < 1e-9);
  }
}

TEST_CASE("np_projector examples") {
  DensityMatrix tau = maximally_mixed(2);
  DensityMatrix d75 = diag_state({0.75, 0.25});

  CHECK(np_projector(d75, d75, 2.0).mat().norm() < 1e-12);
  Matrix e00 = Matrix::Zero(2, 2);
  e00(0, 0) = 1;
  CHECK((np_projector(d75, tau, 1.0).mat() - e00).norm() < 1e-10);
  CHECK((np_projector(d75, d75, 0.5).mat() - identity(2)).norm() < 1e-10);
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    DensityMatrix rho = rng.wishart_state(3), sigma = rng.wishart_state(3);
    const double tt = 0.25 * (t + 1);
    Matrix diff = rho.mat() - tt * sigma.mat();
    Matrix p = np_projector(rho, sigma, tt).mat();
    CHECK((diff * p).trace().real() ==
          doctest::Approx(positive_part(diff).trace().real()).epsilon(1e-9));
  }
}

TEST_CASE("np_breakpoints examples and piecewise rank constancy") {
  DensityMatrix tau = maximally_mixed(2);
  DensityMatrix d75 = diag_state({0.75, 0.25});

  auto same = np_breakpoints(d75, d75);
  REQUIRE(same.size() == 1);
  CHECK(same[0] == doctest::Approx(1.0));

  auto bps = np_breakpoints(d75, tau);
  REQUIRE(bps.size() == 2);
  CHECK(bps[0] == doctest::Approx(0.5));
  CHECK(bps[1] == doctest::Approx(1.5));

  CHECK_THROWS_AS((void)np_breakpoints(d75, bloch_state(0, 0, 1)), SingularState);

  // Rank is constant inside pieces; the projector itself rotates for
  // non-commuting pairs but is literally constant in the commuting case.
  Rng rng(5);
  DensityMatrix rho = rng.wishart_state(3), sigma = rng.wishart_state(3);
  auto b3 = np_breakpoints(rho, sigma);
  std::vector<double> cuts{0.0};
  for (double b : b3) cuts.push_back(b);
  cuts.push_back(2.0 * b3.back());
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    std::set<int> ranks;
    for (double f : {0.2, 0.5, 0.8})
      ranks.insert(static_cast<int>(
          std::lround(np_projector(rho, sigma, lo + f * (hi - lo)).mat().trace().real())));
    CHECK(ranks.size() == 1);
  }
  DensityMatrix p1 = diag_state({0.6, 0.3, 0.1});
  DensityMatrix p2 = diag_state({0.2, 0.3, 0.5});
  auto bc = np_breakpoints(p1, p2);
  for (size_t i = 0; i + 1 < bc.size(); ++i) {
    Matrix pa = np_projector(p1, p2, bc[i] * std::pow(bc[i + 1] / bc[i], 0.3)).mat();
    Matrix pb = np_projector(p1, p2, bc[i] * std::pow(bc[i + 1] / bc[i], 0.7)).mat();
    CHECK((pa - pb).norm() < 1e-10);
  }
}

TEST_CASE("d_operator basics") {
  DensityMatrix tau = maximally_mixed(2);
  DensityMatrix d75 = diag_state({0.75, 0.25});
  CHECK((d_operator(d75, d75).mat() - identity(2)).norm() < 1e-10);
  Matrix d = d_operator(d75, tau).mat();
  CHECK(d(0, 0).real() == doctest::Approx(1.5));
  CHECK(d(1, 1).real() == doctest::Approx(0.5));
  Rng rng(7);
  DensityMatrix rho = rng.wishart_state(3), sigma = rng.wishart_state(3);
  Matrix dd = d_operator(rho, sigma).mat();
  CHECK((sigma.mat() * dd).trace().real() == doctest::Approx(1.0).epsilon(1e-9));
  Eigen::SelfAdjointEigenSolver<Matrix> es(dd);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("success probability") {
  Rng rng(9);
  DensityMatrix rho = rng.wishart_state(2);
  CHECK(success_probability(rho, rho, 0.3) == doctest::Approx(0.7));
  CHECK(success_probability(rho, rho, 0.8) == doctest::Approx(0.8));

  DensityMatrix up = bloch_state(0, 0, 1), down = bloch_state(0, 0, -1);
  CHECK(success_probability(up, down, 0.5) == doctest::Approx(1.0));

  DensityMatrix d75 = diag_state({0.75, 0.25});
  CHECK(success_probability(d75, maximally_mixed(2), 0.5) == doctest::Approx(0.625));

  for (int t = 0; t < 10; ++t) {
    DensityMatrix a = rng.wishart_state(3), b = rng.wishart_state(3);
    const double p = 0.1 + 0.8 * rng.uniform();
    const double s = success_probability(a, b, p);
    CHECK(s >= std::max(p, 1 - p) - 1e-10);
    CHECK(s <= 1.0 + 1e-10);
  }
}

TEST_CASE("bayes_k examples") {
  DensityMatrix tau = maximally_mixed(2);
  CHECK(bayes_k(tau, tau).dim() == 1);

  DensityMatrix p1 = diag_state({0.6, 0.3, 0.1});
  DensityMatrix p2 = diag_state({0.2, 0.3, 0.5});
  OperatorSubspace k = bayes_k(p1, p2);
  CHECK(k.dim() == 3);

  DensityMatrix rho = bloch_state(0.6, 0, 0.1);
  DensityMatrix sigma = bloch_state(0.0, 0, 0.7);
  OperatorSubspace k2 = bayes_k(rho, sigma);
  CHECK(k2.dim() == 3);
  CHECK(k2.contains(pauli_x()));
  CHECK(k2.contains(pauli_z()));
  CHECK_FALSE(k2.contains(pauli_y()));
}

TEST_CASE("minimal_jstar pauli anchor") {
  DensityMatrix rho = bloch_state(1, 0, 0);
  DensityMatrix sigma = bloch_state(0, 0, 1);
  StatisticalExperiment e(2, {{"rho", rho}, {"sigma", sigma}});
  SufficiencyAnalysis an = minimal_jstar(e);
  CHECK(an.J.dim() == 3);
  CHECK(an.A.dim() == 4);
  double res = 0;
  CHECK(an.J.contains(identity(2), &res));
  CHECK(res <= 1e-8);
  CHECK(an.J.contains(pauli_x(), &res));
  CHECK(res <= 1e-8);
  CHECK(an.J.contains(pauli_z(), &res));
  CHECK(res <= 1e-8);
  CHECK_FALSE(an.J.contains(pauli_y()));
  REQUIRE(an.fingerprints.size() == 1);
  CHECK(an.fingerprints[0].kind == FactorKind::Symmetric);
}

TEST_CASE("minimal_jstar identical states collapse") {
  Rng rng(11);
  DensityMatrix rho = rng.wishart_state(3);
  StatisticalExperiment e(3, {{"a", rho}, {"b", rho}});
  SufficiencyAnalysis an = minimal_jstar(e);
  CHECK(an.J.dim() == 1);
  CHECK(an.A.dim() == 1);
}

TEST_CASE("minimal_jstar classical experiment matches likelihood level sets") {
  DensityMatrix p1 = diag_state({0.6, 0.3, 0.1});
  DensityMatrix p2 = diag_state({0.2, 0.3, 0.5});
  StatisticalExperiment e(3, {{"a", p1}, {"b", p2}});
  SufficiencyAnalysis an = minimal_jstar(e);
  CHECK(an.J.dim() == 3);
  CHECK(an.A.dim() == 3);

  DensityMatrix q1 = diag_state({0.4, 0.4, 0.2});
  DensityMatrix q2 = diag_state({0.25, 0.25, 0.5});
  StatisticalExperiment e2(3, {{"a", q1}, {"b", q2}});
  SufficiencyAnalysis an2 = minimal_jstar(e2);
  CHECK(an2.J.dim() == 2);
  CHECK(an2.A.dim() == 2);
}

TEST_CASE("minimal_jstar generic qutrit pair is full") {
  Rng rng(13);
  DensityMatrix rho = rng.wishart_state(3), sigma = rng.wishart_state(3);
  StatisticalExperiment e(3, {{"rho", rho}, {"sigma", sigma}});
  SufficiencyAnalysis an = minimal_jstar(e);
  CHECK(an.J.dim() == 9);
  CHECK(an.A.dim() == 9);
}

TEST_CASE("minimal_jstar invariants on random experiments") {
  Rng rng(15);
  for (int trial = 0; trial < 6; ++trial) {
    const int dim = rng.uniform_int(2, 4);
    const int ns = rng.uniform_int(2, 3);
    StatisticalExperiment e = random_experiment(rng, dim, ns);
    SufficiencyAnalysis an = minimal_jstar(e);
    DensityMatrix omega = e.average();

    CHECK(an.K.dim() <= an.J.dim());
    CHECK(an.J.dim() <= an.A.dim());
    for (int i = 0; i < an.K.dim(); ++i) CHECK(an.J.contains(an.K.basis_element(i)));
    for (int i = 0; i < an.J.dim(); ++i) CHECK(an.A.contains(an.J.basis_element(i)));

    SuperOperator f = state_ce(an.J, omega);
    SuperOperator fd = f.dual();
    for (const auto& [label, st] : e.states())
      CHECK((fd.apply(st.mat()) - st.mat()).norm() < 1e-8);

    std::vector<Matrix> hats;
    for (const auto& [label, st] : an.hat_states) {
      CHECK(an.J.contains(st.mat()));
      hats.push_back(st.mat());
    }
    hats.push_back(an.reduce.apply(omega.mat()));
    OperatorSubspace regen = close_jstar(dim, hats);
    CHECK(regen.dim() == an.J.dim());

    OperatorSubspace astar = close_star(dim, an.J.basis_elements());
    CHECK(astar.dim() == an.A.dim());

    for (const auto& [label, st] : e.states()) {
      Matrix dd = d_operator(st, omega).mat();
      CHECK(an.J.contains(dd));
      Matrix hat_omega = an.reduce.apply(omega.mat());
      Matrix hat_rho = an.reduce.apply(st.mat());
      Matrix dd_hat = d_operator(DensityMatrix(hat_rho), DensityMatrix(hat_omega)).mat();
      CHECK((dd - dd_hat).norm() < 1e-8);
    }
  }
}

TEST_CASE("np tests are preserved by the reduction") {
  Rng rng(17);
  DensityMatrix rho = rng.wishart_state(3), sigma = rng.wishart_state(3);
  StatisticalExperiment e(3, {{"rho", rho}, {"sigma", sigma}});
  SufficiencyAnalysis an = minimal_jstar(e);
  DensityMatrix omega = e.average();
  DensityMatrix hat_rho(an.reduce.apply(rho.mat()));
  DensityMatrix hat_omega(an.reduce.apply(omega.mat()));
  auto bps = np_breakpoints(rho, omega);
  std::vector<double> cuts{0.5 * bps.front()};
  for (size_t i = 0; i + 1 < bps.size(); ++i) cuts.push_back(std::sqrt(bps[i] * bps[i + 1]));
  for (double t : cuts) {
    Matrix lhs = np_projector(hat_rho, hat_omega, t).mat();
    Matrix rhs = np_projector(rho, omega, t).mat();
    CHECK((lhs - rhs).norm() < 1e-8);
  }
  for (double t : {0.3, 0.8, 1.0, 1.7, 4.0}) {
    Matrix diff = rho.mat() - t * omega.mat();
    Matrix diff_hat = hat_rho.mat() - t * hat_omega.mat();
    CHECK(positive_part(diff).trace().real() ==
          doctest::Approx(positive_part(diff_hat).trace().real()).epsilon(1e-9));
  }
}

TEST_CASE("transpose doubling preserves the fingerprint") {
  Rng rng(19);
  for (int trial = 0; trial < 3; ++trial) {
    const int d = 3;
    DensityMatrix rho = rng.wishart_state(d), sigma = rng.wishart_state(d);
    StatisticalExperiment base(d, {{"r", rho}, {"s", sigma}});
    SufficiencyAnalysis an = minimal_jstar(base);

    const double lam = 0.3 + 0.4 * rng.uniform();
    auto doubled = [&](const DensityMatrix& x) {
      Matrix m = Matrix::Zero(2 * d, 2 * d);
      m.block(0, 0, d, d) = lam * x.mat();
      m.block(d, d, d, d) = (1 - lam) * x.mat().transpose();
      return DensityMatrix(std::move(m));
    };
    StatisticalExperiment dbl(2 * d, {{"r", doubled(rho)}, {"s", doubled(sigma)}});
    SufficiencyAnalysis an2 = minimal_jstar(dbl);
    CHECK(an2.J.dim() == an.J.dim());
    REQUIRE(an.fingerprints.size() == 1);
    REQUIRE(an2.fingerprints.size() == 1);
    CHECK(an.fingerprints[0].j_dim == an2.fingerprints[0].j_dim);
  }
}

TEST_CASE("symmetry_report") {
  SymmetryReport rep = symmetry_report(bloch_state(1, 0, 0), bloch_state(0, 0, 1));
  CHECK(rep.full_star);
  CHECK_FALSE(rep.full_jstar);
  CHECK(rep.real_basis_obstruction);
  CHECK_FALSE(rep.symplectic_obstruction);

  Rng rng(21);
  SymmetryReport rep2 = symmetry_report(rng.wishart_state(3), rng.wishart_state(3));
  CHECK(rep2.full_star);
  CHECK(rep2.full_jstar);

  SymmetryReport rep3 = symmetry_report(diag_state({0.6, 0.4}), diag_state({0.3, 0.7}));
  CHECK_FALSE(rep3.full_star);
  CHECK_FALSE(rep3.full_jstar);
}

TEST_CASE("minimal_jstar requires faithfulness") {
  Matrix p0 = Matrix::Zero(3, 3);
  p0(0, 0) = 1;
  StatisticalExperiment e(3, {{"a", DensityMatrix(p0)}, {"b", DensityMatrix(p0)}});
  CHECK_THROWS_AS((void)minimal_jstar(e), NotFaithful);
}

}  // TEST_SUITE
