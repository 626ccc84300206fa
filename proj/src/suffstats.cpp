#include "qsuff/suffstats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qsuff {

namespace {

// Log-spaced interior points of a piece, dyadic refinement per level:
// level 0 is the midpoint, level L adds the odd multiples of 2^-(L+1).
std::vector<double> piece_fractions(int level) {
  std::vector<double> fr;
  if (level == 0) {
    fr.push_back(0.5);
    return fr;
  }
  const int den = 1 << (level + 1);
  for (int k = 1; k < den; k += 2) fr.push_back(static_cast<double>(k) / den);
  return fr;
}

// Sample points for the NP projector family of one pencil at a refinement
// level. Pieces are (0, t_1), (t_i, t_{i+1}) geometric, and one point past
// t_max where the projector is fixed by ker(sigma).
std::vector<double> pencil_samples(const std::vector<double>& bps, int level) {
  std::vector<double> ts;
  if (bps.empty()) return {1.0};
  for (double f : piece_fractions(level)) {
    ts.push_back(bps.front() * f);
    for (size_t i = 0; i + 1 < bps.size(); ++i)
      ts.push_back(bps[i] * std::pow(bps[i + 1] / bps[i], f));
  }
  if (level == 0) ts.push_back(2.0 * bps.back());
  return ts;
}

}  // namespace

StatisticalExperiment::StatisticalExperiment(
    int dim, std::vector<std::pair<std::string, DensityMatrix>> states)
    : dim_(dim), states_(std::move(states)) {
  if (states_.empty()) throw DimensionMismatch("experiment needs at least one state");
  std::set<std::string> seen;
  for (const auto& [label, st] : states_) {
    if (st.dim() != dim_) throw DimensionMismatch("state dimension for label " + label);
    if (!seen.insert(label).second) throw ParseError("duplicate label " + label);
  }
}

const DensityMatrix& StatisticalExperiment::state(const std::string& label) const {
  for (const auto& [l, st] : states_)
    if (l == label) return st;
  throw LabelMismatch("no state labeled " + label);
}

std::vector<std::string> StatisticalExperiment::labels() const {
  std::vector<std::string> out;
  for (const auto& [l, st] : states_) out.push_back(l);
  return out;
}

DensityMatrix StatisticalExperiment::average() const {
  Matrix avg = Matrix::Zero(dim_, dim_);
  for (const auto& [l, st] : states_) avg += st.mat();
  avg /= static_cast<double>(states_.size());
  return DensityMatrix(std::move(avg));
}

bool StatisticalExperiment::faithful(const NumericPolicy& pol) const {
  return is_faithful(average(), pol);
}

RestrictedExperiment restrict_to_support(const StatisticalExperiment& e,
                                         const NumericPolicy& pol) {
  DensityMatrix avg = e.average();
  EigSystem es = hermitian_eig(avg.base(), pol);
  const double lmax = es.eigenvalues.maxCoeff();
  const double cut = pol.tau_rank * std::max(lmax, 0.0);
  std::vector<int> keep;
  for (int i = 0; i < es.eigenvalues.size(); ++i)
    if (es.eigenvalues(i) > cut) keep.push_back(i);
  const int r = static_cast<int>(keep.size());
  Matrix v(e.dim(), r);
  for (int i = 0; i < r; ++i) v.col(i) = es.eigenvectors.col(keep[i]);
  std::vector<std::pair<std::string, DensityMatrix>> states;
  for (const auto& [l, st] : e.states()) {
    Matrix m = v.adjoint() * st.mat() * v;
    m /= m.trace().real();  // restriction preserves trace up to the rank cut
    states.emplace_back(l, DensityMatrix(std::move(m), pol));
  }
  return RestrictedExperiment{StatisticalExperiment(r, std::move(states)), std::move(v)};
}

HermitianMatrix np_projector(const DensityMatrix& rho, const DensityMatrix& sigma, double t,
                             const NumericPolicy& pol) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("np_projector pair");
  if (t < 0) throw DomainError("np_projector needs t >= 0");
  Matrix diff = rho.mat() - t * sigma.mat();
  EigSystem es = hermitian_eig(diff, pol);
  const double scale = es.eigenvalues.cwiseAbs().maxCoeff();
  // Keep the cut above the eigensolver noise floor of the inputs so that a
  // (near-)vanishing pencil yields the zero projection.
  const double floor = 1e-13 * (rho.mat().norm() + t * sigma.mat().norm());
  const double cut = std::max(pol.tau_rank * scale, floor);
  Matrix p = Matrix::Zero(rho.dim(), rho.dim());
  for (int i = 0; i < es.eigenvalues.size(); ++i)
    if (es.eigenvalues(i) > cut) p += es.eigenvectors.col(i) * es.eigenvectors.col(i).adjoint();
  return HermitianMatrix(std::move(p), pol);
}

std::vector<double> np_breakpoints(const DensityMatrix& rho, const DensityMatrix& sigma,
                                   const NumericPolicy& pol) {
  HermitianMatrix d = d_operator(rho, sigma, pol);
  EigSystem es = hermitian_eig(d, pol);
  const double lmax = std::max(es.eigenvalues.maxCoeff(), 0.0);
  const double cut = pol.tau_rank * std::max(lmax, 1e-300);
  std::vector<double> bps;
  for (int i = 0; i < es.eigenvalues.size(); ++i) {
    const double x = es.eigenvalues(i);
    if (x <= cut) continue;
    if (!bps.empty() && x - bps.back() <= pol.tau_breakpoint_merge * std::max(1.0, lmax)) {
      bps.back() = 0.5 * (bps.back() + x);  // merge near-degenerate pencil roots
    } else {
      bps.push_back(x);
    }
  }
  return bps;
}

OperatorSubspace bayes_k(const DensityMatrix& rho, const DensityMatrix& sigma,
                         const NumericPolicy& pol) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("bayes_k pair");
  if (!is_faithful(sigma, pol)) throw NotFaithful("bayes_k requires faithful sigma");
  std::vector<double> bps = np_breakpoints(rho, sigma, pol);
  OperatorSubspace k = OperatorSubspace::span_of(
      rho.dim(), {Matrix::Identity(rho.dim(), rho.dim())}, pol);
  int stable_rounds = 0;
  for (int level = 0; level <= pol.max_refine_levels && stable_rounds < 2; ++level) {
    std::vector<Matrix> ps;
    for (double t : pencil_samples(bps, level)) ps.push_back(np_projector(rho, sigma, t, pol).mat());
    stable_rounds = k.extend(ps, pol) == 0 ? stable_rounds + 1 : 0;
  }
  return k;
}

HermitianMatrix d_operator(const DensityMatrix& rho, const DensityMatrix& sigma,
                           const NumericPolicy& pol) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("d_operator pair");
  if (!is_faithful(sigma, pol)) throw SingularState("d_operator requires faithful sigma");
  Matrix si = matrix_pow(sigma.mat(), -0.5, pol);
  return HermitianMatrix(si * rho.mat() * si, pol);
}

double success_probability(const DensityMatrix& rho, const DensityMatrix& sigma, double p,
                           const NumericPolicy& pol) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("success_probability pair");
  if (p <= 0.0 || p >= 1.0) throw DomainError("prior must lie in (0,1)");
  const double t = (1.0 - p) / p;
  Matrix diff = rho.mat() - t * sigma.mat();
  return (1.0 - p) + p * positive_part(diff, pol).trace().real();
}

SufficiencyAnalysis minimal_jstar(const StatisticalExperiment& e, const NumericPolicy& pol) {
  if (!e.faithful(pol)) throw NotFaithful("minimal_jstar requires a faithful experiment");
  const int d = e.dim();
  DensityMatrix omega = e.average();

  std::map<std::string, std::vector<double>> bps;
  for (const auto& [label, st] : e.states()) bps[label] = np_breakpoints(st, omega, pol);

  OperatorSubspace k =
      OperatorSubspace::span_of(d, {Matrix::Identity(d, d)}, pol);
  std::vector<Matrix> projectors;  // accumulated over levels

  // Refine until K and J stop growing and the state-preserving conditional
  // expectation actually preserves every state (the operational test of
  // sufficiency; midpoint-only sampling can undercount because the test
  // projector rotates inside the pieces).
  OperatorSubspace j = k;
  int prev_k = -1, prev_j = -1;
  bool converged = false;
  for (int level = 0; level <= pol.max_refine_levels; ++level) {
    std::vector<Matrix> fresh;
    for (const auto& [label, st] : e.states())
      for (double t : pencil_samples(bps[label], level))
        fresh.push_back(np_projector(st, omega, t, pol).mat());
    projectors.insert(projectors.end(), fresh.begin(), fresh.end());
    k.extend(fresh, pol);
    j = close_jstar(d, projectors, pol);
    const bool dims_stable = (k.dim() == prev_k && j.dim() == prev_j);
    prev_k = k.dim();
    prev_j = j.dim();
    if (!dims_stable || level == 0) continue;
    SuperOperator f = state_ce(j, omega, pol);
    SuperOperator f_dual = f.dual();
    double worst = 0.0;
    for (const auto& [label, st] : e.states())
      worst = std::max(worst, (f_dual.apply(st.mat()) - st.mat()).norm());
    if (worst <= pol.tol_check) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericalDegeneracy("minimal_jstar sampling did not converge");

  SufficiencyAnalysis out{
      std::move(k), j, close_star(d, projectors, pol), {}, std::move(bps), {}, tpce(j, pol)};
  for (const auto& [label, st] : e.states()) {
    Matrix hat = out.reduce.apply(st.mat());
    out.hat_states.emplace_back(label, DensityMatrix(std::move(hat), pol));
  }
  for (const FactorBlock& blk : factor_decompose(out.J, pol))
    out.fingerprints.push_back(fingerprint(blk.algebra, pol));
  return out;
}

SymmetryReport symmetry_report(const DensityMatrix& rho, const DensityMatrix& sigma,
                               const NumericPolicy& pol) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("symmetry_report pair");
  StatisticalExperiment e(rho.dim(), {{"rho", rho}, {"sigma", sigma}});
  if (!e.faithful(pol)) throw NotFaithful("symmetry_report requires a faithful dichotomy");
  SufficiencyAnalysis an = minimal_jstar(e, pol);
  const int d2 = rho.dim() * rho.dim();
  SymmetryReport rep;
  rep.full_star = an.A.dim() == d2;
  rep.full_jstar = an.J.dim() == d2;
  if (rep.full_star && !rep.full_jstar && an.fingerprints.size() == 1) {
    const FactorKind kind = an.fingerprints.front().kind;
    rep.real_basis_obstruction = kind == FactorKind::Symmetric;
    rep.symplectic_obstruction = kind == FactorKind::Symplectic;
  }
  return rep;
}

}  // namespace qsuff
