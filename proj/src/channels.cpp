#include "qsuff/channels.hpp"

#include <cmath>

namespace qsuff {

SuperOperator petz_recovery(const SuperOperator& t, const DensityMatrix& sigma,
                            const NumericPolicy& pol) {
  if (sigma.dim() != t.out_dim()) throw DimensionMismatch("petz_recovery state dimension");
  if (!t.unital(pol.tau_herm * 10)) throw DomainError("petz_recovery requires a unital map");
  if (!is_faithful(sigma, pol)) throw SingularState("petz_recovery requires faithful sigma");
  SuperOperator t_dual = t.dual();
  Matrix sigma_hat = t_dual.apply(sigma.mat());
  DensityMatrix sh(0.5 * (sigma_hat + sigma_hat.adjoint().eval()), pol);
  if (!is_faithful(sh, pol)) throw SingularState("petz_recovery: T*(sigma) not faithful");
  Matrix sq = matrix_sqrt(sigma.mat(), pol);
  Matrix hat_inv_sq = matrix_pow(sh.mat(), -0.5, pol);
  SuperOperator r = sandwich_map(hat_inv_sq).compose(t_dual).compose(sandwich_map(sq));
  PositivityEvidence ev = PositivityEvidence::None;
  switch (t.evidence()) {
    case PositivityEvidence::ExactCP: ev = PositivityEvidence::ExactCP; break;
    case PositivityEvidence::ExactCoCP: ev = PositivityEvidence::ExactCoCP; break;
    case PositivityEvidence::DecomposableByConstruction:
      ev = PositivityEvidence::DecomposableByConstruction;
      break;
    default: break;
  }
  return SuperOperator(t.out_dim(), t.in_dim(), r.action(), ev, t.probe_trials());
}

OperatorSubspace fixed_point_algebra(const SuperOperator& t, const DensityMatrix& sigma,
                                     const NumericPolicy& pol) {
  if (t.in_dim() != t.out_dim()) throw DimensionMismatch("fixed_point_algebra endomorphism");
  if (!t.unital(pol.tau_herm * 10)) throw DomainError("fixed_point_algebra: map not unital");
  if ((t.dual().apply(sigma.mat()) - sigma.mat()).norm() > pol.tol_check)
    throw NotInvariant("fixed_point_algebra: sigma not invariant");
  if (!is_faithful(sigma, pol)) throw NotInvariant("fixed_point_algebra: sigma not faithful");
  const int d = t.in_dim();
  Matrix m = t.action() - Matrix::Identity(d * d, d * d);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  std::vector<Matrix> fixed;
  for (int i = 0; i < svd.matrixV().cols(); ++i) {
    const double sv = i < svd.singularValues().size() ? svd.singularValues()(i) : 0.0;
    if (sv <= pol.tau_member * std::max(1.0, smax)) {
      Matrix z = unvec_rm(CVector(svd.matrixV().col(i)), d, d);
      fixed.push_back(z);
      fixed.push_back(z.adjoint());
    }
  }
  OperatorSubspace fix = OperatorSubspace::span_of(d, fixed, pol);
  if (!is_jordan_closed(fix, pol))
    throw NumericalDegeneracy("fixed-point space failed the Jordan saturation check");
  return fix;
}

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Sufficient: return "sufficient";
    case VerdictStatus::NotSufficient: return "not_sufficient";
    case VerdictStatus::Inconsistent: return "inconsistent";
  }
  return "inconsistent";
}

SufficiencyVerdict sufficiency_check(const SuperOperator& t, const DensityMatrix& rho,
                                     const DensityMatrix& sigma, const NumericPolicy& pol) {
  if (rho.dim() != t.out_dim() || sigma.dim() != t.out_dim())
    throw DimensionMismatch("sufficiency_check states live on the output side of T");
  if (!t.positivity_evidenced())
    throw DomainError("sufficiency_check needs positivity evidence on T");

  DensityMatrix sigma_eff = sigma;
  if (!is_faithful(sigma, pol)) {
    Matrix avg = 0.5 * (rho.mat() + sigma.mat());
    DensityMatrix mixed(std::move(avg), pol);
    if (!is_faithful(mixed, pol))
      throw SingularState("sufficiency_check: dichotomy not faithful, restrict support first");
    sigma_eff = mixed;  // deciding against (rho+sigma)/2 is equivalent
  }

  SuperOperator t_dual = t.dual();
  Matrix rho_hat_m = t_dual.apply(rho.mat());
  Matrix sigma_hat_m = t_dual.apply(sigma_eff.mat());
  DensityMatrix rho_hat(0.5 * (rho_hat_m + rho_hat_m.adjoint().eval()), pol);
  DensityMatrix sigma_hat(0.5 * (sigma_hat_m + sigma_hat_m.adjoint().eval()), pol);
  if (!is_faithful(sigma_hat, pol))
    throw SingularState("sufficiency_check: T*(sigma) not faithful");

  SufficiencyVerdict v;
  Matrix d_down = d_operator(rho, sigma_eff, pol).mat();
  Matrix d_up = d_operator(rho_hat, sigma_hat, pol).mat();
  const double d_scale = std::max(1.0, d_down.norm());

  // (b) transport of the likelihood-ratio operator.
  v.residual_d_transport = (t.apply(d_up) - d_down).norm() / d_scale;

  // (c) Petz recovery of rho.
  SuperOperator r = petz_recovery(t, sigma_eff, pol);
  v.residual_petz = (r.dual().apply(rho_hat.mat()) - rho.mat()).norm();

  // Fixed-point membership of d in Fix(T o R).
  SuperOperator w = t.compose(r);
  v.residual_fixed_point = (w.apply(d_down) - d_down).norm() / d_scale;

  // (e) T restricts to an isomorphism between the minimal sufficient
  // J*-algebras.
  StatisticalExperiment down(rho.dim(), {{"rho", rho}, {"sigma", sigma_eff}});
  StatisticalExperiment up(rho_hat.dim(), {{"rho", rho_hat}, {"sigma", sigma_hat}});
  SufficiencyAnalysis an_down = minimal_jstar(down, pol);
  SufficiencyAnalysis an_up = minimal_jstar(up, pol);
  if (an_down.J.dim() != an_up.J.dim()) {
    v.residual_iso = 1.0;
  } else {
    double worst = 0.0;
    std::vector<Matrix> images;
    for (const Matrix& b : an_up.J.basis_elements()) images.push_back(t.apply(b));
    OperatorSubspace image_span = OperatorSubspace::span_of(rho.dim(), images, pol);
    for (const Matrix& img : images) {
      double res = 0.0;
      an_down.J.contains(img, &res, pol);
      worst = std::max(worst, res);
    }
    // Onto: the image must have full dimension inside J.
    if (image_span.dim() != an_down.J.dim()) worst = std::max(worst, 1.0);
    v.residual_iso = worst;
  }

  const auto classify = [&](double res) {
    if (res <= pol.tol_eq) return 1;
    if (res >= pol.tol_gap) return 0;
    return -1;  // inside the inconclusive band
  };
  const int c1 = classify(v.residual_fixed_point);
  const int c2 = classify(v.residual_d_transport);
  const int c3 = classify(v.residual_petz);
  const int c4 = classify(v.residual_iso);
  v.recovery_map_exists = c1 == 1;
  v.d_transported = c2 == 1;
  v.petz_recovers = c3 == 1;
  v.restricts_to_iso = c4 == 1;
  if (c1 == 1 && c2 == 1 && c3 == 1 && c4 == 1) {
    v.status = VerdictStatus::Sufficient;
    v.certificate = r;
  } else if (c1 == 0 && c2 == 0 && c3 == 0 && c4 == 0) {
    v.status = VerdictStatus::NotSufficient;
  } else {
    v.status = VerdictStatus::Inconsistent;
  }
  return v;
}

}  // namespace qsuff
