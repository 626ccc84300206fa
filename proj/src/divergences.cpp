#include "qsuff/divergences.hpp"

#include <algorithm>
#include <cmath>

namespace qsuff {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    r.nodes[n - 1 - i] = x;
    r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

const GaussRule& rule_for(int n) {
  static const GaussRule g16 = gauss_legendre(16);
  static const GaussRule g32 = gauss_legendre(32);
  static const GaussRule g64 = gauss_legendre(64);
  if (n <= 16) return g16;
  if (n <= 32) return g32;
  return g64;
}

double gauss_on(const std::function<double(double)>& f, double a, double b, const GaussRule& g) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (size_t i = 0; i < g.nodes.size(); ++i) sum += g.weights[i] * f(mid + half * g.nodes[i]);
  return sum * half;
}

// Adaptive bisection keyed on agreement between the half-order and
// full-order rules; integrands here are analytic inside each piece, so this
// converges fast and only the endpoint singularities of f' force depth.
double adaptive_gauss(const std::function<double(double)>& f, double a, double b,
                      const QuadratureConfig& quad, int depth) {
  const GaussRule& big = rule_for(quad.points_per_piece);
  const GaussRule& small = rule_for(quad.points_per_piece / 2);
  const double coarse = gauss_on(f, a, b, small);
  const double fine = gauss_on(f, a, b, big);
  if (std::abs(fine - coarse) <= quad.tol_abs + quad.tol_rel * std::abs(fine) ||
      depth >= quad.max_depth)
    return fine;
  const double mid = 0.5 * (a + b);
  return adaptive_gauss(f, a, mid, quad, depth + 1) +
         adaptive_gauss(f, mid, b, quad, depth + 1);
}

// Integrates f over [lo, hi] split at the interior breakpoints.
double integrate_pieces(const std::function<double(double)>& f, double lo, double hi,
                        const std::vector<double>& breakpoints, const QuadratureConfig& quad) {
  std::vector<double> cuts{lo};
  for (double b : breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += adaptive_gauss(f, cuts[i], cuts[i + 1], quad, 0);
  return total;
}

bool support_dominated(const DensityMatrix& rho, const DensityMatrix& sigma,
                       const NumericPolicy& pol) {
  // supp rho <= supp sigma  iff  rho puts no mass on ker sigma.
  Matrix p = support_projector(sigma.base(), pol).mat();
  const int d = sigma.dim();
  Matrix q = Matrix::Identity(d, d) - p;
  return (q * rho.mat() * q).trace().real() <= pol.tol_check;
}

// Faithful restriction of the pair to supp(sigma); only valid after the
// support_dominated check.
struct RestrictedPair {
  DensityMatrix rho;
  DensityMatrix sigma;
};

RestrictedPair restrict_pair(const DensityMatrix& rho, const DensityMatrix& sigma,
                             const NumericPolicy& pol) {
  if (is_faithful(sigma, pol)) return {rho, sigma};
  EigSystem es = hermitian_eig(sigma.base(), pol);
  const double cut = pol.tau_rank * std::max(es.eigenvalues.maxCoeff(), 0.0);
  std::vector<int> keep;
  for (int i = 0; i < es.eigenvalues.size(); ++i)
    if (es.eigenvalues(i) > cut) keep.push_back(i);
  Matrix v(sigma.dim(), keep.size());
  for (size_t i = 0; i < keep.size(); ++i) v.col(i) = es.eigenvectors.col(keep[i]);
  Matrix r = v.adjoint() * rho.mat() * v;
  Matrix s = v.adjoint() * sigma.mat() * v;
  r /= r.trace().real();
  s /= s.trace().real();
  return {DensityMatrix(std::move(r), pol), DensityMatrix(std::move(s), pol)};
}

}  // namespace

double hockey_stick(const DensityMatrix& rho, const DensityMatrix& sigma, double t,
                    const NumericPolicy& pol) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("hockey_stick pair");
  if (t < 0) throw DomainError("hockey_stick needs t >= 0");
  Matrix diff = rho.mat() - t * sigma.mat();
  return positive_part(diff, pol).trace().real() - std::max(1.0 - t, 0.0);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                        const NumericPolicy& pol) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("relative_entropy pair");
  if (!support_dominated(rho, sigma, pol)) return kInf;
  Matrix lr = matrix_log_support(rho.mat(), pol);
  Matrix ls = matrix_log_support(sigma.mat(), pol);
  return (rho.mat() * (lr - ls)).trace().real();
}

double frenkel_relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                                const NumericPolicy& pol, const QuadratureConfig& quad) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("frenkel pair");
  if (!support_dominated(rho, sigma, pol)) return kInf;
  RestrictedPair p = restrict_pair(rho, sigma, pol);
  // Both terms are expressed through the forward pencil: substituting
  // u = 1/t and E_{1/u}(sigma||rho) = E_u(rho||sigma)/u turns the reverse
  // term into int_0^1 E_u(rho||sigma)/u du, so the breakpoints of (rho,sigma)
  // delimit every piece and the range stays finite even for singular rho.
  std::vector<double> bps = np_breakpoints(p.rho, p.sigma, pol);
  const double t_max = bps.empty() ? 1.0 : bps.back();
  const auto integrand = [&](double t) { return hockey_stick(p.rho, p.sigma, t, pol) / t; };
  double total = 0.0;
  total += integrate_pieces(integrand, 0.0, std::min(1.0, t_max), bps, quad);
  if (t_max > 1.0) total += integrate_pieces(integrand, 1.0, t_max, bps, quad);
  return total;
}

double f_divergence(const DensityMatrix& rho, const DensityMatrix& sigma, const FDivFunctions& f,
                    const NumericPolicy& pol, const QuadratureConfig& quad) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("f_divergence pair");
  if (std::isinf(f.f_at_zero))
    throw UnsupportedParameters("f_divergence needs finite lim_{x->0} f(x)");
  if (!support_dominated(rho, sigma, pol)) return kInf;
  RestrictedPair p = restrict_pair(rho, sigma, pol);
  std::vector<double> bps = np_breakpoints(p.rho, p.sigma, pol);
  const double t_max = bps.empty() ? 1.0 : bps.back();
  // Layer cake with the reference state under the trace: classically this is
  // sum_i q_i f(p_i/q_i); the projector weight tr(rho P_t) printed in some
  // sources fails that cross-check.
  const auto g = [&](double t) {
    return (p.sigma.mat() * np_projector(p.rho, p.sigma, t, pol).mat()).trace().real();
  };
  return f.f_at_zero +
         integrate_pieces([&](double t) { return f.f_prime(t) * g(t); }, 0.0, t_max, bps, quad);
}

double alpha_z(const DensityMatrix& rho, const DensityMatrix& sigma, double alpha, double z,
               const NumericPolicy& pol) {
  if (rho.dim() != sigma.dim()) throw DimensionMismatch("alpha_z pair");
  if (alpha <= 0 || alpha == 1.0 || z <= 0)
    throw UnsupportedParameters("alpha_z needs alpha > 0, alpha != 1, z > 0");
  if (alpha > 1 && !support_dominated(rho, sigma, pol)) return kInf;
  Matrix s_pow = matrix_pow(sigma.mat(), (1.0 - alpha) / (2.0 * z), pol);
  Matrix r_pow = matrix_pow(rho.mat(), alpha / z, pol);
  Matrix inner = s_pow * r_pow * s_pow;
  const double q = matrix_pow(0.5 * (inner + inner.adjoint().eval()), z, pol).trace().real();
  if (q <= 0) return kInf;  // disjoint supports for alpha < 1
  return std::log(q) / (alpha - 1.0);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma, const NumericPolicy& pol) {
  Matrix prod = matrix_sqrt(rho.mat(), pol) * matrix_sqrt(sigma.mat(), pol);
  Eigen::JacobiSVD<Matrix> svd(prod);
  return svd.singularValues().sum();
}

bool alpha_z_dpi_valid(double alpha, double z) {
  if (alpha > 0 && alpha < 1) return z >= std::max(alpha, 1.0 - alpha);
  if (alpha > 1) return z >= std::max(alpha / 2.0, alpha - 1.0) && z <= alpha;
  return false;
}

std::string to_string(DivergenceFamily f) {
  switch (f) {
    case DivergenceFamily::HockeyStick: return "hockey_stick";
    case DivergenceFamily::RelativeEntropy: return "relative_entropy";
    case DivergenceFamily::FrenkelRelativeEntropy: return "frenkel_relative_entropy";
    case DivergenceFamily::FDivergence: return "f_divergence";
    case DivergenceFamily::AlphaZ: return "alpha_z";
  }
  return "relative_entropy";
}

std::string to_string(DropVerdict v) {
  switch (v) {
    case DropVerdict::Equal: return "equal";
    case DropVerdict::StrictDrop: return "strict_drop";
    case DropVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double evaluate_divergence(const DivergenceSpec& spec, const DensityMatrix& rho,
                           const DensityMatrix& sigma, const NumericPolicy& pol) {
  switch (spec.family) {
    case DivergenceFamily::HockeyStick: return hockey_stick(rho, sigma, spec.t, pol);
    case DivergenceFamily::RelativeEntropy: return relative_entropy(rho, sigma, pol);
    case DivergenceFamily::FrenkelRelativeEntropy:
      return frenkel_relative_entropy(rho, sigma, pol, spec.quad);
    case DivergenceFamily::FDivergence:
      return f_divergence(rho, sigma, spec.fdiv, pol, spec.quad);
    case DivergenceFamily::AlphaZ: return alpha_z(rho, sigma, spec.alpha, spec.z, pol);
  }
  throw DomainError("unknown divergence family");
}

DivergenceReport dpi_harness(const SuperOperator& t, const DensityMatrix& rho,
                             const DensityMatrix& sigma, const DivergenceSpec& spec,
                             const NumericPolicy& pol) {
  if (!t.positivity_evidenced())
    throw DomainError("dpi_harness needs positivity evidence on T");
  if (spec.family == DivergenceFamily::AlphaZ && !alpha_z_dpi_valid(spec.alpha, spec.z))
    throw UnsupportedParameters("alpha-z parameters outside the PTP data-processing region");

  DivergenceReport rep;
  rep.spec = spec;
  rep.value_before = evaluate_divergence(spec, rho, sigma, pol);
  SuperOperator t_dual = t.dual();
  Matrix rho_after_m = t_dual.apply(rho.mat());
  Matrix sigma_after_m = t_dual.apply(sigma.mat());
  DensityMatrix rho_after(0.5 * (rho_after_m + rho_after_m.adjoint().eval()), pol);
  DensityMatrix sigma_after(0.5 * (sigma_after_m + sigma_after_m.adjoint().eval()), pol);
  rep.value_after = evaluate_divergence(spec, rho_after, sigma_after, pol);

  if (std::isinf(rep.value_before) && std::isinf(rep.value_after)) {
    rep.delta = 0.0;
    rep.drop = DropVerdict::Equal;
  } else if (std::isinf(rep.value_before)) {
    rep.delta = kInf;
    rep.drop = DropVerdict::StrictDrop;
  } else {
    rep.delta = rep.value_before - rep.value_after;
    if (std::abs(rep.delta) <= pol.tol_eq) rep.drop = DropVerdict::Equal;
    else if (rep.delta >= pol.tol_gap) rep.drop = DropVerdict::StrictDrop;
    else rep.drop = DropVerdict::Inconclusive;
  }

  rep.recovery = sufficiency_check(t, rho, sigma, pol);
  rep.theorem_coherent =
      (rep.drop == DropVerdict::Equal && rep.recovery.status == VerdictStatus::Sufficient) ||
      (rep.drop == DropVerdict::StrictDrop &&
       rep.recovery.status == VerdictStatus::NotSufficient);
  return rep;
}

Matrix d_operator_integral(const DensityMatrix& rho, const DensityMatrix& sigma,
                           const NumericPolicy& pol, const QuadratureConfig& quad) {
  if (!is_faithful(sigma, pol)) throw SingularState("d_operator_integral needs faithful sigma");
  const int d = rho.dim();
  std::vector<double> bps = np_breakpoints(rho, sigma, pol);
  const double t_max = bps.empty() ? 1.0 : bps.back();
  EigSystem es = hermitian_eig(sigma.base(), pol);

  // phi_sigma(p) = int_0^1 {sigma^{s-1/2}, p, sigma^{1/2-s}} ds via fixed-order
  // Gauss in s; the t-integral runs over the pencil pieces.
  const GaussRule& gs = rule_for(quad.points_per_piece);
  const auto phi = [&](const Matrix& p) {
    Matrix acc = Matrix::Zero(d, d);
    for (size_t i = 0; i < gs.nodes.size(); ++i) {
      const double s = 0.5 + 0.5 * gs.nodes[i];
      RVector le = es.eigenvalues.array().pow(s - 0.5);
      RVector ri = es.eigenvalues.array().pow(0.5 - s);
      Matrix a = es.eigenvectors * le.asDiagonal() * es.eigenvectors.adjoint();
      Matrix b = es.eigenvectors * ri.asDiagonal() * es.eigenvectors.adjoint();
      acc += 0.5 * gs.weights[i] * 0.5 * (a * p * b + b * p * a);
    }
    return acc;
  };

  Matrix total = Matrix::Zero(d, d);
  std::vector<double> cuts{0.0};
  for (double b : bps) cuts.push_back(b);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    const GaussRule& gt = rule_for(quad.points_per_piece);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (size_t k = 0; k < gt.nodes.size(); ++k) {
      const double t = mid + half * gt.nodes[k];
      total += half * gt.weights[k] * phi(np_projector(rho, sigma, t, pol).mat());
    }
  }
  return total;
}

}  // namespace qsuff
