#pragma once

#include <functional>

#include "qsuff/channels.hpp"

namespace qsuff {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct QuadratureConfig {
  int points_per_piece = 32;  // Gauss-Legendre nodes per breakpoint piece
  double tol_abs = 1e-9;      // bisect a piece until the 16/32-point values agree
  double tol_rel = 1e-9;
  int max_depth = 30;
};

// E_t(rho||sigma) = tr((rho - t sigma)^+) - (1-t)^+.
double hockey_stick(const DensityMatrix& rho, const DensityMatrix& sigma, double t,
                    const NumericPolicy& pol = {});

// tr(rho log rho) - tr(rho log sigma); +inf unless supp rho <= supp sigma.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                        const NumericPolicy& pol = {});

// Integral form int_1^inf (E_t(rho||sigma)/t + E_t(sigma||rho)/t^2) dt over
// the finite range where the integrand lives, split at the pencil breakpoints
// (the integrand is analytic inside each piece).
double frenkel_relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma,
                                const NumericPolicy& pol = {}, const QuadratureConfig& quad = {});

// f convex and twice differentiable on (0, inf) with f(1) = 0; f_at_zero is
// lim_{x->0+} f(x) (may be +inf).
struct FDivFunctions {
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  double f_at_zero = 0.0;
  std::string name = "f";
};

// Layer-cake value f(0) + int_0^inf f'(t) tr(rho [rho > t sigma]) dt.
double f_divergence(const DensityMatrix& rho, const DensityMatrix& sigma,
                    const FDivFunctions& f, const NumericPolicy& pol = {},
                    const QuadratureConfig& quad = {});

// alpha-z Renyi divergence
//   (alpha-1)^{-1} log tr(sigma^{(1-alpha)/2z} rho^{alpha/z} sigma^{(1-alpha)/2z})^z.
// For alpha > 1 the value is +inf unless supp rho <= supp sigma.
double alpha_z(const DensityMatrix& rho, const DensityMatrix& sigma, double alpha, double z,
               const NumericPolicy& pol = {});

// Uhlmann fidelity ||rho^{1/2} sigma^{1/2}||_1 (trace norm).
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma,
                const NumericPolicy& pol = {});

// True when (alpha, z) lies in the region where the alpha-z divergence is
// monotone under positive trace-preserving maps.
bool alpha_z_dpi_valid(double alpha, double z);

enum class DivergenceFamily { HockeyStick, RelativeEntropy, FrenkelRelativeEntropy, FDivergence, AlphaZ };

std::string to_string(DivergenceFamily f);

struct DivergenceSpec {
  DivergenceFamily family = DivergenceFamily::RelativeEntropy;
  double t = 1.0;        // HockeyStick
  double alpha = 2.0;    // AlphaZ
  double z = 1.0;        // AlphaZ
  FDivFunctions fdiv;    // FDivergence
  QuadratureConfig quad;
};

double evaluate_divergence(const DivergenceSpec& spec, const DensityMatrix& rho,
                           const DensityMatrix& sigma, const NumericPolicy& pol = {});

enum class DropVerdict { Equal, StrictDrop, Inconclusive };

std::string to_string(DropVerdict v);

struct DivergenceReport {
  DivergenceSpec spec;
  double value_before = 0.0;
  double value_after = 0.0;
  double delta = 0.0;                 // before - after (DPI makes it >= 0)
  DropVerdict drop = DropVerdict::Inconclusive;
  SufficiencyVerdict recovery;
  bool theorem_coherent = false;      // equality <=> recovery, outside the band
};

// Applies T^* to the pair, evaluates the divergence before and after, runs
// sufficiency_check, and records whether equality-iff-recovery held. The
// (tol_eq, tol_gap) band separates quadrature noise from genuine drops.
DivergenceReport dpi_harness(const SuperOperator& t, const DensityMatrix& rho,
                             const DensityMatrix& sigma, const DivergenceSpec& spec,
                             const NumericPolicy& pol = {});

// Validation-only route for d_{rho|sigma} through the NP-test integral
//   int_0^inf int_0^1 {sigma^{s-1/2}, [rho > t sigma], sigma^{1/2-s}} ds dt;
// quadrature in both variables, intended to agree to ~1e-4.
Matrix d_operator_integral(const DensityMatrix& rho, const DensityMatrix& sigma,
                           const NumericPolicy& pol = {}, const QuadratureConfig& quad = {});

}  // namespace qsuff
