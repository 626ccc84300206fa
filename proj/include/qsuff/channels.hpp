#pragma once

#include <optional>

#include "qsuff/suffstats.hpp"

namespace qsuff {

// Petz recovery map of a unital positive T: L(H_hat) -> L(H) relative to a
// faithful state sigma on H:
//   R(a) = sigma_hat^{-1/2} T^*(sigma^{1/2} a sigma^{1/2}) sigma_hat^{-1/2},
// with sigma_hat = T^*(sigma); R is unital and R^*(sigma_hat) = sigma.
SuperOperator petz_recovery(const SuperOperator& t, const DensityMatrix& sigma,
                            const NumericPolicy& pol = {});

// Fixed-point space of a unital endomorphism with faithful invariant state,
// computed as the eigenvalue-1 eigenspace of the action matrix. The result is
// a J*-algebra; Jordan saturation is verified.
OperatorSubspace fixed_point_algebra(const SuperOperator& t, const DensityMatrix& sigma,
                                     const NumericPolicy& pol = {});

enum class VerdictStatus { Sufficient, NotSufficient, Inconsistent };

std::string to_string(VerdictStatus s);

// The four equivalent recoverability conditions, evaluated independently.
struct SufficiencyVerdict {
  bool recovery_map_exists = false;  // d_{rho|sigma} fixed by W = T o R_{T,sigma}
  bool d_transported = false;        // T(d_{T*rho|T*sigma}) = d_{rho|sigma}
  bool petz_recovers = false;        // R^*(T^* rho) = rho
  bool restricts_to_iso = false;     // T maps J_(T*rho,T*sigma) onto J_(rho,sigma)

  double residual_fixed_point = 0.0;
  double residual_d_transport = 0.0;
  double residual_petz = 0.0;
  double residual_iso = 0.0;

  VerdictStatus status = VerdictStatus::Inconsistent;
  std::optional<SuperOperator> certificate;  // the recovery map when sufficient
};

// Evaluates all conditions of the algebraic recovery theorem for T against
// the dichotomy (rho, sigma). sigma and T^*(sigma) must be faithful; when
// sigma is singular but the pair is faithful, sigma is replaced by
// (rho+sigma)/2, which decides the same question.
SufficiencyVerdict sufficiency_check(const SuperOperator& t, const DensityMatrix& rho,
                                     const DensityMatrix& sigma, const NumericPolicy& pol = {});

}  // namespace qsuff
