#pragma once

namespace qsuff {

// All tolerances used across the library. Residual-type tolerances are
// absolute after normalizing by max(1, ||.||_F); rank-type thresholds are
// relative to the largest eigen/singular value. Doubles at dimensions up
// to ~32 sit comfortably inside these margins.
struct NumericPolicy {
  double tau_herm = 1e-9;    // hermiticity residual
  double tau_psd = 1e-9;     // eigenvalue floor for positivity checks
  double tau_trace = 1e-9;   // trace-one residual for states
  double tau_eig = 1e-9;     // eigendecomposition reconstruction residual
  double tau_rank = 1e-10;   // relative rank threshold (eigen/singular values)
  double tau_gram = 1e-8;    // basis Gram-matrix residual
  double tau_member = 1e-8;  // subspace membership residual
  double tau_span = 1e-9;    // closure engine: acceptance of new directions
  double tau_breakpoint_merge = 1e-8;  // relative merge width for pencil eigenvalues

  double gap_central = 1e-6;  // minimal spectral gap for generic central elements
  double tol_check = 1e-8;    // generic equality residual (invariant checks)

  // Equality/strictness band for divergence drops and verdict booleans.
  double tol_eq = 1e-7;
  double tol_gap = 1e-5;

  int max_refine_levels = 8;  // adaptive NP-sample refinement cap
  int max_factor_retries = 8; // reseeding attempts for generic central elements
};

}  // namespace qsuff
