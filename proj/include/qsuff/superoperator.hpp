#pragma once

#include <string>
#include <vector>

#include "qsuff/matrix_core.hpp"

namespace qsuff {

// How we know a map is positive. Exact tags come from a PSD Choi matrix
// (possibly after composing with a transpose); decomposable-by-construction
// covers conditional expectations onto reversible J*-algebras, (anti)unitary
// conjugations, their Petz recoveries, and sums/compositions of those.
// Probed(n) only says n random pure inputs stayed PSD.
enum class PositivityEvidence { None, ExactCP, ExactCoCP, DecomposableByConstruction, Probed };

std::string to_string(PositivityEvidence e);

// Linear map T: L(C^in) -> L(C^out), stored as its matrix in the elementary
// basis E_ij with row-major vec: vec(T(a)) = action * vec(a). Values are the
// Heisenberg-picture (unital) maps; state transformations go through dual().
class SuperOperator {
 public:
  SuperOperator(int in_dim, int out_dim, Matrix action,
                PositivityEvidence evidence = PositivityEvidence::None, int probe_trials = 0,
                const NumericPolicy& pol = {});

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  const Matrix& action() const { return action_; }

  Matrix apply(const Matrix& a) const;

  // Trace dual: tr(dual(T)(a) b) = tr(a T(b)).
  SuperOperator dual() const;

  // Choi(T) = sum_ij E_ij (x) T(E_ij), a (in*out)-dimensional matrix.
  Matrix choi() const;

  bool hermiticity_preserving(double tol = 1e-9) const;
  bool unital(double tol = 1e-9) const;
  bool trace_preserving(double tol = 1e-9) const;
  bool completely_positive(const NumericPolicy& pol = {}) const;
  bool co_completely_positive(const NumericPolicy& pol = {}) const;

  PositivityEvidence evidence() const { return evidence_; }
  int probe_trials() const { return probe_trials_; }
  void set_evidence(PositivityEvidence e, int trials = 0) {
    evidence_ = e;
    probe_trials_ = trials;
  }
  bool positivity_evidenced() const { return evidence_ != PositivityEvidence::None; }

  // Composition (this after other).
  SuperOperator compose(const SuperOperator& other) const;

 private:
  int in_dim_;
  int out_dim_;
  Matrix action_;
  PositivityEvidence evidence_;
  int probe_trials_;
};

SuperOperator identity_map(int d);
SuperOperator transpose_map(int d);
SuperOperator conjugation_map(const Matrix& u);  // a -> u a u*
// a -> x a x for hermitian x.
SuperOperator sandwich_map(const Matrix& x);

// T(a) = sum_k k_j a k_j^*; each Kraus operator is out_dim x in_dim.
SuperOperator from_kraus(const std::vector<Matrix>& kraus,
                         const NumericPolicy& pol = {});

// Inverse of choi(); the Choi matrix must be hermitian within tau_herm.
SuperOperator from_choi(const Matrix& choi, int in_dim, int out_dim,
                        const NumericPolicy& pol = {});

// Derives exact positivity tags from the Choi matrix; falls back to random
// pure-state probing with the given trial count.
PositivityEvidence classify_positivity(const SuperOperator& t, int probe_trials,
                                       std::uint64_t seed, const NumericPolicy& pol = {});

}  // namespace qsuff
