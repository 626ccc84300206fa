#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qsuff/opsys.hpp"

namespace qsuff {

// Finite labeled family of density matrices on one space. Labels are opaque
// strings; iteration order is the insertion order.
class StatisticalExperiment {
 public:
  StatisticalExperiment(int dim, std::vector<std::pair<std::string, DensityMatrix>> states);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(states_.size()); }
  const std::vector<std::pair<std::string, DensityMatrix>>& states() const { return states_; }
  const DensityMatrix& state(const std::string& label) const;
  std::vector<std::string> labels() const;

  DensityMatrix average() const;
  bool faithful(const NumericPolicy& pol = {}) const;

 private:
  int dim_;
  std::vector<std::pair<std::string, DensityMatrix>> states_;
};

struct RestrictedExperiment {
  StatisticalExperiment experiment;
  Matrix isometry;  // original = isometry * restricted * isometry^*
};

// CPTP-equivalent faithful experiment on the support of the average state.
RestrictedExperiment restrict_to_support(const StatisticalExperiment& e,
                                         const NumericPolicy& pol = {});

// Projector onto the positive part of rho - t*sigma (the optimal binary test
// at prior ratio t).
HermitianMatrix np_projector(const DensityMatrix& rho, const DensityMatrix& sigma, double t,
                             const NumericPolicy& pol = {});

// Eigenvalues of sigma^{-1/2} rho sigma^{-1/2} above the rank cut: the only
// points where the test projector can jump. Requires faithful sigma.
std::vector<double> np_breakpoints(const DensityMatrix& rho, const DensityMatrix& sigma,
                                   const NumericPolicy& pol = {});

// Minimal Bayes-sufficient operator system: the span of the identity and the
// family of Neyman-Pearson tests. The projector family rotates analytically
// within breakpoint pieces, so pieces are sampled at log-spaced points and
// refined until the span dimension saturates.
OperatorSubspace bayes_k(const DensityMatrix& rho, const DensityMatrix& sigma,
                         const NumericPolicy& pol = {});

// d_{rho|sigma} = sigma^{-1/2} rho sigma^{-1/2}.
HermitianMatrix d_operator(const DensityMatrix& rho, const DensityMatrix& sigma,
                           const NumericPolicy& pol = {});

// Optimal Bayesian success probability at prior (p, 1-p).
double success_probability(const DensityMatrix& rho, const DensityMatrix& sigma, double p,
                           const NumericPolicy& pol = {});

struct SufficiencyAnalysis {
  OperatorSubspace K;  // span of identity and sampled NP tests, all pencils
  OperatorSubspace J;  // minimal sufficient J*-algebra
  OperatorSubspace A;  // minimal sufficient *-algebra
  std::vector<std::pair<std::string, DensityMatrix>> hat_states;  // tpce(J)-reduced
  std::map<std::string, std::vector<double>> breakpoints;         // per state, vs average
  std::vector<FactorFingerprint> fingerprints;                    // per J*-factor of J
  SuperOperator reduce;  // the trace-preserving conditional expectation onto J
};

// Generates K, J = J*-alg(K) and A = *-alg(K) from the tests [rho_theta > t w]
// against the average state w, refining the t-samples until the dimensions
// saturate and the state-preserving conditional expectation onto J actually
// preserves every state. Requires a faithful experiment.
SufficiencyAnalysis minimal_jstar(const StatisticalExperiment& e, const NumericPolicy& pol = {});

struct SymmetryReport {
  bool full_jstar = false;            // J = L(H): no unitary or antiunitary symmetry
  bool full_star = false;             // A = L(H): irreducible pair
  bool real_basis_obstruction = false;   // J of symmetric type inside full A
  bool symplectic_obstruction = false;   // J of symplectic type inside full A
};

SymmetryReport symmetry_report(const DensityMatrix& rho, const DensityMatrix& sigma,
                               const NumericPolicy& pol = {});

}  // namespace qsuff
