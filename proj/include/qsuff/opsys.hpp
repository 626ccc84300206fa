#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsuff/matrix_core.hpp"
#include "qsuff/superoperator.hpp"

namespace qsuff {

// A *-invariant unital subspace of d x d matrices, stored as HS-orthonormal
// basis vectors (row-major vec) in the columns of a d^2 x k matrix.
class OperatorSubspace {
 public:
  static OperatorSubspace span_of(int dim_h, const std::vector<Matrix>& mats,
                                  const NumericPolicy& pol = {});

  int dim_h() const { return dim_h_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Matrix& basis() const { return basis_; }
  Matrix basis_element(int i) const { return unvec_rm(basis_.col(i)); }
  std::vector<Matrix> basis_elements() const;
  bool contains_identity(const NumericPolicy& pol = {}) const;

  bool contains(const Matrix& a, double* residual = nullptr,
                const NumericPolicy& pol = {}) const;
  Matrix project(const Matrix& a) const;  // HS-orthogonal projection onto the span

  // Appends any directions of `mats` outside the current span (modified
  // Gram-Schmidt with reorthogonalization). Returns the number added.
  int extend(const std::vector<Matrix>& mats, const NumericPolicy& pol = {});

  double gram_residual() const;
  double adjoint_closure_residual(const NumericPolicy& pol = {}) const;

 private:
  OperatorSubspace(int dim_h, Matrix basis) : dim_h_(dim_h), basis_(std::move(basis)) {}
  int dim_h_;
  Matrix basis_;  // d^2 x k, orthonormal columns
};

Matrix jordan_product(const Matrix& a, const Matrix& b);
Matrix triple_product(const Matrix& a, const Matrix& b, const Matrix& c);
// {a_1,...,a_n} = (a_1...a_n + a_n...a_1) / 2.
Matrix symmetrized_product(const std::vector<Matrix>& as);

// Smallest J*-algebra containing the (hermitian) generators: span of the
// identity and all nested Jordan products, saturated breadth-first. Each
// round multiplies the whole current basis pairwise, so the fixpoint is
// closed under the Jordan product, not just under products with generators.
OperatorSubspace close_jstar(int dim_h, const std::vector<Matrix>& generators,
                             const NumericPolicy& pol = {});

// Smallest unital *-algebra containing the generators and their adjoints.
OperatorSubspace close_star(int dim_h, const std::vector<Matrix>& generators,
                            const NumericPolicy& pol = {});

bool is_jordan_closed(const OperatorSubspace& s, const NumericPolicy& pol = {});
bool is_star_closed(const OperatorSubspace& s, const NumericPolicy& pol = {});

// Trace-preserving conditional expectation onto a J*-algebra: the
// HS-orthogonal projection, which is idempotent, self-dual and positive.
SuperOperator tpce(const OperatorSubspace& j, const NumericPolicy& pol = {});

// sigma-preserving conditional expectation
//   F(a) = (E sigma)^{-1/2} E(sigma^{1/2} a sigma^{1/2}) (E sigma)^{-1/2}.
SuperOperator state_ce(const OperatorSubspace& j, const DensityMatrix& sigma,
                       const NumericPolicy& pol = {});

// Center {z in j : [z, a] = 0 for all a in j}.
OperatorSubspace center(const OperatorSubspace& j, const NumericPolicy& pol = {});

struct FactorBlock {
  Matrix projection;        // central projection in the ambient space
  Matrix isometry;          // dim_h x r, orthonormal columns spanning its range
  OperatorSubspace algebra; // restriction of j to the block carrier
};

// Splits j along the spectral projections of a generic (seeded random)
// hermitian central element; restrictions have trivial center.
std::vector<FactorBlock> factor_decompose(const OperatorSubspace& j,
                                          const NumericPolicy& pol = {},
                                          std::uint64_t seed = 17);

enum class FactorKind {
  FullMatrix,
  Symmetric,
  Symplectic,
  Spin,
  FullWithConjugateDoubling,
  Unknown
};

std::string to_string(FactorKind k);

struct FactorFingerprint {
  FactorKind kind = FactorKind::Unknown;
  int j_dim = 0;
  int a_dim = 0;
  std::vector<int> block_sizes;     // matrix block sizes of the generated *-algebra
  std::vector<int> multiplicities;  // per block
  std::optional<int> spin_alias;    // set on the V2/V3/V5 overlaps
};

// Classifies a J*-factor by its dimension and the block structure of the
// *-algebra it generates. Throws NontrivialCenter unless the input is a
// factor.
FactorFingerprint fingerprint(const OperatorSubspace& factor, const NumericPolicy& pol = {},
                              std::uint64_t seed = 17);

// Checks closure under length-4 symmetrized products on the basis; a
// consistency probe for reversibility at small dimension.
bool reversible_probe(const OperatorSubspace& j, const NumericPolicy& pol = {});

}  // namespace qsuff
