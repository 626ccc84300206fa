#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "qsuff/errors.hpp"
#include "qsuff/numeric_policy.hpp"

namespace qsuff {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline double frob(const Matrix& m) { return m.norm(); }

// Residuals are normalized by max(1, ||m||_F).
double herm_residual(const Matrix& m);

// Complex square matrix constrained to be hermitian. The stored matrix is
// exactly symmetrized; construction rejects inputs whose hermiticity
// residual exceeds tau_herm.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(Matrix m, const NumericPolicy& pol = {});
  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& mat() const { return m_; }

 private:
  Matrix m_;
};

// Hermitian, positive semidefinite (within tau_psd) and unit trace (within
// tau_trace).
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix m, const NumericPolicy& pol = {});
  explicit DensityMatrix(const HermitianMatrix& h, const NumericPolicy& pol = {});
  int dim() const { return base_.dim(); }
  const Matrix& mat() const { return base_.mat(); }
  const HermitianMatrix& base() const { return base_; }

 private:
  HermitianMatrix base_;
};

struct EigSystem {
  RVector eigenvalues;  // ascending
  Matrix eigenvectors;  // unitary, columns matching eigenvalues

  Matrix reconstruct() const;
};

EigSystem hermitian_eig(const HermitianMatrix& h, const NumericPolicy& pol = {});
EigSystem hermitian_eig(const Matrix& m, const NumericPolicy& pol = {});

// Spectral calculus f(h) = sum_i f(lambda_i) p_i. Throws DomainError if f
// produces a non-finite value on the spectrum.
Matrix fun_calc(const Matrix& h, const std::function<double(double)>& f,
                const NumericPolicy& pol = {});

// Pseudo-function convention: eigenvalues at or below the relative rank
// threshold are mapped to 0, f is applied to the rest. Used for log and
// negative/fractional powers of PSD matrices.
Matrix fun_calc_support(const Matrix& h, const std::function<double(double)>& f,
                        const NumericPolicy& pol = {});

Matrix matrix_pow(const Matrix& h, double p, const NumericPolicy& pol = {});
Matrix matrix_sqrt(const Matrix& h, const NumericPolicy& pol = {});
Matrix matrix_log_support(const Matrix& h, const NumericPolicy& pol = {});
Matrix positive_part(const Matrix& h, const NumericPolicy& pol = {});
Matrix negative_part(const Matrix& h, const NumericPolicy& pol = {});

// Hilbert-Schmidt inner product tr(a* b).
Complex hs_inner(const Matrix& a, const Matrix& b);

// KMS inner product tr(sigma^{1/2} a* sigma^{1/2} b); sigma must be faithful.
Complex kms_inner(const Matrix& a, const Matrix& b, const DensityMatrix& sigma,
                  const NumericPolicy& pol = {});

// Dispatches to the KMS form when sigma is present, Hilbert-Schmidt otherwise.
Complex inner_product(const Matrix& a, const Matrix& b,
                      const std::optional<DensityMatrix>& sigma = std::nullopt,
                      const NumericPolicy& pol = {});

// Projection onto the range of a PSD matrix; rank counts eigenvalues above
// tau_rank * lambda_max. Throws NegativeInput below -tau_psd.
HermitianMatrix support_projector(const HermitianMatrix& h, const NumericPolicy& pol = {});

bool is_faithful(const DensityMatrix& rho, const NumericPolicy& pol = {});
bool is_projection(const Matrix& p, double tol = 1e-8);

// Common fixed matrices.
Matrix identity(int d);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix kron(const Matrix& a, const Matrix& b);
DensityMatrix maximally_mixed(int d);

// Row-major vectorization: vec(a)[i*d + j] = a(i, j); the coordinate system
// of the elementary-matrix basis E_ij used by superoperator actions.
CVector vec_rm(const Matrix& a);
Matrix unvec_rm(const CVector& v, int rows, int cols);
Matrix unvec_rm(const CVector& v);  // square

}  // namespace qsuff
