#include "qsuff/matrix_core.hpp"

#include <cmath>

namespace qsuff {

double herm_residual(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).norm() / std::max(1.0, m.norm());
}

HermitianMatrix::HermitianMatrix(Matrix m, const NumericPolicy& pol) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionMismatch("hermitian matrix must be square and non-empty");
  if (herm_residual(m) > pol.tau_herm)
    throw NonHermitianInput("hermiticity residual " + std::to_string(herm_residual(m)));
  m_ = 0.5 * (m + m.adjoint().eval());
}

DensityMatrix::DensityMatrix(Matrix m, const NumericPolicy& pol)
    : DensityMatrix(HermitianMatrix(std::move(m), pol), pol) {}

DensityMatrix::DensityMatrix(const HermitianMatrix& h, const NumericPolicy& pol) : base_(h) {
  const double scale = std::max(1.0, h.mat().norm());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat(), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -pol.tau_psd * scale)
    throw NegativeInput("state has eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
  const double tr = h.mat().trace().real();
  if (std::abs(tr - 1.0) > pol.tau_trace * scale)
    throw DomainError("state trace " + std::to_string(tr) + " != 1");
}

Matrix EigSystem::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint();
}

EigSystem hermitian_eig(const Matrix& m, const NumericPolicy& pol) {
  return hermitian_eig(HermitianMatrix(m, pol), pol);
}

EigSystem hermitian_eig(const HermitianMatrix& h, const NumericPolicy& pol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat());
  if (es.info() != Eigen::Success) throw NumericalDegeneracy("eigensolver failed");
  EigSystem sys{es.eigenvalues(), es.eigenvectors()};
  const double scale = std::max(1.0, h.mat().norm());
  if ((sys.reconstruct() - h.mat()).norm() > pol.tau_eig * scale)
    throw NumericalDegeneracy("eigendecomposition residual too large");
  return sys;
}

Matrix fun_calc(const Matrix& h, const std::function<double(double)>& f,
                const NumericPolicy& pol) {
  EigSystem es = hermitian_eig(h, pol);
  RVector fv(es.eigenvalues.size());
  for (int i = 0; i < fv.size(); ++i) {
    fv(i) = f(es.eigenvalues(i));
    if (!std::isfinite(fv(i)))
      throw DomainError("f undefined at eigenvalue " + std::to_string(es.eigenvalues(i)));
  }
  return es.eigenvectors * fv.asDiagonal() * es.eigenvectors.adjoint();
}

Matrix fun_calc_support(const Matrix& h, const std::function<double(double)>& f,
                        const NumericPolicy& pol) {
  EigSystem es = hermitian_eig(h, pol);
  const double lmax = es.eigenvalues.cwiseAbs().maxCoeff();
  const double cut = pol.tau_rank * std::max(lmax, 1.0);
  RVector fv(es.eigenvalues.size());
  for (int i = 0; i < fv.size(); ++i) {
    if (std::abs(es.eigenvalues(i)) <= cut) {
      fv(i) = 0.0;
    } else {
      fv(i) = f(es.eigenvalues(i));
      if (!std::isfinite(fv(i)))
        throw DomainError("f undefined at eigenvalue " + std::to_string(es.eigenvalues(i)));
    }
  }
  return es.eigenvectors * fv.asDiagonal() * es.eigenvectors.adjoint();
}

Matrix matrix_pow(const Matrix& h, double p, const NumericPolicy& pol) {
  const bool integral = std::abs(p - std::round(p)) < 1e-14 && p >= 0;
  if (integral) {
    return fun_calc(h, [p](double x) { return std::pow(x, p); }, pol);
  }
  // Fractional or negative powers act on PSD matrices; the kernel maps to 0.
  return fun_calc_support(
      h,
      [p, &pol](double x) {
        if (x < 0) {
          // Allow tiny negative noise on nominally PSD inputs.
          if (x > -pol.tau_psd * 1e3) x = 0.0;
          else return std::numeric_limits<double>::quiet_NaN();
        }
        return x == 0.0 ? 0.0 : std::pow(x, p);
      },
      pol);
}

Matrix matrix_sqrt(const Matrix& h, const NumericPolicy& pol) { return matrix_pow(h, 0.5, pol); }

Matrix matrix_log_support(const Matrix& h, const NumericPolicy& pol) {
  return fun_calc_support(
      h,
      [](double x) {
        return x <= 0 ? std::numeric_limits<double>::quiet_NaN() : std::log(x);
      },
      pol);
}

Matrix positive_part(const Matrix& h, const NumericPolicy& pol) {
  return fun_calc(h, [](double x) { return x > 0 ? x : 0.0; }, pol);
}

Matrix negative_part(const Matrix& h, const NumericPolicy& pol) {
  return fun_calc(h, [](double x) { return x < 0 ? -x : 0.0; }, pol);
}

Complex hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("hs_inner operands");
  return (a.adjoint() * b).trace();
}

Complex kms_inner(const Matrix& a, const Matrix& b, const DensityMatrix& sigma,
                  const NumericPolicy& pol) {
  if (a.rows() != sigma.dim() || b.rows() != sigma.dim() || a.cols() != a.rows() ||
      b.cols() != b.rows())
    throw DimensionMismatch("kms_inner operands");
  if (!is_faithful(sigma, pol)) throw SingularState("KMS inner product needs faithful sigma");
  Matrix s = matrix_sqrt(sigma.mat(), pol);
  return (s * a.adjoint() * s * b).trace();
}

Complex inner_product(const Matrix& a, const Matrix& b,
                      const std::optional<DensityMatrix>& sigma, const NumericPolicy& pol) {
  return sigma ? kms_inner(a, b, *sigma, pol) : hs_inner(a, b);
}

HermitianMatrix support_projector(const HermitianMatrix& h, const NumericPolicy& pol) {
  EigSystem es = hermitian_eig(h, pol);
  const double scale = std::max(1.0, h.mat().norm());
  if (es.eigenvalues.minCoeff() < -pol.tau_psd * scale)
    throw NegativeInput("support_projector input has eigenvalue " +
                        std::to_string(es.eigenvalues.minCoeff()));
  const double lmax = es.eigenvalues.maxCoeff();
  const double cut = pol.tau_rank * std::max(lmax, 0.0);
  RVector ind(es.eigenvalues.size());
  for (int i = 0; i < ind.size(); ++i) ind(i) = es.eigenvalues(i) > cut ? 1.0 : 0.0;
  return HermitianMatrix(es.eigenvectors * ind.asDiagonal() * es.eigenvectors.adjoint(), pol);
}

bool is_faithful(const DensityMatrix& rho, const NumericPolicy& pol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.mat(), Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  return es.eigenvalues().minCoeff() > pol.tau_rank * std::max(lmax, 0.0);
}

bool is_projection(const Matrix& p, double tol) {
  if (p.rows() != p.cols()) return false;
  return (p - p.adjoint()).norm() <= tol * std::max(1.0, p.norm()) &&
         (p * p - p).norm() <= tol * std::max(1.0, p.norm());
}

Matrix identity(int d) { return Matrix::Identity(d, d); }

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      c.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return c;
}

DensityMatrix maximally_mixed(int d) {
  return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d));
}

CVector vec_rm(const Matrix& a) {
  CVector v(a.rows() * a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) v(i * a.cols() + j) = a(i, j);
  return v;
}

Matrix unvec_rm(const CVector& v, int rows, int cols) {
  if (v.size() != static_cast<long>(rows) * cols) throw DimensionMismatch("unvec_rm size");
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = v(i * cols + j);
  return a;
}

Matrix unvec_rm(const CVector& v) {
  const int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (static_cast<long>(d) * d != v.size()) throw DimensionMismatch("unvec_rm not square");
  return unvec_rm(v, d, d);
}

}  // namespace qsuff
