#include "qsuff/superoperator.hpp"

#include "qsuff/rng.hpp"

namespace qsuff {

namespace {

// Permutation with P vec(a) = vec(a^t).
Matrix swap_perm(int d) {
  Matrix p = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) p(i * d + j, j * d + i) = Complex(1, 0);
  return p;
}

}  // namespace

std::string to_string(PositivityEvidence e) {
  switch (e) {
    case PositivityEvidence::None: return "none";
    case PositivityEvidence::ExactCP: return "exact_cp";
    case PositivityEvidence::ExactCoCP: return "exact_co_cp";
    case PositivityEvidence::DecomposableByConstruction: return "decomposable_by_construction";
    case PositivityEvidence::Probed: return "probed";
  }
  return "none";
}

SuperOperator::SuperOperator(int in_dim, int out_dim, Matrix action, PositivityEvidence evidence,
                             int probe_trials, const NumericPolicy& pol)
    : in_dim_(in_dim), out_dim_(out_dim), action_(std::move(action)), evidence_(evidence),
      probe_trials_(probe_trials) {
  if (in_dim_ <= 0 || out_dim_ <= 0 ||
      action_.rows() != static_cast<long>(out_dim_) * out_dim_ ||
      action_.cols() != static_cast<long>(in_dim_) * in_dim_)
    throw DimensionMismatch("superoperator action shape");
  (void)pol;
}

Matrix SuperOperator::apply(const Matrix& a) const {
  if (a.rows() != in_dim_ || a.cols() != in_dim_)
    throw DimensionMismatch("superoperator input dimension");
  return unvec_rm(action_ * vec_rm(a), out_dim_, out_dim_);
}

SuperOperator SuperOperator::dual() const {
  // From tr(x y) = vec(x)^T P vec(y): dual action = P_in action^T P_out.
  Matrix n = swap_perm(in_dim_) * action_.transpose() * swap_perm(out_dim_);
  return SuperOperator(out_dim_, in_dim_, std::move(n), evidence_, probe_trials_);
}

Matrix SuperOperator::choi() const {
  Matrix c(in_dim_ * out_dim_, in_dim_ * out_dim_);
  for (int i = 0; i < in_dim_; ++i)
    for (int j = 0; j < in_dim_; ++j) {
      Matrix e = Matrix::Zero(in_dim_, in_dim_);
      e(i, j) = Complex(1, 0);
      c.block(i * out_dim_, j * out_dim_, out_dim_, out_dim_) = apply(e);
    }
  return c;
}

bool SuperOperator::hermiticity_preserving(double tol) const {
  // T(a*) = T(a)* for all a  <=>  conj(M) = P_out M P_in.
  Matrix lhs = action_.conjugate();
  Matrix rhs = swap_perm(out_dim_) * action_ * swap_perm(in_dim_);
  return (lhs - rhs).norm() <= tol * std::max(1.0, action_.norm());
}

bool SuperOperator::unital(double tol) const {
  return (apply(Matrix::Identity(in_dim_, in_dim_)) - Matrix::Identity(out_dim_, out_dim_))
             .norm() <= tol * std::sqrt(static_cast<double>(out_dim_));
}

bool SuperOperator::trace_preserving(double tol) const { return dual().unital(tol); }

bool SuperOperator::completely_positive(const NumericPolicy& pol) const {
  Matrix c = choi();
  if (herm_residual(c) > pol.tau_herm) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.adjoint().eval()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -pol.tau_psd * std::max(1.0, c.norm());
}

bool SuperOperator::co_completely_positive(const NumericPolicy& pol) const {
  return transpose_map(out_dim_).compose(*this).completely_positive(pol);
}

SuperOperator SuperOperator::compose(const SuperOperator& other) const {
  if (other.out_dim_ != in_dim_) throw DimensionMismatch("superoperator composition");
  PositivityEvidence ev = PositivityEvidence::None;
  if (evidence_ != PositivityEvidence::None && other.evidence_ != PositivityEvidence::None)
    ev = PositivityEvidence::DecomposableByConstruction;
  if (evidence_ == PositivityEvidence::ExactCP && other.evidence_ == PositivityEvidence::ExactCP)
    ev = PositivityEvidence::ExactCP;
  return SuperOperator(other.in_dim_, out_dim_, action_ * other.action_, ev);
}

SuperOperator identity_map(int d) {
  return SuperOperator(d, d, Matrix::Identity(d * d, d * d), PositivityEvidence::ExactCP);
}

SuperOperator transpose_map(int d) {
  return SuperOperator(d, d, swap_perm(d), PositivityEvidence::ExactCoCP);
}

SuperOperator conjugation_map(const Matrix& u) {
  const int d = static_cast<int>(u.rows());
  return SuperOperator(static_cast<int>(u.cols()), d, kron(u, u.conjugate()),
                       PositivityEvidence::ExactCP);
}

SuperOperator sandwich_map(const Matrix& x) {
  const int d = static_cast<int>(x.rows());
  // vec(x a x) = (x (x) x^T) vec(a) for hermitian x.
  return SuperOperator(d, d, kron(x, x.transpose()), PositivityEvidence::ExactCP);
}

SuperOperator from_kraus(const std::vector<Matrix>& kraus, const NumericPolicy& pol) {
  if (kraus.empty()) throw DimensionMismatch("empty Kraus list");
  const int out = static_cast<int>(kraus.front().rows());
  const int in = static_cast<int>(kraus.front().cols());
  Matrix m = Matrix::Zero(out * out, in * in);
  for (const Matrix& k : kraus) {
    if (k.rows() != out || k.cols() != in) throw DimensionMismatch("Kraus operator shape");
    m += kron(k, k.conjugate());
  }
  return SuperOperator(in, out, std::move(m), PositivityEvidence::ExactCP, 0, pol);
}

SuperOperator from_choi(const Matrix& choi, int in_dim, int out_dim, const NumericPolicy& pol) {
  if (choi.rows() != static_cast<long>(in_dim) * out_dim || choi.rows() != choi.cols())
    throw DimensionMismatch("Choi matrix shape");
  if (herm_residual(choi) > pol.tau_herm)
    throw NonHermitianChoi("residual " + std::to_string(herm_residual(choi)));
  Matrix m(out_dim * out_dim, in_dim * in_dim);
  for (int i = 0; i < in_dim; ++i)
    for (int j = 0; j < in_dim; ++j) {
      Matrix blk = choi.block(i * out_dim, j * out_dim, out_dim, out_dim);
      m.col(i * in_dim + j) = vec_rm(blk);
    }
  SuperOperator t(in_dim, out_dim, std::move(m), PositivityEvidence::None, 0, pol);
  if (t.completely_positive(pol)) t.set_evidence(PositivityEvidence::ExactCP);
  return t;
}

PositivityEvidence classify_positivity(const SuperOperator& t, int probe_trials,
                                       std::uint64_t seed, const NumericPolicy& pol) {
  if (t.completely_positive(pol)) return PositivityEvidence::ExactCP;
  if (t.co_completely_positive(pol)) return PositivityEvidence::ExactCoCP;
  Rng rng(seed);
  for (int i = 0; i < probe_trials; ++i) {
    CVector psi = rng.ginibre(t.in_dim(), 1);
    psi.normalize();
    Matrix proj = psi * psi.adjoint();
    Matrix img = t.apply(proj);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (img + img.adjoint().eval()),
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -pol.tau_psd * std::max(1.0, img.norm()))
      return PositivityEvidence::None;
  }
  return PositivityEvidence::Probed;
}

}  // namespace qsuff
