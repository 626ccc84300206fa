#include "qsuff/opsys.hpp"

#include <algorithm>
#include <cmath>

#include "qsuff/rng.hpp"

namespace qsuff {

namespace {

// MGS with one reorthogonalization pass; accepts a direction when the
// residual exceeds tau_span (columns entering here are bounded by ~1 in
// Frobenius norm, so the threshold is effectively absolute).
void mgs_extend(Matrix& basis, const std::vector<CVector>& candidates, double tau) {
  for (const CVector& cand : candidates) {
    CVector v = cand;
    for (int pass = 0; pass < 2; ++pass) {
      if (basis.cols() > 0) v -= basis * (basis.adjoint() * v).eval();
    }
    const double n = v.norm();
    if (n > tau) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = v / n;
    }
  }
}

std::vector<CVector> to_vecs(const std::vector<Matrix>& mats, int dim_h, bool normalize) {
  std::vector<CVector> out;
  out.reserve(mats.size());
  for (const Matrix& m : mats) {
    if (m.rows() != dim_h || m.cols() != dim_h)
      throw DimensionMismatch("subspace element dimension");
    CVector v = vec_rm(m);
    const double n = v.norm();
    if (n == 0.0) continue;
    out.push_back(normalize ? CVector(v / n) : v);
  }
  return out;
}

std::vector<CVector> to_unit_vecs(const std::vector<Matrix>& mats, int dim_h) {
  return to_vecs(mats, dim_h, true);
}

enum class ProductRule { Jordan, Associative };

Matrix multiply(ProductRule rule, const Matrix& a, const Matrix& b) {
  return rule == ProductRule::Jordan ? jordan_product(a, b) : a * b;
}

// Breadth-first closure: each round multiplies new basis elements against the
// whole basis (both orders for the associative rule) and extends the span.
// Terminates when a full round adds no rank; rank is bounded by dim_h^2.
OperatorSubspace close_under(ProductRule rule, int dim_h, const std::vector<Matrix>& generators,
                             const Matrix* initial, const NumericPolicy& pol) {
  const int d2 = dim_h * dim_h;
  Matrix basis(d2, 0);
  std::vector<Matrix> seed;
  seed.push_back(Matrix::Identity(dim_h, dim_h));
  for (const Matrix& g : generators) {
    seed.push_back(g);
    if (rule == ProductRule::Associative) seed.push_back(g.adjoint());
  }
  if (initial) {
    for (int c = 0; c < initial->cols(); ++c) seed.push_back(unvec_rm(initial->col(c)));
  }
  mgs_extend(basis, to_unit_vecs(seed, dim_h), pol.tau_span);

  int fresh_from = 0;
  while (basis.cols() < d2) {
    const int k = static_cast<int>(basis.cols());
    if (fresh_from >= k) break;
    std::vector<Matrix> elems(k);
    for (int i = 0; i < k; ++i) elems[i] = unvec_rm(basis.col(i));
    std::vector<Matrix> cands;
    for (int i = fresh_from; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        cands.push_back(multiply(rule, elems[i], elems[j]));
        if (rule == ProductRule::Associative && j < fresh_from)
          cands.push_back(multiply(rule, elems[j], elems[i]));
      }
    }
    // Products of unit-norm elements stay bounded by 1; keeping their scale
    // makes tau_span an honest residual cut (normalizing would blow noise
    // from near-cancelling products up to spurious directions).
    mgs_extend(basis, to_vecs(cands, dim_h, false), pol.tau_span);
    fresh_from = k;
  }
  return OperatorSubspace::span_of(dim_h, [&] {
    std::vector<Matrix> out;
    out.reserve(basis.cols());
    for (int c = 0; c < basis.cols(); ++c) out.push_back(unvec_rm(basis.col(c)));
    return out;
  }());
}

bool closed_under(ProductRule rule, const OperatorSubspace& s, const NumericPolicy& pol) {
  const int k = s.dim();
  std::vector<Matrix> elems = s.basis_elements();
  // Full pair check when affordable, deterministic stride sampling above.
  const long total = static_cast<long>(k) * k;
  const long budget = 8192;
  const long stride = total > budget ? total / budget : 1;
  long idx = 0;
  for (int i = 0; i < k; ++i) {
    const int jmax = rule == ProductRule::Jordan ? i + 1 : k;
    for (int j = 0; j < jmax; ++j, ++idx) {
      if (stride > 1 && idx % stride != 0) continue;
      if (!s.contains(multiply(rule, elems[i], elems[j]), nullptr, pol)) return false;
    }
  }
  return true;
}

Matrix hermitian_combination(const OperatorSubspace& s, Rng& rng) {
  Matrix x = Matrix::Zero(s.dim_h(), s.dim_h());
  for (int i = 0; i < s.dim(); ++i) x += rng.cnormal() * s.basis_element(i);
  return 0.5 * (x + x.adjoint().eval());
}

// Eigen-decomposes a hermitian element and clusters eigenvalues within
// gap_tol; returns (cluster values, spectral projections, eigenvectors per
// cluster as isometries).
struct ClusteredSpectrum {
  std::vector<double> values;
  std::vector<Matrix> projections;
  std::vector<Matrix> isometries;
  double min_gap = 0.0;
};

ClusteredSpectrum cluster_spectrum(const Matrix& h, double gap_tol, const NumericPolicy& pol) {
  EigSystem es = hermitian_eig(h, pol);
  const int d = static_cast<int>(es.eigenvalues.size());
  ClusteredSpectrum cs;
  int start = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= d; ++i) {
    if (i == d || es.eigenvalues(i) - es.eigenvalues(i - 1) > gap_tol) {
      const int len = i - start;
      Matrix v = es.eigenvectors.middleCols(start, len);
      cs.values.push_back(es.eigenvalues.segment(start, len).mean());
      cs.isometries.push_back(v);
      cs.projections.push_back(v * v.adjoint());
      if (i < d) min_gap = std::min(min_gap, es.eigenvalues(i) - es.eigenvalues(i - 1));
      start = i;
    }
  }
  cs.min_gap = cs.values.size() > 1 ? min_gap : std::numeric_limits<double>::infinity();
  return cs;
}

}  // namespace

OperatorSubspace OperatorSubspace::span_of(int dim_h, const std::vector<Matrix>& mats,
                                           const NumericPolicy& pol) {
  if (dim_h <= 0) throw DimensionMismatch("subspace ambient dimension");
  Matrix basis(dim_h * dim_h, 0);
  mgs_extend(basis, to_unit_vecs(mats, dim_h), pol.tau_span);
  return OperatorSubspace(dim_h, std::move(basis));
}

std::vector<Matrix> OperatorSubspace::basis_elements() const {
  std::vector<Matrix> out;
  out.reserve(dim());
  for (int i = 0; i < dim(); ++i) out.push_back(basis_element(i));
  return out;
}

bool OperatorSubspace::contains_identity(const NumericPolicy& pol) const {
  return contains(Matrix::Identity(dim_h_, dim_h_), nullptr, pol);
}

bool OperatorSubspace::contains(const Matrix& a, double* residual,
                                const NumericPolicy& pol) const {
  if (a.rows() != dim_h_ || a.cols() != dim_h_)
    throw DimensionMismatch("contains: element dimension");
  const double r = (a - project(a)).norm();
  if (residual) *residual = r;
  return r <= pol.tau_member * std::max(1.0, a.norm());
}

Matrix OperatorSubspace::project(const Matrix& a) const {
  if (basis_.cols() == 0) return Matrix::Zero(dim_h_, dim_h_);
  return unvec_rm(basis_ * (basis_.adjoint() * vec_rm(a)).eval(), dim_h_, dim_h_);
}

int OperatorSubspace::extend(const std::vector<Matrix>& mats, const NumericPolicy& pol) {
  const int before = dim();
  mgs_extend(basis_, to_unit_vecs(mats, dim_h_), pol.tau_span);
  return dim() - before;
}

double OperatorSubspace::gram_residual() const {
  if (basis_.cols() == 0) return 0.0;
  Matrix g = basis_.adjoint() * basis_;
  return (g - Matrix::Identity(g.rows(), g.cols())).norm();
}

double OperatorSubspace::adjoint_closure_residual(const NumericPolicy& pol) const {
  double worst = 0.0;
  for (int i = 0; i < dim(); ++i) {
    double r = 0.0;
    contains(basis_element(i).adjoint(), &r, pol);
    worst = std::max(worst, r);
  }
  return worst;
}

Matrix jordan_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw DimensionMismatch("jordan_product operands");
  return 0.5 * (a * b + b * a);
}

Matrix triple_product(const Matrix& a, const Matrix& b, const Matrix& c) {
  if (a.rows() != b.rows() || b.rows() != c.rows() || a.rows() != a.cols())
    throw DimensionMismatch("triple_product operands");
  return 0.5 * (a * b * c + c * b * a);
}

Matrix symmetrized_product(const std::vector<Matrix>& as) {
  if (as.empty()) throw DimensionMismatch("symmetrized_product of nothing");
  Matrix fwd = as.front();
  Matrix bwd = as.back();
  for (size_t i = 1; i < as.size(); ++i) {
    fwd = fwd * as[i];
    bwd = bwd * as[as.size() - 1 - i];
  }
  return 0.5 * (fwd + bwd);
}

OperatorSubspace close_jstar(int dim_h, const std::vector<Matrix>& generators,
                             const NumericPolicy& pol) {
  if (generators.empty()) throw DimensionMismatch("close_jstar needs generators");
  for (const Matrix& g : generators)
    if (herm_residual(g) > pol.tau_herm)
      throw NonHermitianInput("close_jstar generators must be hermitian");
  return close_under(ProductRule::Jordan, dim_h, generators, nullptr, pol);
}

OperatorSubspace close_star(int dim_h, const std::vector<Matrix>& generators,
                            const NumericPolicy& pol) {
  if (generators.empty()) throw DimensionMismatch("close_star needs generators");
  return close_under(ProductRule::Associative, dim_h, generators, nullptr, pol);
}

bool is_jordan_closed(const OperatorSubspace& s, const NumericPolicy& pol) {
  return closed_under(ProductRule::Jordan, s, pol);
}

bool is_star_closed(const OperatorSubspace& s, const NumericPolicy& pol) {
  return closed_under(ProductRule::Associative, s, pol);
}

SuperOperator tpce(const OperatorSubspace& j, const NumericPolicy& pol) {
  if (!is_jordan_closed(j, pol) || !j.contains_identity(pol))
    throw NotJordanClosed("tpce requires a J*-algebra");
  Matrix p = j.basis() * j.basis().adjoint();
  return SuperOperator(j.dim_h(), j.dim_h(), std::move(p),
                       PositivityEvidence::DecomposableByConstruction);
}

SuperOperator state_ce(const OperatorSubspace& j, const DensityMatrix& sigma,
                       const NumericPolicy& pol) {
  if (sigma.dim() != j.dim_h()) throw DimensionMismatch("state_ce state dimension");
  if (!is_faithful(sigma, pol)) throw SingularState("state_ce requires faithful sigma");
  SuperOperator e = tpce(j, pol);
  Matrix esigma = e.apply(sigma.mat());
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (esigma + esigma.adjoint().eval()),
                                           Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= pol.tau_rank * es.eigenvalues().maxCoeff())
    throw SingularState("E(sigma) not faithful");
  Matrix sq = matrix_sqrt(sigma.mat(), pol);
  Matrix inv_sq = matrix_pow(esigma, -0.5, pol);
  SuperOperator f = sandwich_map(inv_sq).compose(e).compose(sandwich_map(sq));
  return SuperOperator(j.dim_h(), j.dim_h(), f.action(),
                       PositivityEvidence::DecomposableByConstruction);
}

namespace {

// Kernel of the map z = sum alpha_c b_c -> ([z, g])_g over the constraint
// elements, as candidate center elements.
std::vector<Matrix> commutant_in_span(const std::vector<Matrix>& elems,
                                      const std::vector<Matrix>& constraints, int d,
                                      const NumericPolicy& pol) {
  const int k = static_cast<int>(elems.size());
  Matrix m(static_cast<long>(constraints.size()) * d * d, k);
  for (int c = 0; c < k; ++c) {
    for (size_t i = 0; i < constraints.size(); ++i) {
      Matrix comm = elems[c] * constraints[i] - constraints[i] * elems[c];
      m.block(static_cast<long>(i) * d * d, c, d * d, 1) = vec_rm(comm);
    }
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  std::vector<Matrix> zs;
  for (int i = 0; i < svd.matrixV().cols(); ++i) {
    const double sv = i < svd.singularValues().size() ? svd.singularValues()(i) : 0.0;
    if (sv <= pol.tau_member * std::max(1.0, smax)) {
      CVector coeff = svd.matrixV().col(i);
      Matrix z = Matrix::Zero(d, d);
      for (int c = 0; c < k; ++c) z += coeff(c) * elems[c];
      zs.push_back(z);
    }
  }
  return zs;
}

}  // namespace

OperatorSubspace center(const OperatorSubspace& j, const NumericPolicy& pol) {
  if (!is_jordan_closed(j, pol)) throw NotJordanClosed("center requires a J*-algebra");
  const int d = j.dim_h();
  const int k = j.dim();
  if (k == 0) return OperatorSubspace::span_of(d, {Matrix::Identity(d, d)}, pol);
  std::vector<Matrix> elems = j.basis_elements();

  // Commuting with a set that generates the algebra is enough; a handful of
  // generic combinations generically generates, and every kernel candidate is
  // verified against the full basis. Widen the constraint set on failure.
  Rng rng(0x9e3779b97f4a7c15ULL);
  std::vector<Matrix> constraints;
  for (int round = 0; round < 6; ++round) {
    const int add = round == 0 ? std::min(3, k) : std::min(2 << round, k);
    for (int i = 0; i < add; ++i) {
      Matrix x = Matrix::Zero(d, d);
      for (int c = 0; c < k; ++c) x += rng.cnormal() * elems[c];
      constraints.push_back(0.5 * (x + x.adjoint().eval()));
    }
    std::vector<Matrix> zs = commutant_in_span(elems, constraints, d, pol);
    bool verified = true;
    for (const Matrix& z : zs) {
      for (const Matrix& b : elems) {
        if ((z * b - b * z).norm() > pol.tau_member * std::max(1.0, z.norm() * b.norm()) * 10) {
          verified = false;
          break;
        }
      }
      if (!verified) break;
    }
    if (verified) {
      std::vector<Matrix> sym;
      for (const Matrix& z : zs) {
        sym.push_back(z);
        sym.push_back(z.adjoint());
      }
      return OperatorSubspace::span_of(d, sym, pol);
    }
  }
  // Exact but slow path: constrain against every basis element.
  std::vector<Matrix> zs = commutant_in_span(elems, elems, d, pol);
  std::vector<Matrix> sym;
  for (const Matrix& z : zs) {
    sym.push_back(z);
    sym.push_back(z.adjoint());
  }
  return OperatorSubspace::span_of(d, sym, pol);
}

std::vector<FactorBlock> factor_decompose(const OperatorSubspace& j, const NumericPolicy& pol,
                                          std::uint64_t seed) {
  OperatorSubspace z = center(j, pol);
  const int d = j.dim_h();
  if (z.dim() <= 1) {
    FactorBlock blk{Matrix::Identity(d, d), Matrix::Identity(d, d), j};
    return {std::move(blk)};
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < pol.max_factor_retries; ++attempt) {
    Matrix zc = hermitian_combination(z, rng);
    ClusteredSpectrum cs = cluster_spectrum(zc, pol.gap_central * 10, pol);
    if (static_cast<int>(cs.values.size()) != z.dim() || cs.min_gap < pol.gap_central) continue;
    std::vector<FactorBlock> blocks;
    bool ok = true;
    for (size_t b = 0; b < cs.values.size(); ++b) {
      const Matrix& v = cs.isometries[b];
      std::vector<Matrix> restricted;
      for (const Matrix& e : j.basis_elements()) restricted.push_back(v.adjoint() * e * v);
      OperatorSubspace alg = OperatorSubspace::span_of(static_cast<int>(v.cols()), restricted, pol);
      if (center(alg, pol).dim() != 1) {
        ok = false;
        break;
      }
      blocks.push_back(FactorBlock{cs.projections[b], v, std::move(alg)});
    }
    if (ok) return blocks;
  }
  throw NumericalDegeneracy("factor_decompose: no generic central element found");
}

std::string to_string(FactorKind k) {
  switch (k) {
    case FactorKind::FullMatrix: return "FullMatrix";
    case FactorKind::Symmetric: return "Symmetric";
    case FactorKind::Symplectic: return "Symplectic";
    case FactorKind::Spin: return "Spin";
    case FactorKind::FullWithConjugateDoubling: return "FullWithConjugateDoubling";
    case FactorKind::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace {

bool spin_structure_matches(int m, const std::vector<int>& sizes) {
  if (m < 2) return false;
  if (m % 2 == 0) {
    const long want = 1L << (m / 2);
    return sizes.size() == 1 && sizes[0] == want;
  }
  const long want = 1L << ((m - 1) / 2);
  if (sizes.size() == 1) return sizes[0] == want;
  return sizes.size() == 2 && sizes[0] == want && sizes[1] == want;
}

}  // namespace

FactorFingerprint fingerprint(const OperatorSubspace& factor, const NumericPolicy& pol,
                              std::uint64_t seed) {
  if (center(factor, pol).dim() != 1)
    throw NontrivialCenter("fingerprint requires a J*-factor");
  FactorFingerprint fp;
  fp.j_dim = factor.dim();

  std::vector<Matrix> gens = factor.basis_elements();
  OperatorSubspace a = close_star(factor.dim_h(), gens, pol);
  fp.a_dim = a.dim();
  std::vector<FactorBlock> blocks = factor_decompose(a, pol, seed);
  for (const FactorBlock& b : blocks) {
    const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(b.algebra.dim()))));
    if (n * n != b.algebra.dim()) {
      fp.kind = FactorKind::Unknown;
      return fp;
    }
    fp.block_sizes.push_back(n);
    fp.multiplicities.push_back(static_cast<int>(b.isometry.cols()) / n);
  }
  std::sort(fp.block_sizes.begin(), fp.block_sizes.end());

  const int jd = fp.j_dim;
  if (fp.block_sizes.size() == 1) {
    const int n = fp.block_sizes[0];
    if (jd == n * n) {
      fp.kind = FactorKind::FullMatrix;
    } else if (n >= 2 && jd == n * (n + 1) / 2) {
      fp.kind = FactorKind::Symmetric;
    } else if (n % 2 == 0 && n / 2 >= 3 && jd == (n / 2) * (n - 1)) {
      fp.kind = FactorKind::Symplectic;
    } else if (spin_structure_matches(jd - 1, fp.block_sizes)) {
      fp.kind = FactorKind::Spin;
    }
  } else if (fp.block_sizes.size() == 2 && fp.block_sizes[0] == fp.block_sizes[1]) {
    const int n = fp.block_sizes[0];
    if (jd == n * n) {
      fp.kind = FactorKind::FullWithConjugateDoubling;
    } else if (spin_structure_matches(jd - 1, fp.block_sizes)) {
      fp.kind = FactorKind::Spin;
    }
  }

  // Overlap identifications V2 = Sym_2, V3 ~ M_2, V5 ~ Sp_4: keep the matrix
  // family label, record the spin alias.
  if (fp.kind == FactorKind::Symmetric && fp.block_sizes[0] == 2) fp.spin_alias = 2;
  if ((fp.kind == FactorKind::FullMatrix || fp.kind == FactorKind::FullWithConjugateDoubling) &&
      fp.block_sizes[0] == 2)
    fp.spin_alias = 3;
  if (fp.kind == FactorKind::Spin && jd == 6) {
    fp.kind = FactorKind::Symplectic;
    fp.spin_alias = 5;
  }
  return fp;
}

bool reversible_probe(const OperatorSubspace& j, const NumericPolicy& pol) {
  std::vector<Matrix> elems = j.basis_elements();
  const int k = static_cast<int>(elems.size());
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c)
        for (int e = 0; e < k; ++e) {
          Matrix p = symmetrized_product({elems[a], elems[b], elems[c], elems[e]});
          if (!j.contains(p, nullptr, pol)) return false;
        }
  return true;
}

}  // namespace qsuff
