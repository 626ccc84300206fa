#include "qsuff/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "qsuff/rng.hpp"

namespace qsuff {

namespace {

RVector sorted_spectrum(const Matrix& h, const NumericPolicy& pol) {
  return hermitian_eig(0.5 * (h + h.adjoint().eval()), pol).eigenvalues;
}

// Unitary u with u^+ A u = M_n (x) 1_m for a *-factor A on its carrier,
// built from matrix units F_k1 = P_k b P_1 of a generic element's spectral
// projections. Retries with fresh randomness until the split verifies.
struct TensorSplit {
  Matrix unitary;  // carrier -> C^n (x) C^m
  int n = 0;
  int m = 0;
};

Matrix strip_block(const Matrix& carrier_mat, const TensorSplit& split) {
  // (1/m) Tr_2 of u^+ x u, the M_n representative of x = a (x) 1_m.
  Matrix y = split.unitary.adjoint() * carrier_mat * split.unitary;
  Matrix out = Matrix::Zero(split.n, split.n);
  for (int k = 0; k < split.n; ++k)
    for (int kp = 0; kp < split.n; ++kp) {
      Complex acc = 0;
      for (int l = 0; l < split.m; ++l) acc += y(k * split.m + l, kp * split.m + l);
      out(k, kp) = acc / static_cast<double>(split.m);
    }
  return out;
}

Matrix embed_block(const Matrix& x, const TensorSplit& split) {
  return split.unitary * kron(x, Matrix::Identity(split.m, split.m)) * split.unitary.adjoint();
}

TensorSplit tensor_split(const OperatorSubspace& factor_alg, const NumericPolicy& pol,
                         std::uint64_t seed) {
  const int dcar = factor_alg.dim_h();
  const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(factor_alg.dim()))));
  if (n * n != factor_alg.dim() || dcar % n != 0)
    throw NumericalDegeneracy("tensor_split: not a matrix factor");
  const int m = dcar / n;
  TensorSplit split;
  split.n = n;
  split.m = m;
  if (n == 1) {
    split.unitary = Matrix::Identity(dcar, dcar);
    return split;
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < pol.max_factor_retries; ++attempt) {
    Matrix a = Matrix::Zero(dcar, dcar);
    Matrix b = Matrix::Zero(dcar, dcar);
    for (int i = 0; i < factor_alg.dim(); ++i) {
      a += rng.cnormal() * factor_alg.basis_element(i);
      b += rng.cnormal() * factor_alg.basis_element(i);
    }
    a = 0.5 * (a + a.adjoint().eval());
    EigSystem es = hermitian_eig(a, pol);
    // Generic element of M_n (x) 1: n clusters of multiplicity m.
    std::vector<std::pair<double, int>> clusters;  // (value, start)
    std::vector<Matrix> isometries;
    int start = 0;
    bool ok = true;
    for (int i = 1; i <= dcar; ++i) {
      if (i == dcar || es.eigenvalues(i) - es.eigenvalues(i - 1) > pol.gap_central) {
        if (i - start != m) {
          ok = false;
          break;
        }
        isometries.push_back(es.eigenvectors.middleCols(start, m));
        start = i;
      }
    }
    if (!ok || static_cast<int>(isometries.size()) != n) continue;

    Matrix u(dcar, dcar);
    u.setZero();
    const Matrix& v1 = isometries[0];
    for (int k = 0; k < n; ++k) {
      Matrix f_k1;
      if (k == 0) {
        f_k1 = v1 * v1.adjoint();
      } else {
        Matrix pk = isometries[k] * isometries[k].adjoint();
        Matrix p1 = v1 * v1.adjoint();
        Matrix c = pk * b * p1;
        const double norm2 = (c.adjoint() * c).trace().real();
        if (norm2 < 1e-20) {
          ok = false;
          break;
        }
        f_k1 = c * std::sqrt(static_cast<double>(m) / norm2);
      }
      for (int l = 0; l < m; ++l) u.col(k * m + l) = f_k1 * v1.col(l);
    }
    if (!ok) continue;
    if ((u.adjoint() * u - Matrix::Identity(dcar, dcar)).norm() > 1e-7) continue;
    split.unitary = u;
    // Verify the split on the whole algebra basis.
    double worst = 0.0;
    for (const Matrix& e : factor_alg.basis_elements())
      worst = std::max(worst, (embed_block(strip_block(e, split), split) - e).norm());
    if (worst <= pol.tol_check * 10) return split;
  }
  throw NumericalDegeneracy("tensor_split failed to stabilize");
}

std::string weights_key(const std::vector<std::pair<std::string, double>>& w, double tol) {
  std::string key;
  for (const auto& [l, v] : w) {
    const double snapped = std::round(v / tol) * tol;
    key += l + ":" + std::to_string(snapped) + ";";
  }
  return key;
}

std::string abstract_kind(const FactorFingerprint& fp) {
  switch (fp.kind) {
    case FactorKind::FullMatrix:
    case FactorKind::FullWithConjugateDoubling: {
      const int n = fp.block_sizes.empty() ? 0 : fp.block_sizes.front();
      return "Full(" + std::to_string(n) + ")";
    }
    case FactorKind::Symmetric:
      return "Symmetric(" + std::to_string(fp.block_sizes.front()) + ")";
    case FactorKind::Symplectic:
      return "Symplectic(" + std::to_string(fp.block_sizes.front()) + ")";
    case FactorKind::Spin:
      return "Spin(" + std::to_string(fp.j_dim - 1) + ")";
    case FactorKind::Unknown:
      return "Unknown(" + std::to_string(fp.j_dim) + ")";
  }
  return "Unknown";
}

}  // namespace

BlockDecomposition koashi_blocks(const StatisticalExperiment& e, const NumericPolicy& pol,
                                 std::uint64_t seed) {
  if (!e.faithful(pol)) throw NotFaithful("koashi_blocks requires a faithful experiment");
  SufficiencyAnalysis an = minimal_jstar(e, pol);
  DensityMatrix omega = e.average();
  BlockDecomposition out;
  std::vector<FactorBlock> blocks = factor_decompose(an.A, pol, seed);
  for (size_t b = 0; b < blocks.size(); ++b) {
    const FactorBlock& blk = blocks[b];
    TensorSplit split = tensor_split(blk.algebra, pol, seed + 101 * (b + 1));

    // theta-independent environment from the average state.
    Matrix yavg = split.unitary.adjoint() *
                  (blk.isometry.adjoint() * omega.mat() * blk.isometry) * split.unitary;
    Matrix env = Matrix::Zero(split.m, split.m);
    for (int l = 0; l < split.m; ++l)
      for (int lp = 0; lp < split.m; ++lp) {
        Complex acc = 0;
        for (int k = 0; k < split.n; ++k) acc += yavg(k * split.m + l, k * split.m + lp);
        env(l, lp) = acc;
      }
    env /= env.trace().real();
    KoashiBlock kb{blk.isometry,
                   split.unitary,
                   split.n,
                   split.m,
                   {},
                   {},
                   DensityMatrix(0.5 * (env + env.adjoint().eval()), pol)};

    for (const auto& [label, st] : e.states()) {
      Matrix y = blk.isometry.adjoint() * st.mat() * blk.isometry;
      const double p = y.trace().real();
      kb.weights.emplace_back(label, p);
      Matrix ytu = split.unitary.adjoint() * y * split.unitary;
      Matrix bs = Matrix::Zero(split.n, split.n);
      for (int k = 0; k < split.n; ++k)
        for (int kp = 0; kp < split.n; ++kp) {
          Complex acc = 0;
          for (int l = 0; l < split.m; ++l) acc += ytu(k * split.m + l, kp * split.m + l);
          bs(k, kp) = acc;
        }
      if (p > 1e-12) bs /= p;
      else bs = Matrix::Identity(split.n, split.n) / static_cast<double>(split.n);
      kb.block_states.emplace_back(label, DensityMatrix(0.5 * (bs + bs.adjoint().eval()), pol));
    }
    out.blocks.push_back(std::move(kb));
  }

  // Reconstruction check: every state must factorize through the blocks.
  for (const auto& [label, st] : e.states()) {
    Matrix rec = Matrix::Zero(e.dim(), e.dim());
    for (const KoashiBlock& kb : out.blocks) {
      double p = 0.0;
      const DensityMatrix* bs = nullptr;
      for (const auto& [l, w] : kb.weights)
        if (l == label) p = w;
      for (const auto& [l, s] : kb.block_states)
        if (l == label) bs = &s;
      Matrix inner = kron(bs->mat(), kb.environment.mat());
      rec += p * kb.isometry * kb.tensor_unitary * inner * kb.tensor_unitary.adjoint() *
             kb.isometry.adjoint();
    }
    if ((rec - st.mat()).norm() > pol.tol_check)
      throw NumericalDegeneracy("koashi_blocks reconstruction failed for " + label);
  }
  return out;
}

std::string to_string(TupleRelation r) {
  switch (r) {
    case TupleRelation::UnitarilyEquivalent: return "unitarily_equivalent";
    case TupleRelation::AntiunitarilyEquivalent: return "antiunitarily_equivalent";
    case TupleRelation::Inequivalent: return "inequivalent";
    case TupleRelation::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

// Constructive branch: align eigenbases of a shared generic combination and
// fix the phase gauge along a BFS tree of significant off-diagonal entries.
std::optional<Matrix> align_tuples(const std::vector<Matrix>& as, const std::vector<Matrix>& bs,
                                   Rng& rng, double cert_tol, const NumericPolicy& pol) {
  const int n = static_cast<int>(as.front().rows());
  std::vector<double> coeff(as.size());
  for (double& c : coeff) c = rng.normal();
  Matrix ma = Matrix::Zero(n, n), mb = Matrix::Zero(n, n);
  for (size_t i = 0; i < as.size(); ++i) {
    ma += coeff[i] * as[i];
    mb += coeff[i] * bs[i];
  }
  EigSystem ea = hermitian_eig(0.5 * (ma + ma.adjoint().eval()), pol);
  EigSystem eb = hermitian_eig(0.5 * (mb + mb.adjoint().eval()), pol);
  const double scale = std::max({1.0, ea.eigenvalues.cwiseAbs().maxCoeff(),
                                 eb.eigenvalues.cwiseAbs().maxCoeff()});
  if ((ea.eigenvalues - eb.eigenvalues).cwiseAbs().maxCoeff() > 1e-8 * scale)
    return std::nullopt;
  for (int i = 1; i < n; ++i)
    if (ea.eigenvalues(i) - ea.eigenvalues(i - 1) < 1e-7 * scale) return std::nullopt;

  std::vector<Matrix> at(as.size()), bt(bs.size());
  for (size_t i = 0; i < as.size(); ++i) {
    at[i] = ea.eigenvectors.adjoint() * as[i] * ea.eigenvectors;
    bt[i] = eb.eigenvectors.adjoint() * bs[i] * eb.eigenvectors;
  }
  double entry_scale = 1e-12;
  for (const Matrix& m : at) entry_scale = std::max(entry_scale, m.cwiseAbs().maxCoeff());

  // Phase graph: phi_k - phi_l = arg(bt(k,l)) - arg(at(k,l)).
  std::vector<double> phase(n, 0.0);
  std::vector<bool> fixed(n, false);
  fixed[0] = true;
  for (int round = 0; round < n; ++round) {
    bool progress = false;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        if (fixed[k] == fixed[l]) continue;
        int best = -1;
        double mag = 1e-6 * entry_scale;
        for (size_t i = 0; i < at.size(); ++i)
          if (std::abs(at[i](k, l)) > mag && std::abs(bt[i](k, l)) > 1e-14) {
            mag = std::abs(at[i](k, l));
            best = static_cast<int>(i);
          }
        if (best < 0) continue;
        const double delta =
            std::arg(bt[best](k, l)) - std::arg(at[best](k, l));
        if (fixed[k]) phase[l] = phase[k] - delta;
        else phase[k] = phase[l] + delta;
        fixed[k] = fixed[l] = true;
        progress = true;
      }
    if (!progress) break;
  }
  CVector diag(n);
  for (int k = 0; k < n; ++k) diag(k) = std::exp(Complex(0, phase[k]));
  Matrix u = eb.eigenvectors * diag.asDiagonal() * ea.eigenvectors.adjoint();
  double worst = 0.0;
  for (size_t i = 0; i < as.size(); ++i)
    worst = std::max(worst, (u * as[i] * u.adjoint() - bs[i]).norm() /
                               std::max(1.0, as[i].norm()));
  if (worst <= cert_tol) return u;
  return std::nullopt;
}

struct WordScreen {
  bool mismatch = false;
  std::string word;
  double left = 0.0, right = 0.0;
};

WordScreen word_trace_screen(const std::vector<Matrix>& as, const std::vector<Matrix>& bs,
                             const EquivConfig& cfg) {
  const int n = static_cast<int>(as.front().rows());
  const int nletters = static_cast<int>(as.size());
  const int bound = std::min(2 * n * n, cfg.word_bound);
  WordScreen out;

  const auto check_word = [&](const std::vector<int>& w) {
    Matrix pa = Matrix::Identity(n, n), pb = Matrix::Identity(n, n);
    for (int letter : w) {
      pa *= as[letter];
      pb *= bs[letter];
    }
    const Complex ta = pa.trace(), tb = pb.trace();
    if (std::abs(ta - tb) > 1e-7 * std::max(1.0, std::abs(ta))) {
      out.mismatch = true;
      out.left = ta.real();
      out.right = tb.real();
      for (int letter : w) out.word += static_cast<char>('a' + letter);
      return true;
    }
    return false;
  };

  double total = 0;
  for (int len = 1; len <= bound; ++len) total += std::pow(nletters, len);
  if (total <= 20000) {
    std::vector<int> w;
    const std::function<bool(int)> rec = [&](int len) {
      if (len == 0) return !w.empty() && check_word(w);
      for (int c = 0; c < nletters; ++c) {
        w.push_back(c);
        if (check_word(w) || rec(len - 1)) return true;
        w.pop_back();
      }
      return false;
    };
    for (int len = 1; len <= bound && !out.mismatch; ++len) {
      w.clear();
      rec(len);
      if (out.mismatch) break;
    }
  } else {
    Rng rng(cfg.seed ^ 0xabcdefULL);
    for (int s = 0; s < cfg.word_samples && !out.mismatch; ++s) {
      const int len = rng.uniform_int(2, bound);
      std::vector<int> w(len);
      for (int& l : w) l = rng.uniform_int(0, nletters - 1);
      check_word(w);
    }
  }
  return out;
}

}  // namespace

TupleEquivResult tuple_equiv(const std::vector<Matrix>& as, const std::vector<Matrix>& bs,
                             const EquivConfig& cfg, const NumericPolicy& pol) {
  if (as.size() != bs.size() || as.empty())
    throw DimensionMismatch("tuple_equiv needs equal-length tuples");
  for (size_t i = 0; i < as.size(); ++i)
    if (as[i].rows() != bs[i].rows() || as[i].rows() != as.front().rows())
      throw DimensionMismatch("tuple_equiv element dimensions");

  TupleEquivResult res;
  // Per-element spectra are invariants of both branches.
  for (size_t i = 0; i < as.size(); ++i) {
    RVector sa = sorted_spectrum(as[i], pol);
    RVector sb = sorted_spectrum(bs[i], pol);
    if ((sa - sb).cwiseAbs().maxCoeff() > 1e-7 * std::max(1.0, sa.cwiseAbs().maxCoeff())) {
      res.relation = TupleRelation::Inequivalent;
      res.mismatch = "spectrum(element " + std::to_string(i) + ")";
      res.residual = (sa - sb).cwiseAbs().maxCoeff();
      return res;
    }
  }

  std::vector<Matrix> as_conj(as.size());
  for (size_t i = 0; i < as.size(); ++i) as_conj[i] = as[i].conjugate();

  Rng rng(cfg.seed);
  for (int attempt = 0; attempt < cfg.retries; ++attempt) {
    if (auto u = align_tuples(as, bs, rng, cfg.cert_tol, pol)) {
      res.relation = TupleRelation::UnitarilyEquivalent;
      res.unitary = *u;
      return res;
    }
  }
  Rng rng2(cfg.seed ^ 0x5555aaaaULL);
  for (int attempt = 0; attempt < cfg.retries; ++attempt) {
    if (auto u = align_tuples(as_conj, bs, rng2, cfg.cert_tol, pol)) {
      res.relation = TupleRelation::AntiunitarilyEquivalent;
      res.unitary = *u;
      return res;
    }
  }

  WordScreen direct = word_trace_screen(as, bs, cfg);
  WordScreen conj = word_trace_screen(as_conj, bs, cfg);
  if (direct.mismatch && conj.mismatch) {
    res.relation = TupleRelation::Inequivalent;
    res.mismatch = "word_trace(" + direct.word + ")";
    res.residual = std::abs(direct.left - direct.right);
    return res;
  }
  res.relation = TupleRelation::Inconclusive;
  return res;
}

CanonicalForm canonical_form(const StatisticalExperiment& e, const NumericPolicy& pol,
                             const EquivConfig& cfg) {
  if (!e.faithful(pol)) throw NotFaithful("canonical_form requires a faithful experiment");
  SufficiencyAnalysis an = minimal_jstar(e, pol);
  DensityMatrix omega = e.average();

  CanonicalForm cf{.dim_reduced = e.dim(),
                   .classes = {},
                   .merge_log = {},
                   .reduce = an.reduce,
                   .restore = state_ce(an.J, omega, pol),
                   .reduced_states = an.hat_states};

  std::vector<std::string> labels = e.labels();
  std::sort(labels.begin(), labels.end());

  std::vector<FactorBlock> jfactors = factor_decompose(an.J, pol, cfg.seed);
  for (size_t k = 0; k < jfactors.size(); ++k) {
    const FactorBlock& jf = jfactors[k];
    CanonicalClass cls;
    cls.factor_isometry = jf.isometry;
    cls.fingerprint = fingerprint(jf.algebra, pol, cfg.seed + 31 * (k + 1));

    // Weight of the factor in each reduced state.
    for (const std::string& l : labels) {
      const DensityMatrix* hat = nullptr;
      for (const auto& [hl, hs] : cf.reduced_states)
        if (hl == l) hat = &hs;
      cls.weights.emplace_back(l, (jf.isometry.adjoint() * hat->mat() * jf.isometry)
                                      .trace()
                                      .real());
    }

    // The generated *-algebra has one block, or two conjugate blocks for a
    // doubling factor; pick the representative block deterministically by the
    // spectra of its states.
    std::vector<Matrix> restricted = jf.algebra.basis_elements();
    OperatorSubspace b_alg = close_star(jf.algebra.dim_h(), restricted, pol);
    std::vector<FactorBlock> ablocks = factor_decompose(b_alg, pol, cfg.seed + 77 * (k + 1));

    struct Candidate {
      TensorSplit split;
      Matrix carrier;  // ambient -> A-block carrier
      std::vector<std::pair<std::string, DensityMatrix>> states;
      std::string key;
    };
    std::vector<Candidate> cands;
    for (size_t b = 0; b < ablocks.size(); ++b) {
      Candidate c;
      c.split = tensor_split(ablocks[b].algebra, pol, cfg.seed + 7 * (k + 1) + b);
      c.carrier = jf.isometry * ablocks[b].isometry;
      for (const std::string& l : labels) {
        const DensityMatrix* hat = nullptr;
        for (const auto& [hl, hs] : cf.reduced_states)
          if (hl == l) hat = &hs;
        Matrix y = c.carrier.adjoint() * hat->mat() * c.carrier;
        Matrix x = strip_block(y, c.split) * static_cast<double>(c.split.m);
        const double tr = x.trace().real();
        if (tr > 1e-12) x /= tr;
        else x = Matrix::Identity(c.split.n, c.split.n) / static_cast<double>(c.split.n);
        c.states.emplace_back(l, DensityMatrix(0.5 * (x + x.adjoint().eval()), pol));
        RVector spec = sorted_spectrum(x, pol);
        for (int i = 0; i < spec.size(); ++i)
          c.key += std::to_string(std::round(spec(i) * 1e9) / 1e9) + ",";
      }
      cands.push_back(std::move(c));
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.key < b.key; });
    const Candidate& rep = cands.front();

    cls.n = rep.split.n;
    cls.states = rep.states;
    cls.merged_conjugate_pair = ablocks.size() == 2;
    if (cls.merged_conjugate_pair)
      cf.merge_log.push_back("factor " + std::to_string(k) +
                             ": conjugate block pair merged (doubling)");

    for (const Matrix& br : restricted) {
      Matrix amb = jf.isometry * br * jf.isometry.adjoint();
      cls.strip_basis.push_back(amb);
      Matrix y = rep.carrier.adjoint() * amb * rep.carrier;
      cls.stripped_basis.push_back(strip_block(y, rep.split));
    }
    cf.classes.push_back(std::move(cls));
  }

  std::stable_sort(cf.classes.begin(), cf.classes.end(),
                   [&](const CanonicalClass& a, const CanonicalClass& b) {
                     if (a.n != b.n) return a.n < b.n;
                     const std::string wa = weights_key(a.weights, cfg.weight_tol);
                     const std::string wb = weights_key(b.weights, cfg.weight_tol);
                     if (wa != wb) return wa < wb;
                     return abstract_kind(a.fingerprint) < abstract_kind(b.fingerprint);
                   });
  return cf;
}

StatisticalExperiment reassemble(const CanonicalForm& cf, const NumericPolicy& pol) {
  int dim = 0;
  for (const CanonicalClass& c : cf.classes) dim += c.n;
  std::vector<std::string> labels;
  for (const auto& [l, w] : cf.classes.front().weights) labels.push_back(l);
  std::vector<std::pair<std::string, DensityMatrix>> states;
  for (const std::string& l : labels) {
    Matrix m = Matrix::Zero(dim, dim);
    int off = 0;
    for (const CanonicalClass& c : cf.classes) {
      double q = 0.0;
      const DensityMatrix* bs = nullptr;
      for (const auto& [wl, wv] : c.weights)
        if (wl == l) q = wv;
      for (const auto& [sl, sv] : c.states)
        if (sl == l) bs = &sv;
      m.block(off, off, c.n, c.n) = q * bs->mat();
      off += c.n;
    }
    states.emplace_back(l, DensityMatrix(std::move(m), pol));
  }
  return StatisticalExperiment(dim, std::move(states));
}

std::string to_string(EquivalenceStatus s) {
  switch (s) {
    case EquivalenceStatus::Equivalent: return "equivalent";
    case EquivalenceStatus::Inequivalent: return "inequivalent";
    case EquivalenceStatus::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

// Heisenberg map embedding the restricted space back into the original one:
// a_r -> V a_r V^+ + tr(tau a_r)(1 - V V^+); unital, completely positive,
// dual is the support restriction channel.
SuperOperator support_embedding(const Matrix& v) {
  const int big = static_cast<int>(v.rows());
  const int small = static_cast<int>(v.cols());
  Matrix act = kron(v, v.conjugate());
  Matrix proj = v * v.adjoint();
  Matrix rest = Matrix::Identity(big, big) - proj;
  Matrix tau = Matrix::Identity(small, small) / static_cast<double>(small);
  act += vec_rm(rest) * vec_rm(tau).adjoint();
  return SuperOperator(small, big, std::move(act), PositivityEvidence::ExactCP);
}

// Heisenberg compression onto the restricted space: b -> V^+ b V.
SuperOperator support_compression(const Matrix& v) {
  return SuperOperator(static_cast<int>(v.rows()), static_cast<int>(v.cols()),
                       kron(v.adjoint(), v.transpose()), PositivityEvidence::ExactCP);
}

// psi: J_2 -> J_1 as a full-space linear action (zero off J_2), built from
// the per-class block maps x -> u^+ x u (or its transpose twin).
Matrix build_psi(const CanonicalForm& to, const CanonicalForm& from,
                 const std::vector<ClassMatch>& matches, const NumericPolicy& pol,
                 double* residual) {
  const int c_to = to.dim_reduced, c_from = from.dim_reduced;
  Matrix psi = Matrix::Zero(c_to * c_to, c_from * c_from);
  double worst = 0.0;
  for (const ClassMatch& mt : matches) {
    const CanonicalClass& cl_to = to.classes[mt.left_index];
    const CanonicalClass& cl_from = from.classes[mt.right_index];
    const int n = cl_to.n;
    // Solve for images in the target class through its stripped basis.
    const int k_to = static_cast<int>(cl_to.stripped_basis.size());
    Matrix s_to(n * n, k_to);
    for (int i = 0; i < k_to; ++i) s_to.col(i) = vec_rm(cl_to.stripped_basis[i]);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(s_to);

    for (size_t i = 0; i < cl_from.strip_basis.size(); ++i) {
      const Matrix& x = cl_from.stripped_basis[i];
      Matrix target = mt.unitary.adjoint() * x * mt.unitary;
      if (mt.antiunitary) target = target.transpose().eval();
      CVector alpha = cod.solve(vec_rm(target));
      worst = std::max(worst, (s_to * alpha - vec_rm(target)).norm());
      Matrix image = Matrix::Zero(c_to, c_to);
      for (int j = 0; j < k_to; ++j) image += alpha(j) * cl_to.strip_basis[j];
      psi += vec_rm(image) * vec_rm(cl_from.strip_basis[i]).adjoint();
    }
  }
  if (residual) *residual = worst;
  return psi;
}

}  // namespace

std::pair<SuperOperator, SuperOperator> build_interconverters(const MatchData& match,
                                                              const StatisticalExperiment& e1,
                                                              const StatisticalExperiment& e2,
                                                              const EquivConfig& cfg,
                                                              const NumericPolicy& pol) {
  // T (Heisenberg): L(H_2) -> L(H_1), T = embed_1 o psi_12 o F_2 o compress_2,
  // whose dual maps the e1 states onto the e2 states.
  double res_psi12 = 0.0, res_psi21 = 0.0;
  Matrix psi12 = build_psi(match.left, match.right, match.matches, pol, &res_psi12);
  std::vector<ClassMatch> swapped;
  for (const ClassMatch& m : match.matches) {
    ClassMatch s;
    s.left_index = m.right_index;
    s.right_index = m.left_index;
    s.antiunitary = m.antiunitary;
    s.unitary = m.antiunitary ? m.unitary.transpose().eval() : m.unitary.adjoint().eval();
    swapped.push_back(std::move(s));
  }
  Matrix psi21 = build_psi(match.right, match.left, swapped, pol, &res_psi21);
  if (std::max(res_psi12, res_psi21) > cfg.cert_tol * 10)
    throw CertificateInvalid("psi reconstruction residual too large");

  const int c1 = match.left.dim_reduced, c2 = match.right.dim_reduced;
  SuperOperator t_red(c2, c1, psi12 * match.right.restore.action(),
                      PositivityEvidence::DecomposableByConstruction);
  SuperOperator s_red(c1, c2, psi21 * match.left.restore.action(),
                      PositivityEvidence::DecomposableByConstruction);

  SuperOperator t_full = support_embedding(match.left_isometry)
                             .compose(t_red)
                             .compose(support_compression(match.right_isometry));
  SuperOperator s_full = support_embedding(match.right_isometry)
                             .compose(s_red)
                             .compose(support_compression(match.left_isometry));
  t_full.set_evidence(PositivityEvidence::DecomposableByConstruction);
  s_full.set_evidence(PositivityEvidence::DecomposableByConstruction);

  // Certificates are only certificates once verified.
  SuperOperator t_dual = t_full.dual();
  SuperOperator s_dual = s_full.dual();
  double worst = 0.0;
  for (const auto& [label, st] : e1.states())
    worst = std::max(worst, (t_dual.apply(st.mat()) - e2.state(label).mat()).norm());
  for (const auto& [label, st] : e2.states())
    worst = std::max(worst, (s_dual.apply(st.mat()) - e1.state(label).mat()).norm());
  // Round trip must restore the minimal sufficient J*-algebra pointwise.
  SuperOperator round = t_full.compose(s_full);
  for (const CanonicalClass& cls : match.left.classes)
    for (const Matrix& b : cls.strip_basis) {
      Matrix amb = match.left_isometry * b * match.left_isometry.adjoint();
      worst = std::max(worst, (round.apply(amb) - amb).norm());
    }
  if (worst > cfg.cert_tol)
    throw CertificateInvalid("interconverter residual " + std::to_string(worst));
  return {std::move(t_full), std::move(s_full)};
}

EquivalenceVerdict decide_ptp_equivalence(const StatisticalExperiment& e1,
                                          const StatisticalExperiment& e2,
                                          const EquivConfig& cfg, const NumericPolicy& pol) {
  std::vector<std::string> l1 = e1.labels(), l2 = e2.labels();
  std::sort(l1.begin(), l1.end());
  std::sort(l2.begin(), l2.end());
  if (l1 != l2) throw LabelMismatch("experiments carry different label sets");

  EquivalenceVerdict verdict;
  RestrictedExperiment r1 = restrict_to_support(e1, pol);
  RestrictedExperiment r2 = restrict_to_support(e2, pol);

  // Divergence screen: hockey-stick values on a log grid are PTP invariants.
  for (const std::string& a : l1)
    for (const std::string& b : l1) {
      if (a == b) continue;
      for (int k = 0; k <= 12; ++k) {
        const double t = 0.1 * std::pow(10.0, k / 6.0);
        const double va = hockey_stick(r1.experiment.state(a), r1.experiment.state(b), t, pol);
        const double vb = hockey_stick(r2.experiment.state(a), r2.experiment.state(b), t, pol);
        if (std::abs(va - vb) > 1e-8) {
          verdict.status = EquivalenceStatus::Inequivalent;
          verdict.mismatches.push_back(
              {"hockey_stick(" + a + "||" + b + ", t=" + std::to_string(t) + ")", va, vb});
          return verdict;
        }
      }
    }

  CanonicalForm cf1 = canonical_form(r1.experiment, pol, cfg);
  CanonicalForm cf2 = canonical_form(r2.experiment, pol, cfg);

  const auto dim_screen = [&](const std::string& name, double x, double y) {
    if (std::abs(x - y) > 0.5) {
      verdict.status = EquivalenceStatus::Inequivalent;
      verdict.mismatches.push_back({name, x, y});
      return true;
    }
    return false;
  };
  // K and J transport through any interconverting pair of UP maps, so their
  // dimensions are PTP invariants. A is only a CPTP invariant (the transpose
  // doubling changes it), so it stays out of the hard screen.
  SufficiencyAnalysis an1 = minimal_jstar(r1.experiment, pol);
  SufficiencyAnalysis an2 = minimal_jstar(r2.experiment, pol);
  if (dim_screen("K_dim", an1.K.dim(), an2.K.dim())) return verdict;
  if (dim_screen("J_dim", an1.J.dim(), an2.J.dim())) return verdict;

  std::vector<std::string> fps1, fps2;
  for (const CanonicalClass& c : cf1.classes)
    fps1.push_back(abstract_kind(c.fingerprint) + "@" + weights_key(c.weights, cfg.weight_tol));
  for (const CanonicalClass& c : cf2.classes)
    fps2.push_back(abstract_kind(c.fingerprint) + "@" + weights_key(c.weights, cfg.weight_tol));
  std::sort(fps1.begin(), fps1.end());
  std::sort(fps2.begin(), fps2.end());
  if (fps1 != fps2) {
    verdict.status = EquivalenceStatus::Inequivalent;
    verdict.mismatches.push_back({"class_multiset", static_cast<double>(cf1.classes.size()),
                                  static_cast<double>(cf2.classes.size())});
    verdict.diagnostics = "factor fingerprints or weight vectors differ";
    return verdict;
  }

  // Match classes with identical (n, weights, abstract kind) via tuple
  // equivalence; group sizes are tiny so permutations are explored directly.
  const size_t nc = cf1.classes.size();
  std::vector<int> assignment(nc, -1);
  std::vector<bool> used(nc, false);
  std::vector<ClassMatch> matches;
  bool definite_mismatch = false;
  std::string mismatch_name;

  const std::function<bool(size_t)> assign = [&](size_t i) {
    if (i == nc) return true;
    const CanonicalClass& a = cf1.classes[i];
    for (size_t j = 0; j < nc; ++j) {
      if (used[j]) continue;
      const CanonicalClass& b = cf2.classes[j];
      if (a.n != b.n) continue;
      if (weights_key(a.weights, cfg.weight_tol) != weights_key(b.weights, cfg.weight_tol))
        continue;
      std::vector<Matrix> ta, tb;
      for (const auto& [l, s] : a.states) ta.push_back(s.mat());
      for (const auto& [l, s] : b.states) tb.push_back(s.mat());
      TupleEquivResult ter = tuple_equiv(ta, tb, cfg, pol);
      if (ter.relation == TupleRelation::Inequivalent) {
        definite_mismatch = true;
        mismatch_name = ter.mismatch;
        continue;
      }
      if (ter.relation == TupleRelation::Inconclusive) continue;
      ClassMatch m;
      m.left_index = static_cast<int>(i);
      m.right_index = static_cast<int>(j);
      m.unitary = *ter.unitary;
      m.antiunitary = ter.relation == TupleRelation::AntiunitarilyEquivalent;
      matches.push_back(m);
      used[j] = true;
      if (assign(i + 1)) return true;
      used[j] = false;
      matches.pop_back();
    }
    return false;
  };

  if (!assign(0)) {
    if (definite_mismatch && nc == 1) {
      verdict.status = EquivalenceStatus::Inequivalent;
      verdict.mismatches.push_back({mismatch_name, 0.0, 0.0});
    } else {
      verdict.status = EquivalenceStatus::Inconclusive;
      verdict.diagnostics = definite_mismatch
                                ? "some class pairings mismatch (" + mismatch_name + ")"
                                : "class matching exhausted without certificates";
    }
    return verdict;
  }

  MatchData md{cf1, cf2, matches, r1.isometry, r2.isometry};
  try {
    auto [t, s] = build_interconverters(md, e1, e2, cfg, pol);
    verdict.status = EquivalenceStatus::Equivalent;
    verdict.to_second = std::move(t);
    verdict.to_first = std::move(s);
  } catch (const CertificateInvalid& err) {
    verdict.status = EquivalenceStatus::Inconclusive;
    verdict.diagnostics = err.what();
  }
  return verdict;
}

}  // namespace qsuff
