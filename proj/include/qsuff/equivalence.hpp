#pragma once

#include <optional>

#include "qsuff/divergences.hpp"

namespace qsuff {

struct EquivConfig {
  std::uint64_t seed = 1234;
  int retries = 8;            // generic-combination attempts in tuple_equiv
  int word_bound = 12;        // trace-screen word length cap (min(2 n^2, 12))
  int word_samples = 1000;    // random words when enumeration is too large
  double weight_tol = 1e-9;   // class weight matching
  double cert_tol = 1e-7;     // interconverter verification residual
};

// One Koashi-Imoto block: carrier = parent-space isometry, with an internal
// unitary splitting the carrier as C^n (x) C^m on which the minimal
// sufficient *-algebra acts as M_n (x) 1.
struct KoashiBlock {
  Matrix isometry;       // dim_H x (n*m)
  Matrix tensor_unitary; // (n*m) x (n*m), carrier -> C^n (x) C^m
  int n = 0;
  int m = 0;
  std::vector<std::pair<std::string, DensityMatrix>> block_states;  // on C^n
  std::vector<std::pair<std::string, double>> weights;              // p_{j|theta}
  DensityMatrix environment;                                        // omega_j on C^m
};

struct BlockDecomposition {
  std::vector<KoashiBlock> blocks;
};

// Koashi-Imoto decomposition via the factor blocks of the minimal sufficient
// *-algebra; each original state reconstructs as
// (+)_j p_{j|theta} rho_{j|theta} (x) omega_j through the returned isometries.
BlockDecomposition koashi_blocks(const StatisticalExperiment& e, const NumericPolicy& pol = {},
                                 std::uint64_t seed = 17);

enum class TupleRelation { UnitarilyEquivalent, AntiunitarilyEquivalent, Inequivalent, Inconclusive };

std::string to_string(TupleRelation r);

struct TupleEquivResult {
  TupleRelation relation = TupleRelation::Inconclusive;
  std::optional<Matrix> unitary;  // b_i = u a_i u* (or u conj(a_i) u* for antiunitary)
  std::string mismatch;           // named invariant for Inequivalent
  double residual = 0.0;
};

// Simultaneous (anti)unitary equivalence of two hermitian tuples:
// constructive eigenbasis alignment of a generic real combination with phase
// fixing, plus a word-trace screen that certifies inequivalence.
TupleEquivResult tuple_equiv(const std::vector<Matrix>& as, const std::vector<Matrix>& bs,
                             const EquivConfig& cfg = {}, const NumericPolicy& pol = {});

// One J*-factor of the reduced experiment; the unit of comparison between
// experiments. A doubling factor spans two conjugate *-blocks and is already
// the merged transpose-class.
struct CanonicalClass {
  int n = 0;                                   // block state dimension
  std::vector<std::pair<std::string, double>> weights;
  std::vector<std::pair<std::string, DensityMatrix>> states;  // normalized, on C^n
  FactorFingerprint fingerprint;
  bool merged_conjugate_pair = false;

  // Embedding data (into the reduced experiment's ambient space).
  Matrix factor_isometry;             // ambient -> factor carrier
  std::vector<Matrix> strip_basis;    // J-factor basis elements, ambient coords
  std::vector<Matrix> stripped_basis; // their n x n block representatives
};

struct CanonicalForm {
  int dim_reduced = 0;
  std::vector<CanonicalClass> classes;
  std::vector<std::string> merge_log;
  // Reduction maps: E (trace-preserving CE onto J) sends originals to the
  // reduced states, F (state-preserving CE) sends them back.
  SuperOperator reduce;
  SuperOperator restore;
  std::vector<std::pair<std::string, DensityMatrix>> reduced_states;
};

CanonicalForm canonical_form(const StatisticalExperiment& e, const NumericPolicy& pol = {},
                             const EquivConfig& cfg = {});

// Rebuilds a block-diagonal experiment from the class data (multiplicity 1);
// canonical_form of the result has the same class multiset.
StatisticalExperiment reassemble(const CanonicalForm& cf, const NumericPolicy& pol = {});

enum class EquivalenceStatus { Equivalent, Inequivalent, Inconclusive };

std::string to_string(EquivalenceStatus s);

struct InvariantMismatch {
  std::string invariant;
  double value_left = 0.0;
  double value_right = 0.0;
};

struct EquivalenceVerdict {
  EquivalenceStatus status = EquivalenceStatus::Inconclusive;
  std::optional<SuperOperator> to_second;   // T with T* rho_theta = rho'_theta
  std::optional<SuperOperator> to_first;    // S with S* rho'_theta = rho_theta
  double residual = 0.0;                    // worst certificate residual
  std::vector<InvariantMismatch> mismatches;
  std::string diagnostics;
};

struct ClassMatch {
  int left_index = 0;
  int right_index = 0;
  Matrix unitary;
  bool antiunitary = false;
};

struct MatchData {
  CanonicalForm left;
  CanonicalForm right;
  std::vector<ClassMatch> matches;
  Matrix left_isometry;   // support restrictions back to the original spaces
  Matrix right_isometry;
};

// Interconverting maps between the ORIGINAL experiments assembled from the
// matched canonical forms: T = psi o F_2 (Heisenberg), composed with the
// support embeddings; certificates are verified to cfg.cert_tol.
std::pair<SuperOperator, SuperOperator> build_interconverters(
    const MatchData& match, const StatisticalExperiment& e1, const StatisticalExperiment& e2,
    const EquivConfig& cfg = {}, const NumericPolicy& pol = {});

EquivalenceVerdict decide_ptp_equivalence(const StatisticalExperiment& e1,
                                          const StatisticalExperiment& e2,
                                          const EquivConfig& cfg = {},
                                          const NumericPolicy& pol = {});

}  // namespace qsuff
