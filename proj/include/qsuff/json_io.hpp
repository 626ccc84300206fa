#pragma once

#include <json.hpp>

#include "qsuff/divergences.hpp"
#include "qsuff/equivalence.hpp"

namespace qsuff {

using Json = nlohmann::json;

// Matrices travel as flat row-major arrays of [re, im] pairs.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, int rows, int cols);
Matrix square_matrix_from_json(const Json& j);  // infers the dimension

// Extended reals: finite values as numbers, infinity as the string "inf".
Json xreal_to_json(double v);

// {dim, states: [{label, matrix}]}
Json experiment_to_json(const StatisticalExperiment& e);
StatisticalExperiment experiment_from_json(const Json& j, const NumericPolicy& pol = {});

// {dim_H, basis: [matrix...]}
Json subspace_to_json(const OperatorSubspace& s);
OperatorSubspace subspace_from_json(const Json& j, const NumericPolicy& pol = {});

// {kind, j_dim, a_dim, block_sizes, multiplicities, spin_alias?}
Json fingerprint_to_json(const FactorFingerprint& fp);

// {in_dim, out_dim, repr: "kraus"|"choi"|"action", data}
Json channel_to_json(const SuperOperator& t, const std::string& repr = "action");
SuperOperator channel_from_json(const Json& j, const NumericPolicy& pol = {});

Json analysis_to_json(const SufficiencyAnalysis& an);
Json verdict_to_json(const SufficiencyVerdict& v);
Json divergence_report_to_json(const DivergenceReport& r);
Json equivalence_verdict_to_json(const EquivalenceVerdict& v);
Json symmetry_report_to_json(const SymmetryReport& r);

}  // namespace qsuff
