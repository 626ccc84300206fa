#include "qsuff/json_io.hpp"

namespace qsuff {

Json matrix_to_json(const Matrix& m) {
  Json arr = Json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) arr.push_back({m(i, j).real(), m(i, j).imag()});
  return arr;
}

Matrix matrix_from_json(const Json& j, int rows, int cols) {
  if (!j.is_array() || j.size() != static_cast<size_t>(rows) * cols)
    throw ParseError("matrix entry count mismatch");
  Matrix m(rows, cols);
  size_t idx = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c, ++idx) {
      const Json& e = j[idx];
      if (!e.is_array() || e.size() != 2) throw ParseError("matrix entries are [re, im] pairs");
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

Matrix square_matrix_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("matrix must be an array");
  const int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(j.size()))));
  if (static_cast<size_t>(d) * d != j.size()) throw ParseError("matrix is not square");
  return matrix_from_json(j, d, d);
}

Json xreal_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

Json experiment_to_json(const StatisticalExperiment& e) {
  Json out;
  out["dim"] = e.dim();
  out["states"] = Json::array();
  for (const auto& [label, st] : e.states())
    out["states"].push_back({{"label", label}, {"matrix", matrix_to_json(st.mat())}});
  return out;
}

StatisticalExperiment experiment_from_json(const Json& j, const NumericPolicy& pol) {
  try {
    const int dim = j.at("dim").get<int>();
    std::vector<std::pair<std::string, DensityMatrix>> states;
    for (const Json& s : j.at("states"))
      states.emplace_back(s.at("label").get<std::string>(),
                          DensityMatrix(matrix_from_json(s.at("matrix"), dim, dim), pol));
    return StatisticalExperiment(dim, std::move(states));
  } catch (const Json::exception& ex) {
    throw ParseError(std::string("experiment json: ") + ex.what());
  }
}

Json subspace_to_json(const OperatorSubspace& s) {
  Json out;
  out["dim_H"] = s.dim_h();
  out["basis"] = Json::array();
  for (int i = 0; i < s.dim(); ++i) out["basis"].push_back(matrix_to_json(s.basis_element(i)));
  return out;
}

OperatorSubspace subspace_from_json(const Json& j, const NumericPolicy& pol) {
  try {
    const int dim = j.at("dim_H").get<int>();
    std::vector<Matrix> mats;
    for (const Json& b : j.at("basis")) mats.push_back(matrix_from_json(b, dim, dim));
    return OperatorSubspace::span_of(dim, mats, pol);
  } catch (const Json::exception& ex) {
    throw ParseError(std::string("subspace json: ") + ex.what());
  }
}

Json fingerprint_to_json(const FactorFingerprint& fp) {
  Json out;
  out["kind"] = to_string(fp.kind);
  out["j_dim"] = fp.j_dim;
  out["a_dim"] = fp.a_dim;
  out["block_sizes"] = fp.block_sizes;
  out["multiplicities"] = fp.multiplicities;
  if (fp.spin_alias) out["spin_alias"] = *fp.spin_alias;
  return out;
}

Json channel_to_json(const SuperOperator& t, const std::string& repr) {
  Json out;
  out["in_dim"] = t.in_dim();
  out["out_dim"] = t.out_dim();
  if (repr == "choi") {
    out["repr"] = "choi";
    out["data"] = matrix_to_json(t.choi());
  } else {
    out["repr"] = "action";
    out["data"] = matrix_to_json(t.action());
  }
  out["unital"] = t.unital();
  out["trace_preserving"] = t.trace_preserving();
  out["positivity_evidence"] = to_string(t.evidence());
  return out;
}

SuperOperator channel_from_json(const Json& j, const NumericPolicy& pol) {
  try {
    const int in = j.at("in_dim").get<int>();
    const int out = j.at("out_dim").get<int>();
    const std::string repr = j.at("repr").get<std::string>();
    if (repr == "kraus") {
      std::vector<Matrix> ks;
      for (const Json& k : j.at("data")) ks.push_back(matrix_from_json(k, out, in));
      return from_kraus(ks, pol);
    }
    if (repr == "choi")
      return from_choi(matrix_from_json(j.at("data"), in * out, in * out), in, out, pol);
    if (repr == "action") {
      SuperOperator t(in, out, matrix_from_json(j.at("data"), out * out, in * in),
                      PositivityEvidence::None, 0, pol);
      t.set_evidence(classify_positivity(t, 64, 7, pol), 64);
      return t;
    }
    throw ParseError("unknown channel repr " + repr);
  } catch (const Json::exception& ex) {
    throw ParseError(std::string("channel json: ") + ex.what());
  }
}

Json analysis_to_json(const SufficiencyAnalysis& an) {
  Json out;
  out["K_dim"] = an.K.dim();
  out["J_dim"] = an.J.dim();
  out["A_dim"] = an.A.dim();
  out["breakpoints"] = Json::object();
  for (const auto& [label, bps] : an.breakpoints) out["breakpoints"][label] = bps;
  out["fingerprints"] = Json::array();
  for (const FactorFingerprint& fp : an.fingerprints)
    out["fingerprints"].push_back(fingerprint_to_json(fp));
  out["hat_states"] = Json::array();
  for (const auto& [label, st] : an.hat_states)
    out["hat_states"].push_back({{"label", label}, {"matrix", matrix_to_json(st.mat())}});
  return out;
}

Json verdict_to_json(const SufficiencyVerdict& v) {
  Json out;
  out["status"] = to_string(v.status);
  out["conditions"] = {{"recovery_map_exists", v.recovery_map_exists},
                       {"d_transported", v.d_transported},
                       {"petz_recovers", v.petz_recovers},
                       {"restricts_to_iso", v.restricts_to_iso}};
  out["residuals"] = {{"fixed_point", v.residual_fixed_point},
                      {"d_transport", v.residual_d_transport},
                      {"petz", v.residual_petz},
                      {"iso", v.residual_iso}};
  if (v.certificate) out["certificate"] = channel_to_json(*v.certificate);
  return out;
}

Json divergence_report_to_json(const DivergenceReport& r) {
  Json spec;
  spec["family"] = to_string(r.spec.family);
  switch (r.spec.family) {
    case DivergenceFamily::HockeyStick: spec["t"] = r.spec.t; break;
    case DivergenceFamily::AlphaZ:
      spec["alpha"] = r.spec.alpha;
      spec["z"] = r.spec.z;
      break;
    case DivergenceFamily::FDivergence: spec["f"] = r.spec.fdiv.name; break;
    default: break;
  }
  Json out;
  out["divergence"] = spec;
  out["before"] = xreal_to_json(r.value_before);
  out["after"] = xreal_to_json(r.value_after);
  out["delta"] = xreal_to_json(r.delta);
  out["drop"] = to_string(r.drop);
  out["recovery"] = verdict_to_json(r.recovery);
  out["theorem_coherent"] = r.theorem_coherent;
  return out;
}

Json equivalence_verdict_to_json(const EquivalenceVerdict& v) {
  Json out;
  out["status"] = to_string(v.status);
  out["residual"] = v.residual;
  out["invariant_mismatches"] = Json::array();
  for (const InvariantMismatch& m : v.mismatches)
    out["invariant_mismatches"].push_back(
        {{"invariant", m.invariant}, {"left", m.value_left}, {"right", m.value_right}});
  out["certificates"] = Json::array();
  if (v.to_second) out["certificates"].push_back(channel_to_json(*v.to_second));
  if (v.to_first) out["certificates"].push_back(channel_to_json(*v.to_first));
  if (!v.diagnostics.empty()) out["diagnostics"] = v.diagnostics;
  return out;
}

Json symmetry_report_to_json(const SymmetryReport& r) {
  return Json{{"full_jstar", r.full_jstar},
              {"full_star", r.full_star},
              {"real_basis_obstruction", r.real_basis_obstruction},
              {"symplectic_obstruction", r.symplectic_obstruction}};
}

}  // namespace qsuff
