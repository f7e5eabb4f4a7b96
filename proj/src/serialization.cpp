#include "expconc/serialization.hpp"

#include <cmath>

namespace expconc {

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json vector_json(const Vector& x) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(number(x[i]));
  return out;
}

Json vector_json(const std::vector<double>& x) {
  Json out = Json::array();
  for (double v : x) out.push_back(number(v));
  return out;
}

Json to_json(const Estimate& e) { return {{"value", number(e.value)}, {"standard_error", number(e.standard_error)}}; }

Json to_json(const SamplerDiagnostics& d) {
  return {{"acceptance_rate", number(d.acceptance_rate)},
          {"effective_sample_size", number(d.effective_sample_size)},
          {"burn_in", d.burn_in},
          {"thinning", d.thinning},
          {"n_chains", d.n_chains},
          {"step_size", number(d.step_size)}};
}

Json to_json(const BoundSpec& b) {
  Json out = {{"kind", kind_name(b.kind)}, {"label", b.label()}};
  switch (b.kind) {
    case BoundSpec::Kind::log_concave:
      out["d"] = b.d;
      out["c1"] = number(b.c1);
      out["c2"] = number(b.c2);
      break;
    case BoundSpec::Kind::exp_concave:
      out["eta"] = number(b.eta);
      break;
    case BoundSpec::Kind::iid_chernoff:
      out["eta"] = number(b.eta);
      out["n"] = b.n;
      break;
    case BoundSpec::Kind::mgf_product:
      out["eta"] = number(b.eta);
      out["terms"] = b.terms;
      break;
  }
  return out;
}

Json to_json(const EtaCertificate& c) {
  Json out;
  out["mode"] = c.mode == EtaCertificate::Mode::estimate ? "estimate" : "certify_declared";
  out["declared_eta"] = c.declared_eta ? number(*c.declared_eta) : Json(nullptr);
  out["n_points"] = c.points.size();
  out["global_eta"] = number(c.global_eta);
  out["local_eta"] = vector_json(c.local_eta);
  Json violations = Json::array();
  for (const auto& v : c.violations)
    violations.push_back({{"point", vector_json(v.point)}, {"min_eigenvalue", number(v.min_eigenvalue)}});
  out["violations"] = std::move(violations);
  out["passed"] = c.passed();
  return out;
}

Json to_json(const TailReport& r) {
  Json bounds = Json::array();
  for (std::size_t j = 0; j < r.bounds.size(); ++j) {
    Json b = to_json(r.bounds[j]);
    b["values"] = vector_json(r.bound_values[j]);
    b["dominated"] = r.dominated_by(j);
    bounds.push_back(std::move(b));
  }
  return {{"sample_size", r.sample_size},
          {"confidence", number(r.confidence)},
          {"mean_v", number(r.mean_v)},
          {"mean_standard_error", number(r.mean_standard_error)},
          {"var_v", number(r.var_v)},
          {"t_grid", vector_json(r.t_grid)},
          {"empirical_survival", vector_json(r.empirical_survival)},
          {"survival_ucb", vector_json(r.survival_ucb)},
          {"exceedances", r.exceedances},
          {"bounds", std::move(bounds)}};
}

Json to_json(const VarianceReport& r) {
  return {{"variance", to_json(r.variance)},
          {"dimension", r.dimension},
          {"eta", r.eta ? number(*r.eta) : Json(nullptr)},
          {"allowance_se", number(r.allowance_se)},
          {"within_dimension", r.within_dimension},
          {"within_inverse_eta", r.within_inverse_eta ? Json(*r.within_inverse_eta) : Json(nullptr)}};
}

Json to_json(const RegimeTable& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows)
    rows.push_back({{"t", number(row.t)},
                    {"log_concave_exponent", number(row.log_concave_exponent)},
                    {"exp_concave_exponents", vector_json(row.exp_concave_exponents)}});
  return {{"d", t.d}, {"etas", vector_json(t.etas)}, {"rows", std::move(rows)}};
}

Json to_json(const BlQuadratureResult& r) {
  return {{"lhs", number(r.lhs)}, {"rhs", number(r.rhs)}, {"mean_f", number(r.mean_f)}, {"holds", r.holds}};
}

Json to_json(const BlMonteCarloResult& r) {
  return {{"lhs", to_json(r.lhs)},
          {"rhs", to_json(r.rhs)},
          {"solve_failures", r.solve_failures},
          {"violation", r.violation}};
}

Json to_json(const DeviationFrequency& r) {
  return {{"frequency", number(r.frequency)},
          {"exceedances", r.exceedances},
          {"reps", r.reps},
          {"bound", number(r.bound)},
          {"expected_v", to_json(r.expected_v)},
          {"closed_form_mean", r.closed_form_mean}};
}

Json to_json(const HpdResult& r) {
  return {{"alpha", number(r.alpha)},
          {"n", number(r.n)},
          {"eta", number(r.eta)},
          {"c1", number(r.c1)},
          {"c2", number(r.c2)},
          {"gamma", number(r.gamma)},
          {"map_point", vector_json(r.map_point)},
          {"map_value", number(r.map_value)},
          {"threshold_plain", number(r.thresholds.plain)},
          {"threshold_exp_concave", number(r.thresholds.exp_concave)},
          {"contained_plain", r.contained_plain},
          {"contained_exp_concave", r.contained_exp_concave},
          {"tighter", r.tighter()}};
}

Json to_json(const InformationDensityReport& r) {
  return {{"rho", number(r.rho)},
          {"d", r.d},
          {"n", r.n},
          {"conditional_mean", to_json(r.conditional_mean)},
          {"conditional_entropy", number(r.conditional_entropy)},
          {"mutual_mean", to_json(r.mutual_mean)},
          {"mutual_information", number(r.mutual_information)},
          {"conditional_identity_error", number(r.conditional_identity_error)},
          {"mutual_identity_error", number(r.mutual_identity_error)},
          {"conditional_tails", to_json(r.conditional_tails)},
          {"mutual_tails", to_json(r.mutual_tails)}};
}

Json to_json(const OnlineRound& r) {
  return {{"t", r.t},
          {"loss_index", r.loss_index},
          {"prediction", vector_json(r.prediction)},
          {"loss", number(r.loss)},
          {"comparator_loss", number(r.comparator_loss)},
          {"regret", number(r.regret)},
          {"deviation", number(r.deviation)}};
}

}  // namespace expconc
