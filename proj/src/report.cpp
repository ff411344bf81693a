#include "pathode/report.hpp"

namespace pathode {

namespace {

template <class T>
nlohmann::json opt(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json counters_json(const OracleCounters& c) {
    return {{"grad_f", c.grad_f},
            {"grad_omega", c.grad_omega},
            {"hess_builds", c.hess_builds},
            {"hessvec", c.hessvec},
            {"linear_solves", c.linear_solves},
            {"cg_iters_total", c.cg_iters_total},
            {"metric_evals", c.metric_evals}};
}

nlohmann::json report_json(const RunReport& r) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["status"] = r.status;
    j["error"] = opt(r.error);
    j["problem"] = {{"kind", r.problem_kind}, {"source", r.problem_source}, {"dim", r.dim}};
    j["method"] = r.method;
    j["K"] = r.K;
    j["K_source"] = r.K_source;
    j["h"] = r.h;
    j["eps_target"] = opt(r.eps_target);
    j["delta"] = opt(r.delta);
    j["lambda_min"] = r.lambda_min;
    j["lambda_max"] = r.lambda_max;
    j["init"] = {{"method", r.init_method},
                 {"residual", r.init_residual},
                 {"iterations", r.init_iterations},
                 {"counters", counters_json(r.init_counters)}};
    j["accuracy_midpoint"] = opt(r.accuracy_midpoint);
    j["knot_residual_max"] = opt(r.knot_residual_max);
    j["passed"] = opt(r.passed);
    j["counters"] = counters_json(r.counters);
    j["domain_guard_events"] = r.domain_guard_events;
    j["grid_inner_iterations"] = opt(r.grid_inner_iterations);
    j["wall_time_seconds"] = r.wall_time_seconds;
    j["diagnostics_path"] = opt(r.diagnostics_path);
    j["path_path"] = opt(r.path_path);
    j["warnings"] = r.warnings;
    return j;
}

nlohmann::json constants_json(const TheoryConstants& c) {
    return {{"mu", c.mu()},           {"sigma", c.sigma()},         {"L", c.L()},
            {"G", c.G()},             {"lambda_min", c.lambda_min()}, {"lambda_max", c.lambda_max()},
            {"tau", c.tau()},         {"T_euler", c.T_euler()},     {"T_trapezoid", c.T_trap()},
            {"mu_tilde", c.mu_tilde()}, {"estimated", c.estimated()}};
}

nlohmann::json bound_json(const BoundReport& r) {
    nlohmann::json terms = nlohmann::json::array();
    for (const BoundTerm& t : r.terms) terms.push_back({{"name", t.name}, {"value", t.value}});
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["method"] = r.method;
    j["K_required"] = r.K_required;
    j["binding_term"] = r.binding_term;
    j["terms"] = terms;
    j["inputs"] = {{"L", r.inputs.L},
                   {"G", r.inputs.G},
                   {"tau", r.inputs.tau},
                   {"mu_tilde", r.inputs.mu_tilde},
                   {"T", r.inputs.T},
                   {"eps", r.eps},
                   {"f_gap", opt(r.f_gap)}};
    j["constants"] = r.constants ? constants_json(*r.constants) : nlohmann::json(nullptr);
    j["warnings"] = r.warnings;
    return j;
}

}  // namespace pathode
