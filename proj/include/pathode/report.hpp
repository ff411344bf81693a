#pragma once

#include "pathode/problem.hpp"
#include "pathode/theory.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace pathode {

inline constexpr int kReportSchemaVersion = 1;

struct RunReport {
    std::string status = "ok";  // ok | failed | infeasible
    std::optional<std::string> error;
    std::string problem_kind;
    std::string problem_source;
    Index dim = 0;
    std::string method;
    std::int64_t K = 0;
    std::string K_source = "explicit";  // explicit | theory | theory-capped | doubling
    double h = 0.0;
    std::optional<double> eps_target;
    std::optional<double> delta;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    std::string init_method;
    double init_residual = 0.0;
    int init_iterations = 0;
    OracleCounters init_counters;
    std::optional<double> accuracy_midpoint;
    std::optional<double> knot_residual_max;
    std::optional<bool> passed;
    OracleCounters counters;
    int domain_guard_events = 0;
    std::optional<std::int64_t> grid_inner_iterations;
    double wall_time_seconds = 0.0;
    std::optional<std::string> diagnostics_path;
    std::optional<std::string> path_path;
    std::vector<std::string> warnings;
};

nlohmann::json counters_json(const OracleCounters& c);
nlohmann::json report_json(const RunReport& r);
nlohmann::json bound_json(const BoundReport& r);
nlohmann::json constants_json(const TheoryConstants& c);

}  // namespace pathode
