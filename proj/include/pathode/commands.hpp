#pragma once

#include "pathode/baselines.hpp"
#include "pathode/report.hpp"
#include "pathode/steppers.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pathode {

/// Where a problem instance comes from: a data file or a synthetic spec such as
/// "n=30,p=20,seed=1".
struct ProblemSpec {
    std::string kind = "quadratic";  // quadratic | logistic | logistic-reweighted | moment
    std::string data;
    std::string synthetic;
    bool standardize = false;
    std::optional<std::uint64_t> seed;
};

struct LoadedProblem {
    std::shared_ptr<const Problem> problem;
    std::string kind;
    std::string source;
    double default_lambda_min = 0.0;
    double default_lambda_max = 0.0;
    bool allow_degenerate_sigma = false;
};

LoadedProblem load_problem(const ProblemSpec& spec);

struct MethodChoice {
    std::string name;
    bool grid = false;
    Method method = Method::euler;
    bool cg = false;
    InnerSolver inner = InnerSolver::newton;
};

MethodChoice parse_method_choice(const std::string& name);

struct RunSettings {
    MethodChoice method;
    std::optional<double> eps;
    /// Explicit cg residual target; eps / 4 when absent.
    std::optional<double> delta;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    /// Grid inner tolerance when eps is absent.
    double inner_tol = 1e-8;
    std::optional<std::string> path_out;
    std::optional<std::string> diagnostics_out;
};

struct PreparedStart {
    Vector x0;
    std::string method;  // newton | omega
    double residual = 0.0;
    int iterations = 0;
    bool at_rounding_floor = false;
    OracleCounters counters;
};

/// x0 at lambda_max: damped Newton to min(eps/4, 1e-12), or one Newton step from
/// the minimizer of Omega.
PreparedStart prepare_start(const LoadedProblem& problem, double lambda_max, const std::string& init,
                            std::optional<double> eps);

/// cg residual target for the settings, or nullopt for exact methods.
std::optional<double> effective_delta(const RunSettings& settings);

/// Runs one method at one K and evaluates the midpoint accuracy. Solver errors
/// are reported through `status` rather than thrown; a K the step-size rule
/// cannot realize gives status "infeasible".
RunReport execute_run(const LoadedProblem& problem, const PreparedStart& start, const RunSettings& settings,
                      std::int64_t K);

struct DoublingResult {
    bool passed = false;
    std::int64_t K_final = 0;
    std::vector<RunReport> runs;
};

/// K = K0, 2 K0, 4 K0, ... until the midpoint accuracy is <= eps or
/// `max_doublings` doublings were tried.
DoublingResult execute_doubling(const LoadedProblem& problem, const PreparedStart& start,
                                const RunSettings& settings, std::int64_t K0, int max_doublings);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

/// Worker count for sweeps: PATHODE_THREADS if set, else hardware concurrency.
int sweep_workers(std::size_t rows);

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 success, 2 bad arguments, 3 solver failure (including a doubling run that
/// never reached eps).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pathode
