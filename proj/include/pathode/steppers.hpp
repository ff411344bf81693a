#pragma once

#include "pathode/linsolve.hpp"
#include "pathode/path.hpp"
#include "pathode/problem.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pathode {

enum class Method { euler, trapezoid, rk4 };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

/// Per-step lambda contraction lambda_{k+1} / lambda_k as a polynomial in h:
/// 1 - h, 1 - h + h^2/2, and the degree-4 Taylor polynomial of e^-h.
double lambda_factor(Method method, double h);

/// h in (0, 1) with lambda_factor(method, h) = factor.
double solve_step_size(Method method, double factor);

/// Step size for K steps from lambda_max down to lambda_min.
double step_size(Method method, int K, double lambda_min, double lambda_max);

struct StepperConfig {
    Method method = Method::euler;
    DirectionMode direction_mode = DirectionMode::exact;
    double delta = 0.0;  // cg residual target
    int K = 1;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    bool record_diagnostics = true;
    int cg_max_iters = 0;  // 0 -> 20 * dim
    bool allow_degenerate_sigma = false;
    int max_domain_halvings = 30;

    double h() const { return step_size(method, K, lambda_min, lambda_max); }
    void validate() const;
};

/// Produces (approximate) solutions of (grad^2 f(x) + lambda grad^2 Omega(x)) d = -grad f(x).
class DirectionOracle {
public:
    static DirectionOracle exact() { return DirectionOracle(DirectionMode::exact, 0.0, 0); }
    static DirectionOracle cg(double delta, int max_iters = 0);

    DirectionMode mode() const { return mode_; }
    double delta() const { return delta_; }

    /// Exact: one gradient, one Hessian build, one solve. CG: one gradient and the
    /// Hessian-vector products CG needs, starting from `warm_start` (empty -> zero).
    DirectionResult compute(CountingOracle& oracle, const Vector& x, double lambda,
                            const Vector& warm_start) const;

private:
    DirectionOracle(DirectionMode mode, double delta, int max_iters)
        : mode_(mode), delta_(delta), max_iters_(max_iters) {}
    DirectionMode mode_;
    double delta_;
    int max_iters_;
};

/// v(x, lambda) = (grad^2 f + lambda grad^2 Omega)^{-1} (xi/lambda) grad f, by exact solve.
Vector vector_field(const Problem& problem, const Vector& x, double lambda, double xi_over_lambda = -1.0);

struct StepDiagnostics {
    int k = 0;
    double lambda_k = 0.0;
    double residual_r_k = 0.0;
    std::vector<double> direction_norms;
    std::vector<int> cg_iterations;
    std::vector<double> direction_residuals;
    /// Residual of the warm start for each cg solve.
    std::vector<double> warm_start_residuals;
    /// Lambda at which each direction's Hessian was formed.
    std::vector<double> stage_lambdas;
    /// H d + g per direction; filled only when record_diagnostics is set.
    std::vector<Vector> residual_vectors;
    /// Number of times this step was split to keep iterates in the domain.
    int domain_splits = 0;
};

/// Warm starts carried between cg solves.
struct WarmStart {
    Vector first_stage;
    Vector last_stage;
};

struct StepResult {
    Vector x_next;
    double lambda_next = 0.0;
    StepDiagnostics diagnostics;
};

/// Semi-implicit Euler: lambda' = (1 - h) lambda, x' = x + h v(x, lambda').
StepResult euler_step(CountingOracle& oracle, const Vector& x_k, double lambda_k, double h,
                      const DirectionOracle& directions, WarmStart& warm);

/// d1 = v(x, lambda), d2 = v(x + h d1, (1 - h + h^2) lambda), x' = x + h (d1 + d2) / 2,
/// lambda' = (1 - h + h^2/2) lambda.
StepResult trapezoid_step(CountingOracle& oracle, const Vector& x_k, double lambda_k, double h,
                          const DirectionOracle& directions, WarmStart& warm);

/// Classical four-stage Runge-Kutta on the joint system (x, lambda) with dlambda/dt = -lambda.
StepResult rk4_step(CountingOracle& oracle, const Vector& x_k, double lambda_k, double h,
                    const DirectionOracle& directions, WarmStart& warm);

struct PathRun {
    std::vector<PathKnot> knots;
    std::vector<StepDiagnostics> diagnostics;
    OracleCounters counters;
    double h = 0.0;
    int domain_guard_events = 0;
};

/// Raised when a step fails; carries everything computed before the failure.
class PathFailure : public Error {
public:
    PathFailure(const std::string& what, PathRun partial)
        : Error(what), partial_(std::move(partial)) {}
    const PathRun& partial() const { return partial_; }

private:
    PathRun partial_;
};

/// Runs K steps of the configured scheme from (x0, lambda_max). Knot residuals
/// are charged to the metric counter, not the solver counters.
PathRun run_path(const Problem& problem, const Vector& x0, const StepperConfig& config);

struct OmegaInit {
    Vector x0;
    double certified_bound = 0.0;
};

/// One Newton step on F_lambda_max from the minimizer of Omega, with the bound
/// L (1 + lambda_max) ||grad f(x_Omega)||^2 / (2 (mu + lambda_max sigma)^2).
/// `L` defaults to the problem's analytic constant.
OmegaInit initialize_from_omega(const Problem& problem, double lambda_max,
                                std::optional<double> L = std::nullopt,
                                OracleCounters* counters = nullptr);

struct NewtonInit {
    Vector x0;
    int iterations = 0;
    double residual = 0.0;
    /// Stopped above tol because the residual sat at its rounding floor.
    bool at_rounding_floor = false;
};

/// Damped Newton on F_lambda_max from the domain center until the residual is <= tol,
/// or until progress stalls within rounding error of ||grad f|| + lambda ||grad Omega||.
NewtonInit initialize_by_newton(const Problem& problem, double lambda_max, double tol,
                                int max_iters = 100, OracleCounters* counters = nullptr);

}  // namespace pathode
