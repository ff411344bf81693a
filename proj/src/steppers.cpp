#include "pathode/steppers.hpp"

#include <iomanip>
#include <sstream>

#include <cmath>
#include <limits>

namespace pathode {

namespace {

std::string sci(double v) {
    std::ostringstream ss;
    ss << std::setprecision(3) << std::scientific << v;
    return ss.str();
}

}  // namespace

std::string_view to_string(Method method) {
    switch (method) {
        case Method::euler: return "euler";
        case Method::trapezoid: return "trapezoid";
        case Method::rk4: return "rk4";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "euler") return Method::euler;
    if (name == "trapezoid") return Method::trapezoid;
    if (name == "rk4") return Method::rk4;
    throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

double lambda_factor(Method method, double h) {
    switch (method) {
        case Method::euler: return 1.0 - h;
        case Method::trapezoid: return 1.0 - h + 0.5 * h * h;
        case Method::rk4: return 1.0 - h + h * h / 2.0 - h * h * h / 6.0 + h * h * h * h / 24.0;
    }
    return 1.0 - h;
}

double solve_step_size(Method method, double factor) {
    if (!(factor > 0.0 && factor < 1.0)) {
        throw InvalidArgument("per-step lambda factor must lie in (0, 1)");
    }
    switch (method) {
        case Method::euler: return 1.0 - factor;
        case Method::trapezoid: {
            if (factor <= 0.5) {
                throw InvalidArgument(
                    "trapezoid needs (lambda_min/lambda_max)^(1/K) > 1/2; increase K");
            }
            return 1.0 - std::sqrt(2.0 * factor - 1.0);
        }
        case Method::rk4: {
            // P(h) = 1 - h + h^2/2 - h^3/6 + h^4/24 decreases on (0, 1) from 1 to 0.375.
            if (factor <= 0.375) {
                throw InvalidArgument(
                    "rk4 needs (lambda_min/lambda_max)^(1/K) > 0.375; increase K");
            }
            double h = 1.0 - factor;
            for (int it = 0; it < 100; ++it) {
                const double p = lambda_factor(Method::rk4, h) - factor;
                const double dp = -1.0 + h - h * h / 2.0 + h * h * h / 6.0;
                const double step = p / dp;
                h -= step;
                if (std::abs(step) <= 1e-14 * std::max(h, 1e-300)) break;
            }
            if (!(h > 0.0 && h < 1.0)) throw NumericError("rk4 step-size root outside (0, 1)");
            return h;
        }
    }
    return 1.0 - factor;
}

double step_size(Method method, int K, double lambda_min, double lambda_max) {
    if (K < 1) throw InvalidArgument("K must be a positive integer");
    if (!(lambda_min > 0.0 && lambda_max > lambda_min)) {
        throw InvalidArgument("need 0 < lambda_min < lambda_max");
    }
    const double q = std::exp(std::log(lambda_min / lambda_max) / K);
    return solve_step_size(method, q);
}

void StepperConfig::validate() const {
    if (K < 1) throw InvalidArgument("K must be a positive integer");
    if (!(lambda_min > 0.0 && lambda_max > lambda_min) || !std::isfinite(lambda_max)) {
        throw InvalidArgument("need 0 < lambda_min < lambda_max");
    }
    if (direction_mode == DirectionMode::cg && !(delta > 0.0)) {
        throw InvalidArgument("cg mode needs delta > 0");
    }
    if (max_domain_halvings < 0) throw InvalidArgument("max_domain_halvings must be >= 0");
    (void)h();
}

DirectionOracle DirectionOracle::cg(double delta, int max_iters) {
    if (!(delta > 0.0)) throw InvalidArgument("cg delta must be positive");
    return DirectionOracle(DirectionMode::cg, delta, max_iters);
}

DirectionResult DirectionOracle::compute(CountingOracle& oracle, const Vector& x, double lambda,
                                         const Vector& warm_start) const {
    const Vector g = oracle.f_grad(x);
    if (!g.allFinite()) throw NumericError("non-finite gradient");
    if (mode_ == DirectionMode::exact) {
        const Matrix H = oracle.hessian(x, lambda);
        oracle.note_solve();
        return solve_spd(H, g);
    }
    CgOptions options;
    options.delta = delta_;
    options.max_iters = max_iters_;
    const auto op = [&](const Vector& v) { return oracle.hessvec(x, lambda, v); };
    const Vector start = warm_start.size() == x.size() ? warm_start : Vector::Zero(x.size());
    DirectionResult result = cg_solve(op, g, start, options);
    oracle.counters().cg_iters_total += result.inner_iterations;
    if (!result.converged) {
        throw ConvergenceFailure("cg did not reach the residual target " + sci(delta_) +
                                 " within its iteration cap");
    }
    return result;
}

Vector vector_field(const Problem& problem, const Vector& x, double lambda, double xi_over_lambda) {
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    if (!problem.domain_check(x)) throw DomainError("x is outside the domain");
    const Matrix H = problem.f_hess(x) + lambda * problem.omega_hess(x);
    // H v = (xi/lambda) grad f, i.e. solve H v = -(-(xi/lambda) grad f).
    const Vector rhs = -xi_over_lambda * problem.f_grad(x);
    return solve_spd(H, rhs).direction;
}

namespace {

void record(StepDiagnostics& diag, const DirectionResult& d, double stage_lambda, bool keep_vectors) {
    diag.direction_norms.push_back(d.direction.norm());
    diag.cg_iterations.push_back(d.inner_iterations);
    diag.direction_residuals.push_back(d.residual_norm);
    diag.warm_start_residuals.push_back(d.initial_residual);
    diag.stage_lambdas.push_back(stage_lambda);
    if (keep_vectors) diag.residual_vectors.push_back(d.residual);
}

void require_inside(const Problem& problem, const Vector& x) {
    if (!problem.domain_check(x)) throw DomainError("stage point left the domain");
}

}  // namespace

StepResult euler_step(CountingOracle& oracle, const Vector& x_k, double lambda_k, double h,
                      const DirectionOracle& directions, WarmStart& warm) {
    if (!(h > 0.0 && h < 1.0)) throw InvalidArgument("h must lie in (0, 1)");
    StepResult out;
    out.diagnostics.lambda_k = lambda_k;
    out.lambda_next = (1.0 - h) * lambda_k;
    const DirectionResult d = directions.compute(oracle, x_k, out.lambda_next, warm.last_stage);
    record(out.diagnostics, d, out.lambda_next, true);
    warm.first_stage = d.direction;
    warm.last_stage = d.direction;
    out.x_next = x_k + h * d.direction;
    return out;
}

StepResult trapezoid_step(CountingOracle& oracle, const Vector& x_k, double lambda_k, double h,
                          const DirectionOracle& directions, WarmStart& warm) {
    if (!(h > 0.0 && h < 1.0)) throw InvalidArgument("h must lie in (0, 1)");
    StepResult out;
    out.diagnostics.lambda_k = lambda_k;
    const DirectionResult d1 = directions.compute(oracle, x_k, lambda_k, warm.first_stage);
    record(out.diagnostics, d1, lambda_k, true);
    const Vector x_mid = x_k + h * d1.direction;
    require_inside(oracle.problem(), x_mid);
    const double lambda_mid = (1.0 - h + h * h) * lambda_k;
    const DirectionResult d2 = directions.compute(oracle, x_mid, lambda_mid, d1.direction);
    record(out.diagnostics, d2, lambda_mid, true);
    warm.first_stage = d1.direction;
    warm.last_stage = d2.direction;
    out.x_next = x_k + 0.5 * h * (d1.direction + d2.direction);
    out.lambda_next = lambda_factor(Method::trapezoid, h) * lambda_k;
    return out;
}

StepResult rk4_step(CountingOracle& oracle, const Vector& x_k, double lambda_k, double h,
                    const DirectionOracle& directions, WarmStart& warm) {
    if (!(h > 0.0 && h < 1.0)) throw InvalidArgument("h must lie in (0, 1)");
    StepResult out;
    out.diagnostics.lambda_k = lambda_k;
    const Problem& problem = oracle.problem();

    const double l1 = lambda_k;
    const double l2 = lambda_k * (1.0 - h / 2.0);
    const double l3 = lambda_k * (1.0 - h / 2.0 + h * h / 4.0);
    const double l4 = lambda_k * (1.0 - h + h * h / 2.0 - h * h * h / 4.0);

    const DirectionResult d1 = directions.compute(oracle, x_k, l1, warm.last_stage);
    record(out.diagnostics, d1, l1, true);
    const Vector x2 = x_k + 0.5 * h * d1.direction;
    require_inside(problem, x2);
    const DirectionResult d2 = directions.compute(oracle, x2, l2, d1.direction);
    record(out.diagnostics, d2, l2, true);
    const Vector x3 = x_k + 0.5 * h * d2.direction;
    require_inside(problem, x3);
    const DirectionResult d3 = directions.compute(oracle, x3, l3, d2.direction);
    record(out.diagnostics, d3, l3, true);
    const Vector x4 = x_k + h * d3.direction;
    require_inside(problem, x4);
    const DirectionResult d4 = directions.compute(oracle, x4, l4, d3.direction);
    record(out.diagnostics, d4, l4, true);

    warm.first_stage = d1.direction;
    warm.last_stage = d4.direction;
    out.x_next = x_k + (h / 6.0) * (d1.direction + 2.0 * d2.direction + 2.0 * d3.direction + d4.direction);
    out.lambda_next = lambda_factor(Method::rk4, h) * lambda_k;
    return out;
}

namespace {

StepResult dispatch(Method method, CountingOracle& oracle, const Vector& x, double lambda, double h,
                    const DirectionOracle& directions, WarmStart& warm) {
    switch (method) {
        case Method::euler: return euler_step(oracle, x, lambda, h, directions, warm);
        case Method::trapezoid: return trapezoid_step(oracle, x, lambda, h, directions, warm);
        case Method::rk4: return rk4_step(oracle, x, lambda, h, directions, warm);
    }
    throw InvalidArgument("unknown method");
}

void append(StepDiagnostics& into, const StepDiagnostics& from) {
    auto cat = [](auto& a, const auto& b) { a.insert(a.end(), b.begin(), b.end()); };
    cat(into.direction_norms, from.direction_norms);
    cat(into.cg_iterations, from.cg_iterations);
    cat(into.direction_residuals, from.direction_residuals);
    cat(into.warm_start_residuals, from.warm_start_residuals);
    cat(into.stage_lambdas, from.stage_lambdas);
    cat(into.residual_vectors, from.residual_vectors);
    into.domain_splits += from.domain_splits;
}

// One scheduled step of contraction `factor`. If the scheme leaves the domain the
// step is replaced by two sub-steps of contraction sqrt(factor) each, recursively.
StepResult guarded_step(const StepperConfig& config, CountingOracle& oracle, const Vector& x,
                        double lambda, double factor, double h, const DirectionOracle& directions,
                        WarmStart& warm, int depth) {
    const Problem& problem = oracle.problem();
    WarmStart saved = warm;
    try {
        StepResult r = dispatch(config.method, oracle, x, lambda, h, directions, warm);
        if (!r.x_next.allFinite()) throw NumericError("non-finite iterate");
        require_inside(problem, r.x_next);
        return r;
    } catch (const DomainError&) {
        if (depth >= config.max_domain_halvings) {
            throw DomainError("step left the domain after " + std::to_string(depth) + " step splits");
        }
    }
    warm = saved;
    const double sub_factor = std::sqrt(factor);
    const double sub_h = solve_step_size(config.method, sub_factor);
    StepResult first = guarded_step(config, oracle, x, lambda, sub_factor, sub_h, directions, warm, depth + 1);
    StepResult second = guarded_step(config, oracle, first.x_next, first.lambda_next, sub_factor, sub_h,
                                     directions, warm, depth + 1);
    StepResult out;
    out.x_next = std::move(second.x_next);
    out.lambda_next = lambda * factor;
    out.diagnostics.lambda_k = lambda;
    append(out.diagnostics, first.diagnostics);
    append(out.diagnostics, second.diagnostics);
    out.diagnostics.domain_splits += 1;
    return out;
}

}  // namespace

PathRun run_path(const Problem& problem, const Vector& x0, const StepperConfig& config) {
    config.validate();
    if (!problem.domain_check(x0)) throw DomainError("x0 is outside the domain");
    if (problem.info().sigma_degenerate && !config.allow_degenerate_sigma) {
        throw InvalidArgument("problem '" + problem.info().name +
                              "' has no strongly convex regularizer; set allow_degenerate_sigma");
    }

    PathRun run;
    run.h = config.h();
    const double factor = lambda_factor(config.method, run.h);
    const DirectionOracle directions = config.direction_mode == DirectionMode::cg
                                           ? DirectionOracle::cg(config.delta, config.cg_max_iters)
                                           : DirectionOracle::exact();
    CountingOracle oracle(problem, run.counters);
    WarmStart warm;

    auto knot_residual = [&](const Vector& x, double lambda) {
        ++run.counters.metric_evals;
        return problem.F_grad(x, lambda).norm();
    };

    const double ratio = config.lambda_min / config.lambda_max;
    Vector x = x0;
    double lambda = config.lambda_max;
    run.knots.push_back({lambda, x, knot_residual(x, lambda)});
    for (int k = 0; k < config.K; ++k) {
        StepResult step;
        try {
            step = guarded_step(config, oracle, x, lambda, factor, run.h, directions, warm, 0);
        } catch (const Error& e) {
            throw PathFailure("step " + std::to_string(k) + " failed: " + e.what(), run);
        }
        // Recompute the schedule from k so rounding does not accumulate.
        const double lambda_next =
            k + 1 == config.K ? config.lambda_min
                              : config.lambda_max * std::pow(ratio, static_cast<double>(k + 1) / config.K);
        if (std::abs(step.lambda_next - lambda_next) > 1e-9 * lambda_next) {
            throw PathFailure("lambda schedule drifted at step " + std::to_string(k), run);
        }
        step.diagnostics.k = k;
        step.diagnostics.residual_r_k = run.knots.back().residual;
        if (!config.record_diagnostics) step.diagnostics.residual_vectors.clear();
        if (step.diagnostics.domain_splits > 0) ++run.domain_guard_events;
        run.diagnostics.push_back(std::move(step.diagnostics));
        x = std::move(step.x_next);
        lambda = lambda_next;
        run.knots.push_back({lambda, x, knot_residual(x, lambda)});
    }
    return run;
}

OmegaInit initialize_from_omega(const Problem& problem, double lambda_max, std::optional<double> L,
                                OracleCounters* counters) {
    const auto x_omega = problem.omega_minimizer();
    if (!x_omega) throw InvalidArgument("problem '" + problem.info().name + "' has no known minimizer of Omega");
    OracleCounters local;
    CountingOracle oracle(problem, counters ? *counters : local);
    const Vector g = oracle.f_grad(*x_omega);
    const Matrix H = oracle.hessian(*x_omega, lambda_max);
    oracle.note_solve();
    OmegaInit out;
    out.x0 = *x_omega + solve_spd(H, g).direction;

    const double Lc = L ? *L : problem.info().lipschitz.value_or(std::numeric_limits<double>::infinity());
    const double denom = problem.info().mu + lambda_max * problem.info().sigma;
    const double gn = g.norm();
    if (gn == 0.0) {
        out.certified_bound = 0.0;
    } else if (!(denom > 0.0) || !std::isfinite(Lc)) {
        out.certified_bound = std::numeric_limits<double>::infinity();
    } else {
        out.certified_bound = Lc * (1.0 + lambda_max) * gn * gn / (2.0 * denom * denom);
    }
    return out;
}

NewtonInit initialize_by_newton(const Problem& problem, double lambda_max, double tol, int max_iters,
                                OracleCounters* counters) {
    if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
    OracleCounters local;
    CountingOracle oracle(problem, counters ? *counters : local);
    NewtonInit out;
    out.x0 = problem.domain_center();
    Vector g = oracle.F_grad(out.x0, lambda_max);
    out.residual = g.norm();
    double value = problem.F_value(out.x0, lambda_max);
    int stalls = 0;
    double best_residual = out.residual;
    Vector best_x = out.x0;
    while (out.residual > tol) {
        if (out.iterations >= max_iters) {
            throw ConvergenceFailure("Newton initializer hit " + std::to_string(max_iters) +
                                     " iterations at residual " + sci(out.residual));
        }
        const Matrix H = oracle.hessian(out.x0, lambda_max);
        oracle.note_solve();
        const Vector d = solve_spd(H, g).direction;
        const double slope = g.dot(d);
        double t = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 30; ++halving, t *= 0.5) {
            const Vector trial = out.x0 + t * d;
            if (!problem.domain_check(trial)) continue;
            const Vector g_trial = oracle.F_grad(trial, lambda_max);
            const double v_trial = problem.F_value(trial, lambda_max);
            const double r_trial = g_trial.norm();
            // Armijo, or a residual decrease once values stop resolving.
            if (v_trial <= value + 1e-4 * t * slope || r_trial < out.residual) {
                out.x0 = trial;
                g = g_trial;
                value = v_trial;
                out.residual = r_trial;
                accepted = true;
                break;
            }
        }
        ++out.iterations;
        if (!accepted) {
            throw ConvergenceFailure("Newton initializer stalled at residual " + sci(out.residual));
        }
        // Past the quadratic phase the residual only wanders at rounding level.
        if (out.residual < 0.5 * best_residual) {
            stalls = 0;
        } else {
            ++stalls;
        }
        if (out.residual < best_residual) {
            best_residual = out.residual;
            best_x = out.x0;
        }
        if (stalls >= 3) {
            const double scale = problem.f_grad(best_x).norm() + lambda_max * problem.omega_grad(best_x).norm();
            if (best_residual <= std::sqrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, scale)) {
                out.x0 = best_x;
                out.residual = best_residual;
                out.at_rounding_floor = true;
                break;
            }
        }
    }
    return out;
}

}  // namespace pathode
