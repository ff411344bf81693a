#include "pathode/baselines.hpp"

#include "pathode/linsolve.hpp"

#include <cmath>

namespace pathode {

std::string_view to_string(InnerSolver solver) {
    return solver == InnerSolver::newton ? "newton" : "agd";
}

std::vector<double> grid_points(const GridSearchConfig& config) {
    if (config.num_points < 2) throw InvalidArgument("grid needs at least 2 points");
    if (!(config.lambda_min > 0.0 && config.lambda_max > config.lambda_min)) {
        throw InvalidArgument("need 0 < lambda_min < lambda_max");
    }
    const int K = config.num_points;
    const double ratio = config.lambda_min / config.lambda_max;
    std::vector<double> out(K);
    out.front() = config.lambda_max;
    out.back() = config.lambda_min;
    for (int k = 1; k + 1 < K; ++k) {
        out[k] = config.lambda_max * std::pow(ratio, static_cast<double>(k) / (K - 1));
    }
    return out;
}

std::int64_t grid_k_from_eps(const TheoryConstants& c, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const double K = std::ceil(std::sqrt(c.tau() * c.L()) * c.G() * c.T_euler() / eps);
    if (!std::isfinite(K) || K > 9.0e18) throw InvalidArgument("grid size overflows");
    return std::max<std::int64_t>(2, static_cast<std::int64_t>(K));
}

InnerResult newton_inner(CountingOracle& oracle, double lambda, const Vector& x_start, double tol,
                         int max_iters) {
    const Problem& problem = oracle.problem();
    InnerResult out;
    out.x = x_start;
    Vector g = oracle.F_grad(out.x, lambda);
    out.residual = g.norm();
    while (out.residual > tol) {
        if (out.iterations >= max_iters) {
            throw ConvergenceFailure("Newton inner solver hit its cap at lambda=" + std::to_string(lambda));
        }
        const Matrix H = oracle.hessian(out.x, lambda);
        oracle.note_solve();
        const Vector d = solve_spd(H, g).direction;
        double t = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 30; ++halving, t *= 0.5) {
            const Vector trial = out.x + t * d;
            if (!problem.domain_check(trial)) continue;
            const Vector g_trial = oracle.F_grad(trial, lambda);
            const double r_trial = g_trial.norm();
            if (r_trial < out.residual || r_trial <= tol) {
                out.x = trial;
                g = g_trial;
                out.residual = r_trial;
                accepted = true;
                break;
            }
        }
        ++out.iterations;
        if (!accepted) throw ConvergenceFailure("Newton inner solver stalled at lambda=" + std::to_string(lambda));
    }
    return out;
}

InnerResult agd_inner(CountingOracle& oracle, double lambda, const Vector& x_start, double tol,
                      double mu_eff, double L_eff, int max_iters) {
    if (!(mu_eff > 0.0) || !(L_eff >= mu_eff)) throw InvalidArgument("agd needs 0 < mu_eff <= L_eff");
    const double sk = std::sqrt(L_eff / mu_eff);
    const double beta = (sk - 1.0) / (sk + 1.0);
    Vector x = x_start;
    Vector y = x_start;
    Vector g = oracle.F_grad(y, lambda);
    InnerResult out;
    out.residual = g.norm();
    while (out.residual > tol) {
        if (out.iterations >= max_iters) {
            throw ConvergenceFailure("accelerated gradient hit its cap at lambda=" + std::to_string(lambda));
        }
        Vector x_next = y - g / L_eff;
        y = x_next + beta * (x_next - x);
        x = std::move(x_next);
        if (!oracle.problem().domain_check(y)) throw DomainError("accelerated gradient left the domain");
        g = oracle.F_grad(y, lambda);
        if (!g.allFinite()) throw NumericError("non-finite gradient in accelerated gradient");
        out.residual = g.norm();
        ++out.iterations;
    }
    out.x = y;
    return out;
}

InnerResult agd_inner(const Problem& problem, double lambda, const Vector& x_start, double tol,
                      double mu_eff, double L_eff, int max_iters) {
    OracleCounters counters;
    CountingOracle oracle(problem, counters);
    return agd_inner(oracle, lambda, x_start, tol, mu_eff, L_eff, max_iters);
}

GridRun solve_grid(const Problem& problem, const Vector& x0, const GridSearchConfig& config) {
    if (!(config.inner_tol > 0.0)) throw InvalidArgument("inner_tol must be positive");
    if (!problem.domain_check(x0)) throw DomainError("x0 is outside the domain");
    const ProblemInfo& info = problem.info();
    if (info.sigma_degenerate && !config.allow_degenerate_sigma) {
        throw InvalidArgument("problem '" + info.name + "' has no strongly convex regularizer; set allow_degenerate_sigma");
    }
    if (config.inner_solver == InnerSolver::agd &&
        (!info.grad_lipschitz_f || !info.grad_lipschitz_omega)) {
        throw InvalidArgument("accelerated gradient needs gradient Lipschitz constants for '" + info.name + "'");
    }
    const std::vector<double> lambdas = grid_points(config);
    const int cap = config.max_inner_iters > 0 ? config.max_inner_iters
                    : config.inner_solver == InnerSolver::newton ? 100 : 1000000;

    GridRun run;
    CountingOracle oracle(problem, run.counters);
    Vector x = x0;
    for (double lambda : lambdas) {
        InnerResult r;
        try {
            if (config.inner_solver == InnerSolver::newton) {
                r = newton_inner(oracle, lambda, x, config.inner_tol, cap);
            } else {
                const double mu_eff = info.mu + lambda * info.sigma;
                const double L_eff = *info.grad_lipschitz_f + lambda * *info.grad_lipschitz_omega;
                r = agd_inner(oracle, lambda, x, config.inner_tol, mu_eff, std::max(L_eff, mu_eff), cap);
            }
        } catch (const Error& e) {
            throw GridFailure(std::string("grid point lambda=") + std::to_string(lambda) + ": " + e.what(), run);
        }
        x = r.x;
        run.points.push_back({lambda, r.iterations, r.residual});
        run.knots.push_back({lambda, x, r.residual});
    }
    return run;
}

}  // namespace pathode
