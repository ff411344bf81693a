#include "pathode/theory.hpp"

#include "pathode/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pathode {

BoundInputs BoundInputs::euler(const TheoryConstants& c) {
    return {c.L(), c.G(), c.tau(), c.mu_tilde(), c.T_euler()};
}

BoundInputs BoundInputs::trapezoid(const TheoryConstants& c) {
    return {c.L(), c.G(), c.tau(), c.mu_tilde(), c.T_trap()};
}

namespace {

void require_eps(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be positive and finite");
}

BoundReport finish(std::string method, const BoundInputs& in, double eps, std::vector<BoundTerm> terms) {
    BoundReport r;
    r.method = std::move(method);
    r.inputs = in;
    r.eps = eps;
    r.terms = std::move(terms);
    auto best = r.terms.begin();
    for (auto it = r.terms.begin(); it != r.terms.end(); ++it) {
        if (it->value > best->value) best = it;
    }
    r.binding_term = best->name;
    const double k = std::ceil(best->value);
    if (!std::isfinite(k) || k > 9.0e18) {
        r.K_required = std::numeric_limits<std::int64_t>::max();
        r.warnings.push_back("iteration bound is not representable");
    } else {
        r.K_required = std::max<std::int64_t>(1, static_cast<std::int64_t>(k));
    }
    return r;
}

BoundReport with_constants(BoundReport r, const TheoryConstants& c) {
    r.constants = c;
    if (c.estimated()) r.warnings.push_back("constants are estimated, not certified");
    return r;
}

void warn_eps_above_mu_tilde(BoundReport& r, const BoundInputs& in) {
    if (r.eps > in.mu_tilde) {
        r.warnings.push_back("eps exceeds mu + lambda_min sigma; the inexact bound's precondition fails");
    }
}

}  // namespace

BoundReport k_euler(const BoundInputs& in, double eps, double f_gap) {
    require_eps(eps);
    if (!(f_gap >= 0.0)) throw InvalidArgument("f_gap must be >= 0");
    std::vector<BoundTerm> terms = {
        {"2T", 2.0 * in.T},
        {"sqrt(LG)tauT/sqrt3", std::sqrt(in.L * in.G) * in.tau * in.T / std::sqrt(3.0)},
        {"4fgap*tauLT/eps", 4.0 * f_gap * in.tau * in.L * in.T / eps},
        {"2sqrtL(tauG+1)T/sqrt(eps)", 2.0 * std::sqrt(in.L) * (in.tau * in.G + 1.0) * in.T / std::sqrt(eps)},
    };
    BoundReport r = finish("euler", in, eps, std::move(terms));
    r.f_gap = f_gap;
    return r;
}

BoundReport k_euler(const TheoryConstants& c, double eps, double f_gap) {
    return with_constants(k_euler(BoundInputs::euler(c), eps, f_gap), c);
}

BoundReport k_trapezoid(const BoundInputs& in, double eps) {
    require_eps(eps);
    const double g1 = 1.0 + in.G;
    std::vector<BoundTerm> terms = {
        {"10T", 10.0 * in.T},
        {"8LT(1+G)/mu_tilde", 8.0 * in.L * in.T * g1 / in.mu_tilde},
        {"6sqrtL(1+G)^1.5T/eps^0.5", 6.0 * std::sqrt(in.L) * std::pow(g1, 1.5) * in.T / std::sqrt(eps)},
        {"5tau^(2/3)L(1+G)^(4/3)T/eps^(1/3)",
         5.0 * std::pow(in.tau, 2.0 / 3.0) * in.L * std::pow(g1, 4.0 / 3.0) * in.T / std::cbrt(eps)},
    };
    return finish("trapezoid", in, eps, std::move(terms));
}

BoundReport k_trapezoid(const TheoryConstants& c, double eps) {
    return with_constants(k_trapezoid(BoundInputs::trapezoid(c), eps), c);
}

BoundReport k_euler_approx(const BoundInputs& in, double eps, double f_gap) {
    require_eps(eps);
    if (!(f_gap >= 0.0)) throw InvalidArgument("f_gap must be >= 0");
    std::vector<BoundTerm> terms = {
        {"2T", 2.0 * in.T},
        {"sqrt(LG)tauT/sqrt3", std::sqrt(in.L * in.G) * in.tau * in.T / std::sqrt(3.0)},
        {"8fgap*tauLT/eps", 8.0 * f_gap * in.tau * in.L * in.T / eps},
        {"4sqrtL(tau(G+eps)+1)T/sqrt(eps)",
         4.0 * std::sqrt(in.L) * (in.tau * (in.G + eps) + 1.0) * in.T / std::sqrt(eps)},
    };
    BoundReport r = finish("euler-cg", in, eps, std::move(terms));
    r.f_gap = f_gap;
    warn_eps_above_mu_tilde(r, in);
    return r;
}

BoundReport k_euler_approx(const TheoryConstants& c, double eps, double f_gap) {
    return with_constants(k_euler_approx(BoundInputs::euler(c), eps, f_gap), c);
}

BoundReport k_trapezoid_approx(const BoundInputs& in, double eps) {
    require_eps(eps);
    const double g2 = 2.0 + in.G;
    std::vector<BoundTerm> terms = {
        {"10T", 10.0 * in.T},
        {"8LT(2+G)/mu_tilde", 8.0 * in.L * in.T * g2 / in.mu_tilde},
        {"6sqrtL(2+G)^1.5T/eps^0.5", 6.0 * std::sqrt(in.L) * std::pow(g2, 1.5) * in.T / std::sqrt(eps)},
        {"6Ltau^(2/3)(2+G)^(4/3)T/eps^(1/3)",
         6.0 * in.L * std::pow(in.tau, 2.0 / 3.0) * std::pow(g2, 4.0 / 3.0) * in.T / std::cbrt(eps)},
    };
    BoundReport r = finish("trapezoid-cg", in, eps, std::move(terms));
    warn_eps_above_mu_tilde(r, in);
    return r;
}

BoundReport k_trapezoid_approx(const TheoryConstants& c, double eps) {
    return with_constants(k_trapezoid_approx(BoundInputs::trapezoid(c), eps), c);
}

BoundReport k_grid(const TheoryConstants& c, double eps) {
    require_eps(eps);
    const BoundInputs in = BoundInputs::euler(c);
    BoundReport r = finish("grid", in, eps,
                           {{"sqrt(tauL)GT/eps", std::sqrt(in.tau * in.L) * in.G * in.T / eps}});
    r.K_required = std::max<std::int64_t>(2, r.K_required);
    return with_constants(std::move(r), c);
}

double cg_euler_complexity_estimate(const TheoryConstants& c, double eps, double f_gap) {
    require_eps(eps);
    return std::pow(c.L(), 1.5) * std::pow(c.tau(), 1.5) * f_gap * c.T_euler() / eps;
}

double cg_trapezoid_complexity_estimate(const TheoryConstants& c, double eps) {
    require_eps(eps);
    return c.L() * std::sqrt(c.tau()) * std::pow(2.0 + c.G(), 1.5) * c.T_trap() / std::sqrt(eps);
}

double function_gap_accuracy(double eps, double L) { return eps * eps / (2.0 * L); }

double lipschitz_v(double L, double C, double m, double lambda_max) {
    if (!(m > 0.0)) throw InvalidArgument("mu + lambda_min sigma must be positive");
    return L * C / m + L * L * C * (1.0 + lambda_max) / (m * m);
}

double lipschitz_v(const TheoryConstants& c, double C) {
    return lipschitz_v(c.L(), C, c.mu_tilde(), c.lambda_max());
}

StepsizeCheck stepsize_conditions(const TheoryConstants& c, double h, double lambda_j, double lambda_j1) {
    StepsizeCheck out;
    // xi(lambda) = -lambda: lambda_j / (-2 xi) = 1/2 and -xi = lambda_j.
    const double m = c.mu() + lambda_j1 * c.sigma();
    out.general_limit = std::min(0.5, std::sqrt(3.0 * lambda_j * m * m / (lambda_j * c.L() * c.G())));
    out.simplified_limit = std::min(0.5, std::sqrt(3.0 / (c.tau() * c.tau() * c.L() * c.G())));
    out.general = h <= out.general_limit;
    out.simplified = h <= out.simplified_limit;
    if (!out.general) out.failed = "general";
    if (!out.simplified) out.failed += out.failed.empty() ? "simplified" : ",simplified";
    return out;
}

double step_bound_euler(double r_k, double lambda_k, double lambda_k1, double h, double L, double v_norm) {
    return lambda_k1 / lambda_k * r_k + h * h * L * (1.0 + lambda_k1) / 2.0 * v_norm * v_norm;
}

double step_bound_trapezoid(double r_k, double lambda_ratio, double h, double L, double G, double tau) {
    const double g1 = 1.0 + G;
    return lambda_ratio * r_k + 3.0 * std::pow(h, 3) * L * std::pow(g1, 3) +
           2.0 * std::pow(h, 4) * std::pow(L, 3) * tau * tau * std::pow(g1, 4);
}

double step_length_bound_trapezoid(double h, double G) { return 3.0 * h * (1.0 + G); }

double step_bound_euler_approx(double r_k, double lambda_k, double lambda_k1, double h, double L,
                               double d_hat_norm, double delta_norm) {
    return step_bound_euler(r_k, lambda_k, lambda_k1, h, L, d_hat_norm) + h * delta_norm;
}

double step_bound_trapezoid_approx(double r_k, double lambda_ratio, double h, double L, double G, double tau,
                                   double delta_diff_norm, double delta1_norm) {
    const double g2 = 2.0 + G;
    return lambda_ratio * r_k + 3.0 * std::pow(h, 3) * L * std::pow(g2, 3) +
           2.0 * std::pow(h, 4) * std::pow(L, 3) * tau * tau * std::pow(g2, 4) + 0.5 * h * delta_diff_norm +
           0.5 * h * h * delta1_norm;
}

double interpolation_bound(const std::vector<PathKnot>& knots, double h, double L) {
    double r_max = 0.0;
    for (const PathKnot& k : knots) r_max = std::max(r_max, k.residual);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double dx = (knots[k + 1].x - knots[k].x).norm();
        const double lk = knots[k].lambda;
        worst = std::max(worst, (1.0 + lk) * dx * dx + 2.0 * h * lk * dx);
    }
    return r_max + L / 8.0 * worst;
}

double uniform_euler_bound(double r0, double h, double tau, double L, double f_gap, double G) {
    const double a = tau * G + 1.0;
    return r0 + 2.0 * h * tau * L * f_gap + h * h * L / 8.0 * a * a;
}

double initializer_bound(double L, double lambda_max, double grad_f_norm, double mu, double sigma) {
    const double m = mu + lambda_max * sigma;
    if (grad_f_norm == 0.0) return 0.0;
    if (!(m > 0.0)) return std::numeric_limits<double>::infinity();
    return L * (1.0 + lambda_max) * grad_f_norm * grad_f_norm / (2.0 * m * m);
}

namespace {

// Largest |eigenvalue| of a symmetric matrix by power iteration.
double power_norm(const Matrix& M, CounterRng& rng) {
    const Index n = M.rows();
    if (n == 0) return 0.0;
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.normal();
    if (v.norm() == 0.0) v.setOnes();
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Vector w = M * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        // Two products per check so a +-lambda pair still settles.
        Vector w2 = M * (w / norm);
        const double next = std::sqrt(w2.norm() * norm);
        v = w2.normalized();
        if (std::abs(next - est) <= 1e-12 * next) return next;
        est = next;
    }
    return est;
}

double min_eigenvalue(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

ConstantEstimate estimate_constants(const Problem& problem, const Vector& x0, double lambda_min,
                                    double lambda_max, const EstimateOptions& options) {
    if (options.sample_count < 1) throw InvalidArgument("sample_count must be >= 1");
    if (!problem.domain_check(x0)) throw DomainError("x0 is outside the domain");
    CounterRng rng(options.seed);
    const Index p = problem.dim();
    const double f0 = problem.f_value(x0);
    const double scale = options.radius * (1.0 + x0.norm());
    // Descent directions reach the sublevel set for small enough radii.
    const Vector g0 = problem.f_grad(x0);

    std::vector<Vector> samples{x0};
    for (int s = 1; s < options.sample_count; ++s) {
        Vector u(p);
        for (Index i = 0; i < p; ++i) u(i) = rng.normal();
        if (u.norm() == 0.0) continue;
        u.normalize();
        if (g0.dot(u) > 0.0) u = -u;
        double r = scale * rng.uniform();
        Vector x = x0 + r * u;
        for (int shrink = 0; shrink < 40 && !(problem.domain_check(x) && problem.f_value(x) <= f0); ++shrink) {
            r *= 0.5;
            x = x0 + r * u;
        }
        if (!problem.domain_check(x)) continue;
        if (problem.f_value(x) <= f0) samples.push_back(std::move(x));
    }

    ConstantEstimate est;
    est.accepted_samples = static_cast<int>(samples.size());
    const Matrix Hf0 = problem.f_hess(x0);
    const Matrix Ho0 = problem.omega_hess(x0);
    est.mu_hat = std::numeric_limits<double>::infinity();
    est.sigma_hat = std::numeric_limits<double>::infinity();
    double f_min = f0;
    for (const Vector& x : samples) {
        const Matrix Hf = problem.f_hess(x);
        const Matrix Ho = problem.omega_hess(x);
        est.hess_norm_max = std::max({est.hess_norm_max, power_norm(Hf, rng), power_norm(Ho, rng)});
        const double dist = (x - x0).norm();
        if (dist > 0.0) {
            est.hess_lipschitz_max = std::max({est.hess_lipschitz_max, power_norm(Hf - Hf0, rng) / dist,
                                               power_norm(Ho - Ho0, rng) / dist});
        }
        est.grad_norm_max = std::max({est.grad_norm_max, problem.f_grad(x).norm(), problem.omega_grad(x).norm()});
        est.mu_hat = std::min(est.mu_hat, min_eigenvalue(Hf));
        est.sigma_hat = std::min(est.sigma_hat, min_eigenvalue(Ho));
        f_min = std::min(f_min, problem.f_value(x));
    }
    est.mu_hat = std::max(est.mu_hat, 0.0);
    est.f_gap_hat = f0 - f_min;
    est.notes.push_back("f_gap is f(x0) minus the smallest sampled f");
    if (est.accepted_samples < std::min(options.sample_count, 8)) {
        est.reliable = false;
        est.notes.push_back("few samples landed in the sublevel set");
    }
    double sigma = est.sigma_hat;
    if (!(sigma > 1e-12)) {
        est.reliable = false;
        est.notes.push_back("sigma_hat is not positive; floored at 1e-12");
        sigma = 1e-12;
    }
    const double L = std::max({est.hess_norm_max, est.hess_lipschitz_max, 1e-300});
    const double G = std::max(est.grad_norm_max, 1e-300);
    est.constants = TheoryConstants(est.mu_hat, sigma, L, G, lambda_min, lambda_max, true);
    return est;
}

std::optional<TheoryConstants> certified_constants(const Problem& problem, const Vector& x0, double lambda_min,
                                                   double lambda_max) {
    const ProblemInfo& info = problem.info();
    if (!info.lipschitz || info.sigma_degenerate || !(info.sigma > 0.0)) return std::nullopt;
    if (const auto* q = dynamic_cast<const QuadraticRidge*>(&problem)) {
        const double G = q->gradient_bound(x0);
        if (!std::isfinite(G)) return std::nullopt;
        return TheoryConstants(info.mu, info.sigma, *info.lipschitz, G, lambda_min, lambda_max);
    }
    if (dynamic_cast<const LogisticRidge*>(&problem) && info.grad_f_bound) {
        // ||grad Omega(x(lambda))|| = ||x(lambda)|| <= ||grad f|| / lambda; doubled for iterates near the path.
        const double G = *info.grad_f_bound * std::max(1.0, 2.0 / lambda_min);
        return TheoryConstants(info.mu, info.sigma, *info.lipschitz, G, lambda_min, lambda_max);
    }
    return std::nullopt;
}

std::optional<double> certified_f_gap(const Problem& problem, const Vector& x0) {
    if (!problem.info().f_star) return std::nullopt;
    return std::max(problem.f_value(x0) - *problem.info().f_star, 0.0);
}

}  // namespace pathode
