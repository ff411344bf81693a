#include "helpers.hpp"

#include "pathode/dataset.hpp"
#include "pathode/linsolve.hpp"
#include "pathode/path.hpp"
#include "pathode/steppers.hpp"
#include "pathode/theory.hpp"

#include <cmath>
#include <memory>

using namespace pathode;

namespace {

constexpr double kSlack = 1e-9;

struct Instance {
    std::shared_ptr<const Problem> problem;
    TheoryConstants constants;
    double f_gap = 0.0;
    Vector x0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

Instance quadratic_instance(std::uint64_t seed) {
    CounterRng rng(seed);
    const Index p = 2 + static_cast<Index>(rng.uniform() * 6);
    const Index n = p + 3 + static_cast<Index>(rng.uniform() * 10);
    auto q = make_quadratic_ridge(testing::random_matrix(rng, n, p), testing::random_vector(rng, n));
    Instance in;
    in.lambda_min = std::exp(-3.0 * rng.uniform());
    in.lambda_max = in.lambda_min * std::exp(1.0 + 3.0 * rng.uniform());
    in.x0 = q->exact_solution(in.lambda_max);
    in.constants = *certified_constants(*q, in.x0, in.lambda_min, in.lambda_max);
    in.f_gap = *certified_f_gap(*q, in.x0);
    in.problem = q;
    return in;
}

Instance logistic_instance(std::uint64_t seed) {
    Dataset d = synthetic_logistic(40, 4, seed);
    auto lr = make_logistic_ridge(d.features, d.labels);
    Instance in;
    in.lambda_min = 0.05;
    in.lambda_max = 5.0;
    in.x0 = initialize_by_newton(*lr, in.lambda_max, 1e-14).x0;
    in.constants = *certified_constants(*lr, in.x0, in.lambda_min, in.lambda_max);
    in.problem = lr;
    return in;
}

PathRun run(const Instance& in, Method m, int K, DirectionMode mode = DirectionMode::exact, double delta = 0.0) {
    StepperConfig c;
    c.method = m;
    c.direction_mode = mode;
    c.delta = delta;
    c.K = K;
    c.lambda_min = in.lambda_min;
    c.lambda_max = in.lambda_max;
    c.record_diagnostics = true;
    return run_path(*in.problem, in.x0, c);
}

std::vector<Instance> suite() {
    std::vector<Instance> out;
    for (std::uint64_t s = 1; s <= 6; ++s) out.push_back(quadratic_instance(100 + s));
    for (std::uint64_t s = 1; s <= 3; ++s) out.push_back(logistic_instance(200 + s));
    return out;
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("euler one-step residual bound") {
    for (const Instance& in : suite()) {
        for (int K : {20, 80}) {
            PathRun r = run(in, Method::euler, K);
            const double L = in.constants.L();
            for (int k = 0; k < K; ++k) {
                const PathKnot& a = r.knots[k];
                const PathKnot& b = r.knots[k + 1];
                const double v = vector_field(*in.problem, a.x, b.lambda).norm();
                const double rhs = step_bound_euler(a.residual, a.lambda, b.lambda, r.h, L, v);
                CHECK(rhs - b.residual >= -kSlack);
            }
        }
    }
}

TEST_CASE("trapezoid one-step residual and step-length bounds") {
    for (const Instance& in : suite()) {
        for (int K : {20, 80}) {
            PathRun r = run(in, Method::trapezoid, K);
            const TheoryConstants& c = in.constants;
            for (int k = 0; k < K; ++k) {
                const PathKnot& a = r.knots[k];
                const PathKnot& b = r.knots[k + 1];
                const double rhs = step_bound_trapezoid(a.residual, b.lambda / a.lambda, r.h, c.L(), c.G(), c.tau());
                CHECK(rhs - b.residual >= -kSlack);
                CHECK(step_length_bound_trapezoid(r.h, c.G()) - (b.x - a.x).norm() >= -kSlack);
            }
        }
    }
}

TEST_CASE("euler-cg one-step residual bound") {
    for (const Instance& in : suite()) {
        for (double delta : {1e-3, 1e-6}) {
            const int K = 40;
            PathRun r = run(in, Method::euler, K, DirectionMode::cg, delta);
            REQUIRE(r.diagnostics.size() == static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k) {
                const PathKnot& a = r.knots[k];
                const PathKnot& b = r.knots[k + 1];
                const StepDiagnostics& d = r.diagnostics[k];
                CHECK(d.direction_residuals[0] <= delta);
                const double rhs = step_bound_euler_approx(a.residual, a.lambda, b.lambda, r.h, in.constants.L(),
                                                           d.direction_norms[0], d.direction_residuals[0]);
                CHECK(rhs - b.residual >= -kSlack);
            }
        }
    }
}

TEST_CASE("trapezoid-cg one-step residual bound") {
    for (const Instance& in : suite()) {
        for (double delta : {1e-3, 1e-6}) {
            const int K = 40;
            PathRun r = run(in, Method::trapezoid, K, DirectionMode::cg, delta);
            const TheoryConstants& c = in.constants;
            for (int k = 0; k < K; ++k) {
                const PathKnot& a = r.knots[k];
                const PathKnot& b = r.knots[k + 1];
                const StepDiagnostics& d = r.diagnostics[k];
                REQUIRE(d.residual_vectors.size() == 2);
                const double diff = (d.residual_vectors[0] - d.residual_vectors[1]).norm();
                const double rhs = step_bound_trapezoid_approx(a.residual, b.lambda / a.lambda, r.h, c.L(), c.G(),
                                                               c.tau(), diff, d.residual_vectors[0].norm());
                CHECK(rhs - b.residual >= -kSlack);
            }
        }
    }
}

TEST_CASE("interpolation bound dominates the measured path accuracy") {
    for (const Instance& in : suite()) {
        for (Method m : {Method::euler, Method::trapezoid, Method::rk4}) {
            for (int K : {15, 60}) {
                PathRun r = run(in, m, K);
                PiecewiseLinearPath path(r.knots);
                const double bound = interpolation_bound(r.knots, r.h, in.constants.L());
                CHECK(bound - accuracy_midpoint(*in.problem, path) >= -kSlack);
                CHECK(bound - accuracy_dense(*in.problem, path, 50) >= -kSlack);
            }
        }
    }
}

TEST_CASE("uniform euler bound under the simplified step-size condition") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        CounterRng rng(300 + seed);
        const Index p = 2 + static_cast<Index>(rng.uniform() * 3);
        const Matrix A = 0.3 * testing::random_matrix(rng, p + 4, p);
        auto q = make_quadratic_ridge(A, 0.3 * testing::random_vector(rng, p + 4));
        const double lmin = 0.5 + rng.uniform(), lmax = lmin * (1.5 + 2.0 * rng.uniform());
        const Vector x0 = q->exact_solution(lmax) + 1e-3 * testing::random_vector(rng, p);
        auto c = certified_constants(*q, x0, lmin, lmax);
        if (!c) continue;
        const auto gap = *certified_f_gap(*q, x0);
        StepperConfig cfg;
        cfg.method = Method::euler;
        cfg.K = 20 + static_cast<int>(rng.uniform() * 100);
        cfg.lambda_min = lmin;
        cfg.lambda_max = lmax;
        PathRun r = run_path(*q, x0, cfg);
        bool ok = true;
        for (int k = 0; k < cfg.K; ++k) ok = ok && stepsize_conditions(*c, r.h, r.knots[k].lambda, r.knots[k + 1].lambda).ok();
        if (!ok) continue;
        ++checked;
        const double bound = uniform_euler_bound(r.knots[0].residual, r.h, c->tau(), c->L(), gap, c->G());
        for (const PathKnot& k : r.knots) CHECK(bound - k.residual >= -kSlack);
    }
    CHECK(checked >= 10);
}

TEST_CASE("cg iterations respect the warm-start convergence bound") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const Instance in = quadratic_instance(400 + seed);
        const auto* q = dynamic_cast<const QuadraticRidge*>(in.problem.get());
        Eigen::SelfAdjointEigenSolver<Matrix> es(q->gram());
        const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        for (Method m : {Method::euler, Method::trapezoid, Method::rk4}) {
            const double delta = 1e-7;
            PathRun r = run(in, m, 30, DirectionMode::cg, delta);
            for (const StepDiagnostics& d : r.diagnostics) {
                for (std::size_t s = 0; s < d.cg_iterations.size(); ++s) {
                    const double kappa = (hi + d.stage_lambdas[s]) / (lo + d.stage_lambdas[s]);
                    CHECK(d.cg_iterations[s] <= cg_iteration_bound(kappa, d.warm_start_residuals[s], delta));
                    CHECK(d.direction_residuals[s] <= delta);
                }
            }
        }
    }
}

TEST_CASE("counters reconcile with per-step diagnostics") {
    for (const Instance& in : suite()) {
        int stages = 1;
        for (Method m : {Method::euler, Method::trapezoid, Method::rk4}) {
            const int K = 17;
            PathRun exact = run(in, m, K);
            CHECK(exact.counters.hess_builds == stages * K);
            CHECK(exact.counters.linear_solves == stages * K);
            CHECK(exact.counters.metric_evals == K + 1);
            PathRun cg = run(in, m, K, DirectionMode::cg, 1e-6);
            std::int64_t iters = 0;
            std::size_t solves = 0;
            for (const StepDiagnostics& d : cg.diagnostics) {
                for (int it : d.cg_iterations) iters += it;
                solves += d.cg_iterations.size();
            }
            CHECK(solves == static_cast<std::size_t>(stages * K));
            CHECK(cg.counters.cg_iters_total == iters);
            CHECK(cg.counters.hessvec >= iters);
            CHECK(cg.counters.linear_solves == 0);
            CHECK(cg.counters.hess_builds == 0);
            stages *= 2;
        }
    }
}

TEST_CASE("knot schedule is exact") {
    CounterRng rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const Instance in = quadratic_instance(500 + trial);
        const int K = 1 + static_cast<int>(rng.uniform() * 300);
        for (Method m : {Method::euler, Method::rk4}) {
            PathRun r = run(in, m, K);
            REQUIRE(r.knots.size() == static_cast<std::size_t>(K + 1));
            CHECK(r.knots.front().lambda == in.lambda_max);
            CHECK(r.knots.back().lambda == in.lambda_min);
            const double ratio = in.lambda_min / in.lambda_max;
            for (int k = 0; k <= K; ++k) {
                const double expect = in.lambda_max * std::pow(ratio, static_cast<double>(k) / K);
                CHECK(std::abs(r.knots[k].lambda - expect) <= 1e-12 * expect);
            }
        }
    }
}

TEST_CASE("refining K never makes the path much worse") {
    for (const Instance& in : suite()) {
        for (Method m : {Method::euler, Method::trapezoid, Method::rk4}) {
            double prev = std::numeric_limits<double>::infinity();
            for (int K : {10, 20, 40, 80, 160}) {
                const double a = accuracy_midpoint(*in.problem, PiecewiseLinearPath(run(in, m, K).knots));
                CHECK(a <= 1.1 * prev);
                prev = a;
            }
        }
    }
}

}  // TEST_SUITE
