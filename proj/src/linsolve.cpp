#include "pathode/linsolve.hpp"

#include <cmath>
#include <string>

namespace pathode {

DirectionResult solve_spd(const Matrix& H, const Vector& g) {
    if (H.rows() != H.cols() || H.rows() != g.size())
        throw InvalidArgument("solve_spd: H must be square and match g");
    if (!H.allFinite() || !g.allFinite()) throw NumericError("solve_spd: non-finite input");
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("solve_spd: matrix is not positive definite");
    DirectionResult out;
    out.mode = DirectionMode::exact;
    out.direction = llt.solve(-g);
    out.residual = H * out.direction + g;
    out.residual_norm = out.residual.norm();
    if (!out.direction.allFinite()) throw NumericError("solve_spd: non-finite solution");
    return out;
}

namespace {

Vector apply_op(const HessVecFn& hessvec, const Vector& v) {
    Vector Hv = hessvec(v);
    if (Hv.size() != v.size() || !Hv.allFinite())
        throw NumericError("cg_solve: Hessian-vector product is not finite");
    return Hv;
}

}  // namespace

DirectionResult cg_solve(const HessVecFn& hessvec, const Vector& g, const Vector& warm_start,
                         const CgOptions& options) {
    if (warm_start.size() != g.size()) throw InvalidArgument("cg_solve: warm start has wrong size");
    if (!(options.delta > 0.0)) throw InvalidArgument("cg_solve: delta must be positive");
    const int max_iters = options.max_iters > 0 ? options.max_iters : 20 * static_cast<int>(g.size());
    const int refresh = options.recompute_every > 0 ? options.recompute_every : 50;
    const double delta = options.delta;

    DirectionResult out;
    out.mode = DirectionMode::cg;
    Vector y = warm_start;
    Vector r = apply_op(hessvec, y) + g;
    double rr = r.squaredNorm();
    out.initial_residual = std::sqrt(rr);

    int iter = 0;
    bool converged = out.initial_residual <= delta;
    Vector p = -r;
    while (!converged && iter < max_iters) {
        const Vector Hp = apply_op(hessvec, p);
        const double curvature = p.dot(Hp);
        if (!(curvature > 0.0)) {
            if (rr == 0.0) break;
            throw NumericError("cg_solve: operator is not positive definite along a search direction");
        }
        const double alpha = rr / curvature;
        y += alpha * p;
        r += alpha * Hp;
        ++iter;
        if (options.observer) options.observer(iter, y);

        if (iter % refresh == 0) r = apply_op(hessvec, y) + g;
        double rr_next = r.squaredNorm();
        if (std::sqrt(rr_next) <= delta) {
            const Vector r_true = apply_op(hessvec, y) + g;
            if (r_true.norm() <= delta) {
                r = r_true;
                converged = true;
                break;
            }
            // Recurrence drifted below the target; restart from the true residual.
            r = r_true;
            rr = r.squaredNorm();
            p = -r;
            continue;
        }
        const double beta = rr_next / rr;
        rr = rr_next;
        p = -r + beta * p;
    }

    if (!converged) r = apply_op(hessvec, y) + g;
    out.direction = std::move(y);
    out.residual = r;
    out.residual_norm = r.norm();
    out.inner_iterations = iter;
    out.converged = converged || out.residual_norm <= delta;
    return out;
}

int cg_iteration_bound(double kappa, double initial_residual, double delta) {
    if (!(delta > 0.0)) throw InvalidArgument("cg_iteration_bound: delta must be positive");
    if (!(kappa >= 1.0)) throw InvalidArgument("cg_iteration_bound: kappa must be >= 1");
    if (initial_residual <= 0.0) return 0;
    const double root = std::sqrt(kappa);
    const double bound = 0.5 * (root + 1.0) * std::log(2.0 * root * initial_residual / delta);
    if (bound <= 0.0) return 0;
    return static_cast<int>(std::ceil(bound));
}

}  // namespace pathode
