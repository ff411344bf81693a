#include "pathode/path.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace pathode {

KnotPath::KnotPath(std::vector<PathKnot> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw InvalidArgument("a path needs at least two knots");
    const Index p = knots_.front().x.size();
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (knots_[i].x.size() != p) throw InvalidArgument("knots have different dimensions");
        if (!(knots_[i].lambda > 0.0)) throw InvalidArgument("knot lambdas must be positive");
        if (i > 0 && !(knots_[i].lambda < knots_[i - 1].lambda)) {
            throw InvalidArgument("knot lambdas must be strictly decreasing");
        }
    }
}

std::size_t KnotPath::locate(double lambda) const {
    const double hi = lambda_max();
    const double lo = lambda_min();
    if (!(lambda <= hi * (1.0 + 1e-9) && lambda >= lo * (1.0 - 1e-9))) {
        throw InvalidArgument("lambda outside the path range");
    }
    // first knot with knot.lambda < lambda; the interval ends there.
    auto it = std::upper_bound(knots_.begin(), knots_.end(), lambda,
                               [](double l, const PathKnot& k) { return l > k.lambda; });
    std::size_t idx = static_cast<std::size_t>(it - knots_.begin());
    if (idx == 0) return 0;
    if (idx >= knots_.size()) return intervals() - 1;
    return idx - 1;
}

Vector KnotPath::query(double lambda) const {
    const std::size_t k = locate(lambda);
    const double clamped = std::clamp(lambda, knots_[k + 1].lambda, knots_[k].lambda);
    if (clamped == knots_[k].lambda) return knots_[k].x;
    if (clamped == knots_[k + 1].lambda) return knots_[k + 1].x;
    return on_interval(k, clamped);
}

Vector PiecewiseLinearPath::on_interval(std::size_t k, double lambda) const {
    const PathKnot& a = knots()[k];
    const PathKnot& b = knots()[k + 1];
    const double alpha = (lambda - b.lambda) / (a.lambda - b.lambda);
    return alpha * a.x + (1.0 - alpha) * b.x;
}

Vector PiecewiseConstantPath::on_interval(std::size_t k, double lambda) const {
    if (lambda == knots()[k + 1].lambda) return knots()[k + 1].x;
    return knots()[k].x;
}

Vector interpolate(const KnotPath& path, double lambda) { return path.query(lambda); }

double residual_norm(const Problem& problem, const Vector& x, double lambda, OracleCounters* counters) {
    if (!problem.domain_check(x)) throw DomainError("residual requested outside the domain");
    if (counters) ++counters->metric_evals;
    return problem.F_grad(x, lambda).norm();
}

double accuracy_midpoint(const Problem& problem, const KnotPath& path, OracleCounters* counters) {
    const auto& knots = path.knots();
    double worst = residual_norm(problem, knots[0].x, knots[0].lambda, counters);
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double mid = 0.5 * (knots[k].lambda + knots[k + 1].lambda);
        worst = std::max(worst, residual_norm(problem, path.on_interval(k, mid), mid, counters));
        worst = std::max(worst, residual_norm(problem, knots[k + 1].x, knots[k + 1].lambda, counters));
    }
    return worst;
}

double accuracy_dense(const Problem& problem, const KnotPath& path, int points_per_interval,
                      OracleCounters* counters) {
    if (points_per_interval < 2) throw InvalidArgument("dense grid needs at least 2 points per interval");
    const auto& knots = path.knots();
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double hi = knots[k].lambda;
        const double lo = knots[k + 1].lambda;
        for (int j = 0; j < points_per_interval; ++j) {
            Vector x;
            double lambda;
            if (j == 0) {
                lambda = lo;
                x = knots[k + 1].x;
            } else if (j == points_per_interval - 1) {
                lambda = hi;
                x = knots[k].x;
            } else {
                lambda = lo + (hi - lo) * static_cast<double>(j) / (points_per_interval - 1);
                x = path.on_interval(k, lambda);
            }
            worst = std::max(worst, residual_norm(problem, x, lambda, counters));
        }
    }
    return worst;
}

void write_path_csv(const KnotPath& path, std::ostream& out) {
    const Index p = path.knots().front().x.size();
    out << "lambda";
    for (Index i = 1; i <= p; ++i) out << ",x_" << i;
    out << '\n';
    const auto old_precision = out.precision();
    out << std::setprecision(17);
    for (const PathKnot& k : path.knots()) {
        out << k.lambda;
        for (Index i = 0; i < p; ++i) out << ',' << k.x[i];
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace pathode
