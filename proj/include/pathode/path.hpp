#pragma once

#include "pathode/problem.hpp"
#include "pathode/types.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace pathode {

/// A computed point (lambda_k, x_k) with its residual ||grad F_lambda_k(x_k)||.
struct PathKnot {
    double lambda = 0.0;
    Vector x;
    double residual = 0.0;
};

/// Knots ordered by strictly decreasing lambda, plus a rule for evaluating the
/// approximate path inside each knot interval.
class KnotPath {
public:
    explicit KnotPath(std::vector<PathKnot> knots);
    virtual ~KnotPath() = default;

    const std::vector<PathKnot>& knots() const { return knots_; }
    std::size_t intervals() const { return knots_.size() - 1; }
    double lambda_max() const { return knots_.front().lambda; }
    double lambda_min() const { return knots_.back().lambda; }

    /// Interval k with lambda_{k+1} <= lambda <= lambda_k. Range ends are
    /// accepted within 1e-9 relative.
    std::size_t locate(double lambda) const;

    /// Path value at lambda; equals x_k exactly at every knot.
    Vector query(double lambda) const;

    /// Value on interval k, lambda in [lambda_{k+1}, lambda_k].
    virtual Vector on_interval(std::size_t k, double lambda) const = 0;

private:
    std::vector<PathKnot> knots_;
};

/// x(lambda) = alpha x_k + (1 - alpha) x_{k+1}, alpha = (lambda - lambda_{k+1}) / (lambda_k - lambda_{k+1}).
class PiecewiseLinearPath final : public KnotPath {
public:
    using KnotPath::KnotPath;
    Vector on_interval(std::size_t k, double lambda) const override;
};

/// Holds x_k on [lambda_{k+1}, lambda_k); knots keep their own value.
class PiecewiseConstantPath final : public KnotPath {
public:
    using KnotPath::KnotPath;
    Vector on_interval(std::size_t k, double lambda) const override;
};

Vector interpolate(const KnotPath& path, double lambda);

/// ||grad f(x) + lambda grad Omega(x)||. Counts one metric evaluation when
/// `counters` is given. Throws DomainError outside the domain.
double residual_norm(const Problem& problem, const Vector& x, double lambda,
                     OracleCounters* counters = nullptr);

/// Max residual over all knots and all arithmetic interval midpoints.
double accuracy_midpoint(const Problem& problem, const KnotPath& path,
                         OracleCounters* counters = nullptr);

/// Max residual over `points_per_interval` uniformly spaced lambdas in each
/// interval, endpoints included.
double accuracy_dense(const Problem& problem, const KnotPath& path, int points_per_interval,
                      OracleCounters* counters = nullptr);

/// CSV with header "lambda,x_1,...,x_p", one row per knot, 17 significant digits.
void write_path_csv(const KnotPath& path, std::ostream& out);

}  // namespace pathode
