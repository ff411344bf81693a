#pragma once

#include "pathode/constants.hpp"
#include "pathode/path.hpp"
#include "pathode/problem.hpp"

#include <string_view>
#include <vector>

namespace pathode {

enum class InnerSolver { newton, agd };

std::string_view to_string(InnerSolver solver);

struct GridSearchConfig {
    int num_points = 2;
    InnerSolver inner_solver = InnerSolver::newton;
    double inner_tol = 1e-6;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    /// Per grid point; 0 picks 100 for Newton and 10^6 for AGD.
    int max_inner_iters = 0;
    bool allow_degenerate_sigma = false;
};

/// lambda_k = lambda_max (lambda_min / lambda_max)^(k / (K - 1)), k = 0..K-1.
std::vector<double> grid_points(const GridSearchConfig& config);

/// ceil(sqrt(tau L) G T / eps) with T = ln(lambda_max / lambda_min), at least 2.
std::int64_t grid_k_from_eps(const TheoryConstants& c, double eps);

struct InnerResult {
    Vector x;
    int iterations = 0;
    double residual = 0.0;
};

/// Newton on F_lambda with full steps, halving up to 30 times only when a full
/// step leaves the domain or fails to reduce the residual.
InnerResult newton_inner(CountingOracle& oracle, double lambda, const Vector& x_start, double tol,
                         int max_iters = 100);

/// Constant-momentum accelerated gradient: beta = (sqrt(kappa) - 1)/(sqrt(kappa) + 1),
/// step 1 / L_eff. Stops at the first extrapolated point with ||grad F_lambda|| <= tol.
InnerResult agd_inner(CountingOracle& oracle, double lambda, const Vector& x_start, double tol,
                      double mu_eff, double L_eff, int max_iters = 1000000);
InnerResult agd_inner(const Problem& problem, double lambda, const Vector& x_start, double tol,
                      double mu_eff, double L_eff, int max_iters = 1000000);

struct GridPointStat {
    double lambda = 0.0;
    int inner_iterations = 0;
    double residual = 0.0;
};

struct GridRun {
    std::vector<PathKnot> knots;
    std::vector<GridPointStat> points;
    OracleCounters counters;

    PiecewiseConstantPath path() const { return PiecewiseConstantPath(knots); }
};

class GridFailure : public Error {
public:
    GridFailure(const std::string& what, GridRun partial) : Error(what), partial_(std::move(partial)) {}
    const GridRun& partial() const { return partial_; }

private:
    GridRun partial_;
};

/// Sweeps the grid from lambda_max down, warm-starting each point from the last
/// solution. The first point starts from x0.
GridRun solve_grid(const Problem& problem, const Vector& x0, const GridSearchConfig& config);

}  // namespace pathode
