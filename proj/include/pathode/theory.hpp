#pragma once

#include "pathode/constants.hpp"
#include "pathode/path.hpp"
#include "pathode/problem.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pathode {

/// The handful of scalars each iteration bound actually uses. Lets callers
/// evaluate a formula at inputs no single TheoryConstants can realize.
struct BoundInputs {
    double L = 1.0;
    double G = 1.0;
    double tau = 1.0;
    double mu_tilde = 1.0;
    double T = 1.0;

    static BoundInputs euler(const TheoryConstants& c);
    static BoundInputs trapezoid(const TheoryConstants& c);
};

struct BoundTerm {
    std::string name;
    double value = 0.0;
};

struct BoundReport {
    std::string method;
    std::int64_t K_required = 1;
    std::string binding_term;
    std::vector<BoundTerm> terms;
    BoundInputs inputs;
    std::optional<TheoryConstants> constants;
    double eps = 0.0;
    std::optional<double> f_gap;
    std::vector<std::string> warnings;
};

BoundReport k_euler(const BoundInputs& in, double eps, double f_gap);
BoundReport k_euler(const TheoryConstants& c, double eps, double f_gap);
BoundReport k_trapezoid(const BoundInputs& in, double eps);
BoundReport k_trapezoid(const TheoryConstants& c, double eps);
BoundReport k_euler_approx(const BoundInputs& in, double eps, double f_gap);
BoundReport k_euler_approx(const TheoryConstants& c, double eps, double f_gap);
BoundReport k_trapezoid_approx(const BoundInputs& in, double eps);
BoundReport k_trapezoid_approx(const TheoryConstants& c, double eps);
/// Number of grid points for grid search, as a BoundReport.
BoundReport k_grid(const TheoryConstants& c, double eps);

/// Order-of-magnitude totals for the CG variants (log factors dropped); informational.
double cg_euler_complexity_estimate(const TheoryConstants& c, double eps, double f_gap);
double cg_trapezoid_complexity_estimate(const TheoryConstants& c, double eps);

/// Function-gap accuracy equivalent to gradient accuracy eps: eps^2 / (2 L).
double function_gap_accuracy(double eps, double L);

/// L C / m + L^2 C (1 + lambda_max) / m^2 with m = mu + lambda_min sigma.
double lipschitz_v(double L, double C, double mu_plus_lmin_sigma, double lambda_max);
double lipschitz_v(const TheoryConstants& c, double C = 1.0);

struct StepsizeCheck {
    bool general = false;
    bool simplified = false;
    double general_limit = 0.0;
    double simplified_limit = 0.0;
    bool ok() const { return general && simplified; }
    /// Names of failed conditions, comma separated; empty when ok().
    std::string failed;
};

/// General and simplified step-size conditions for xi(lambda) = -lambda.
StepsizeCheck stepsize_conditions(const TheoryConstants& c, double h, double lambda_j, double lambda_j1);

double step_bound_euler(double r_k, double lambda_k, double lambda_k1, double h, double L, double v_norm);
double step_bound_trapezoid(double r_k, double lambda_ratio, double h, double L, double G, double tau);
/// Step-length clause of the trapezoid local bound: 3 h (1 + G).
double step_length_bound_trapezoid(double h, double G);
double step_bound_euler_approx(double r_k, double lambda_k, double lambda_k1, double h, double L,
                               double d_hat_norm, double delta_norm);
double step_bound_trapezoid_approx(double r_k, double lambda_ratio, double h, double L, double G, double tau,
                                   double delta_diff_norm, double delta1_norm);

/// max_k r_k + (L/8) max_k {(1 + lambda_k) ||dx_k||^2 + 2 h lambda_k ||dx_k||}.
double interpolation_bound(const std::vector<PathKnot>& knots, double h, double L);

/// r_0 + 2 h tau L f_gap + (h^2 L / 8)(tau G + 1)^2.
double uniform_euler_bound(double r0, double h, double tau, double L, double f_gap, double G);

/// L (1 + lambda_max) ||grad f(x_Omega)||^2 / (2 (mu + lambda_max sigma)^2).
double initializer_bound(double L, double lambda_max, double grad_f_norm, double mu, double sigma);

struct EstimateOptions {
    int sample_count = 64;
    std::uint64_t seed = 1;
    /// Perturbation radius relative to 1 + ||x0||.
    double radius = 0.5;
};

struct ConstantEstimate {
    TheoryConstants constants;
    double hess_norm_max = 0.0;
    double hess_lipschitz_max = 0.0;
    double grad_norm_max = 0.0;
    double mu_hat = 0.0;
    double sigma_hat = 0.0;
    /// f(x0) minus the smallest sampled f; an upper bound proxy for f(x0) - f*.
    double f_gap_hat = 0.0;
    int accepted_samples = 0;
    /// False when sigma_hat had to be floored or too few samples were accepted.
    bool reliable = true;
    std::vector<std::string> notes;
};

/// Samples the sublevel set {f <= f(x0)} around x0 and measures the constants.
/// Maxima are non-decreasing in sample_count for a fixed seed.
ConstantEstimate estimate_constants(const Problem& problem, const Vector& x0, double lambda_min,
                                    double lambda_max, const EstimateOptions& options = {});

/// Analytic constants for the built-in problems, or nullopt when none are known.
std::optional<TheoryConstants> certified_constants(const Problem& problem, const Vector& x0,
                                                   double lambda_min, double lambda_max);

/// f(x0) - f* when f* is known analytically.
std::optional<double> certified_f_gap(const Problem& problem, const Vector& x0);

}  // namespace pathode
