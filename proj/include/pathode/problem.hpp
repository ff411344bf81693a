#pragma once

#include "pathode/constants.hpp"
#include "pathode/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace pathode {

/// Static facts about a problem instance. Optional entries are absent when no
/// analytic value exists; theory_bounds estimates those numerically.
struct ProblemInfo {
    std::string name;
    double mu = 0.0;     // strong convexity of f
    double sigma = 0.0;  // strong convexity of Omega
    /// Omega is not strongly convex (sigma = 0). Solvers refuse to run such a
    /// problem unless the caller explicitly opts in.
    bool sigma_degenerate = false;
    /// Shared Lipschitz bound for grad/Hessian (and third derivative) of f and Omega.
    std::optional<double> lipschitz;
    std::optional<double> grad_lipschitz_f;
    std::optional<double> grad_lipschitz_omega;
    /// Global bound on ||grad f||, when one exists.
    std::optional<double> grad_f_bound;
    std::optional<double> f_star;
};

/// Parametric problem F_lambda(x) = f(x) + lambda Omega(x).
///
/// Implementations are immutable after construction, so one instance can be
/// evaluated concurrently from several runs.
class Problem {
public:
    virtual ~Problem() = default;

    virtual Index dim() const = 0;
    const ProblemInfo& info() const { return info_; }

    virtual double f_value(const Vector& x) const = 0;
    virtual Vector f_grad(const Vector& x) const = 0;
    virtual Matrix f_hess(const Vector& x) const = 0;
    virtual Vector f_hessvec(const Vector& x, const Vector& v) const = 0;

    virtual double omega_value(const Vector& x) const = 0;
    virtual Vector omega_grad(const Vector& x) const = 0;
    virtual Matrix omega_hess(const Vector& x) const = 0;
    virtual Vector omega_hessvec(const Vector& x, const Vector& v) const = 0;

    virtual std::optional<Vector> omega_minimizer() const { return std::nullopt; }

    /// True iff x lies in the effective domain of both f and Omega.
    virtual bool domain_check(const Vector& x) const { return x.size() == dim() && x.allFinite(); }

    /// A point well inside the domain, used to start Newton when there is no
    /// known minimizer of Omega.
    virtual Vector domain_center() const { return Vector::Zero(dim()); }

    // Convenience combinations, uncounted.
    double F_value(const Vector& x, double lambda) const { return f_value(x) + lambda * omega_value(x); }
    Vector F_grad(const Vector& x, double lambda) const { return f_grad(x) + lambda * omega_grad(x); }

protected:
    Problem() = default;
    void set_info(ProblemInfo info) { info_ = std::move(info); }

private:
    ProblemInfo info_;
};

/// f(x) = 1/2 ||Ax - b||^2, Omega(x) = 1/2 ||x||^2.
class QuadraticRidge final : public Problem {
public:
    QuadraticRidge(Matrix A, Vector b);

    Index dim() const override { return A_.cols(); }
    double f_value(const Vector& x) const override;
    Vector f_grad(const Vector& x) const override;
    Matrix f_hess(const Vector& x) const override;
    Vector f_hessvec(const Vector& x, const Vector& v) const override;
    double omega_value(const Vector& x) const override;
    Vector omega_grad(const Vector& x) const override;
    Matrix omega_hess(const Vector& x) const override;
    Vector omega_hessvec(const Vector& x, const Vector& v) const override;
    std::optional<Vector> omega_minimizer() const override { return Vector::Zero(dim()); }

    /// Closed-form minimizer (A^T A + lambda I)^{-1} A^T b.
    Vector exact_solution(double lambda) const;

    /// Certified bound on ||grad f|| and ||grad Omega|| over {x : f(x) <= f(x0)}.
    /// Infinite when A is rank deficient.
    double gradient_bound(const Vector& x0) const;

    const Matrix& A() const { return A_; }
    const Vector& b() const { return b_; }
    const Matrix& gram() const { return gram_; }

private:
    Matrix A_;
    Vector b_;
    Matrix gram_;
    Vector Atb_;
    Vector least_squares_;
    double sigma_min_A_ = 0.0;
    double norm_A_ = 0.0;
};

/// Mean logistic loss over a subset of samples; shared by the logistic problems.
class LogisticLoss {
public:
    LogisticLoss() = default;
    /// Rows of `features` with their labels; labels must be +/-1.
    LogisticLoss(Matrix features, Vector labels);

    Index samples() const { return features_.rows(); }
    double value(const Vector& x) const;
    Vector grad(const Vector& x) const;
    Matrix hess(const Vector& x) const;
    Vector hessvec(const Vector& x, const Vector& v) const;

    /// Bounds for the shared constant L: max of gradient, Hessian and third
    /// derivative Lipschitz constants of the loss.
    double lipschitz() const;
    double grad_lipschitz() const;
    /// sup_x ||grad||
    double grad_bound() const;

private:
    Matrix features_;
    Vector labels_;
    double spectral_sq_ = 0.0;   // ||A||^2
    double max_row_norm_ = 0.0;  // max_i ||a_i||
};

/// Mean logistic loss plus ridge: f = mean loss, Omega = 1/2 ||x||^2.
class LogisticRidge final : public Problem {
public:
    LogisticRidge(Matrix features, Vector labels);

    Index dim() const override { return p_; }
    double f_value(const Vector& x) const override { return loss_.value(x); }
    Vector f_grad(const Vector& x) const override { return loss_.grad(x); }
    Matrix f_hess(const Vector& x) const override { return loss_.hess(x); }
    Vector f_hessvec(const Vector& x, const Vector& v) const override { return loss_.hessvec(x, v); }
    double omega_value(const Vector& x) const override { return 0.5 * x.squaredNorm(); }
    Vector omega_grad(const Vector& x) const override { return x; }
    Matrix omega_hess(const Vector& x) const override { return Matrix::Identity(x.size(), x.size()); }
    Vector omega_hessvec(const Vector&, const Vector& v) const override { return v; }
    std::optional<Vector> omega_minimizer() const override { return Vector::Zero(p_); }

    const LogisticLoss& loss() const { return loss_; }

private:
    Index p_;
    LogisticLoss loss_;
};

/// f = mean logistic loss over positives, Omega = mean logistic loss over negatives.
/// Omega is not strongly convex; info().sigma_degenerate is set.
class LogisticReweighted final : public Problem {
public:
    LogisticReweighted(const Matrix& features, const Vector& labels);

    Index dim() const override { return p_; }
    double f_value(const Vector& x) const override { return positive_.value(x); }
    Vector f_grad(const Vector& x) const override { return positive_.grad(x); }
    Matrix f_hess(const Vector& x) const override { return positive_.hess(x); }
    Vector f_hessvec(const Vector& x, const Vector& v) const override { return positive_.hessvec(x, v); }
    double omega_value(const Vector& x) const override { return negative_.value(x); }
    Vector omega_grad(const Vector& x) const override { return negative_.grad(x); }
    Matrix omega_hess(const Vector& x) const override { return negative_.hess(x); }
    Vector omega_hessvec(const Vector& x, const Vector& v) const override { return negative_.hessvec(x, v); }

private:
    Index p_;
    LogisticLoss positive_;
    LogisticLoss negative_;
};

/// Moment matching on the simplex after eliminating the last coordinate:
/// f(y) = 1/2 ||A'y - b'||^2 and Omega(y) = sum_j y_j ln y_j + s ln s with s = 1 - sum_j y_j.
/// Omega oracles throw DomainError outside {y > 0, sum y < 1}.
class MomentMatching final : public Problem {
public:
    MomentMatching(Matrix A_prime, Vector b_prime);

    Index dim() const override { return A_.cols(); }
    double f_value(const Vector& y) const override;
    Vector f_grad(const Vector& y) const override;
    Matrix f_hess(const Vector& y) const override;
    Vector f_hessvec(const Vector& y, const Vector& v) const override;
    double omega_value(const Vector& y) const override;
    Vector omega_grad(const Vector& y) const override;
    Matrix omega_hess(const Vector& y) const override;
    Vector omega_hessvec(const Vector& y, const Vector& v) const override;
    std::optional<Vector> omega_minimizer() const override { return domain_center(); }
    bool domain_check(const Vector& y) const override;
    Vector domain_center() const override;

private:
    void require_domain(const Vector& y) const;

    Matrix A_;
    Vector b_;
    Matrix gram_;
    Vector Atb_;
};

std::shared_ptr<QuadraticRidge> make_quadratic_ridge(Matrix A, Vector b);
std::shared_ptr<LogisticRidge> make_logistic_ridge(Matrix features, Vector labels);
std::shared_ptr<LogisticReweighted> make_logistic_reweighted(const Matrix& features, const Vector& labels);
std::shared_ptr<MomentMatching> make_moment_matching(Matrix A_prime, Vector b_prime);

/// Oracle-call tallies for one run. Solver calls and accuracy-metric calls are
/// kept apart so that reported complexity only covers the solver.
struct OracleCounters {
    std::int64_t grad_f = 0;
    std::int64_t grad_omega = 0;
    std::int64_t hess_builds = 0;
    std::int64_t hessvec = 0;
    std::int64_t linear_solves = 0;
    std::int64_t cg_iters_total = 0;
    std::int64_t metric_evals = 0;

    OracleCounters& operator+=(const OracleCounters& o);
    bool operator==(const OracleCounters&) const = default;
};

/// Per-run view of a problem that tallies every solver-side oracle call.
class CountingOracle {
public:
    CountingOracle(const Problem& problem, OracleCounters& counters)
        : problem_(problem), counters_(counters) {}

    const Problem& problem() const { return problem_; }
    OracleCounters& counters() { return counters_; }

    Vector f_grad(const Vector& x) {
        ++counters_.grad_f;
        return problem_.f_grad(x);
    }
    Vector omega_grad(const Vector& x) {
        ++counters_.grad_omega;
        return problem_.omega_grad(x);
    }
    /// One Hessian build: grad^2 f(x) + lambda grad^2 Omega(x).
    Matrix hessian(const Vector& x, double lambda) {
        ++counters_.hess_builds;
        return problem_.f_hess(x) + lambda * problem_.omega_hess(x);
    }
    /// One Hessian-vector product of the combined operator.
    Vector hessvec(const Vector& x, double lambda, const Vector& v) {
        ++counters_.hessvec;
        return problem_.f_hessvec(x, v) + lambda * problem_.omega_hessvec(x, v);
    }
    /// grad F_lambda(x); counts one gradient of each function.
    Vector F_grad(const Vector& x, double lambda) {
        return f_grad(x) + lambda * omega_grad(x);
    }
    void note_solve() { ++counters_.linear_solves; }

private:
    const Problem& problem_;
    OracleCounters& counters_;
};

}  // namespace pathode
