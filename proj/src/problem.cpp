#include "pathode/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pathode {

TheoryConstants::TheoryConstants(double mu, double sigma, double L, double G, double lambda_min,
                                 double lambda_max, bool estimated)
    : mu_(mu), sigma_(sigma), L_(L), G_(G), lambda_min_(lambda_min), lambda_max_(lambda_max),
      estimated_(estimated) {
    if (!(mu >= 0.0)) throw InvalidArgument("mu must be >= 0");
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
    if (!(L > 0.0)) throw InvalidArgument("L must be > 0");
    if (!(G > 0.0)) throw InvalidArgument("G must be > 0");
    if (!(lambda_min > 0.0 && lambda_min < lambda_max))
        throw InvalidArgument("need 0 < lambda_min < lambda_max");
    tau_ = std::max((1.0 + lambda_min) / (mu + lambda_min * sigma),
                    (1.0 + lambda_max) / (mu + lambda_max * sigma));
    T_euler_ = std::log(lambda_max / lambda_min);
    T_trap_ = 1.1 * std::log(lambda_max / lambda_min);
    mu_tilde_ = mu + lambda_min * sigma;
}

OracleCounters& OracleCounters::operator+=(const OracleCounters& o) {
    grad_f += o.grad_f;
    grad_omega += o.grad_omega;
    hess_builds += o.hess_builds;
    hessvec += o.hessvec;
    linear_solves += o.linear_solves;
    cg_iters_total += o.cg_iters_total;
    metric_evals += o.metric_evals;
    return *this;
}

namespace {

double spectral_norm(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

void require_dim(const Vector& x, Index p) {
    if (x.size() != p)
        throw InvalidArgument("vector of size " + std::to_string(x.size()) + " where " +
                              std::to_string(p) + " expected");
}

// log(1 + exp(-z)) without overflow.
double log1pexp_neg(double z) {
    return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

ProblemInfo quadratic_info(const Matrix& gram) {
    ProblemInfo info;
    info.name = "quadratic";
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = gram.rows() ? eig.eigenvalues()(0) : 0.0;
    const double hi = gram.rows() ? eig.eigenvalues()(gram.rows() - 1) : 0.0;
    info.mu = std::max(lo, 0.0);
    info.sigma = 1.0;
    info.lipschitz = std::max(hi, 1.0);
    info.grad_lipschitz_f = hi;
    info.grad_lipschitz_omega = 1.0;
    return info;
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadratic ridge

QuadraticRidge::QuadraticRidge(Matrix A, Vector b)
    : A_(std::move(A)), b_(std::move(b)) {
    if (A_.rows() != b_.size())
        throw InvalidArgument("A has " + std::to_string(A_.rows()) + " rows but b has " +
                              std::to_string(b_.size()) + " entries");
    if (A_.cols() < 1) throw InvalidArgument("A must have at least one column");
    gram_ = A_.transpose() * A_;
    Atb_ = A_.transpose() * b_;
    Eigen::JacobiSVD<Matrix> svd(A_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    norm_A_ = svd.singularValues()(0);
    sigma_min_A_ = A_.rows() >= A_.cols() ? svd.singularValues()(A_.cols() - 1) : 0.0;
    least_squares_ = svd.solve(b_);

    ProblemInfo info = quadratic_info(gram_);
    info.f_star = 0.5 * (A_ * least_squares_ - b_).squaredNorm();
    set_info(std::move(info));
}

double QuadraticRidge::f_value(const Vector& x) const {
    require_dim(x, dim());
    return 0.5 * (A_ * x - b_).squaredNorm();
}
Vector QuadraticRidge::f_grad(const Vector& x) const {
    require_dim(x, dim());
    return gram_ * x - Atb_;
}
Matrix QuadraticRidge::f_hess(const Vector&) const { return gram_; }
Vector QuadraticRidge::f_hessvec(const Vector&, const Vector& v) const {
    require_dim(v, dim());
    return gram_ * v;
}
double QuadraticRidge::omega_value(const Vector& x) const { return 0.5 * x.squaredNorm(); }
Vector QuadraticRidge::omega_grad(const Vector& x) const { return x; }
Matrix QuadraticRidge::omega_hess(const Vector&) const { return Matrix::Identity(dim(), dim()); }
Vector QuadraticRidge::omega_hessvec(const Vector&, const Vector& v) const { return v; }

Vector QuadraticRidge::exact_solution(double lambda) const {
    Matrix H = gram_;
    H.diagonal().array() += lambda;
    return H.llt().solve(Atb_);
}

double QuadraticRidge::gradient_bound(const Vector& x0) const {
    // On the level set, ||A(x - x_ls)||^2 = 2 (f(x) - f*) <= 2 gap.
    const double gap = std::max(f_value(x0) - *info().f_star, 0.0);
    const double radius = std::sqrt(2.0 * gap);
    const double grad_f = norm_A_ * radius;
    if (sigma_min_A_ <= 0.0) return std::numeric_limits<double>::infinity();
    const double grad_omega = least_squares_.norm() + radius / sigma_min_A_;
    return std::max({grad_f, grad_omega, std::numeric_limits<double>::min()});
}

// ---------------------------------------------------------------------------
// Logistic loss

LogisticLoss::LogisticLoss(Matrix features, Vector labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
    if (features_.rows() != labels_.size())
        throw InvalidArgument("features and labels disagree on the number of samples");
    if (features_.rows() < 1) throw InvalidArgument("need at least one sample");
    for (Index i = 0; i < labels_.size(); ++i)
        if (labels_(i) != 1.0 && labels_(i) != -1.0)
            throw InvalidArgument("label " + std::to_string(labels_(i)) + " at sample " +
                                  std::to_string(i) + " is not +1 or -1");
    const double s = spectral_norm(features_);
    spectral_sq_ = s * s;
    max_row_norm_ = features_.rowwise().norm().maxCoeff();
}

double LogisticLoss::value(const Vector& x) const {
    const Vector z = labels_.cwiseProduct(features_ * x);
    double sum = 0.0;
    for (Index i = 0; i < z.size(); ++i) sum += log1pexp_neg(z(i));
    return sum / static_cast<double>(samples());
}

Vector LogisticLoss::grad(const Vector& x) const {
    const Vector z = labels_.cwiseProduct(features_ * x);
    Vector coef(z.size());
    for (Index i = 0; i < z.size(); ++i) coef(i) = -sigmoid(-z(i)) * labels_(i);
    return features_.transpose() * coef / static_cast<double>(samples());
}

Matrix LogisticLoss::hess(const Vector& x) const {
    const Vector z = features_ * x;
    Vector root(z.size());
    for (Index i = 0; i < z.size(); ++i) {
        const double s = sigmoid(z(i));
        root(i) = std::sqrt(s * (1.0 - s) / static_cast<double>(samples()));
    }
    const Matrix scaled = root.asDiagonal() * features_;
    Matrix H = Matrix::Zero(features_.cols(), features_.cols());
    H.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    return H.selfadjointView<Eigen::Lower>();
}

Vector LogisticLoss::hessvec(const Vector& x, const Vector& v) const {
    const Vector z = features_ * x;
    Vector Av = features_ * v;
    for (Index i = 0; i < z.size(); ++i) {
        const double s = sigmoid(z(i));
        Av(i) *= s * (1.0 - s);
    }
    return features_.transpose() * Av / static_cast<double>(samples());
}

double LogisticLoss::grad_lipschitz() const { return 0.25 * spectral_sq_ / samples(); }

double LogisticLoss::lipschitz() const {
    // sup |phi'''| = 1/(6 sqrt 3), sup |phi''''| = 1/8 for phi(z) = log(1 + e^-z).
    const double n = static_cast<double>(samples());
    const double hess_lip = max_row_norm_ * spectral_sq_ / (6.0 * std::sqrt(3.0) * n);
    const double third_lip = max_row_norm_ * max_row_norm_ * spectral_sq_ / (8.0 * n);
    return std::max({grad_lipschitz(), hess_lip, third_lip});
}

double LogisticLoss::grad_bound() const {
    return std::sqrt(spectral_sq_ / static_cast<double>(samples()));
}

// ---------------------------------------------------------------------------
// Logistic ridge

LogisticRidge::LogisticRidge(Matrix features, Vector labels)
    : p_(features.cols()),
      loss_(std::move(features), std::move(labels)) {
    ProblemInfo info;
    info.name = "logistic";
    info.mu = 0.0;
    info.sigma = 1.0;
    info.lipschitz = std::max(1.0, loss_.lipschitz());
    info.grad_lipschitz_f = loss_.grad_lipschitz();
    info.grad_lipschitz_omega = 1.0;
    info.grad_f_bound = loss_.grad_bound();
    set_info(std::move(info));
}

// ---------------------------------------------------------------------------
// Re-weighted logistic

namespace {

std::pair<Matrix, Vector> select_class(const Matrix& features, const Vector& labels, double cls) {
    std::vector<Index> rows;
    for (Index i = 0; i < labels.size(); ++i)
        if (labels(i) == cls) rows.push_back(i);
    if (rows.empty())
        throw InvalidArgument(std::string("re-weighted logistic needs at least one ") +
                              (cls > 0 ? "positive" : "negative") + " sample");
    Matrix sub(static_cast<Index>(rows.size()), features.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Index>(r)) = features.row(rows[r]);
    return {sub, Vector::Constant(static_cast<Index>(rows.size()), cls)};
}

}  // namespace

LogisticReweighted::LogisticReweighted(const Matrix& features, const Vector& labels)
    : p_(features.cols()) {
    if (features.rows() != labels.size())
        throw InvalidArgument("features and labels disagree on the number of samples");
    for (Index i = 0; i < labels.size(); ++i)
        if (labels(i) != 1.0 && labels(i) != -1.0)
            throw InvalidArgument("label at sample " + std::to_string(i) + " is not +1 or -1");
    auto [pos_x, pos_y] = select_class(features, labels, 1.0);
    auto [neg_x, neg_y] = select_class(features, labels, -1.0);
    positive_ = LogisticLoss(std::move(pos_x), std::move(pos_y));
    negative_ = LogisticLoss(std::move(neg_x), std::move(neg_y));

    ProblemInfo info;
    info.name = "logistic-reweighted";
    info.mu = 0.0;
    info.sigma = 0.0;
    info.sigma_degenerate = true;
    info.lipschitz = std::max(positive_.lipschitz(), negative_.lipschitz());
    info.grad_lipschitz_f = positive_.grad_lipschitz();
    info.grad_lipschitz_omega = negative_.grad_lipschitz();
    info.grad_f_bound = positive_.grad_bound();
    set_info(std::move(info));
}

// ---------------------------------------------------------------------------
// Moment matching

MomentMatching::MomentMatching(Matrix A_prime, Vector b_prime)
    : A_(std::move(A_prime)), b_(std::move(b_prime)) {
    if (A_.rows() != b_.size()) throw InvalidArgument("A' and b' disagree on the number of moments");
    if (A_.cols() < 1) throw InvalidArgument("A' must have at least one column");
    if (!A_.allFinite() || !b_.allFinite()) throw InvalidArgument("A' and b' must be finite");
    gram_ = A_.transpose() * A_;
    Atb_ = A_.transpose() * b_;

    ProblemInfo info = quadratic_info(gram_);
    info.name = "moment";
    // The entropy Hessian diag(1/y) + 11^T/s dominates the identity on the open
    // domain; it is unbounded near the boundary so there is no analytic L.
    info.sigma = 1.0;
    info.lipschitz.reset();
    info.grad_lipschitz_omega.reset();
    set_info(std::move(info));
}

bool MomentMatching::domain_check(const Vector& y) const {
    if (y.size() != dim() || !y.allFinite()) return false;
    return (y.array() > 0.0).all() && y.sum() < 1.0;
}

Vector MomentMatching::domain_center() const {
    return Vector::Constant(dim(), 1.0 / static_cast<double>(dim() + 1));
}

void MomentMatching::require_domain(const Vector& y) const {
    if (!domain_check(y))
        throw DomainError("entropy evaluated outside {y > 0, sum(y) < 1}");
}

double MomentMatching::f_value(const Vector& y) const {
    require_dim(y, dim());
    return 0.5 * (A_ * y - b_).squaredNorm();
}
Vector MomentMatching::f_grad(const Vector& y) const {
    require_dim(y, dim());
    return gram_ * y - Atb_;
}
Matrix MomentMatching::f_hess(const Vector&) const { return gram_; }
Vector MomentMatching::f_hessvec(const Vector&, const Vector& v) const { return gram_ * v; }

double MomentMatching::omega_value(const Vector& y) const {
    require_domain(y);
    const double s = 1.0 - y.sum();
    return (y.array() * y.array().log()).sum() + s * std::log(s);
}

Vector MomentMatching::omega_grad(const Vector& y) const {
    require_domain(y);
    const double s = 1.0 - y.sum();
    return (y.array() / s).log().matrix();
}

Matrix MomentMatching::omega_hess(const Vector& y) const {
    require_domain(y);
    const double s = 1.0 - y.sum();
    Matrix H = Matrix::Constant(dim(), dim(), 1.0 / s);
    H.diagonal().array() += y.array().inverse();
    return H;
}

Vector MomentMatching::omega_hessvec(const Vector& y, const Vector& v) const {
    require_domain(y);
    const double s = 1.0 - y.sum();
    return (v.array() / y.array()).matrix() + Vector::Constant(dim(), v.sum() / s);
}

std::shared_ptr<QuadraticRidge> make_quadratic_ridge(Matrix A, Vector b) {
    return std::make_shared<QuadraticRidge>(std::move(A), std::move(b));
}
std::shared_ptr<LogisticRidge> make_logistic_ridge(Matrix features, Vector labels) {
    return std::make_shared<LogisticRidge>(std::move(features), std::move(labels));
}
std::shared_ptr<LogisticReweighted> make_logistic_reweighted(const Matrix& features, const Vector& labels) {
    return std::make_shared<LogisticReweighted>(features, labels);
}
std::shared_ptr<MomentMatching> make_moment_matching(Matrix A_prime, Vector b_prime) {
    return std::make_shared<MomentMatching>(std::move(A_prime), std::move(b_prime));
}

}  // namespace pathode
