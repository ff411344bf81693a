#pragma once

#include "pathode/types.hpp"

#include <cstdint>

namespace pathode {

/// Rows of A are powers w^i for i = 1..n_moments, so A is a truncated
/// Vandermonde matrix on points in [0, 1). Its condition number grows
/// geometrically with n_moments; requests above this cap are rejected.
inline constexpr int kMaxMoments = 30;

struct MomentData {
    Vector w;       // support points, size p + 1, last entry 0
    Vector x_true;  // distribution on the support, size p + 1
    int n_moments = 0;
};

struct MomentSystem {
    Matrix A;        // n_moments x (p + 1), A(i, j) = w_j^(i + 1)
    Vector b;        // A * x_true
    Matrix A_prime;  // A_{1:p} - A_{p+1} 1^T
    Vector b_prime;  // b - A_{p+1}
};

MomentSystem build_moment_problem(const Vector& w, const Vector& x_true, int n_moments);

/// x_true = softmax(z) with z ~ unif(0,1)^(p+1); w_i ~ unif(0,1) for i <= p and
/// w_{p+1} = 0. Draw order: all z first, then w_1..w_p.
std::pair<Vector, Vector> generate_synthetic_moment_data(int p, std::uint64_t seed);

}  // namespace pathode
