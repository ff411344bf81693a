#pragma once

#include "pathode/problem.hpp"
#include "pathode/random.hpp"

#include <doctest.h>

#include <cmath>

namespace testing {

using pathode::Matrix;
using pathode::Vector;

inline Matrix random_matrix(pathode::CounterRng& rng, pathode::Index rows, pathode::Index cols) {
    Matrix M(rows, cols);
    for (pathode::Index i = 0; i < rows; ++i)
        for (pathode::Index j = 0; j < cols; ++j) M(i, j) = rng.normal();
    return M;
}

inline Vector random_vector(pathode::CounterRng& rng, pathode::Index n) {
    Vector v(n);
    for (pathode::Index i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

inline Vector labels_from(pathode::CounterRng& rng, pathode::Index n) {
    Vector y(n);
    for (pathode::Index i = 0; i < n; ++i) y(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    y(0) = 1.0;
    y(n - 1) = -1.0;
    return y;
}

inline Matrix spd_with_condition(pathode::CounterRng& rng, pathode::Index n, double kappa) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
    const Matrix Q = qr.householderQ();
    Vector eig(n);
    for (pathode::Index i = 0; i < n; ++i) eig(i) = std::pow(kappa, static_cast<double>(i) / (n - 1));
    return Q * eig.asDiagonal() * Q.transpose();
}

inline bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

}  // namespace testing
