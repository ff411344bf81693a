#include "pathode/moment.hpp"

#include "pathode/random.hpp"

#include <cmath>
#include <string>

namespace pathode {

MomentSystem build_moment_problem(const Vector& w, const Vector& x_true, int n_moments) {
    if (n_moments < 1 || n_moments > kMaxMoments)
        throw InvalidArgument("n_moments must be in [1, " + std::to_string(kMaxMoments) + "]");
    if (w.size() < 2 || w.size() != x_true.size())
        throw InvalidArgument("w and x_true must have the same size p + 1 >= 2");
    if ((x_true.array() < -1e-12).any() || std::abs(x_true.sum() - 1.0) > 1e-12)
        throw InvalidArgument("x_true is not on the probability simplex");

    const Index cols = w.size();
    const Index p = cols - 1;
    MomentSystem sys;
    sys.A.resize(n_moments, cols);
    for (Index j = 0; j < cols; ++j) {
        double power = 1.0;
        for (int i = 0; i < n_moments; ++i) {
            power *= w(j);
            sys.A(i, j) = power;
        }
    }
    sys.b = sys.A * x_true;
    const Vector last = sys.A.col(p);
    sys.A_prime = sys.A.leftCols(p).colwise() - last;
    sys.b_prime = sys.b - last;
    return sys;
}

std::pair<Vector, Vector> generate_synthetic_moment_data(int p, std::uint64_t seed) {
    if (p < 1) throw InvalidArgument("p must be positive");
    CounterRng rng(seed);
    Vector z(p + 1);
    for (int i = 0; i <= p; ++i) z(i) = rng.uniform();
    Vector x_true = z.array().exp();
    x_true /= x_true.sum();
    Vector w(p + 1);
    for (int i = 0; i < p; ++i) w(i) = rng.uniform();
    w(p) = 0.0;
    return {w, x_true};
}

}  // namespace pathode
