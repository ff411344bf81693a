#pragma once

#include "pathode/types.hpp"

#include <functional>

namespace pathode {

enum class DirectionMode { exact, cg };

/// A direction d for H d = -g together with its residual certificate
/// ||H d + g|| computed explicitly (never from a recurrence).
struct DirectionResult {
    Vector direction;
    double residual_norm = 0.0;
    int inner_iterations = 0;
    DirectionMode mode = DirectionMode::exact;
    bool converged = true;
    /// ||H y0 + g|| at the warm start (cg mode only).
    double initial_residual = 0.0;
    /// H d + g; kept for bound checks that need the vector, not just its norm.
    Vector residual;
};

/// Solves H d = -g by dense Cholesky. Throws NotPositiveDefinite on a
/// non-positive pivot.
DirectionResult solve_spd(const Matrix& H, const Vector& g);

using HessVecFn = std::function<Vector(const Vector&)>;

struct CgOptions {
    double delta = 1e-10;
    /// 0 selects 20 * dim.
    int max_iters = 0;
    /// Explicit residual refresh period.
    int recompute_every = 50;
    /// Called with (iteration, iterate) after every update; test instrumentation.
    std::function<void(int, const Vector&)> observer;
};

/// Conjugate gradient on H y = -g from `warm_start`, stopping at the first
/// iterate whose explicitly computed residual satisfies ||H y + g|| <= delta.
/// On hitting max_iters the last iterate is returned with converged = false.
DirectionResult cg_solve(const HessVecFn& hessvec, const Vector& g, const Vector& warm_start,
                         const CgOptions& options);

/// ceil((sqrt(kappa) + 1)/2 * ln(2 sqrt(kappa) r0 / delta)), clamped at 0.
int cg_iteration_bound(double kappa, double initial_residual, double delta);

}  // namespace pathode
