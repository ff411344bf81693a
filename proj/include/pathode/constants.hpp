#pragma once

#include <string>

namespace pathode {

/// Problem constants feeding every bound formula.
///
/// Derived quantities (tau, T for each method, mu_tilde) are computed on
/// construction and never change afterwards. `estimated` marks constants that
/// came from sampling rather than from an analytic certificate.
class TheoryConstants {
public:
    TheoryConstants() = default;
    TheoryConstants(double mu, double sigma, double L, double G, double lambda_min,
                    double lambda_max, bool estimated = false);

    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    double L() const { return L_; }
    double G() const { return G_; }
    double lambda_min() const { return lambda_min_; }
    double lambda_max() const { return lambda_max_; }
    bool estimated() const { return estimated_; }

    /// max over the two range endpoints of (1 + lambda) / (mu + lambda sigma).
    double tau() const { return tau_; }
    /// ln(lambda_max / lambda_min)
    double T_euler() const { return T_euler_; }
    /// 1.1 ln(lambda_max / lambda_min)
    double T_trap() const { return T_trap_; }
    /// mu + lambda_min sigma
    double mu_tilde() const { return mu_tilde_; }

private:
    double mu_ = 0.0;
    double sigma_ = 1.0;
    double L_ = 1.0;
    double G_ = 1.0;
    double lambda_min_ = 1.0;
    double lambda_max_ = 2.0;
    bool estimated_ = false;
    double tau_ = 0.0;
    double T_euler_ = 0.0;
    double T_trap_ = 0.0;
    double mu_tilde_ = 0.0;
};

}  // namespace pathode
