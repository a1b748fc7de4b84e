#pragma once

#include <cstdint>
#include <optional>

#include "zerodef/network.hpp"
#include "zerodef/stoichiometry.hpp"

namespace zerodef {

/// sum_i [ int_1^{x_i} rho_i(s) ds - rho_i(z_i) x_i ] for x >= 0, z > 0.
[[nodiscard]] double entropy_W(const ReactionNetwork& net, const Vector& x, const Vector& z);

/// W(x, x_bar) - W(x_bar, x_bar); nonnegative, zero only at x_bar.
[[nodiscard]] double lyapunov_V(const ReactionNetwork& net, const Vector& x, const Vector& x_bar);

/// Gradient of lyapunov_V at a positive x: rho(x) - rho(x_bar).
[[nodiscard]] Vector lyapunov_grad(const ReactionNetwork& net, const Vector& x, const Vector& x_bar);

/// int_1^r rho(s) ds by adaptive Simpson, for kinetics without a closed form.
/// Requires r > 0.
[[nodiscard]] double rho_integral_numeric(const KineticsFn& fn, double r, double tol = 1e-12);

struct KappaResult {
    double kappa = 1.0;
    Vector direction;  // unit vector orthogonal to 1 attaining the bound (empty when m = 1)
};

/// Largest kappa with sum a_ij (q_i - q_j)^2 >= kappa sum (q_i - q_j)^2.
/// For m = 1 both forms vanish and kappa = 1 is returned.
[[nodiscard]] KappaResult kappa(const ReactionNetwork& net);

/// sum_{i,j} a_ij (q_i - q_j)^2.
[[nodiscard]] double rate_quadratic_form(const ReactionNetwork& net, const Vector& q);

/// min_j Theta_B(z)_j.
[[nodiscard]] double c0_of(const ReactionNetwork& net, const Vector& z);
/// kappa c0(z) / 2.
[[nodiscard]] double c_of(const ReactionNetwork& net, const Vector& z);
[[nodiscard]] double c_of(const ReactionNetwork& net, double kappa, const Vector& z);

/// Caches kappa and the pseudo-inverse of B for repeated dissipation checks.
class DissipationChecker {
public:
    explicit DissipationChecker(const ReactionNetwork& net);

    /// ((e^{<b_1,s>}, ..., e^{<b_m,s>}) B^#)'; empty when some <b_j, s> > 500.
    [[nodiscard]] std::optional<Vector> v_field(const Vector& sigma) const;

    struct Outcome {
        bool in_range = true;  // false when the exponential guard tripped
        double lhs = 0.0;      // <rho(x) - rho(z), f(x)>
        double rhs = 0.0;      // -c(z) delta(x, z) + <v(rho(x) - rho(z)), f(z)>
        double margin = 0.0;   // rhs - lhs
        double scale = 1.0;    // 1 + magnitudes of the terms, for relative tolerances
    };

    [[nodiscard]] Outcome check(const Vector& x, const Vector& z) const;

    [[nodiscard]] double kappa() const noexcept { return kappa_; }
    [[nodiscard]] const Matrix& b_pinv() const noexcept { return b_pinv_; }

private:
    ReactionNetwork net_;
    double kappa_;
    Matrix b_pinv_;  // m x n, b_pinv_ * B = I
};

[[nodiscard]] std::optional<Vector> v_field(const ReactionNetwork& net, const Vector& sigma);
[[nodiscard]] DissipationChecker::Outcome check_54(const ReactionNetwork& net, const Vector& x, const Vector& z);

/// 1/4 c(x_bar)^2 delta(x, x_bar); DomainError when x is not in the class of x_bar.
[[nodiscard]] double robust_margin(const ReactionNetwork& net, const SubspaceBases& bases, double kappa,
                                   const Vector& x_bar, const Vector& x);
[[nodiscard]] double robust_margin(const ReactionNetwork& net, const Vector& x_bar, const Vector& x);

struct ExpRate {
    double rate = 0.0;
    double radius = 0.0;
    double c_at = 0.0;  // c(x_bar)
    double c1 = 0.0;    // V >= c1/2 |x - x_bar|^2 validated on the ball
    double c2 = 0.0;    // V <= c2 |x - x_bar|^2 validated on the ball
    double d2 = 0.0;    // delta(x, x_bar) >= d2 |x - x_bar|^2 validated on the ball
};

/// Local exponential decay rate of V along trajectories in the class of x_bar,
/// with the radius of the class ball on which the quadratic bounds were
/// checked by sampling.
[[nodiscard]] ExpRate exp_rate(const ReactionNetwork& net, const Vector& x_bar);

struct CertificateReport {
    double kappa = 0.0;
    double c0_at = 0.0;
    double c_at = 0.0;
    std::optional<double> inequality_54_margin;
    double delta_S_at = 0.0;
    ExpRate exp;
};

/// Constants for x_bar and the sampled state x (same class).
[[nodiscard]] CertificateReport certificate(const ReactionNetwork& net, const Vector& x_bar, const Vector& x);

}  // namespace zerodef
