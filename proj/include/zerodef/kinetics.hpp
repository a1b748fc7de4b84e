#pragma once

#include <limits>
#include <string>

namespace zerodef {

/// Value of ln(theta(y)), with a distinguished sentinel for ln(0) = -infinity.
///
/// The sentinel is never an IEEE -inf, so products such as 0 * ln(0) cannot be
/// formed by accident; callers must branch on is_neg_inf().
class LogValue {
public:
    constexpr LogValue() = default;
    static constexpr LogValue finite(double v) { return LogValue(v, false); }
    static constexpr LogValue neg_inf() { return LogValue(0.0, true); }

    [[nodiscard]] constexpr bool is_neg_inf() const noexcept { return neg_inf_; }
    /// Only meaningful when !is_neg_inf().
    [[nodiscard]] constexpr double value() const noexcept { return value_; }

    friend constexpr bool operator==(const LogValue&, const LogValue&) = default;

private:
    constexpr LogValue(double v, bool ni) : value_(v), neg_inf_(ni) {}
    double value_ = 0.0;
    bool neg_inf_ = false;
};

/// Per-species rate function theta_i : [0, inf) -> [0, sigma_i).
///
/// MassAction is theta(y) = y (sigma = inf); MichaelisMenten(K) is
/// theta(y) = y / (K + y) (sigma = 1).
class KineticsFn {
public:
    enum class Kind { MassAction, MichaelisMenten };

    KineticsFn() = default;
    static KineticsFn mass_action() { return KineticsFn(); }
    static KineticsFn michaelis_menten(double k);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double k() const noexcept { return k_; }
    [[nodiscard]] bool is_mass_action() const noexcept { return kind_ == Kind::MassAction; }

    [[nodiscard]] double theta(double y) const;
    /// ln theta(y); sentinel at y == 0.
    [[nodiscard]] LogValue rho(double y) const;
    /// d/dy ln theta(y) for y > 0.
    [[nodiscard]] double rho_prime(double y) const;
    /// Inverse of rho on (0, inf); defined for s < ln(sigma).
    [[nodiscard]] double rho_inv(double s) const;
    /// Antiderivative of rho_inv, used by the convex form of the class projection.
    [[nodiscard]] double rho_inv_primitive(double s) const;
    /// ln(sigma): +inf for mass action, 0 for Michaelis-Menten.
    [[nodiscard]] double log_sigma() const noexcept;
    /// Closed form of int_1^r rho(s) ds for r >= 0.
    [[nodiscard]] double rho_integral_from_one(double r) const;

    [[nodiscard]] std::string describe() const;

    friend bool operator==(const KineticsFn&, const KineticsFn&) = default;

private:
    Kind kind_ = Kind::MassAction;
    double k_ = 0.0;
};

}  // namespace zerodef
