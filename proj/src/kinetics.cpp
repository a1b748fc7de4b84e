#include "zerodef/kinetics.hpp"

#include <cmath>
#include <sstream>

#include "zerodef/errors.hpp"

namespace zerodef {

namespace {

double xlogx(double r) { return r > 0.0 ? r * std::log(r) : 0.0; }

}  // namespace

KineticsFn KineticsFn::michaelis_menten(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw DomainError("Michaelis-Menten constant must be positive and finite");
    }
    KineticsFn fn;
    fn.kind_ = Kind::MichaelisMenten;
    fn.k_ = k;
    return fn;
}

double KineticsFn::theta(double y) const {
    if (y < 0.0) throw DomainError("theta evaluated at a negative concentration");
    if (kind_ == Kind::MassAction) return y;
    return y / (k_ + y);
}

LogValue KineticsFn::rho(double y) const {
    if (y < 0.0) throw DomainError("rho evaluated at a negative concentration");
    if (y == 0.0) return LogValue::neg_inf();
    if (kind_ == Kind::MassAction) return LogValue::finite(std::log(y));
    return LogValue::finite(std::log(y) - std::log(k_ + y));
}

double KineticsFn::rho_prime(double y) const {
    if (!(y > 0.0)) throw DomainError("rho' requires a positive concentration");
    if (kind_ == Kind::MassAction) return 1.0 / y;
    return k_ / (y * (k_ + y));
}

double KineticsFn::rho_inv(double s) const {
    if (kind_ == Kind::MassAction) return std::exp(s);
    if (!(s < 0.0)) throw DomainError("Michaelis-Menten rho^-1 requires a negative argument");
    return k_ / std::expm1(-s);
}

double KineticsFn::rho_inv_primitive(double s) const {
    if (kind_ == Kind::MassAction) return std::exp(s);
    if (!(s < 0.0)) throw DomainError("Michaelis-Menten rho^-1 requires a negative argument");
    return -k_ * std::log1p(-std::exp(s));
}

double KineticsFn::log_sigma() const noexcept {
    if (kind_ == Kind::MassAction) return std::numeric_limits<double>::infinity();
    return 0.0;
}

double KineticsFn::rho_integral_from_one(double r) const {
    if (r < 0.0) throw DomainError("entropy integral at a negative concentration");
    if (kind_ == Kind::MassAction) return xlogx(r) - r + 1.0;
    const double at_r = (xlogx(r) - r) - (xlogx(k_ + r) - (k_ + r));
    const double at_one = -1.0 - (xlogx(k_ + 1.0) - (k_ + 1.0));
    return at_r - at_one;
}

std::string KineticsFn::describe() const {
    if (kind_ == Kind::MassAction) return "mass_action";
    std::ostringstream os;
    os.precision(17);
    os << "mm(" << k_ << ")";
    return os.str();
}

}  // namespace zerodef
