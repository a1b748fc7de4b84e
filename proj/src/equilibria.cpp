#include "zerodef/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zerodef/errors.hpp"
#include "zerodef/linprog.hpp"

namespace zerodef {

namespace {

Vector rho_positive(const ReactionNetwork& net, const Vector& x) {
    Vector r(net.n());
    for (int k = 0; k < net.n(); ++k) r(k) = net.theta(k).rho(x(k)).value();
    return r;
}

Vector rho_inverse(const ReactionNetwork& net, const Vector& s) {
    Vector x(net.n());
    for (int k = 0; k < net.n(); ++k) x(k) = net.theta(k).rho_inv(s(k));
    return x;
}

bool strictly_positive(const Vector& x) { return (x.array() > 0.0).all() && x.allFinite(); }

// G(x) = [V'(x - p); W'(rho(x) - rho(q))] with V spanning Dperp and W spanning D.
class PhiSystem {
public:
    PhiSystem(const ReactionNetwork& net, const SubspaceBases& bases, Vector p_tilde, const Vector& q)
        : net_(net), bases_(bases), p_(std::move(p_tilde)), rho_q_(rho_positive(net, q)),
          p_scale_(1.0 + p_.norm()), rho_scale_(1.0 + rho_q_.lpNorm<Eigen::Infinity>()) {}

    [[nodiscard]] Vector residual(const Vector& x) const {
        const auto r = bases_.Dperp.cols();
        Vector g(net_.n());
        g.head(r) = bases_.Dperp.transpose() * (x - p_);
        g.tail(bases_.D.cols()) = bases_.D.transpose() * (rho_positive(net_, x) - rho_q_);
        return g;
    }

    [[nodiscard]] double merit(const Vector& g) const {
        const auto r = bases_.Dperp.cols();
        return (g.head(r) / p_scale_).squaredNorm() + (g.tail(bases_.D.cols()) / rho_scale_).squaredNorm();
    }

    [[nodiscard]] bool converged(const Vector& g) const {
        const auto r = bases_.Dperp.cols();
        return g.head(r).norm() <= 1e-13 * p_scale_ && g.tail(bases_.D.cols()).norm() <= 1e-13 * rho_scale_;
    }

    [[nodiscard]] Matrix jacobian(const Vector& x) const {
        const auto r = bases_.Dperp.cols();
        Matrix j(net_.n(), net_.n());
        j.topRows(r) = bases_.Dperp.transpose();
        Vector rp(net_.n());
        for (int k = 0; k < net_.n(); ++k) rp(k) = net_.theta(k).rho_prime(x(k));
        j.bottomRows(bases_.D.cols()) = bases_.D.transpose() * rp.asDiagonal();
        return j;
    }

    // Damped Newton from x; returns true on convergence, leaves the best
    // iterate in x either way.
    bool newton(Vector& x, int max_iter) const {
        Vector g = residual(x);
        double mer = merit(g);
        for (int it = 0; it < max_iter; ++it) {
            if (converged(g)) return true;
            const Vector dx = jacobian(x).colPivHouseholderQr().solve(-g);
            if (!dx.allFinite()) return false;
            double lam = 1.0;
            bool accepted = false;
            while (lam > 1e-20) {
                const Vector xn = x + lam * dx;
                if (strictly_positive(xn)) {
                    const Vector gn = residual(xn);
                    const double mn = merit(gn);
                    if (mn <= (1.0 - 1e-4 * lam) * mer) {
                        x = xn;
                        g = gn;
                        mer = mn;
                        accepted = true;
                        break;
                    }
                }
                lam *= 0.5;
            }
            if (!accepted) return converged(g);
            if (lam * dx.norm() <= 1e-15 * (1.0 + x.norm())) return true;
        }
        return converged(g);
    }

    // Minimizes sum_k P_k(y_k + rho(q)_k) - p'y over y = Dperp c, where P_k is
    // a primitive of rho_k^-1. The minimizer gives x = rho^-1(y + rho(q)).
    bool dual(Vector& x, int max_iter) const {
        const Matrix& v = bases_.Dperp;
        Vector c = Vector::Zero(v.cols());
        auto objective = [&](const Vector& cc, bool& ok) {
            const Vector s = v * cc + rho_q_;
            double val = 0.0;
            ok = true;
            for (int k = 0; k < net_.n(); ++k) {
                if (!(s(k) < net_.theta(k).log_sigma())) {
                    ok = false;
                    return 0.0;
                }
                val += net_.theta(k).rho_inv_primitive(s(k));
            }
            val -= p_.dot(v * cc);
            ok = std::isfinite(val);
            return val;
        };
        bool ok = true;
        double fval = objective(c, ok);
        for (int it = 0; it < max_iter; ++it) {
            const Vector s = v * c + rho_q_;
            const Vector xs = rho_inverse(net_, s);
            const Vector grad = v.transpose() * (xs - p_);
            if (grad.norm() <= 1e-13 * p_scale_) {
                x = xs;
                return true;
            }
            Vector w(net_.n());
            for (int k = 0; k < net_.n(); ++k) w(k) = 1.0 / net_.theta(k).rho_prime(xs(k));
            const Matrix h = v.transpose() * w.asDiagonal() * v;
            const Vector step = h.ldlt().solve(-grad);
            double lam = 1.0;
            bool accepted = false;
            while (lam > 1e-20) {
                const Vector cn = c + lam * step;
                const double fn = objective(cn, ok);
                if (ok && fn <= fval + 1e-4 * lam * grad.dot(step)) {
                    c = cn;
                    fval = fn;
                    accepted = true;
                    break;
                }
                lam *= 0.5;
            }
            if (!accepted) {
                x = xs;
                return grad.norm() <= 1e-10 * p_scale_;
            }
        }
        x = rho_inverse(net_, v * c + rho_q_);
        return false;
    }

private:
    const ReactionNetwork& net_;
    const SubspaceBases& bases_;
    Vector p_;
    Vector rho_q_;
    double p_scale_;
    double rho_scale_;
};

std::string dump(const Vector& v) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
    os << ")";
    return os.str();
}

}  // namespace

PerronVector perron_kernel(const ReactionNetwork& net) {
    const Matrix at = a_tilde(net);
    const int m = net.m();
    double gamma = 0.0;
    for (int j = 0; j < m; ++j) gamma = std::max(gamma, at.col(j).cwiseAbs().sum());
    gamma += 1.0;
    const Matrix hat = at + gamma * Matrix::Identity(m, m);

    Vector y = Vector::Ones(m);
    constexpr int kMaxIter = 100000;
    for (int it = 1; it <= kMaxIter; ++it) {
        Vector next = hat * y;
        next /= next.maxCoeff();
        const double diff = (next - y).lpNorm<Eigen::Infinity>();
        y = std::move(next);
        if (diff < 1e-14) return PerronVector{y, (at * y).norm(), it};
    }
    throw NumericalError("Perron iteration did not converge; last iterate " + dump(y));
}

Equilibrium base_equilibrium(const ReactionNetwork& net) {
    const PerronVector pv = perron_kernel(net);
    const Vector log_y = pv.y_bar.array().log().matrix();
    const Matrix bt = net.B().transpose();
    const Vector z = bt.completeOrthogonalDecomposition().solve(log_y);
    for (int k = 0; k < net.n(); ++k) {
        if (!(z(k) < net.theta(k).log_sigma())) {
            throw HypothesisError("no equilibrium constructed: species " + net.species()[static_cast<std::size_t>(k)] +
                                  " would need theta beyond its range; try the homogeneity check");
        }
    }
    Equilibrium eq;
    eq.x_bar = rho_inverse(net, z);
    const Vector f = eval_f(net, eq.x_bar);
    eq.residual = f.norm();
    if (!(eq.residual < 1e-9 * (1.0 + flux_scale(net, eq.x_bar)))) {
        throw NumericalError("base equilibrium residual " + std::to_string(eq.residual) + " too large");
    }
    eq.cls = class_of(stoich_subspace(net), eq.x_bar);
    return eq;
}

double delta(const ReactionNetwork& net, const Vector& x, const Vector& z) {
    check_positive_state(net, x);
    check_positive_state(net, z);
    const Vector dr = rho_positive(net, x) - rho_positive(net, z);
    const Vector q = net.B().transpose() * dr;
    double s = 0.0;
    for (int i = 0; i < net.m(); ++i) {
        for (int j = 0; j < net.m(); ++j) {
            const double d = q(i) - q(j);
            s += d * d;
        }
    }
    return s;
}

double delta_underline(const ReactionNetwork& net, const SubspaceBases& bases, const Vector& x, const Vector& z) {
    check_positive_state(net, x);
    check_positive_state(net, z);
    const Vector dr = rho_positive(net, x) - rho_positive(net, z);
    double s = 0.0;
    for (int i = 1; i < net.m(); ++i) {
        const double d = (net.B().col(i) - net.B().col(0)).dot(dr);
        s += d * d;
    }
    return s + (bases.Dperp.transpose() * (x - z)).squaredNorm();
}

Vector phi(const ReactionNetwork& net, const SubspaceBases& bases, const Vector& p, const Vector& q) {
    check_positive_state(net, q);
    if (p.size() != net.n() || !p.allFinite()) throw DomainError("state has the wrong dimension or is not finite");
    const RMembership mem = in_R(bases, p);
    if (!mem.member) throw InfeasibleError("state " + dump(p) + " has no positive point in its class");
    const Vector p_tilde = p + mem.witness;

    const PhiSystem sys(net, bases, p_tilde, q);
    Vector x = q;
    if (strictly_positive(p_tilde) && sys.merit(sys.residual(p_tilde)) < sys.merit(sys.residual(q))) x = p_tilde;

    if (!sys.newton(x, 200)) {
        Vector y;
        if (!sys.dual(y, 500)) throw NumericalError("class projection did not converge from " + dump(p));
        x = y;
        sys.newton(x, 20);
    }

    const double class_err = (bases.Dperp.transpose() * (x - p)).norm();
    if (!(class_err < 1e-8 + 1e-12 * p.norm())) {
        throw NumericalError("class projection leaves the class: drift " + std::to_string(class_err));
    }
    const double rho_scale = 1.0 + (net.B().transpose() * rho_positive(net, x)).lpNorm<Eigen::Infinity>();
    const double d = delta(net, x, q);
    if (!(d < 1e-14 * rho_scale * rho_scale * net.m() * net.m())) {
        throw NumericalError("class projection residual delta = " + std::to_string(d));
    }
    return x;
}

Vector phi(const ReactionNetwork& net, const Vector& p, const Vector& q) {
    return phi(net, stoich_subspace(net), p, q);
}

CoordinateChart chart(const ReactionNetwork& net) { return chart(net, base_equilibrium(net).x_bar); }

CoordinateChart chart(const ReactionNetwork& net, const Vector& x_bar) {
    check_positive_state(net, x_bar);
    return CoordinateChart{net, stoich_subspace(net), x_bar};
}

Equilibrium pi(const CoordinateChart& ch, const Vector& p) {
    Equilibrium eq;
    eq.x_bar = phi(ch.net, ch.bases, p, ch.x_bar);
    eq.residual = eval_f(ch.net, eq.x_bar).norm();
    eq.cls = class_of(ch.bases, eq.x_bar);
    return eq;
}

Equilibrium pi(const ReactionNetwork& net, const Vector& p) { return pi(chart(net), p); }

ChartCoords chart_apply(const CoordinateChart& ch, const Vector& x) {
    const Vector px = pi(ch, x).x_bar;
    ChartCoords out;
    out.X1 = ch.bases.D.transpose() * (x - px);
    out.X2 = ch.bases.Dperp.transpose() * (rho_positive(ch.net, px) - rho_positive(ch.net, ch.x_bar));
    return out;
}

Vector manifold_map(const CoordinateChart& ch, const Vector& y) {
    if (y.size() != ch.net.n()) throw DomainError("vector has the wrong dimension");
    if ((ch.bases.D.transpose() * y).norm() > 1e-9 * (1.0 + y.norm())) {
        throw DomainError("vector is not orthogonal to the stoichiometric subspace");
    }
    const Vector s = y + rho_positive(ch.net, ch.x_bar);
    for (int k = 0; k < ch.net.n(); ++k) {
        if (!(s(k) < ch.net.theta(k).log_sigma())) throw DomainError("vector leaves the range of rho");
    }
    return rho_inverse(ch.net, s);
}

std::vector<bool> zero_pattern(const Vector& x) {
    const double thr = 1e-12 * (1.0 + x.norm());
    std::vector<bool> z(static_cast<std::size_t>(x.size()));
    for (Eigen::Index k = 0; k < x.size(); ++k) z[static_cast<std::size_t>(k)] = x(k) <= thr;
    return z;
}

bool is_boundary_equilibrium(const ReactionNetwork& net, const Vector& x) {
    check_nonnegative_state(net, x);
    const auto zero = zero_pattern(x);
    for (int j = 0; j < net.m(); ++j) {
        bool hit = false;
        for (int k : support_set(net, j)) hit = hit || zero[static_cast<std::size_t>(k)];
        if (!hit) return false;
    }
    return true;
}

bool minimal_hitting_sets(const std::vector<std::vector<int>>& family, int n, std::size_t cap,
                          std::vector<std::vector<int>>& out, std::size_t& visited) {
    std::vector<std::vector<bool>> found;
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    visited = 0;
    bool complete = true;

    auto contains = [](const std::vector<bool>& big, const std::vector<bool>& small) {
        for (std::size_t k = 0; k < small.size(); ++k) {
            if (small[k] && !big[k]) return false;
        }
        return true;
    };

    auto rec = [&](auto&& self) -> void {
        if (!complete) return;
        if (++visited > cap) {
            complete = false;
            return;
        }
        for (const auto& f : found) {
            if (contains(chosen, f)) return;
        }
        const std::vector<int>* unhit = nullptr;
        for (const auto& s : family) {
            bool hit = false;
            for (int k : s) hit = hit || chosen[static_cast<std::size_t>(k)];
            if (!hit) {
                unhit = &s;
                break;
            }
        }
        if (unhit == nullptr) {
            // Drop earlier sets that this one is contained in.
            found.erase(std::remove_if(found.begin(), found.end(),
                                       [&](const std::vector<bool>& f) { return contains(f, chosen); }),
                        found.end());
            found.push_back(chosen);
            return;
        }
        for (int k : *unhit) {
            chosen[static_cast<std::size_t>(k)] = true;
            self(self);
            chosen[static_cast<std::size_t>(k)] = false;
        }
    };
    rec(rec);

    out.clear();
    for (const auto& f : found) {
        std::vector<int> s;
        for (int k = 0; k < n; ++k) {
            if (f[static_cast<std::size_t>(k)]) s.push_back(k);
        }
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end());
    return complete;
}

BoundaryEquilibriumSearch class_has_boundary_equilibria(const ReactionNetwork& net, const SubspaceBases& bases,
                                                        const ClassId& cls, std::size_t cap) {
    std::vector<std::vector<int>> family;
    for (int j = 0; j < net.m(); ++j) family.push_back(support_set(net, j));

    BoundaryEquilibriumSearch out;
    std::vector<std::vector<int>> sets;
    const bool complete = minimal_hitting_sets(family, net.n(), cap, sets, out.candidates);

    const auto n = net.n();
    const auto r = static_cast<int>(bases.Dperp.cols());
    for (const auto& z : sets) {
        const int rows = r + static_cast<int>(z.size());
        LinearProgram lp;
        lp.A = Matrix::Zero(rows, n);
        lp.b = Vector::Zero(rows);
        lp.A.topRows(r) = bases.Dperp.transpose();
        lp.b.head(r) = cls.coords;
        for (std::size_t i = 0; i < z.size(); ++i) lp.A(r + static_cast<int>(i), z[i]) = 1.0;
        lp.sense.assign(static_cast<std::size_t>(rows), Sense::Equal);
        lp.c = Vector::Zero(n);
        const LpResult res = solve_lp(lp);
        if (res.status == LpStatus::Optimal) {
            out.decision = Decision::Yes;
            out.witness = res.x;
            for (int k : z) out.witness(k) = 0.0;
            out.zero_set = z;
            return out;
        }
    }
    out.decision = complete ? Decision::No : Decision::Undecided;
    return out;
}

HomogeneityResult homogeneity_check(const ReactionNetwork& net) {
    const int n = net.n();
    const int m = net.m();
    // Variables (q_1..q_n >= 0, t free): B'q = 1, t - q_i <= 0, t <= 1; maximize t.
    LinearProgram lp;
    lp.A = Matrix::Zero(m + n + 1, n + 1);
    lp.b = Vector::Zero(m + n + 1);
    lp.A.topLeftCorner(m, n) = net.B().transpose();
    lp.b.head(m).setOnes();
    for (int i = 0; i < n; ++i) {
        lp.A(m + i, i) = -1.0;
        lp.A(m + i, n) = 1.0;
    }
    lp.A(m + n, n) = 1.0;
    lp.b(m + n) = 1.0;
    lp.sense.assign(static_cast<std::size_t>(m), Sense::Equal);
    lp.sense.resize(static_cast<std::size_t>(m + n + 1), Sense::LessEq);
    lp.c = Vector::Zero(n + 1);
    lp.c(n) = 1.0;
    lp.free.assign(static_cast<std::size_t>(n + 1), false);
    lp.free[static_cast<std::size_t>(n)] = true;

    HomogeneityResult out;
    const LpResult res = solve_lp(lp);
    if (res.status == LpStatus::Optimal && res.x(n) > 1e-9) {
        out.holds = true;
        out.q = res.x.head(n);
    }
    return out;
}

}  // namespace zerodef
