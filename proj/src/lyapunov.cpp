#include "zerodef/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "zerodef/equilibria.hpp"
#include "zerodef/errors.hpp"

namespace zerodef {

namespace {

Vector rho_positive(const ReactionNetwork& net, const Vector& x) {
    Vector r(net.n());
    for (int k = 0; k < net.n(); ++k) r(k) = net.theta(k).rho(x(k)).value();
    return r;
}

double simpson_step(const std::function<double(double)>& g, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = g(lm);
    const double frm = g(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
    return simpson_step(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_step(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

double entropy_W(const ReactionNetwork& net, const Vector& x, const Vector& z) {
    check_nonnegative_state(net, x);
    check_positive_state(net, z);
    double w = 0.0;
    for (int k = 0; k < net.n(); ++k) {
        const auto& t = net.theta(k);
        w += t.rho_integral_from_one(x(k)) - t.rho(z(k)).value() * x(k);
    }
    return w;
}

double lyapunov_V(const ReactionNetwork& net, const Vector& x, const Vector& x_bar) {
    check_nonnegative_state(net, x);
    check_positive_state(net, x_bar);
    // Summed per species so each term is a nonnegative Bregman divergence.
    double v = 0.0;
    for (int k = 0; k < net.n(); ++k) {
        const auto& t = net.theta(k);
        const double c = t.rho(x_bar(k)).value();
        const double term = (t.rho_integral_from_one(x(k)) - c * x(k)) -
                            (t.rho_integral_from_one(x_bar(k)) - c * x_bar(k));
        v += std::max(term, 0.0);
    }
    return v;
}

Vector lyapunov_grad(const ReactionNetwork& net, const Vector& x, const Vector& x_bar) {
    check_positive_state(net, x);
    check_positive_state(net, x_bar);
    return rho_positive(net, x) - rho_positive(net, x_bar);
}

double rho_integral_numeric(const KineticsFn& fn, double r, double tol) {
    if (!(r > 0.0)) throw DomainError("numeric entropy integral requires a positive endpoint");
    const std::function<double(double)> g = [&fn](double s) { return fn.rho(s).value(); };
    const double a = 1.0;
    const double b = r;
    const double fa = g(a);
    const double fb = g(b);
    const double fm = g(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(g, a, b, fa, fm, fb, whole, tol, 50);
}

double rate_quadratic_form(const ReactionNetwork& net, const Vector& q) {
    double s = 0.0;
    for (int i = 0; i < net.m(); ++i) {
        for (int j = 0; j < net.m(); ++j) {
            const double d = q(i) - q(j);
            s += net.A()(i, j) * d * d;
        }
    }
    return s;
}

KappaResult kappa(const ReactionNetwork& net) {
    const int m = net.m();
    KappaResult out;
    if (m == 1) return out;
    // Laplacian of the symmetrized weights a_ij + a_ji is the matrix of the
    // rate form; sum (q_i - q_j)^2 has matrix 2(mI - 11'), i.e. 2m I on 1-perp.
    Matrix lap = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            const double w = net.A()(i, j) + net.A()(j, i);
            lap(i, j) -= w;
            lap(i, i) += w;
        }
    }
    // Orthonormal basis of 1-perp: the trailing columns of a Householder QR of 1.
    const Matrix q = Eigen::HouseholderQR<Matrix>(Vector::Ones(m)).householderQ();
    const Matrix u = q.rightCols(m - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(u.transpose() * lap * u);
    if (eig.info() != Eigen::Success) throw NumericalError("eigen-solve for kappa failed");
    out.kappa = eig.eigenvalues()(0) / (2.0 * m);
    out.direction = u * eig.eigenvectors().col(0);
    return out;
}

double c0_of(const ReactionNetwork& net, const Vector& z) {
    check_positive_state(net, z);
    return theta_big(net, z).minCoeff();
}

double c_of(const ReactionNetwork& net, double kappa_value, const Vector& z) {
    return kappa_value * c0_of(net, z) / 2.0;
}

double c_of(const ReactionNetwork& net, const Vector& z) { return c_of(net, kappa(net).kappa, z); }

DissipationChecker::DissipationChecker(const ReactionNetwork& net)
    : net_(net), kappa_(zerodef::kappa(net).kappa) {
    const Matrix& b = net_.B();
    b_pinv_ = (b.transpose() * b).ldlt().solve(b.transpose());
    const double err = (b_pinv_ * b - Matrix::Identity(net_.m(), net_.m())).lpNorm<Eigen::Infinity>();
    if (err > 1e-12 * (1.0 + b.lpNorm<Eigen::Infinity>())) {
        b_pinv_ = b.completeOrthogonalDecomposition().pseudoInverse();
    }
}

std::optional<Vector> DissipationChecker::v_field(const Vector& sigma) const {
    const Vector q = net_.B().transpose() * sigma;
    if (q.maxCoeff() > 500.0) return std::nullopt;
    const Vector e = q.array().exp().matrix();
    return Vector(b_pinv_.transpose() * e);
}

DissipationChecker::Outcome DissipationChecker::check(const Vector& x, const Vector& z) const {
    check_positive_state(net_, x);
    check_positive_state(net_, z);
    Outcome out;
    const Vector dr = rho_positive(net_, x) - rho_positive(net_, z);
    const auto v = v_field(dr);
    if (!v) {
        out.in_range = false;
        return out;
    }
    const Vector fx = eval_f(net_, x);
    const Vector fz = eval_f(net_, z);
    const double cd = c_of(net_, kappa_, z) * delta(net_, x, z);
    const double g = v->dot(fz);
    out.lhs = dr.dot(fx);
    out.rhs = -cd + g;
    out.margin = out.rhs - out.lhs;
    out.scale = 1.0 + std::abs(out.lhs) + std::abs(cd) + std::abs(g);
    return out;
}

std::optional<Vector> v_field(const ReactionNetwork& net, const Vector& sigma) {
    return DissipationChecker(net).v_field(sigma);
}

DissipationChecker::Outcome check_54(const ReactionNetwork& net, const Vector& x, const Vector& z) {
    return DissipationChecker(net).check(x, z);
}

double robust_margin(const ReactionNetwork& net, const SubspaceBases& bases, double kappa_value, const Vector& x_bar,
                     const Vector& x) {
    check_positive_state(net, x_bar);
    check_positive_state(net, x);
    if (!same_class(bases, x, x_bar)) throw DomainError("state is not in the class of the equilibrium");
    const double c = c_of(net, kappa_value, x_bar);
    return 0.25 * c * c * delta(net, x, x_bar);
}

double robust_margin(const ReactionNetwork& net, const Vector& x_bar, const Vector& x) {
    return robust_margin(net, stoich_subspace(net), kappa(net).kappa, x_bar, x);
}

ExpRate exp_rate(const ReactionNetwork& net, const Vector& x_bar) {
    check_positive_state(net, x_bar);
    const int n = net.n();
    const int m = net.m();
    const SubspaceBases bases = stoich_subspace(net);

    Vector qdiag(n);
    for (int k = 0; k < n; ++k) qdiag(k) = net.theta(k).rho_prime(x_bar(k));
    const double lam_min = qdiag.minCoeff();
    const double lam_max = qdiag.maxCoeff();

    ExpRate out;
    out.c_at = c_of(net, x_bar);
    out.c1 = 0.5 * lam_min;
    out.c2 = lam_max;

    // Smallest singular value of W' on R D, where R = Q^(1/2) and W has
    // columns R (b_i - b_1).
    double d0 = 1.0;
    if (m > 1) {
        const Vector rdiag = qdiag.array().sqrt().matrix();
        Matrix w(n, m - 1);
        for (int i = 1; i < m; ++i) w.col(i - 1) = rdiag.asDiagonal() * (net.B().col(i) - net.B().col(0));
        const Matrix basis = Eigen::HouseholderQR<Matrix>(w).householderQ() * Matrix::Identity(n, m - 1);
        Eigen::JacobiSVD<Matrix> svd(w.transpose() * basis);
        d0 = svd.singularValues()(m - 2);
    }
    const double d1 = std::sqrt(lam_min);
    const double d = (d0 * d1) * (d0 * d1);
    out.d2 = d / 2.0;
    out.rate = out.c_at * out.d2 / out.c2;

    // Sample the class ball: basis directions of D with both signs plus
    // random unit directions in D, at several fractions of the radius.
    std::vector<Vector> dirs;
    for (int i = 0; i < bases.D.cols(); ++i) {
        dirs.emplace_back(bases.D.col(i));
        dirs.emplace_back(-bases.D.col(i));
    }
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal;
    for (int s = 0; s < 32 && bases.D.cols() > 0; ++s) {
        Vector c(bases.D.cols());
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal(rng);
        dirs.emplace_back(bases.D * c.normalized());
    }

    double r = 0.5 * x_bar.minCoeff();
    for (int attempt = 0; attempt < 60; ++attempt, r *= 0.5) {
        bool ok = true;
        for (const auto& u : dirs) {
            for (double frac : {1.0, 0.5, 0.25, 0.125}) {
                const Vector dx = (r * frac) * u;
                const Vector x = x_bar + dx;
                const double n2 = dx.squaredNorm();
                const double v = lyapunov_V(net, x, x_bar);
                if (v < 0.5 * out.c1 * n2 || v > out.c2 * n2 || delta(net, x, x_bar) < out.d2 * n2) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
        if (ok) {
            out.radius = r;
            return out;
        }
    }
    throw NumericalError("could not validate the quadratic bounds on any ball around the equilibrium");
}

CertificateReport certificate(const ReactionNetwork& net, const Vector& x_bar, const Vector& x) {
    const SubspaceBases bases = stoich_subspace(net);
    CertificateReport rep;
    rep.kappa = kappa(net).kappa;
    rep.c0_at = c0_of(net, x_bar);
    rep.c_at = rep.kappa * rep.c0_at / 2.0;
    const auto chk = DissipationChecker(net).check(x, x_bar);
    if (chk.in_range) rep.inequality_54_margin = chk.margin;
    rep.delta_S_at = robust_margin(net, bases, rep.kappa, x_bar, x);
    rep.exp = exp_rate(net, x_bar);
    return rep;
}

}  // namespace zerodef
