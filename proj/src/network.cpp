#include "zerodef/network.hpp"

#include <cmath>
#include <deque>
#include <sstream>

#include "zerodef/errors.hpp"

namespace zerodef {

namespace {

void check_finite_nonneg(const Matrix& mat, const char* name) {
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            const double v = mat(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                std::ostringstream os;
                os << name << "(" << i + 1 << "," << j + 1 << ") = " << v << " is not a finite nonnegative number";
                throw StructuralError(os.str());
            }
        }
    }
}

// Nodes reachable from node 0 following edges j -> i (a_ij > 0), or the
// reverse edges when `backward` is set.
std::vector<bool> reachable(const Matrix& a, bool backward) {
    const auto m = static_cast<int>(a.rows());
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    if (m == 0) return seen;
    std::deque<int> queue{0};
    seen[0] = true;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int v = 0; v < m; ++v) {
            if (v == u || seen[static_cast<std::size_t>(v)]) continue;
            const double w = backward ? a(u, v) : a(v, u);
            if (w > 0.0) {
                seen[static_cast<std::size_t>(v)] = true;
                queue.push_back(v);
            }
        }
    }
    return seen;
}

double complex_monomial(const ReactionNetwork& net, const Vector& theta_vals, int j) {
    double prod = 1.0;
    for (int k = 0; k < net.n(); ++k) {
        const double c = net.B()(k, j);
        if (c == 0.0) continue;
        prod *= power(theta_vals(k), c);
        if (prod == 0.0) return 0.0;
    }
    return prod;
}

Vector theta_values(const ReactionNetwork& net, const Vector& x) {
    Vector t(net.n());
    for (int k = 0; k < net.n(); ++k) t(k) = net.theta(k).theta(x(k));
    return t;
}

}  // namespace

ReactionNetwork::ReactionNetwork(Matrix a, Matrix b, std::vector<KineticsFn> theta,
                                 std::vector<std::string> species)
    : a_(std::move(a)), b_(std::move(b)), theta_(std::move(theta)), species_(std::move(species)) {
    if (a_.rows() != a_.cols()) throw StructuralError("A must be square");
    if (b_.cols() != a_.rows()) {
        throw StructuralError("B has " + std::to_string(b_.cols()) + " columns but A is " +
                              std::to_string(a_.rows()) + "x" + std::to_string(a_.cols()));
    }
    if (b_.rows() == 0 || b_.cols() == 0) throw StructuralError("network has no species or no complexes");
    check_finite_nonneg(a_, "A");
    check_finite_nonneg(b_, "B");
    const auto n = static_cast<std::size_t>(b_.rows());
    if (theta_.empty()) theta_.assign(n, KineticsFn::mass_action());
    if (theta_.size() != n) throw StructuralError("kinetics list length differs from species count");
    if (species_.empty()) {
        for (std::size_t k = 0; k < n; ++k) species_.push_back("x" + std::to_string(k + 1));
    }
    if (species_.size() != n) throw StructuralError("species name list length differs from species count");
}

bool ReactionNetwork::all_mass_action() const noexcept {
    for (const auto& t : theta_) {
        if (!t.is_mass_action()) return false;
    }
    return true;
}

ReactionNetwork ReactionNetwork::with_rate(int i, int j, double value) const {
    if (i < 0 || j < 0 || i >= m() || j >= m()) throw DomainError("rate index out of range");
    Matrix a = a_;
    a(i, j) = value;
    return ReactionNetwork(std::move(a), b_, theta_, species_);
}

ValidationReport validate(const ReactionNetwork& net) {
    ValidationReport rep;
    const int n = net.n();
    const int m = net.m();

    const auto fwd = reachable(net.A(), false);
    const auto bwd = reachable(net.A(), true);
    rep.irreducible.passed = true;
    for (int j = 0; j < m; ++j) {
        if (!fwd[static_cast<std::size_t>(j)] || !bwd[static_cast<std::size_t>(j)]) {
            rep.irreducible.passed = false;
            rep.unreachable_complex = j;
            std::ostringstream os;
            os << "complex " << j + 1 << " is not "
               << (!fwd[static_cast<std::size_t>(j)] ? "reachable from" : "able to reach") << " complex 1";
            rep.irreducible.diagnostic = os.str();
            break;
        }
    }

    rep.entries.passed = true;
    for (int j = 0; j < m && rep.entries.passed; ++j) {
        for (int k = 0; k < n; ++k) {
            const double v = net.B()(k, j);
            if (v != 0.0 && v < 1.0) {
                rep.entries.passed = false;
                rep.bad_entry = std::make_pair(k, j);
                std::ostringstream os;
                os << "B(" << k + 1 << "," << j + 1 << ") = " << v << " lies strictly between 0 and 1";
                rep.entries.diagnostic = os.str();
                break;
            }
        }
    }

    Eigen::JacobiSVD<Matrix> svd(net.B());
    const Vector& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? 1e-10 * sv(0) : 0.0;
    rep.rank_found = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) ++rep.rank_found;
    }
    rep.rank.passed = rep.rank_found == m && m <= n;
    if (!rep.rank.passed) {
        rep.rank.diagnostic = "rank B = " + std::to_string(rep.rank_found) + ", expected m = " + std::to_string(m) +
                              " with m <= n = " + std::to_string(n);
    }

    rep.rows.passed = true;
    for (int k = 0; k < n; ++k) {
        if (net.B().row(k).maxCoeff() == 0.0) {
            rep.rows.passed = false;
            rep.zero_row = k;
            rep.rows.diagnostic = "species " + net.species()[static_cast<std::size_t>(k)] + " appears in no complex";
            break;
        }
    }
    return rep;
}

void require_valid(const ReactionNetwork& net) {
    const auto rep = validate(net);
    if (rep.all_passed()) return;
    std::string msg = "network hypotheses fail:";
    for (const auto* c : rep.checks()) {
        if (!c->passed) msg += " [" + c->name + ": " + c->diagnostic + "]";
    }
    throw HypothesisError(msg);
}

std::vector<int> support_set(const ReactionNetwork& net, int j) {
    if (j < 0 || j >= net.m()) throw DomainError("complex index " + std::to_string(j) + " out of range");
    std::vector<int> s;
    for (int k = 0; k < net.n(); ++k) {
        if (net.B()(k, j) > 0.0) s.push_back(k);
    }
    return s;
}

double power(double r, double c) {
    if (c == 0.0) return 1.0;
    if (r == 0.0) return 0.0;
    if (c == std::floor(c) && c <= 8.0) {
        double p = r;
        for (int i = 1; i < static_cast<int>(c); ++i) p *= r;
        return p;
    }
    return std::exp(c * std::log(r));
}

void check_nonnegative_state(const ReactionNetwork& net, const Vector& x) {
    if (x.size() != net.n()) {
        throw DomainError("state has " + std::to_string(x.size()) + " components, expected " + std::to_string(net.n()));
    }
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (!std::isfinite(x(k)) || x(k) < 0.0) {
            throw DomainError("state component " + std::to_string(k + 1) + " is negative or not finite");
        }
    }
}

void check_positive_state(const ReactionNetwork& net, const Vector& x) {
    check_nonnegative_state(net, x);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (!(x(k) > 0.0)) throw DomainError("state component " + std::to_string(k + 1) + " is not positive");
    }
}

std::vector<LogValue> rho_vec(const ReactionNetwork& net, const Vector& x) {
    check_nonnegative_state(net, x);
    std::vector<LogValue> out;
    out.reserve(static_cast<std::size_t>(net.n()));
    for (int k = 0; k < net.n(); ++k) out.push_back(net.theta(k).rho(x(k)));
    return out;
}

Vector theta_big(const ReactionNetwork& net, const Vector& x) {
    check_nonnegative_state(net, x);
    const Vector t = theta_values(net, x);
    Vector out(net.m());
    for (int j = 0; j < net.m(); ++j) out(j) = complex_monomial(net, t, j);
    return out;
}

Matrix a_tilde(const ReactionNetwork& net) {
    Matrix at = net.A();
    for (int j = 0; j < net.m(); ++j) {
        double off = 0.0;
        for (int i = 0; i < net.m(); ++i) {
            if (i != j) off += net.A()(i, j);
        }
        at(j, j) = -off;
    }
    return at;
}

Vector eval_f(const ReactionNetwork& net, const Vector& x) {
    const Vector big = theta_big(net, x);
    Vector f = Vector::Zero(net.n());
    for (int j = 0; j < net.m(); ++j) {
        if (big(j) == 0.0) continue;
        for (int i = 0; i < net.m(); ++i) {
            const double a = net.A()(i, j);
            if (i == j || a == 0.0) continue;
            f.noalias() += (a * big(j)) * (net.B().col(i) - net.B().col(j));
        }
    }
    return f;
}

Vector eval_f_matrix(const ReactionNetwork& net, const Vector& x) {
    return net.B() * (a_tilde(net) * theta_big(net, x));
}

std::pair<double, double> alpha_beta(const ReactionNetwork& net, const Vector& x, int k) {
    if (k < 0 || k >= net.n()) throw DomainError("species index " + std::to_string(k) + " out of range");
    check_nonnegative_state(net, x);
    const Vector t = theta_values(net, x);
    double alpha = 0.0;
    double beta = 0.0;
    for (int j = 0; j < net.m(); ++j) {
        double coeff = 0.0;
        for (int i = 0; i < net.m(); ++i) {
            if (i == j) continue;
            coeff += net.A()(i, j) * (net.B()(k, i) - net.B()(k, j));
        }
        if (coeff == 0.0) continue;
        const double bkj = net.B()(k, j);
        if (bkj == 0.0) {
            // Terms with b_kj = 0 have coefficient sum_i a_ij b_ki >= 0.
            beta += coeff * complex_monomial(net, t, j);
            continue;
        }
        double prod = power(t(k), bkj - 1.0);
        for (int l = 0; l < net.n() && prod != 0.0; ++l) {
            if (l == k) continue;
            const double c = net.B()(l, j);
            if (c != 0.0) prod *= power(t(l), c);
        }
        alpha += coeff * prod;
    }
    return {alpha, beta};
}

double flux_scale(const ReactionNetwork& net, const Vector& x) {
    const Vector big = theta_big(net, x);
    double s = 0.0;
    for (int j = 0; j < net.m(); ++j) {
        for (int i = 0; i < net.m(); ++i) {
            if (i == j) continue;
            s += net.A()(i, j) * big(j) * (net.B().col(i) - net.B().col(j)).norm();
        }
    }
    return s;
}

}  // namespace zerodef
