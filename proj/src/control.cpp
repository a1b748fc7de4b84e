#include "zerodef/control.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "zerodef/errors.hpp"

namespace zerodef {

namespace {

double binomial(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

bool next_combination(std::vector<int>& idx, int n) {
    const auto r = static_cast<int>(idx.size());
    int i = r - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - r + i) --i;
    if (i < 0) return false;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    return true;
}

// Extends `start` to n - m + 1 indices so that D and the chosen unit vectors
// span R^n, picking columns of the projection onto Dperp by pivoted QR.
std::optional<std::vector<int>> complete_greedy(const SubspaceBases& bases, const std::vector<int>& start, int r) {
    const auto n = static_cast<int>(bases.Dperp.rows());
    std::vector<int> chosen = start;
    // Residual of Dperp' e_k after removing the span of already chosen columns.
    Matrix picked(bases.Dperp.cols(), 0);
    for (int k : chosen) {
        picked.conservativeResize(Eigen::NoChange, picked.cols() + 1);
        picked.col(picked.cols() - 1) = bases.Dperp.row(k).transpose();
    }
    while (static_cast<int>(chosen.size()) < r) {
        int best = -1;
        double best_norm = 0.0;
        Matrix q;
        if (picked.cols() > 0) q = Eigen::HouseholderQR<Matrix>(picked).householderQ() * Matrix::Identity(picked.rows(), picked.cols());
        for (int k = 0; k < n; ++k) {
            if (std::find(chosen.begin(), chosen.end(), k) != chosen.end()) continue;
            Vector v = bases.Dperp.row(k).transpose();
            if (q.cols() > 0) v -= q * (q.transpose() * v);
            if (v.norm() > best_norm * (1.0 + 1e-12)) {
                best_norm = v.norm();
                best = k;
            }
        }
        if (best < 0 || best_norm < 1e-10) return std::nullopt;
        chosen.push_back(best);
        picked.conservativeResize(Eigen::NoChange, picked.cols() + 1);
        picked.col(picked.cols() - 1) = bases.Dperp.row(best).transpose();
    }
    std::sort(chosen.begin(), chosen.end());
    if (!spans_with_stoichiometry(bases, chosen)) return std::nullopt;
    return chosen;
}

}  // namespace

Vector FeedbackLaw::g(const Vector& x) const {
    Vector out = Vector::Zero(x.size());
    for (std::size_t l = 0; l < indices.size(); ++l) {
        const int k = indices[l];
        out(k) = gains(static_cast<Eigen::Index>(l)) * (target(k) - x(k));
    }
    return out;
}

bool spans_with_stoichiometry(const SubspaceBases& bases, const std::vector<int>& indices) {
    const auto r = bases.Dperp.cols();
    if (static_cast<Eigen::Index>(indices.size()) < r) return false;
    if (r == 0) return true;
    Matrix m(r, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t l = 0; l < indices.size(); ++l) m.col(static_cast<Eigen::Index>(l)) = bases.Dperp.row(indices[l]).transpose();
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& sv = svd.singularValues();
    return sv(r - 1) > 1e-10 * std::max(1.0, sv(0));
}

std::optional<int> certifying_complex(const ReactionNetwork& net, const std::vector<int>& indices) {
    std::optional<int> best;
    std::size_t best_size = 0;
    for (int j = 0; j < net.m(); ++j) {
        const auto s = support_set(net, j);
        const bool inside = std::all_of(s.begin(), s.end(), [&](int k) {
            return std::find(indices.begin(), indices.end(), k) != indices.end();
        });
        if (inside && (!best || s.size() < best_size)) {
            best = j;
            best_size = s.size();
        }
    }
    return best;
}

std::vector<ActuatorSet> select_actuators(const ReactionNetwork& net) {
    const SubspaceBases bases = stoich_subspace(net);
    const int n = net.n();
    const int r = n - net.m() + 1;
    std::vector<ActuatorSet> out;

    if (binomial(n, r) <= 1e5) {
        std::vector<int> idx(static_cast<std::size_t>(r));
        for (int i = 0; i < r; ++i) idx[static_cast<std::size_t>(i)] = i;
        do {
            if (!spans_with_stoichiometry(bases, idx)) continue;
            if (auto j = certifying_complex(net, idx)) out.push_back({idx, *j});
        } while (next_combination(idx, n));
        return out;
    }

    std::vector<int> order(static_cast<std::size_t>(net.m()));
    for (int j = 0; j < net.m(); ++j) order[static_cast<std::size_t>(j)] = j;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return support_set(net, a).size() < support_set(net, b).size();
    });
    std::set<std::vector<int>> seen;
    for (int j : order) {
        const auto s = support_set(net, j);
        if (static_cast<int>(s.size()) > r) continue;
        auto done = complete_greedy(bases, s, r);
        if (!done || !seen.insert(*done).second) continue;
        out.push_back({*done, *certifying_complex(net, *done)});
    }
    std::sort(out.begin(), out.end(), [](const ActuatorSet& a, const ActuatorSet& b) { return a.indices < b.indices; });
    return out;
}

FeedbackLaw make_feedback(const ReactionNetwork& net, const Vector& x_bar, const std::vector<int>& indices,
                          const Vector& gains) {
    const int r = net.n() - net.m() + 1;
    if (static_cast<int>(indices.size()) != r) {
        throw DomainError("feedback needs exactly n - m + 1 = " + std::to_string(r) + " actuated species, got " +
                          std::to_string(indices.size()));
    }
    std::vector<int> sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw DomainError("actuated species repeat");
    for (int k : sorted) {
        if (k < 0 || k >= net.n()) throw DomainError("actuated species index out of range");
    }
    if (gains.size() != r) throw DomainError("one gain per actuated species is required");
    for (Eigen::Index l = 0; l < gains.size(); ++l) {
        if (!(gains(l) > 0.0) || !std::isfinite(gains(l))) throw DomainError("feedback gains must be positive");
    }
    check_positive_state(net, x_bar);
    const double res = eval_f(net, x_bar).norm();
    if (!(res < 1e-9 * (1.0 + flux_scale(net, x_bar)))) {
        throw DomainError("target is not a positive equilibrium (|f| = " + std::to_string(res) + ")");
    }
    const SubspaceBases bases = stoich_subspace(net);
    if (!spans_with_stoichiometry(bases, indices)) {
        throw HypothesisError("span condition fails: the stoichiometric subspace and the actuated directions do not span R^n");
    }
    const auto j = certifying_complex(net, indices);
    if (!j) throw HypothesisError("support condition fails: no complex has its species all actuated");
    return FeedbackLaw{indices, gains, x_bar, *j};
}

}  // namespace zerodef
