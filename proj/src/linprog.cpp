#include "zerodef/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zerodef/errors.hpp"

namespace zerodef {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;

class Tableau {
public:
    Tableau(Matrix t, std::vector<int> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

    [[nodiscard]] int rows() const { return static_cast<int>(t_.rows()); }
    [[nodiscard]] int cols() const { return static_cast<int>(t_.cols()) - 1; }
    [[nodiscard]] double rhs(int i) const { return t_(i, cols()); }
    [[nodiscard]] double at(int i, int j) const { return t_(i, j); }
    [[nodiscard]] const std::vector<int>& basis() const { return basis_; }

    void pivot(int r, int c) {
        t_.row(r) /= t_(r, c);
        for (int i = 0; i < rows(); ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        t_(r, c) = 1.0;
        basis_[static_cast<std::size_t>(r)] = c;
    }

    void drop_row(int r) {
        Matrix t(rows() - 1, t_.cols());
        int k = 0;
        for (int i = 0; i < rows(); ++i) {
            if (i != r) t.row(k++) = t_.row(i);
        }
        t_ = std::move(t);
        basis_.erase(basis_.begin() + r);
    }

    /// Minimize cost'x over the current tableau; columns with allowed[j] false
    /// never enter. Returns false when unbounded.
    bool minimize(const Vector& cost, const std::vector<bool>& allowed) {
        const int max_iter = 50 * (rows() + cols() + 10);
        for (int iter = 0; iter < max_iter; ++iter) {
            int enter = -1;
            for (int j = 0; j < cols(); ++j) {
                if (!allowed[static_cast<std::size_t>(j)]) continue;
                double r = cost(j);
                for (int i = 0; i < rows(); ++i) r -= cost(basis_[static_cast<std::size_t>(i)]) * t_(i, j);
                if (r < -kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return true;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < rows(); ++i) {
                if (t_(i, enter) > kPivotTol) best = std::min(best, rhs(i) / t_(i, enter));
            }
            int leave = -1;
            if (std::isfinite(best)) {
                const double tie = 1e-12 * (1.0 + std::abs(best));
                for (int i = 0; i < rows(); ++i) {
                    if (t_(i, enter) <= kPivotTol || rhs(i) / t_(i, enter) > best + tie) continue;
                    if (leave < 0 || basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
                        leave = i;
                    }
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
        throw NumericalError("simplex iteration limit reached");
    }

    [[nodiscard]] Vector solution() const {
        Vector x = Vector::Zero(cols());
        for (int i = 0; i < rows(); ++i) x(basis_[static_cast<std::size_t>(i)]) = rhs(i);
        return x;
    }

private:
    Matrix t_;
    std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
    const auto rows = static_cast<int>(lp.A.rows());
    const auto nvar = static_cast<int>(lp.A.cols());
    if (lp.b.size() != rows || static_cast<int>(lp.sense.size()) != rows || lp.c.size() != nvar ||
        (!lp.free.empty() && static_cast<int>(lp.free.size()) != nvar)) {
        throw StructuralError("linear program dimensions are inconsistent");
    }

    // Column layout: x+ for every variable, x- for free ones, one slack per
    // inequality, one artificial per row that has no natural basic column.
    std::vector<int> neg_col(static_cast<std::size_t>(nvar), -1);
    int ncols = nvar;
    for (int j = 0; j < nvar; ++j) {
        if (!lp.free.empty() && lp.free[static_cast<std::size_t>(j)]) neg_col[static_cast<std::size_t>(j)] = ncols++;
    }
    const int structural = ncols;

    Matrix a(rows, ncols);
    Vector b = lp.b;
    std::vector<Sense> sense = lp.sense;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < nvar; ++j) {
            a(i, j) = lp.A(i, j);
            if (neg_col[static_cast<std::size_t>(j)] >= 0) a(i, neg_col[static_cast<std::size_t>(j)]) = -lp.A(i, j);
        }
        if (b(i) < 0.0) {
            a.row(i) *= -1.0;
            b(i) = -b(i);
            if (sense[static_cast<std::size_t>(i)] == Sense::LessEq) {
                sense[static_cast<std::size_t>(i)] = Sense::GreaterEq;
            } else if (sense[static_cast<std::size_t>(i)] == Sense::GreaterEq) {
                sense[static_cast<std::size_t>(i)] = Sense::LessEq;
            }
        }
    }

    int nslack = 0;
    int nart = 0;
    for (Sense s : sense) {
        if (s != Sense::Equal) ++nslack;
        if (s != Sense::LessEq) ++nart;
    }
    const int total = structural + nslack + nart;
    Matrix t = Matrix::Zero(rows, total + 1);
    std::vector<int> basis(static_cast<std::size_t>(rows));
    int slack = structural;
    int art = structural + nslack;
    for (int i = 0; i < rows; ++i) {
        t.block(i, 0, 1, structural) = a.row(i);
        t(i, total) = b(i);
        switch (sense[static_cast<std::size_t>(i)]) {
            case Sense::LessEq:
                t(i, slack) = 1.0;
                basis[static_cast<std::size_t>(i)] = slack++;
                break;
            case Sense::GreaterEq:
                t(i, slack++) = -1.0;
                t(i, art) = 1.0;
                basis[static_cast<std::size_t>(i)] = art++;
                break;
            case Sense::Equal:
                t(i, art) = 1.0;
                basis[static_cast<std::size_t>(i)] = art++;
                break;
        }
    }

    Tableau tab(std::move(t), std::move(basis));
    const int first_art = structural + nslack;
    std::vector<bool> allowed(static_cast<std::size_t>(total), true);

    if (nart > 0) {
        Vector cost1 = Vector::Zero(total);
        cost1.tail(nart).setOnes();
        tab.minimize(cost1, allowed);
        double infeas = 0.0;
        for (int i = 0; i < tab.rows(); ++i) {
            if (tab.basis()[static_cast<std::size_t>(i)] >= first_art) infeas += tab.rhs(i);
        }
        const double scale = 1.0 + b.lpNorm<Eigen::Infinity>();
        if (infeas > 1e-9 * scale) return LpResult{LpStatus::Infeasible, Vector(), 0.0};

        for (int i = tab.rows() - 1; i >= 0; --i) {
            if (tab.basis()[static_cast<std::size_t>(i)] < first_art) continue;
            int col = -1;
            for (int j = 0; j < first_art; ++j) {
                if (std::abs(tab.at(i, j)) > kPivotTol) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) {
                tab.pivot(i, col);
            } else {
                tab.drop_row(i);
            }
        }
        for (int j = first_art; j < total; ++j) allowed[static_cast<std::size_t>(j)] = false;
    }

    Vector cost2 = Vector::Zero(total);
    for (int j = 0; j < nvar; ++j) {
        cost2(j) = -lp.c(j);
        if (neg_col[static_cast<std::size_t>(j)] >= 0) cost2(neg_col[static_cast<std::size_t>(j)]) = lp.c(j);
    }
    if (!tab.minimize(cost2, allowed)) return LpResult{LpStatus::Unbounded, Vector(), 0.0};

    const Vector z = tab.solution();
    Vector x(nvar);
    for (int j = 0; j < nvar; ++j) {
        x(j) = z(j);
        if (neg_col[static_cast<std::size_t>(j)] >= 0) x(j) -= z(neg_col[static_cast<std::size_t>(j)]);
    }
    return LpResult{LpStatus::Optimal, x, lp.c.dot(x)};
}

}  // namespace zerodef
