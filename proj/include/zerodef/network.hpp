#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zerodef/kinetics.hpp"

namespace zerodef {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A network dx/dt = sum_ij a_ij Theta_j(x) (b_i - b_j).
///
/// Columns of B are the complexes; a_ij is the rate constant of the edge
/// j -> i. Diagonal entries of A are kept (a self-loop is legal input) but
/// never contribute to the vector field. Indices in the C++ API are 0-based.
class ReactionNetwork {
public:
    ReactionNetwork() = default;

    /// Throws StructuralError on dimension mismatch or non-finite / negative
    /// entries. Empty theta means mass action everywhere; empty names become
    /// x1..xn.
    ReactionNetwork(Matrix a, Matrix b, std::vector<KineticsFn> theta = {},
                    std::vector<std::string> species = {});

    [[nodiscard]] int n() const noexcept { return static_cast<int>(b_.rows()); }
    [[nodiscard]] int m() const noexcept { return static_cast<int>(b_.cols()); }
    [[nodiscard]] const Matrix& A() const noexcept { return a_; }
    [[nodiscard]] const Matrix& B() const noexcept { return b_; }
    [[nodiscard]] const std::vector<KineticsFn>& theta() const noexcept { return theta_; }
    [[nodiscard]] const KineticsFn& theta(int k) const { return theta_.at(static_cast<std::size_t>(k)); }
    [[nodiscard]] const std::vector<std::string>& species() const noexcept { return species_; }
    [[nodiscard]] bool all_mass_action() const noexcept;

    /// Copy with a_ij replaced.
    [[nodiscard]] ReactionNetwork with_rate(int i, int j, double value) const;

private:
    Matrix a_;
    Matrix b_;
    std::vector<KineticsFn> theta_;
    std::vector<std::string> species_;
};

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    std::string diagnostic;
};

struct ValidationReport {
    HypothesisCheck irreducible{"irreducible A", false, {}};
    HypothesisCheck entries{"entries of B are 0 or >= 1", false, {}};
    HypothesisCheck rank{"rank B = m", false, {}};
    HypothesisCheck rows{"no zero row in B", false, {}};

    std::optional<int> unreachable_complex;       // first complex not mutually reachable with complex 0
    std::optional<std::pair<int, int>> bad_entry;  // (species, complex)
    int rank_found = 0;
    std::optional<int> zero_row;

    [[nodiscard]] bool all_passed() const noexcept {
        return irreducible.passed && entries.passed && rank.passed && rows.passed;
    }
    [[nodiscard]] std::vector<const HypothesisCheck*> checks() const {
        return {&irreducible, &entries, &rank, &rows};
    }
};

[[nodiscard]] ValidationReport validate(const ReactionNetwork& net);

/// Throws HypothesisError naming every failed hypothesis.
void require_valid(const ReactionNetwork& net);

/// {k : b_kj > 0}.
[[nodiscard]] std::vector<int> support_set(const ReactionNetwork& net, int j);

/// r^c with r^0 = 1 and 0^c = 0 for c > 0.
[[nodiscard]] double power(double r, double c);

[[nodiscard]] std::vector<LogValue> rho_vec(const ReactionNetwork& net, const Vector& x);

/// Theta_B(x)_j = prod_k theta_k(x_k)^{b_kj}.
[[nodiscard]] Vector theta_big(const ReactionNetwork& net, const Vector& x);

/// A minus the diagonal of its column sums; 1^T * a_tilde = 0.
[[nodiscard]] Matrix a_tilde(const ReactionNetwork& net);

/// Vector field as the double sum over edges.
[[nodiscard]] Vector eval_f(const ReactionNetwork& net, const Vector& x);

/// Vector field as B * a_tilde * Theta_B(x).
[[nodiscard]] Vector eval_f_matrix(const ReactionNetwork& net, const Vector& x);

/// Split f_k(x) = alpha_k(x) theta_k(x_k) + beta_k(x) with beta_k >= 0.
[[nodiscard]] std::pair<double, double> alpha_beta(const ReactionNetwork& net, const Vector& x, int k);

/// sum_{i != j} a_ij Theta_j(x) |b_i - b_j|: magnitude of the terms that cancel
/// in f, used to scale residual tolerances.
[[nodiscard]] double flux_scale(const ReactionNetwork& net, const Vector& x);

/// Throws DomainError unless x has n finite nonnegative entries.
void check_nonnegative_state(const ReactionNetwork& net, const Vector& x);
/// Throws DomainError unless x has n finite positive entries.
void check_positive_state(const ReactionNetwork& net, const Vector& x);

}  // namespace zerodef
