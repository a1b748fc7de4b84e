#pragma once

#include <optional>
#include <vector>

#include "zerodef/network.hpp"
#include "zerodef/stoichiometry.hpp"

namespace zerodef {

/// Inflow feedback g(x) = sum_l gamma_l (x_bar_{k_l} - x_{k_l}) e_{k_l} acting
/// on r = n - m + 1 species.
struct FeedbackLaw {
    std::vector<int> indices;
    Vector gains;
    Vector target;
    int certifying_complex = -1;  // a j with S_j contained in the indices

    [[nodiscard]] Vector g(const Vector& x) const;
};

struct ActuatorSet {
    std::vector<int> indices;
    int certifying_complex = -1;
};

/// Whether D together with the unit vectors e_k, k in indices, spans R^n.
[[nodiscard]] bool spans_with_stoichiometry(const SubspaceBases& bases, const std::vector<int>& indices);

/// Smallest-support complex whose support lies inside indices (lowest index on ties).
[[nodiscard]] std::optional<int> certifying_complex(const ReactionNetwork& net, const std::vector<int>& indices);

/// Every admissible r-set of species in lexicographic order. Exhaustive when
/// C(n, r) <= 1e5, otherwise each support set is completed greedily by
/// pivoted QR against D.
[[nodiscard]] std::vector<ActuatorSet> select_actuators(const ReactionNetwork& net);

/// Checks cardinality, gains, the equilibrium residual and both actuator
/// conditions. Throws DomainError or HypothesisError naming the failure.
[[nodiscard]] FeedbackLaw make_feedback(const ReactionNetwork& net, const Vector& x_bar,
                                        const std::vector<int>& indices, const Vector& gains);

}  // namespace zerodef
