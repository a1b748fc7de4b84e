#pragma once

#include <cstddef>
#include <vector>

#include "zerodef/network.hpp"
#include "zerodef/stoichiometry.hpp"

namespace zerodef {

/// Positive kernel direction of a_tilde, normalized to max component 1.
struct PerronVector {
    Vector y_bar;
    double residual = 0.0;  // |a_tilde * y_bar|
    int iterations = 0;
};

struct Equilibrium {
    Vector x_bar;
    double residual = 0.0;  // |f(x_bar)|
    ClassId cls;
};

/// Power iteration on a_tilde + gamma I. Throws NumericalError after 1e5
/// iterations without convergence.
[[nodiscard]] PerronVector perron_kernel(const ReactionNetwork& net);

/// x_bar = rho^-1(z) for the minimum-norm solution of B'z = ln y_bar.
[[nodiscard]] Equilibrium base_equilibrium(const ReactionNetwork& net);

/// sum_{i,j} <b_i - b_j, rho(x) - rho(z)>^2 for positive x, z.
[[nodiscard]] double delta(const ReactionNetwork& net, const Vector& x, const Vector& z);

/// sum_{i>=2} <b_i - b_1, rho(x) - rho(z)>^2 + |Dperp'(x - z)|^2; zero iff x = z.
[[nodiscard]] double delta_underline(const ReactionNetwork& net, const SubspaceBases& bases, const Vector& x,
                                     const Vector& z);

/// The unique positive x with x - p in D and rho(x) - rho(q) orthogonal to D.
/// p may lie on the boundary as long as it belongs to R^n_+ + D; otherwise
/// InfeasibleError.
[[nodiscard]] Vector phi(const ReactionNetwork& net, const SubspaceBases& bases, const Vector& p, const Vector& q);
[[nodiscard]] Vector phi(const ReactionNetwork& net, const Vector& p, const Vector& q);

/// Network, bases and a reference equilibrium; everything needed to map a
/// state to its class equilibrium and to the (X1, X2) coordinates.
struct CoordinateChart {
    ReactionNetwork net;
    SubspaceBases bases;
    Vector x_bar;
};

struct ChartCoords {
    Vector X1;  // D'(x - pi(x))
    Vector X2;  // Dperp'(rho(pi(x)) - rho(x_bar))
};

[[nodiscard]] CoordinateChart chart(const ReactionNetwork& net);
[[nodiscard]] CoordinateChart chart(const ReactionNetwork& net, const Vector& x_bar);

/// Unique positive equilibrium in the class of p.
[[nodiscard]] Equilibrium pi(const CoordinateChart& ch, const Vector& p);
[[nodiscard]] Equilibrium pi(const ReactionNetwork& net, const Vector& p);

[[nodiscard]] ChartCoords chart_apply(const CoordinateChart& ch, const Vector& x);

/// rho^-1(y + rho(x_bar)) for y orthogonal to D; DomainError otherwise.
[[nodiscard]] Vector manifold_map(const CoordinateChart& ch, const Vector& y);

/// x_k counted as zero when x_k <= 1e-12 (1 + |x|).
[[nodiscard]] std::vector<bool> zero_pattern(const Vector& x);

/// Every complex has a species in its support at zero.
[[nodiscard]] bool is_boundary_equilibrium(const ReactionNetwork& net, const Vector& x);

enum class Decision { No, Yes, Undecided };

struct BoundaryEquilibriumSearch {
    Decision decision = Decision::Undecided;
    Vector witness;              // a boundary equilibrium in the class when Yes
    std::vector<int> zero_set;   // the hitting set realized by the witness
    std::size_t candidates = 0;  // search nodes visited
};

/// Minimal sets of species meeting every support set, in lexicographic order.
/// Returns false when the search exceeded `cap` nodes.
bool minimal_hitting_sets(const std::vector<std::vector<int>>& family, int n, std::size_t cap,
                          std::vector<std::vector<int>>& out, std::size_t& visited);

/// Whether the class contains an equilibrium on the boundary of the orthant.
[[nodiscard]] BoundaryEquilibriumSearch class_has_boundary_equilibria(const ReactionNetwork& net,
                                                                      const SubspaceBases& bases,
                                                                      const ClassId& cls,
                                                                      std::size_t cap = 1000000);

struct HomogeneityResult {
    bool holds = false;
    Vector q;  // B'q = 1 with q > 0 when holds
};

/// Decides whether the all-ones vector lies in B'(R^n_+).
[[nodiscard]] HomogeneityResult homogeneity_check(const ReactionNetwork& net);

}  // namespace zerodef
