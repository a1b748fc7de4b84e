#pragma once

#include "zerodef/network.hpp"

namespace zerodef {

/// Orthonormal bases of the stoichiometric subspace D = span{b_i - b_j} and of
/// its orthogonal complement.
struct SubspaceBases {
    Matrix D;      // n x (m-1)
    Matrix Dperp;  // n x (n-m+1)
};

/// A class (p + D) intersected with the nonnegative orthant, identified by the
/// conserved coordinates Dperp' p.
struct ClassId {
    Vector coords;
    Vector representative;
};

struct RMembership {
    bool member = false;
    Vector witness;        // d in D with p + d > 0 when member
    double depth = 0.0;    // min_i (p + d)_i at the optimum, capped at 1
};

/// Throws StructuralError when span{b_i - b_1} does not have dimension m - 1.
[[nodiscard]] SubspaceBases stoich_subspace(const ReactionNetwork& net);

[[nodiscard]] ClassId class_of(const SubspaceBases& bases, const Vector& p);
[[nodiscard]] ClassId class_of(const ReactionNetwork& net, const Vector& p);

/// |Dperp'(p - q)| < 1e-9 (1 + |p| + |q|).
[[nodiscard]] bool same_class(const SubspaceBases& bases, const Vector& p, const Vector& q);
[[nodiscard]] bool same_class(const ReactionNetwork& net, const Vector& p, const Vector& q);

/// |Dperp'(p - q)|.
[[nodiscard]] double class_distance(const SubspaceBases& bases, const Vector& p, const Vector& q);

/// Decides whether p + d > 0 for some d in D by maximizing t subject to
/// p + D y >= t 1, t <= 1.
[[nodiscard]] RMembership in_R(const SubspaceBases& bases, const Vector& p);
[[nodiscard]] RMembership in_R(const ReactionNetwork& net, const Vector& p);

}  // namespace zerodef
