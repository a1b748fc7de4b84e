#pragma once

#include <vector>

#include "zerodef/network.hpp"

namespace zerodef {

enum class Sense { LessEq, Equal, GreaterEq };

/// maximize c'x subject to rows(A x sense b), with x_j >= 0 unless free[j].
struct LinearProgram {
    Matrix A;
    Vector b;
    std::vector<Sense> sense;
    Vector c;
    std::vector<bool> free;  // empty means every variable is nonnegative
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vector x;
    double objective = 0.0;
};

/// Dense two-phase tableau simplex with Bland's rule. Intended for the small
/// feasibility problems that arise here (tens of rows and columns).
[[nodiscard]] LpResult solve_lp(const LinearProgram& lp);

}  // namespace zerodef
