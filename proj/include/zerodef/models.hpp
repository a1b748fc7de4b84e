#pragma once

#include <string>
#include <vector>

#include "zerodef/network.hpp"

namespace zerodef {

/// Kinetic proofreading chain T + M <-> C0 -> C1 -> ... -> CN, every Ci
/// dissociating back to T + M.
struct McKeithanParams {
    int N = 0;
    double k1 = 1.0;
    std::vector<double> kp;  // k_{p,0..N-1}
    std::vector<double> km;  // k_{-1,0..N}

    /// All rate constants equal to `rate`.
    static McKeithanParams uniform(int N, double rate = 1.0);
    /// Throws DomainError on wrong lengths or nonpositive rates.
    void check() const;
};

/// Species (T, M, C0, ..., CN); complexes T + M, C0, ..., CN.
[[nodiscard]] ReactionNetwork mckeithan(const McKeithanParams& params);

/// The positive equilibrium whose free T and M concentrations are alpha and beta.
[[nodiscard]] Vector mckeithan_equilibrium(const McKeithanParams& params, double alpha, double beta);

/// Equilibrium C0 for N = 0 with unit rates and totals T + C0 = x0, M + C0 = y0:
/// the smaller root of z^2 - (x0 + y0 + 1) z + x0 y0 = 0.
[[nodiscard]] double pi3_closed_form(double x0, double y0);

/// P1 + P2 <-> P3 with rate constants k1 (forward) and k2 (backward).
[[nodiscard]] ReactionNetwork association_network(double k1 = 1.0, double k2 = 1.0);

/// Complexes X1 + X2 and 2 X1 + X2 linked both ways with unit rates:
/// x1' = -(x1 - 1) x1 x2, x2' = 0.
[[nodiscard]] ReactionNetwork bistable_line_network();

/// X1 <-> X2 with unit rates: x1' = x2 - x1.
[[nodiscard]] ReactionNetwork linear_exchange_network();

struct NamedNetwork {
    std::string name;
    std::string description;
    ReactionNetwork net;
};

/// The four canned networks: association, bistable_line, linear_exchange and
/// mckeithan1 (N = 1, unit rates).
[[nodiscard]] std::vector<NamedNetwork> example_networks();

}  // namespace zerodef
