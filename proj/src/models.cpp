#include "zerodef/models.hpp"

#include <cmath>

#include "zerodef/errors.hpp"

namespace zerodef {

McKeithanParams McKeithanParams::uniform(int N, double rate) {
    McKeithanParams p;
    p.N = N;
    p.k1 = rate;
    p.kp.assign(static_cast<std::size_t>(std::max(N, 0)), rate);
    p.km.assign(static_cast<std::size_t>(std::max(N, 0) + 1), rate);
    return p;
}

void McKeithanParams::check() const {
    if (N < 0) throw DomainError("chain length N must be nonnegative");
    if (kp.size() != static_cast<std::size_t>(N)) throw DomainError("expected N phosphorylation rates");
    if (km.size() != static_cast<std::size_t>(N + 1)) throw DomainError("expected N + 1 dissociation rates");
    auto bad = [](double v) { return !(v > 0.0) || !std::isfinite(v); };
    if (bad(k1)) throw DomainError("association rate must be positive");
    for (double v : kp) {
        if (bad(v)) throw DomainError("phosphorylation rates must be positive");
    }
    for (double v : km) {
        if (bad(v)) throw DomainError("dissociation rates must be positive");
    }
}

ReactionNetwork mckeithan(const McKeithanParams& params) {
    params.check();
    const int N = params.N;
    const int n = N + 3;
    const int m = N + 2;
    Matrix b = Matrix::Zero(n, m);
    b(0, 0) = 1.0;
    b(1, 0) = 1.0;
    for (int j = 1; j < m; ++j) b(j + 1, j) = 1.0;

    // 0-based: complex 0 is T + M, complex j >= 1 is C_{j-1}.
    Matrix a = Matrix::Zero(m, m);
    a(1, 0) = params.k1;
    for (int i = 1; i < m; ++i) a(0, i) = params.km[static_cast<std::size_t>(i - 1)];
    for (int i = 2; i < m; ++i) a(i, i - 1) = params.kp[static_cast<std::size_t>(i - 2)];

    std::vector<std::string> names{"T", "M"};
    for (int i = 0; i <= N; ++i) names.push_back("C" + std::to_string(i));
    return ReactionNetwork(std::move(a), std::move(b), {}, std::move(names));
}

Vector mckeithan_equilibrium(const McKeithanParams& params, double alpha, double beta) {
    params.check();
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("alpha and beta must be positive");
    const int N = params.N;
    Vector x(N + 3);
    x(0) = alpha;
    x(1) = beta;
    if (N == 0) {
        x(2) = params.k1 / params.km[0] * alpha * beta;
        return x;
    }
    x(2) = params.k1 / (params.km[0] + params.kp[0]) * alpha * beta;
    for (int i = 1; i < N; ++i) {
        const auto u = static_cast<std::size_t>(i);
        x(i + 2) = params.kp[u - 1] / (params.km[u] + params.kp[u]) * x(i + 1);
    }
    x(N + 2) = params.kp[static_cast<std::size_t>(N - 1)] / params.km[static_cast<std::size_t>(N)] * x(N + 1);
    return x;
}

double pi3_closed_form(double x0, double y0) {
    if (!(x0 > 0.0) || !(y0 > 0.0)) throw DomainError("totals must be positive");
    const double s = x0 + y0 + 1.0;
    const double disc = (x0 - y0) * (x0 - y0) + 2.0 * (x0 + y0) + 1.0;
    // Smaller root written as product / larger root to avoid cancellation.
    return 2.0 * x0 * y0 / (s + std::sqrt(disc));
}

ReactionNetwork association_network(double k1, double k2) {
    Matrix b(3, 2);
    b << 1, 0, 1, 0, 0, 1;
    Matrix a(2, 2);
    a << 0, k2, k1, 0;
    return ReactionNetwork(std::move(a), std::move(b), {}, {"P1", "P2", "P3"});
}

ReactionNetwork bistable_line_network() {
    Matrix b(2, 2);
    b << 1, 2, 1, 1;
    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    return ReactionNetwork(std::move(a), std::move(b), {}, {"X1", "X2"});
}

ReactionNetwork linear_exchange_network() {
    Matrix b = Matrix::Identity(2, 2);
    Matrix a(2, 2);
    a << 0, 1, 1, 0;
    return ReactionNetwork(std::move(a), std::move(b), {}, {"X1", "X2"});
}

std::vector<NamedNetwork> example_networks() {
    return {
        {"association", "P1 + P2 <-> P3; E+ = {x1 x2 = x3 > 0}, E0 = {(x,0,0)} u {(0,y,0)}", association_network()},
        {"bistable_line",
         "X1 + X2 <-> 2 X1 + X2; classes x2 = r hold (1, r) in E+ and (0, r) in E0", bistable_line_network()},
        {"linear_exchange", "X1 <-> X2; E+ = {x1 = x2 > 0}, E0 = {0}", linear_exchange_network()},
        {"mckeithan1", "kinetic proofreading chain with N = 1 and unit rates", mckeithan(McKeithanParams::uniform(1))},
    };
}

}  // namespace zerodef
