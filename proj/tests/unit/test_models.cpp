#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "zerodef/equilibria.hpp"
#include "zerodef/errors.hpp"
#include "zerodef/models.hpp"
#include "zerodef/parser.hpp"

using namespace zerodef;
using testing::vec;

namespace {

McKeithanParams log_uniform(std::mt19937_64& rng, int N) {
    std::uniform_real_distribution<double> lg(std::log(1e-2), std::log(1e2));
    McKeithanParams p = McKeithanParams::uniform(N);
    p.k1 = std::exp(lg(rng));
    for (auto& k : p.kp) k = std::exp(lg(rng));
    for (auto& k : p.km) k = std::exp(lg(rng));
    return p;
}

// Hand-written right-hand side of the proofreading chain.
Vector chain_rhs(const McKeithanParams& p, const Vector& x) {
    const int N = p.N;
    Vector f = Vector::Zero(N + 3);
    const double bind = p.k1 * x(0) * x(1);
    double release = 0.0;
    for (int i = 0; i <= N; ++i) release += p.km[static_cast<std::size_t>(i)] * x(2 + i);
    f(0) = release - bind;
    f(1) = release - bind;
    for (int i = 0; i <= N; ++i) {
        const double in = i == 0 ? bind : p.kp[static_cast<std::size_t>(i - 1)] * x(1 + i);
        const double out = (i < N ? p.kp[static_cast<std::size_t>(i)] : 0.0) + p.km[static_cast<std::size_t>(i)];
        f(2 + i) = in - out * x(2 + i);
    }
    return f;
}

}  // namespace

TEST_CASE("N = 0 with unit rates is the association network") {
    const ReactionNetwork mck = mckeithan(McKeithanParams::uniform(0));
    const ReactionNetwork assoc = association_network();
    CHECK((mck.A() - assoc.A()).norm() == 0.0);
    CHECK((mck.B() - assoc.B()).norm() == 0.0);
    CHECK(mck.species() == std::vector<std::string>{"T", "M", "C0"});
}

TEST_CASE("shape of the chain") {
    for (int N = 0; N <= 6; ++N) {
        const ReactionNetwork net = mckeithan(McKeithanParams::uniform(N));
        CHECK(net.n() == N + 3);
        CHECK(net.m() == N + 2);
        int edges = 0;
        for (int i = 0; i < net.m(); ++i)
            for (int j = 0; j < net.m(); ++j)
                if (i != j && net.A()(i, j) > 0) ++edges;
        // One association, N modification steps, N + 1 dissociations.
        CHECK(edges == 1 + N + (N + 1));
        CHECK(validate(net).all_passed());
    }
    const ReactionNetwork n2 = mckeithan(McKeithanParams::uniform(2));
    CHECK(n2.n() == 5);
    CHECK(n2.m() == 4);
}

TEST_CASE("vector field matches the chain equations") {
    std::mt19937_64 rng(157);
    for (int N = 0; N <= 4; ++N) {
        const McKeithanParams p = log_uniform(rng, N);
        const ReactionNetwork net = mckeithan(p);
        for (int trial = 0; trial < 50; ++trial) {
            const Vector x = testing::uniform_vector(rng, net.n(), 0.0, 5.0);
            const Vector f = eval_f(net, x);
            CHECK((f - chain_rhs(p, x)).norm() <= 1e-12 * (1.0 + flux_scale(net, x)));
            if (N > 0) {
                const double last = p.kp[static_cast<std::size_t>(N - 1)] * x(N + 1) -
                                    p.km[static_cast<std::size_t>(N)] * x(N + 2);
                CHECK(f(N + 2) == doctest::Approx(last).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("parameter checks") {
    McKeithanParams p = McKeithanParams::uniform(2);
    p.kp.pop_back();
    CHECK_THROWS_AS(p.check(), DomainError);
    p = McKeithanParams::uniform(2);
    p.km[1] = 0.0;
    CHECK_THROWS_AS((void)mckeithan(p), DomainError);
    p = McKeithanParams::uniform(1);
    p.k1 = -1.0;
    CHECK_THROWS_AS(p.check(), DomainError);
}

TEST_CASE("equilibrium recursion") {
    const Vector e0 = mckeithan_equilibrium(McKeithanParams::uniform(0), 1.0, 1.0);
    CHECK(testing::rel_err(e0, vec({1, 1, 1})) < 1e-15);
    const Vector e2 = mckeithan_equilibrium(McKeithanParams::uniform(2), 1.0, 1.0);
    CHECK(testing::rel_err(e2, vec({1, 1, 0.5, 0.25, 0.25})) < 1e-15);
    CHECK(eval_f(mckeithan(McKeithanParams::uniform(2)), e2).norm() < 1e-15);
}

TEST_CASE("equilibrium scales bilinearly and matches the projection") {
    std::mt19937_64 rng(163);
    for (int N = 0; N <= 4; ++N) {
        const McKeithanParams p = log_uniform(rng, N);
        const ReactionNetwork net = mckeithan(p);
        const Vector base = mckeithan_equilibrium(p, 1.0, 1.0);
        const Vector e = mckeithan_equilibrium(p, 2.0, 3.0);
        CHECK(testing::rel_err(e.tail(N + 1), 6.0 * base.tail(N + 1)) < 1e-14);
        CHECK(e(0) == 2.0);
        CHECK(e(1) == 3.0);
        // The same class, represented with everything unbound.
        Vector rep = Vector::Zero(net.n());
        rep(0) = e(0) + e.tail(N + 1).sum();
        rep(1) = e(1) + e.tail(N + 1).sum();
        CHECK((pi(net, rep).x_bar - e).norm() < 1e-8 * (1.0 + e.norm()));
    }
}

TEST_CASE("equilibria of random chains up to N = 20") {
    std::mt19937_64 rng(167);
    for (int N = 0; N <= 20; ++N) {
        const McKeithanParams p = log_uniform(rng, N);
        const ReactionNetwork net = mckeithan(p);
        CHECK(validate(net).all_passed());
        std::uniform_real_distribution<double> u(0.1, 10.0);
        const Vector e = mckeithan_equilibrium(p, u(rng), u(rng));
        CHECK(eval_f(net, e).norm() < 1e-10 * (1.0 + flux_scale(net, e)));
    }
}

TEST_CASE("closed-form association equilibrium") {
    CHECK(pi3_closed_form(2, 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pi3_closed_form(1, 1) == doctest::Approx(0.5 * (3.0 - std::sqrt(5.0))).epsilon(1e-15));
    std::mt19937_64 rng(173);
    std::uniform_real_distribution<double> lg(-8.0, 8.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double x0 = std::exp(lg(rng));
        const double y0 = std::exp(lg(rng));
        const double z = pi3_closed_form(x0, y0);
        CHECK(z > 0.0);
        CHECK(z < std::min(x0, y0));
        // Root of z^2 - (x0 + y0 + 1) z + x0 y0.
        CHECK(std::abs((x0 - z) * (y0 - z) - z) <= 1e-12 * (1.0 + x0 * y0));
    }
    CHECK_THROWS_AS((void)pi3_closed_form(0.0, 1.0), DomainError);
}

TEST_CASE("canned networks") {
    const auto nets = example_networks();
    REQUIRE(nets.size() == 4);
    for (const auto& nn : nets) CHECK(validate(nn.net).all_passed());

    const ReactionNetwork lin = linear_exchange_network();
    const Vector x = vec({0.3, 1.7});
    CHECK(eval_f(lin, x)(0) == doctest::Approx(x(1) - x(0)));
    CHECK(eval_f(lin, vec({2, 2})).norm() == 0.0);
    CHECK(testing::rel_err(pi(lin, vec({3, 1})).x_bar, vec({2, 2})) < 1e-12);

    const ReactionNetwork bis = bistable_line_network();
    const Vector y = vec({0.4, 2.5});
    CHECK(eval_f(bis, y)(0) == doctest::Approx(-(y(0) - 1.0) * y(0) * y(1)));
    CHECK(eval_f(bis, y)(1) == 0.0);
    CHECK(eval_f(bis, vec({1, 3})).norm() == 0.0);
    CHECK(eval_f(bis, vec({0, 3})).norm() == 0.0);
    CHECK(testing::rel_err(pi(bis, vec({0.2, 3})).x_bar, vec({1, 3})) < 1e-12);
}

TEST_CASE("canned networks export as text") {
    for (const auto& nn : example_networks()) {
        const ReactionNetwork back = parse(serialize(nn.net));
        CHECK((back.A() - nn.net.A()).norm() == 0.0);
        CHECK((back.B() - nn.net.B()).norm() == 0.0);
    }
}
