#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "zerodef/control.hpp"
#include "zerodef/equilibria.hpp"
#include "zerodef/errors.hpp"
#include "zerodef/lyapunov.hpp"
#include "zerodef/models.hpp"
#include "zerodef/simulate.hpp"

using namespace zerodef;
using testing::vec;

namespace {

// Solution of l' = -3 l - l^2 with l(0) = l0 (logistic form).
double scalar_solution(double l0, double t) {
    const double e = std::exp(-3.0 * t);
    return 3.0 * l0 * e / (3.0 + l0 * (1.0 - e));
}

// Linear interpolation of component k of a trajectory at time t.
double sample(const Trajectory& tr, int k, double t) {
    auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t);
    if (it == tr.times.begin()) return tr.states.front()(k);
    if (it == tr.times.end()) return tr.states.back()(k);
    const auto i = static_cast<std::size_t>(it - tr.times.begin());
    const double w = (t - tr.times[i - 1]) / (tr.times[i] - tr.times[i - 1]);
    return (1 - w) * tr.states[i - 1](k) + w * tr.states[i](k);
}

}  // namespace

TEST_CASE("association trajectory follows the scalar reduction") {
    const ReactionNetwork net = association_network();
    SimConfig cfg;
    cfg.method = Method::RK4;
    cfg.step = 1e-3;
    cfg.t_end = 10.0;
    cfg.stop_on_convergence = false;
    const Trajectory tr = integrate(net, vec({1.5, 1.5, 0.5}), cfg);
    double worst = 0.0;
    // Compare at the grid points themselves to avoid interpolation error.
    for (std::size_t i = 0; i < tr.times.size(); i += 200) {
        worst = std::max(worst, std::abs(tr.states[i](0) - 1.0 - scalar_solution(0.5, tr.times[i])));
    }
    CHECK(worst < 1e-6);
    CHECK_FALSE(tr.invariant_violated());
}

TEST_CASE("converges to the class equilibrium from a boundary start") {
    const ReactionNetwork net = association_network();
    SimConfig cfg;
    cfg.t_end = 20.0;
    cfg.stop_on_convergence = false;
    const Trajectory tr = integrate(net, vec({2, 2, 0}), cfg);
    CHECK((tr.final_state() - Vector::Ones(3)).norm() < 1e-6);
    CHECK_FALSE(tr.invariant_violated());
    CHECK(tr.monitors.interior_entry.enabled);
    CHECK(tr.monitors.class_drift.enabled);
    CHECK(tr.monitors.v_decrease.enabled);
    CHECK(tr.termination == Termination::TEnd);

    cfg.stop_on_convergence = true;
    const Trajectory conv = integrate(net, vec({2, 2, 0}), cfg);
    CHECK(conv.termination == Termination::Converged);
    CHECK(conv.monitors.omega_limit.checks == 1);
    CHECK(conv.monitors.omega_limit.failures == 0);
    CHECK((conv.final_state() - Vector::Ones(3)).norm() < 1e-6);
}

TEST_CASE("boundary equilibrium start stays put") {
    const ReactionNetwork net = association_network();
    SimConfig cfg;
    cfg.t_end = 5.0;
    const Trajectory tr = integrate(net, vec({3, 0, 0}), cfg);
    for (const auto& x : tr.states) CHECK((x - vec({3, 0, 0})).norm() == 0.0);
    CHECK_FALSE(tr.monitors.interior_entry.enabled);
    CHECK_FALSE(tr.invariant_violated());
}

TEST_CASE("times increase and states stay nonnegative") {
    std::mt19937_64 rng(109);
    for (const auto& nn : example_networks()) {
        for (int trial = 0; trial < 5; ++trial) {
            Vector x0 = testing::uniform_vector(rng, nn.net.n(), 0.0, 10.0);
            x0(trial % nn.net.n()) = 0.0;
            SimConfig cfg;
            cfg.t_end = 10.0;
            const Trajectory tr = integrate(nn.net, x0, cfg);
            for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
            for (const auto& x : tr.states) CHECK(x.minCoeff() >= -1e-12 * (1.0 + x.norm()));
            CHECK_FALSE(tr.invariant_violated());
            CHECK(tr.log.size() == tr.states.size());
        }
    }
}

TEST_CASE("no finite escape up to t = 100 from large states") {
    std::mt19937_64 rng(113);
    for (const auto& nn : example_networks()) {
        Vector x0 = testing::uniform_vector(rng, nn.net.n(), 0.0, 1000.0 / std::sqrt(nn.net.n()));
        SimConfig cfg;
        cfg.t_end = 100.0;
        cfg.stop_on_convergence = false;
        const Trajectory tr = integrate(nn.net, x0, cfg);
        CHECK(tr.termination == Termination::TEnd);
        CHECK(tr.times.back() == doctest::Approx(100.0));
        CHECK(tr.final_state().allFinite());
    }
}

TEST_CASE("fixed-step and adaptive agree") {
    const ReactionNetwork net = association_network();
    SimConfig cfg;
    cfg.t_end = 3.0;
    cfg.stop_on_convergence = false;
    const Trajectory ad = integrate(net, vec({2, 0.5, 0.3}), cfg);
    cfg.method = Method::RK4;
    cfg.step = 1e-3;
    const Trajectory rk = integrate(net, vec({2, 0.5, 0.3}), cfg);
    CHECK((ad.final_state() - rk.final_state()).norm() < 10.0 * cfg.rtol);
}

TEST_CASE("zero class-preserving perturbation is bitwise the open loop") {
    const ReactionNetwork net = mckeithan(McKeithanParams::uniform(1));
    SimConfig cfg;
    cfg.method = Method::RK4;
    cfg.step = 1e-2;
    cfg.t_end = 2.0;
    const Vector x0 = vec({1, 2, 0.5, 0});
    const Trajectory a = integrate(net, x0, cfg);
    const Trajectory b = integrate(net, x0, cfg, PerturbationSpec::class_preserving(Matrix::Zero(3, 3)));
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) CHECK((a.states[i].array() == b.states[i].array()).all());
}

TEST_CASE("class-preserving perturbation keeps the class") {
    const ReactionNetwork net = mckeithan(McKeithanParams::uniform(2));
    Matrix eps = Matrix::Constant(4, 4, 0.3);
    eps.diagonal().setZero();
    SimConfig cfg;
    cfg.t_end = 30.0;
    const Vector x0 = vec({1, 2, 0, 0, 0});
    const Trajectory tr = integrate(net, x0, cfg, PerturbationSpec::class_preserving(eps));
    CHECK(tr.monitors.class_drift.enabled);
    CHECK(tr.monitors.class_drift.worst < 1e-8);
    CHECK_FALSE(tr.invariant_violated());
    CHECK(same_class(net, tr.final_state(), x0));
}

TEST_CASE("general perturbation monitor flags a violation of the boundary condition") {
    const ReactionNetwork net = association_network();
    SimConfig cfg;
    cfg.t_end = 1.0;
    cfg.stop_on_convergence = false;
    // Drains species 1 even when it is absent.
    const auto bad = PerturbationSpec::general_g([](const Vector& x) {
        Vector g = Vector::Zero(x.size());
        g(0) = -0.5;
        return g;
    });
    const Trajectory tr = integrate(net, vec({0, 1, 1}), cfg, bad);
    CHECK(tr.monitors.general_g.enabled);
    CHECK(tr.monitors.general_g.failures > 0);
    REQUIRE(tr.monitors.general_g.first_failure.has_value());
    CHECK(*tr.monitors.general_g.first_failure == 0);
    CHECK(tr.invariant_violated());

    const auto good = PerturbationSpec::general_g([](const Vector& x) {
        Vector g = Vector::Zero(x.size());
        g(0) = 0.1;
        return g;
    });
    CHECK(integrate(net, vec({0, 1, 1}), cfg, good).monitors.general_g.failures == 0);
}

TEST_CASE("margin-scaled perturbation") {
    std::mt19937_64 rng(127);
    const ReactionNetwork net = mckeithan(McKeithanParams::uniform(1));
    const Vector x0 = vec({2, 1, 0.5, 0.2});
    SimConfig cfg;
    cfg.t_end = 200.0;
    cfg.stop_on_convergence = false;
    const Trajectory tr = perturbed_within_margin(net, class_of(net, x0), x0, 0.9, cfg);
    CHECK_FALSE(tr.invariant_violated());
    CHECK(tr.monitors.margin_usage.enabled);
    CHECK(tr.monitors.margin_usage.worst <= 0.81 + 1e-9);
    const Vector target = pi(net, x0).x_bar;
    CHECK((tr.final_state() - target).norm() < 1e-5);

    const Trajectory zero = perturbed_within_margin(net, class_of(net, x0), x0, 0.0, cfg);
    const Trajectory open = integrate(net, x0, cfg);
    CHECK((zero.final_state() - open.final_state()).norm() < 1e-12);
    CHECK_THROWS_AS((void)perturbed_within_margin(net, class_of(net, x0), x0, 1.0, cfg), DomainError);
    (void)rng;
}

TEST_CASE("closed loop reaches the target from a boundary start") {
    const ReactionNetwork net = association_network();
    const FeedbackLaw law = make_feedback(net, Vector::Ones(3), {0, 2}, Vector::Ones(2));
    SimConfig cfg;
    cfg.t_end = 200.0;
    cfg.stop_on_convergence = false;
    const Trajectory tr = integrate(net, vec({5, 0.1, 4}), cfg, {}, law);
    CHECK((tr.final_state() - Vector::Ones(3)).norm() < 1e-5);
    CHECK_FALSE(tr.invariant_violated());
    CHECK_FALSE(tr.monitors.class_drift.enabled);

    const Trajectory edge = integrate(net, vec({0, 3, 0}), cfg, {}, law);
    CHECK(edge.monitors.interior_entry.enabled);
    CHECK(edge.monitors.interior_entry.failures == 0);
    CHECK(edge.states[1].minCoeff() > 0.0);
}

TEST_CASE("feedback combined with a perturbation is rejected") {
    const ReactionNetwork net = association_network();
    const FeedbackLaw law = make_feedback(net, Vector::Ones(3), {0, 2}, Vector::Ones(2));
    Matrix eps = Matrix::Constant(2, 2, 0.1);
    CHECK_THROWS_AS((void)integrate(net, Vector::Ones(3), SimConfig{}, PerturbationSpec::class_preserving(eps), law),
                    DomainError);
    CHECK_THROWS_AS((void)integrate(net, vec({1, -1, 1}), SimConfig{}), DomainError);
}

TEST_CASE("V decreases along open-loop trajectories") {
    std::mt19937_64 rng(131);
    const ReactionNetwork net = mckeithan(McKeithanParams::uniform(2));
    for (int trial = 0; trial < 5; ++trial) {
        const Vector x0 = testing::uniform_vector(rng, net.n(), 0.1, 5.0);
        SimConfig cfg;
        cfg.t_end = 50.0;
        const Trajectory tr = integrate(net, x0, cfg);
        REQUIRE(tr.v_reference.has_value());
        for (std::size_t i = 1; i < tr.log.size(); ++i) CHECK(tr.log[i].V - tr.log[i - 1].V < 1e-9);
    }
}

TEST_CASE("CSV and JSON export") {
    const ReactionNetwork net = association_network();
    SimConfig cfg;
    cfg.method = Method::RK4;
    cfg.step = 0.5;
    cfg.t_end = 1.0;
    const Trajectory tr = integrate(net, vec({2, 2, 0}), cfg);
    const std::string csv = trajectory_csv(tr, {"hello"});
    CHECK(csv.rfind("# hello\nt,x1,x2,x3,V,class_drift\n0,2,2,0,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    const auto j = trajectory_json(tr);
    CHECK(j["termination"] == "t_end");
    CHECK(j["final_state"].size() == 3);
    CHECK(j.contains("monitors"));

    Trajectory no_v = integrate(net, vec({3, 0, 0}), cfg);
    no_v.v_reference.reset();
    for (auto& l : no_v.log) l.V = std::nan("");
    CHECK(trajectory_csv(no_v).find(",nan,") != std::string::npos);
}
