#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "zerodef/control.hpp"
#include "zerodef/network.hpp"
#include "zerodef/stoichiometry.hpp"

namespace zerodef {

/// Additive term in x' = f(x) + g(x).
struct PerturbationSpec {
    enum class Kind {
        None,
        ClassPreserving,  // Delta_ij(x) = eps_ij prod_{k in S_j} theta_k(x_k)
        WithinMargin,     // uniform eps rescaled so sum Delta_ij^2 = scale^2 delta_S(x)
        GeneralG,         // user hook, expected to satisfy x_k = 0 => g_k(x) >= 0
    };

    Kind kind = Kind::None;
    Matrix epsilons;                               // ClassPreserving, m x m, nonnegative
    double scale = 0.0;                            // WithinMargin, in [0, 1)
    std::function<Vector(const Vector&)> general;  // GeneralG

    static PerturbationSpec none() { return {}; }
    static PerturbationSpec class_preserving(Matrix eps);
    static PerturbationSpec within_margin(double scale);
    static PerturbationSpec general_g(std::function<Vector(const Vector&)> g);
};

enum class Method { RK4, DormandPrince };

struct SimConfig {
    Method method = Method::DormandPrince;
    double step = 1e-3;  // RK4 step
    double rtol = 1e-8;
    double atol = 1e-10;
    double t_end = 10.0;

    bool monitor_nonneg = true;
    bool monitor_class = true;
    bool monitor_interior = true;
    bool monitor_v = true;
    bool monitor_omega = true;
    bool monitor_general_g = true;

    bool stop_on_convergence = true;
    double converge_tol = 1e-9;  // |f*(x)| < tol (1 + |x|); at least 10 rtol for the adaptive method
    int converge_window = 10;    // consecutive accepted steps
    std::size_t max_steps = 10000000;

    /// Equilibrium used by V; defaults to the class equilibrium of x0 when x0
    /// has a positive point in its class.
    std::optional<Vector> v_reference;
};

enum class Termination { TEnd, Converged, StepFailure };

struct MonitorStat {
    bool enabled = false;
    std::size_t checks = 0;
    std::size_t failures = 0;
    double worst = 0.0;  // largest violation seen (or largest value for ratios)
    std::optional<std::size_t> first_failure;  // index into Trajectory::times

    void record(bool ok, double value, std::size_t step);
};

struct MonitorReport {
    MonitorStat nonneg;
    MonitorStat class_drift;
    MonitorStat interior_entry;
    MonitorStat v_decrease;
    MonitorStat omega_limit;
    MonitorStat general_g;
    MonitorStat margin_usage;

    [[nodiscard]] bool any_failure() const;
};

struct StepLog {
    double class_drift = 0.0;
    double min_component = 0.0;
    double V = 0.0;                // NaN without a V reference
    double margin_usage = 0.0;     // sum Delta^2 / delta_S, NaN outside margin mode
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<StepLog> log;
    MonitorReport monitors;
    Termination termination = Termination::TEnd;
    std::optional<Vector> v_reference;
    std::size_t rejected_steps = 0;

    [[nodiscard]] bool invariant_violated() const { return monitors.any_failure(); }
    [[nodiscard]] const Vector& final_state() const { return states.back(); }
};

/// Integrates x' = f(x) + perturbation or x' = f(x) + feedback.g(x) from x0.
/// Steps that would make a component smaller than -1e-12 (1 + |x|) are halved
/// and retried, never clamped.
[[nodiscard]] Trajectory integrate(const ReactionNetwork& net, const Vector& x0, const SimConfig& cfg,
                                   const PerturbationSpec& perturbation = {},
                                   const std::optional<FeedbackLaw>& feedback = std::nullopt);

/// Runs the margin-scaled class-preserving perturbation with V measured from
/// the class equilibrium.
[[nodiscard]] Trajectory perturbed_within_margin(const ReactionNetwork& net, const ClassId& cls, const Vector& x0,
                                                 double scale, const SimConfig& cfg);

/// Header "t,x1,...,xn,V,class_drift"; `preamble` lines are written first, each
/// prefixed with "# ".
[[nodiscard]] std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& preamble = {});

/// Final state, termination reason and monitor summary.
[[nodiscard]] nlohmann::json trajectory_json(const Trajectory& traj);

[[nodiscard]] const char* to_string(Termination t);

}  // namespace zerodef
