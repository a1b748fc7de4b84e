#include "zerodef/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "zerodef/equilibria.hpp"
#include "zerodef/errors.hpp"
#include "zerodef/lyapunov.hpp"
#include "zerodef/parser.hpp"

namespace zerodef {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Right-hand side f(x) + g(x). Rate functions are evaluated at max(x, 0),
// which is how theta extends to the whole real line; intermediate Runge-Kutta
// stages may dip below zero by rounding.
class Rhs {
public:
    Rhs(const ReactionNetwork& net, const PerturbationSpec& pert, const std::optional<FeedbackLaw>& fb,
        const Vector* margin_ref, double margin_c)
        : net_(net), pert_(pert), fb_(fb), margin_ref_(margin_ref), margin_c_(margin_c) {
        for (int j = 0; j < net.m(); ++j) supports_.push_back(support_set(net, j));
    }

    [[nodiscard]] Vector open_loop(const Vector& x) const { return eval_f(net_, x.cwiseMax(0.0)); }

    [[nodiscard]] Vector operator()(const Vector& x) const {
        Vector f = open_loop(x);
        switch (pert_.kind) {
            case PerturbationSpec::Kind::None:
                break;
            case PerturbationSpec::Kind::ClassPreserving:
                add_class_preserving(f, x, pert_.epsilons);
                break;
            case PerturbationSpec::Kind::WithinMargin: {
                const double eps = margin_epsilon(x);
                if (eps > 0.0) {
                    const Matrix e = Matrix::Constant(net_.m(), net_.m(), eps);
                    add_class_preserving(f, x, e);
                }
                break;
            }
            case PerturbationSpec::Kind::GeneralG:
                f += pert_.general(x);
                break;
        }
        if (fb_) f += fb_->g(x);
        return f;
    }

    // prod_{k in S_j} theta_k(x_k)
    [[nodiscard]] double support_product(const Vector& x, int j) const {
        double p = 1.0;
        for (int k : supports_[static_cast<std::size_t>(j)]) p *= net_.theta(k).theta(std::max(x(k), 0.0));
        return p;
    }

    [[nodiscard]] double delta_s(const Vector& x) const {
        if (!(x.array() > 0.0).all()) return 0.0;
        return 0.25 * margin_c_ * margin_c_ * delta(net_, x, *margin_ref_);
    }

    [[nodiscard]] double margin_epsilon(const Vector& x) const {
        const int m = net_.m();
        if (m < 2 || pert_.scale == 0.0) return 0.0;
        const double ds = delta_s(x);
        if (!(ds > 0.0)) return 0.0;
        double p2 = 0.0;
        for (int j = 0; j < m; ++j) {
            const double p = support_product(x, j);
            p2 += p * p;
        }
        if (!(p2 > 0.0)) return 0.0;
        return pert_.scale * std::sqrt(ds / ((m - 1) * p2));
    }

    // sum Delta_ij^2 / delta_S(x) in margin mode.
    [[nodiscard]] double margin_usage(const Vector& x) const {
        const double ds = delta_s(x);
        if (!(ds > 0.0)) return kNaN;
        const double eps = margin_epsilon(x);
        double p2 = 0.0;
        for (int j = 0; j < net_.m(); ++j) {
            const double p = support_product(x, j);
            p2 += p * p;
        }
        return eps * eps * (net_.m() - 1) * p2 / ds;
    }

private:
    void add_class_preserving(Vector& f, const Vector& x, const Matrix& eps) const {
        for (int j = 0; j < net_.m(); ++j) {
            double pj = -1.0;
            for (int i = 0; i < net_.m(); ++i) {
                if (i == j || eps(i, j) == 0.0) continue;
                if (pj < 0.0) pj = support_product(x, j);
                f.noalias() += (eps(i, j) * pj) * (net_.B().col(i) - net_.B().col(j));
            }
        }
    }

    const ReactionNetwork& net_;
    const PerturbationSpec& pert_;
    const std::optional<FeedbackLaw>& fb_;
    const Vector* margin_ref_;
    double margin_c_;
    std::vector<std::vector<int>> supports_;
};

bool any_zero(const Vector& x) {
    const auto z = zero_pattern(x);
    return std::find(z.begin(), z.end(), true) != z.end();
}

}  // namespace

PerturbationSpec PerturbationSpec::class_preserving(Matrix eps) {
    if (!eps.allFinite() || (eps.array() < 0.0).any()) throw DomainError("perturbation weights must be nonnegative");
    PerturbationSpec p;
    p.kind = Kind::ClassPreserving;
    p.epsilons = std::move(eps);
    return p;
}

PerturbationSpec PerturbationSpec::within_margin(double scale) {
    if (!(scale >= 0.0 && scale < 1.0)) throw DomainError("margin scale must lie in [0, 1)");
    PerturbationSpec p;
    p.kind = Kind::WithinMargin;
    p.scale = scale;
    return p;
}

PerturbationSpec PerturbationSpec::general_g(std::function<Vector(const Vector&)> g) {
    PerturbationSpec p;
    p.kind = Kind::GeneralG;
    p.general = std::move(g);
    return p;
}

void MonitorStat::record(bool ok, double value, std::size_t step) {
    ++checks;
    worst = std::max(worst, value);
    if (!ok) {
        ++failures;
        if (!first_failure) first_failure = step;
    }
}

bool MonitorReport::any_failure() const {
    for (const MonitorStat* m : {&nonneg, &class_drift, &interior_entry, &v_decrease, &omega_limit, &general_g,
                                 &margin_usage}) {
        if (m->failures > 0) return true;
    }
    return false;
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::TEnd:
            return "t_end";
        case Termination::Converged:
            return "converged";
        case Termination::StepFailure:
            return "step_failure";
    }
    return "unknown";
}

Trajectory integrate(const ReactionNetwork& net, const Vector& x0, const SimConfig& cfg,
                     const PerturbationSpec& perturbation, const std::optional<FeedbackLaw>& feedback) {
    check_nonnegative_state(net, x0);
    if (!(cfg.t_end > 0.0) || !(cfg.step > 0.0) || !(cfg.rtol > 0.0) || !(cfg.atol > 0.0)) {
        throw DomainError("t_end, step, rtol and atol must be positive");
    }
    if (feedback && perturbation.kind != PerturbationSpec::Kind::None) {
        throw DomainError("feedback cannot be combined with a perturbation");
    }
    if (perturbation.kind == PerturbationSpec::Kind::ClassPreserving &&
        (perturbation.epsilons.rows() != net.m() || perturbation.epsilons.cols() != net.m())) {
        throw DomainError("perturbation weights must be an m x m matrix");
    }
    if (perturbation.kind == PerturbationSpec::Kind::GeneralG && !perturbation.general) {
        throw DomainError("general perturbation hook is empty");
    }

    const SubspaceBases bases = stoich_subspace(net);
    const bool margin_mode = perturbation.kind == PerturbationSpec::Kind::WithinMargin;

    Trajectory traj;
    if (feedback) {
        traj.v_reference = feedback->target;
    } else if (cfg.v_reference) {
        traj.v_reference = *cfg.v_reference;
    } else if (in_R(bases, x0).member) {
        traj.v_reference = pi(chart(net), x0).x_bar;
    }
    if (margin_mode && !traj.v_reference) throw DomainError("margin mode needs a positive class");

    double margin_c = 0.0;
    if (margin_mode) margin_c = c_of(net, *traj.v_reference);
    const Rhs rhs(net, perturbation, feedback, traj.v_reference ? &*traj.v_reference : nullptr, margin_c);

    MonitorReport& mon = traj.monitors;
    const bool class_preserving = !feedback && perturbation.kind != PerturbationSpec::Kind::GeneralG;
    mon.nonneg.enabled = cfg.monitor_nonneg;
    mon.class_drift.enabled = cfg.monitor_class && class_preserving;
    mon.interior_entry.enabled =
        cfg.monitor_interior && any_zero(x0) &&
        (feedback.has_value() || (class_preserving && !is_boundary_equilibrium(net, x0)));
    // Systems whose trajectories are known to approach the equilibrium set of f.
    const bool settles_in_e =
        feedback.has_value() || perturbation.kind == PerturbationSpec::Kind::None || margin_mode;
    mon.v_decrease.enabled = cfg.monitor_v && traj.v_reference.has_value() && settles_in_e;
    mon.omega_limit.enabled = cfg.monitor_omega && settles_in_e;
    mon.general_g.enabled = cfg.monitor_general_g && perturbation.kind == PerturbationSpec::Kind::GeneralG;
    mon.margin_usage.enabled = margin_mode;

    const double drift_tol = 1e-8 * (1.0 + x0.norm());
    double v_prev = kNaN;

    auto observe = [&](double t, const Vector& x) {
        const std::size_t idx = traj.times.size();
        traj.times.push_back(t);
        traj.states.push_back(x);
        StepLog entry;
        entry.class_drift = class_distance(bases, x, x0);
        entry.min_component = x.minCoeff();
        entry.V = traj.v_reference ? lyapunov_V(net, x.cwiseMax(0.0), *traj.v_reference) : kNaN;
        entry.margin_usage = margin_mode ? rhs.margin_usage(x) : kNaN;

        if (mon.nonneg.enabled) {
            mon.nonneg.record(entry.min_component >= -1e-12 * (1.0 + x.norm()), std::max(0.0, -entry.min_component), idx);
        }
        if (mon.class_drift.enabled) mon.class_drift.record(entry.class_drift < drift_tol, entry.class_drift, idx);
        if (mon.interior_entry.enabled && idx > 0) {
            mon.interior_entry.record(entry.min_component > 0.0, std::max(0.0, -entry.min_component), idx);
        }
        if (mon.v_decrease.enabled && idx > 0) {
            const double inc = entry.V - v_prev;
            mon.v_decrease.record(inc < 1e-9, std::max(0.0, inc), idx);
        }
        if (mon.general_g.enabled) {
            const double near = 1e-3 * (1.0 + x.norm());
            bool ok = true;
            double worst = 0.0;
            for (int k = 0; k < net.n(); ++k) {
                if (x(k) > near) continue;
                Vector xz = x;
                xz(k) = 0.0;
                const double gk = perturbation.general(xz)(k);
                if (gk < 0.0) {
                    ok = false;
                    worst = std::max(worst, -gk);
                }
            }
            mon.general_g.record(ok, worst, idx);
        }
        if (mon.margin_usage.enabled && !std::isnan(entry.margin_usage)) {
            const double cap = perturbation.scale * perturbation.scale + 1e-9;
            mon.margin_usage.record(entry.margin_usage <= cap, entry.margin_usage, idx);
        }
        v_prev = entry.V;
        traj.log.push_back(entry);
    };

    const auto n = net.n();
    double t = 0.0;
    Vector x = x0;
    observe(t, x);

    const bool adaptive = cfg.method == Method::DormandPrince;
    const double h_min = 1e-14 * cfg.t_end;
    Vector k1 = rhs(x);

    auto err_norm = [&](const Vector& xa, const Vector& xb, const Vector& e) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sc = cfg.atol + cfg.rtol * std::max(std::abs(xa(i)), std::abs(xb(i)));
            s += (e(i) / sc) * (e(i) / sc);
        }
        return std::sqrt(s / n);
    };

    double h = cfg.step;
    if (adaptive) {
        Vector zero = Vector::Zero(n);
        const double d0 = err_norm(x, x, x);
        const double d1 = err_norm(zero, zero, k1);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h = std::min(h, cfg.t_end);
    }

    // Near a stable equilibrium the adaptive step grows to the stability limit
    // and the state jitters at the level of the local tolerance.
    const double calm_tol = adaptive ? std::max(cfg.converge_tol, 10.0 * cfg.rtol) : cfg.converge_tol;
    int calm_steps = 0;
    std::size_t steps = 0;
    bool converged = false;
    while (cfg.t_end - t > 1e-13 * cfg.t_end) {
        if (++steps > cfg.max_steps) {
            traj.termination = Termination::StepFailure;
            break;
        }
        const double h_try = std::min(h, cfg.t_end - t);
        Vector xn;
        Vector k_last;
        double err = 0.0;
        if (adaptive) {
            const Vector k2 = rhs(x + h_try * (1.0 / 5.0) * k1);
            const Vector k3 = rhs(x + h_try * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
            const Vector k4 = rhs(x + h_try * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
            const Vector k5 = rhs(x + h_try * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3 -
                                               212.0 / 729.0 * k4));
            const Vector k6 = rhs(x + h_try * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 +
                                               49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5));
            xn = x + h_try * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                              11.0 / 84.0 * k6);
            k_last = rhs(xn);
            const Vector e = h_try * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 + 71.0 / 1920.0 * k4 -
                                      17253.0 / 339200.0 * k5 + 22.0 / 525.0 * k6 - 1.0 / 40.0 * k_last);
            err = err_norm(x, xn, e);
            if (!std::isfinite(err) || err > 1.0) {
                const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
                h = h_try * std::min(1.0, fac);
                ++traj.rejected_steps;
                if (h < h_min) {
                    traj.termination = Termination::StepFailure;
                    break;
                }
                continue;
            }
        } else {
            const Vector k2 = rhs(x + (0.5 * h_try) * k1);
            const Vector k3 = rhs(x + (0.5 * h_try) * k2);
            const Vector k4 = rhs(x + h_try * k3);
            xn = x + (h_try / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }

        if (xn.minCoeff() < -1e-12 * (1.0 + xn.norm()) || !xn.allFinite()) {
            h = 0.5 * h_try;
            ++traj.rejected_steps;
            if (h < h_min) {
                traj.termination = Termination::StepFailure;
                break;
            }
            continue;
        }

        t += h_try;
        x = std::move(xn);
        k1 = adaptive ? std::move(k_last) : rhs(x);
        observe(t, x);

        if (adaptive) {
            const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h = h_try * std::clamp(fac, 0.2, 5.0);
        } else {
            h = cfg.step;
        }

        if (k1.norm() < calm_tol * (1.0 + x.norm())) {
            if (++calm_steps >= cfg.converge_window) {
                converged = true;
                if (cfg.stop_on_convergence) break;
            }
        } else {
            calm_steps = 0;
        }
    }
    if (converged && traj.termination != Termination::StepFailure) {
        traj.termination = cfg.stop_on_convergence && cfg.t_end - t > 1e-13 * cfg.t_end ? Termination::Converged
                                                                                         : Termination::TEnd;
        if (mon.omega_limit.enabled) {
            const Vector& xf = traj.states.back();
            const double fres = eval_f(net, xf.cwiseMax(0.0)).norm();
            const bool near_e = fres <= 1e-7 * (1.0 + xf.norm()) &&
                                (xf.minCoeff() > 0.0 || is_boundary_equilibrium(net, xf.cwiseMax(0.0)));
            mon.omega_limit.record(near_e, fres, traj.states.size() - 1);
        }
    }
    return traj;
}

Trajectory perturbed_within_margin(const ReactionNetwork& net, const ClassId& cls, const Vector& x0, double scale,
                                   const SimConfig& cfg) {
    const CoordinateChart ch = chart(net);
    if (!same_class(ch.bases, x0, cls.representative)) throw DomainError("start state is not in the given class");
    const Equilibrium eq = pi(ch, cls.representative);
    SimConfig c = cfg;
    c.v_reference = eq.x_bar;
    return integrate(net, x0, c, PerturbationSpec::within_margin(scale));
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& preamble) {
    std::string out;
    for (const auto& line : preamble) out += "# " + line + "\n";
    const auto n = traj.states.empty() ? 0 : traj.states.front().size();
    out += "t";
    for (Eigen::Index k = 0; k < n; ++k) out += ",x" + std::to_string(k + 1);
    out += ",V,class_drift\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        out += format_real(traj.times[s]);
        for (Eigen::Index k = 0; k < n; ++k) out += "," + format_real(traj.states[s](k));
        const double v = traj.log[s].V;
        out += "," + (std::isnan(v) ? std::string("nan") : format_real(v));
        out += "," + format_real(traj.log[s].class_drift) + "\n";
    }
    return out;
}

nlohmann::json trajectory_json(const Trajectory& traj) {
    auto stat = [](const MonitorStat& m) {
        nlohmann::json j{{"enabled", m.enabled}, {"checks", m.checks}, {"failures", m.failures}, {"worst", m.worst}};
        if (m.first_failure) j["first_failure_step"] = *m.first_failure;
        return j;
    };
    const Vector& xf = traj.states.back();
    nlohmann::json j;
    j["termination"] = to_string(traj.termination);
    j["t_final"] = traj.times.back();
    j["accepted_steps"] = traj.times.size() - 1;
    j["rejected_steps"] = traj.rejected_steps;
    j["final_state"] = std::vector<double>(xf.data(), xf.data() + xf.size());
    if (traj.v_reference) {
        const Vector& r = *traj.v_reference;
        j["v_reference"] = std::vector<double>(r.data(), r.data() + r.size());
    }
    j["invariant_violated"] = traj.invariant_violated();
    j["monitors"] = {{"nonneg", stat(traj.monitors.nonneg)},
                     {"class_drift", stat(traj.monitors.class_drift)},
                     {"interior_entry", stat(traj.monitors.interior_entry)},
                     {"v_decrease", stat(traj.monitors.v_decrease)},
                     {"omega_limit", stat(traj.monitors.omega_limit)},
                     {"general_g", stat(traj.monitors.general_g)},
                     {"margin_usage", stat(traj.monitors.margin_usage)}};
    return j;
}

}  // namespace zerodef
