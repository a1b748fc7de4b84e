#include "zerodef/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "zerodef/control.hpp"
#include "zerodef/equilibria.hpp"
#include "zerodef/errors.hpp"
#include "zerodef/linprog.hpp"
#include "zerodef/lyapunov.hpp"
#include "zerodef/models.hpp"
#include "zerodef/parser.hpp"
#include "zerodef/simulate.hpp"
#include "zerodef/stoichiometry.hpp"

namespace zerodef {

namespace {

using nlohmann::json;

std::string fmt(double v, int digits = 12) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string fmt_vec(const Vector& v, const char* sep = " ", int digits = 12) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) s += sep;
        s += fmt(v(i), digits);
    }
    return s;
}

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::vector<double> parse_numbers(const std::string& text, const char* what) {
    std::vector<double> out;
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size() || !std::isfinite(v)) throw DomainError(std::string("bad number '") + tok + "' in " + what);
        out.push_back(v);
        tok.clear();
    };
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '\t') {
            flush();
        } else {
            tok += c;
        }
    }
    flush();
    if (out.empty()) throw DomainError(std::string("empty list for ") + what);
    return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

Vector parse_state(const ReactionNetwork& net, const std::string& text, const char* what) {
    const auto v = parse_numbers(text, what);
    if (static_cast<int>(v.size()) != net.n()) {
        throw DomainError(std::string(what) + " needs " + std::to_string(net.n()) + " values, got " + std::to_string(v.size()));
    }
    Vector x = to_vector(v);
    check_nonnegative_state(net, x);
    return x;
}

// Species given by name or by 1-based position.
std::vector<int> parse_species(const ReactionNetwork& net, const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        if (tok.empty()) continue;
        const auto& names = net.species();
        auto it = std::find(names.begin(), names.end(), tok);
        if (it != names.end()) {
            out.push_back(static_cast<int>(it - names.begin()));
            continue;
        }
        char* end = nullptr;
        const long k = std::strtol(tok.c_str(), &end, 10);
        if (*end != '\0' || k < 1 || k > net.n()) throw DomainError("unknown species '" + tok + "'");
        out.push_back(static_cast<int>(k - 1));
    }
    if (out.empty()) throw DomainError("empty species list");
    return out;
}

// A class given either as a nonnegative state (n values) or by its conserved
// coordinates Dperp'x (n - m + 1 values). Returns a representative state.
Vector class_representative(const ReactionNetwork& net, const SubspaceBases& bases, const std::string& text) {
    const auto v = parse_numbers(text, "--class");
    const int n = net.n();
    const auto r = static_cast<int>(bases.Dperp.cols());
    if (static_cast<int>(v.size()) == n) {
        Vector x = to_vector(v);
        check_nonnegative_state(net, x);
        return x;
    }
    if (static_cast<int>(v.size()) != r) {
        throw DomainError("--class needs a state (" + std::to_string(n) + " values) or conserved coordinates (" +
                          std::to_string(r) + " values)");
    }
    // Deepest nonnegative point with the given coordinates: maximize t with
    // x_i >= t, t <= 1.
    LinearProgram lp;
    lp.A = Matrix::Zero(r + n + 1, n + 1);
    lp.b = Vector::Zero(r + n + 1);
    lp.A.topLeftCorner(r, n) = bases.Dperp.transpose();
    lp.b.head(r) = to_vector(v);
    for (int i = 0; i < n; ++i) {
        lp.A(r + i, i) = -1.0;
        lp.A(r + i, n) = 1.0;
    }
    lp.A(r + n, n) = 1.0;
    lp.b(r + n) = 1.0;
    lp.sense.assign(static_cast<std::size_t>(r), Sense::Equal);
    lp.sense.resize(static_cast<std::size_t>(r + n + 1), Sense::LessEq);
    lp.c = Vector::Zero(n + 1);
    lp.c(n) = 1.0;
    lp.free.assign(static_cast<std::size_t>(n + 1), false);
    lp.free[static_cast<std::size_t>(n)] = true;
    const LpResult res = solve_lp(lp);
    if (res.status != LpStatus::Optimal) throw InfeasibleError("no nonnegative state has these conserved coordinates");
    return res.x.head(n).cwiseMax(0.0);
}

std::string hex64(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct Manifest {
    std::string command;
    std::string input_hash;
    std::uint64_t seed = 0;
    json config = json::object();

    [[nodiscard]] json to_json() const {
        return json{{"command", command}, {"input_fnv1a64", input_hash}, {"seed", seed}, {"config", config},
                    {"version", kVersion}};
    }
    [[nodiscard]] std::vector<std::string> comment_lines() const {
        return {kVersion, "command: " + command, "input_fnv1a64: " + input_hash, "seed: " + std::to_string(seed),
                "config: " + config.dump()};
    }
};

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DomainError("cannot write " + path);
    f << contents;
}

struct Loaded {
    std::string text;
    ReactionNetwork net;
};

Loaded load(const std::string& path) {
    Loaded l;
    l.text = read_text_file(path);
    l.net = parse(l.text);
    return l;
}

std::string species_set(const ReactionNetwork& net, const std::vector<int>& idx) {
    std::string s = "{";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i > 0) s += ", ";
        s += net.species()[static_cast<std::size_t>(idx[i])];
    }
    return s + "}";
}

std::vector<std::string> species_names(const ReactionNetwork& net, const std::vector<int>& idx) {
    std::vector<std::string> out;
    for (int k : idx) out.push_back(net.species()[static_cast<std::size_t>(k)]);
    return out;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOpts {
    std::string file;
    std::string cls;
    bool json = false;
};

int cmd_analyze(const AnalyzeOpts& o, Manifest man, std::ostream& out) {
    const std::string text = read_text_file(o.file);
    man.input_hash = hex64(fnv1a64(text));
    const ParsedNetwork doc = parse_unvalidated(text);
    const ReactionNetwork& net = doc.network;
    const ValidationReport rep = validate(net);

    json j;
    j["manifest"] = man.to_json();
    j["n"] = net.n();
    j["m"] = net.m();
    j["species"] = net.species();
    std::ostringstream txt;
    txt << "network: " << o.file << "  (n = " << net.n() << " species, m = " << net.m() << " complexes)\n";
    txt << "hypotheses:\n";
    json hyp = json::array();
    for (const auto* c : rep.checks()) {
        std::string diag = c->diagnostic;
        if (c == &rep.irreducible && rep.unreachable_complex) {
            const int jx = *rep.unreachable_complex;
            diag += " [" + format_complex(net, jx) + ", line " +
                    std::to_string(doc.complex_lines[static_cast<std::size_t>(jx)]) + "]";
        }
        hyp.push_back({{"name", c->name}, {"passed", c->passed}, {"diagnostic", diag}});
        txt << "  " << std::left << std::setw(30) << c->name << (c->passed ? "pass" : "FAIL");
        if (!c->passed) txt << "  " << diag;
        txt << "\n";
    }
    j["hypotheses"] = hyp;
    j["all_passed"] = rep.all_passed();
    if (rep.unreachable_complex) j["unreachable_complex"] = *rep.unreachable_complex + 1;
    if (!rep.all_passed()) {
        out << (o.json ? j.dump(2) + "\n" : txt.str());
        return kExitHypothesis;
    }

    const SubspaceBases bases = stoich_subspace(net);
    j["dim_D"] = bases.D.cols();
    j["dim_Dperp"] = bases.Dperp.cols();
    txt << "stoichiometric subspace: dim D = " << bases.D.cols() << ", dim Dperp = " << bases.Dperp.cols() << "\n";
    txt << "conserved coordinates (columns of Dperp):\n";
    json dperp = json::array();
    for (Eigen::Index c = 0; c < bases.Dperp.cols(); ++c) {
        dperp.push_back(to_json(bases.Dperp.col(c)));
        txt << "  [" << fmt_vec(bases.Dperp.col(c), ", ", 6) << "]\n";
    }
    j["Dperp"] = dperp;

    txt << "support sets:\n";
    json sup = json::array();
    for (int c = 0; c < net.m(); ++c) {
        const auto s = support_set(net, c);
        sup.push_back({{"complex", c + 1}, {"text", format_complex(net, c)}, {"species", species_names(net, s)}});
        txt << "  S" << c + 1 << "  " << std::left << std::setw(24) << format_complex(net, c) << species_set(net, s)
            << "\n";
    }
    j["support_sets"] = sup;

    const HomogeneityResult hom = homogeneity_check(net);
    j["homogeneity"] = {{"holds", hom.holds}};
    if (hom.holds) j["homogeneity"]["q"] = to_json(hom.q);
    txt << "homogeneity (1 in B'(R^n_+)): " << (hom.holds ? "holds, q = " + fmt_vec(hom.q) : "does not hold") << "\n";

    if (!o.cls.empty()) {
        const Vector rep_x = class_representative(net, bases, o.cls);
        const ClassId cls = class_of(bases, rep_x);
        const bool positive = in_R(bases, rep_x).member;
        const auto search = class_has_boundary_equilibria(net, bases, cls);
        json cj{{"representative", to_json(rep_x)}, {"coords", to_json(cls.coords)}, {"positive", positive},
                {"candidates", search.candidates}};
        txt << "class of (" << fmt_vec(rep_x, ", ") << "):" << (positive ? "" : " (no positive state)") << "\n";
        switch (search.decision) {
            case Decision::No:
                cj["boundary_equilibria"] = "none";
                txt << "  no boundary equilibria in this class\n";
                break;
            case Decision::Yes:
                cj["boundary_equilibria"] = "present";
                cj["witness"] = to_json(search.witness);
                cj["zero_set"] = species_names(net, search.zero_set);
                txt << "  boundary equilibrium in this class: (" << fmt_vec(search.witness, ", ") << "), zero on "
                    << species_set(net, search.zero_set) << "\n";
                break;
            case Decision::Undecided:
                cj["boundary_equilibria"] = "undecided";
                txt << "  undecided: hitting-set search exceeded its cap\n";
                break;
        }
        j["class"] = cj;
    }
    out << (o.json ? j.dump(2) + "\n" : txt.str());
    return kExitOk;
}

// ------------------------------------------------------------ equilibrium

struct EquilibriumOpts {
    std::string file;
    std::string cls;
    bool json = false;
};

int cmd_equilibrium(const EquilibriumOpts& o, Manifest man, std::ostream& out) {
    const Loaded l = load(o.file);
    man.input_hash = hex64(fnv1a64(l.text));
    const CoordinateChart ch = chart(l.net);
    const Equilibrium eq = o.cls.empty() ? pi(ch, ch.x_bar) : pi(ch, class_representative(l.net, ch.bases, o.cls));
    if (o.json) {
        json j{{"manifest", man.to_json()},
               {"x_bar", to_json(eq.x_bar)},
               {"residual", eq.residual},
               {"class_coords", to_json(eq.cls.coords)}};
        out << j.dump(2) << "\n";
    } else {
        out << "x_bar: " << fmt_vec(eq.x_bar) << "\n";
        out << "residual: " << fmt(eq.residual, 3) << "\n";
        out << "class coordinates: " << fmt_vec(eq.cls.coords) << "\n";
    }
    return kExitOk;
}

// --------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string file;
    std::string x0;
    double perturb = -1.0;
    double epsilon = -1.0;
    std::string feedback;
    std::string gains;
    std::string target;
    std::string method = "dopri";
    double step = 1e-3;
    double t_end = 20.0;
    double rtol = 1e-8;
    double atol = 1e-10;
    bool no_stop = false;
    std::string out_csv;
    std::string out_json;
    bool json = false;
};

int cmd_simulate(const SimulateOpts& o, Manifest man, std::ostream& out, std::ostream& err) {
    const Loaded l = load(o.file);
    man.input_hash = hex64(fnv1a64(l.text));
    const ReactionNetwork& net = l.net;
    const Vector x0 = parse_state(net, o.x0, "--x0");

    SimConfig cfg;
    if (o.method == "rk4") {
        cfg.method = Method::RK4;
    } else if (o.method == "dopri") {
        cfg.method = Method::DormandPrince;
    } else {
        throw DomainError("--method must be rk4 or dopri");
    }
    cfg.step = o.step;
    cfg.t_end = o.t_end;
    cfg.rtol = o.rtol;
    cfg.atol = o.atol;
    cfg.stop_on_convergence = !o.no_stop;

    if (!o.feedback.empty() && (o.perturb >= 0.0 || o.epsilon >= 0.0)) {
        throw DomainError("--feedback cannot be combined with --perturb or --epsilon");
    }
    if (o.perturb >= 0.0 && o.epsilon >= 0.0) throw DomainError("--perturb and --epsilon are exclusive");

    Trajectory traj;
    if (!o.feedback.empty()) {
        const CoordinateChart ch = chart(net);
        const auto idx = parse_species(net, o.feedback);
        Vector gains = Vector::Ones(static_cast<Eigen::Index>(idx.size()));
        if (!o.gains.empty()) gains = to_vector(parse_numbers(o.gains, "--gains"));
        const Vector target = o.target.empty() ? ch.x_bar : pi(ch, parse_state(net, o.target, "--target")).x_bar;
        const FeedbackLaw law = make_feedback(net, target, idx, gains);
        traj = integrate(net, x0, cfg, PerturbationSpec::none(), law);
    } else if (o.perturb >= 0.0) {
        traj = perturbed_within_margin(net, class_of(net, x0), x0, o.perturb, cfg);
    } else if (o.epsilon >= 0.0) {
        Matrix eps = Matrix::Constant(net.m(), net.m(), o.epsilon);
        eps.diagonal().setZero();
        traj = integrate(net, x0, cfg, PerturbationSpec::class_preserving(eps));
    } else {
        traj = integrate(net, x0, cfg);
    }

    json summary = trajectory_json(traj);
    summary["manifest"] = man.to_json();
    if (!o.out_csv.empty()) write_file(o.out_csv, trajectory_csv(traj, man.comment_lines()));
    if (!o.out_json.empty()) write_file(o.out_json, summary.dump(2) + "\n");

    if (o.json) {
        out << summary.dump(2) << "\n";
    } else {
        out << "termination: " << to_string(traj.termination) << "\n";
        out << "t_final: " << fmt(traj.times.back()) << "\n";
        out << "final: " << fmt_vec(traj.final_state()) << "\n";
        out << "steps: " << traj.times.size() - 1 << " accepted, " << traj.rejected_steps << " rejected\n";
        const auto& m = traj.monitors;
        const std::pair<const char*, const MonitorStat*> rows[] = {
            {"nonneg", &m.nonneg},         {"class_drift", &m.class_drift}, {"interior_entry", &m.interior_entry},
            {"v_decrease", &m.v_decrease}, {"omega_limit", &m.omega_limit}, {"general_g", &m.general_g},
            {"margin_usage", &m.margin_usage}};
        out << "monitors:\n";
        for (const auto& [name, st] : rows) {
            if (!st->enabled) continue;
            out << "  " << std::left << std::setw(16) << name << (st->failures == 0 ? "ok" : "FAIL") << "  ("
                << st->checks << " checks, worst " << fmt(st->worst, 3) << ")\n";
        }
    }
    if (traj.termination == Termination::StepFailure) {
        err << "error: step size underflow at t = " << fmt(traj.times.back()) << "\n";
        return kExitNumeric;
    }
    if (traj.invariant_violated()) {
        err << "error: a runtime invariant was violated\n";
        return kExitNumeric;
    }
    return kExitOk;
}

// -------------------------------------------------------------- stabilize

struct StabilizeOpts {
    std::string file;
    std::string target;
    bool json = false;
};

int cmd_stabilize(const StabilizeOpts& o, Manifest man, std::ostream& out) {
    const Loaded l = load(o.file);
    man.input_hash = hex64(fnv1a64(l.text));
    const ReactionNetwork& net = l.net;
    const CoordinateChart ch = chart(net);
    const Vector target = o.target.empty() ? ch.x_bar : pi(ch, parse_state(net, o.target, "--target")).x_bar;
    const auto sets = select_actuators(net);

    json j{{"manifest", man.to_json()}, {"r", net.n() - net.m() + 1}, {"target", to_json(target)}};
    json arr = json::array();
    for (const auto& s : sets) {
        arr.push_back({{"species", species_names(net, s.indices)},
                       {"certifying_complex", s.certifying_complex + 1},
                       {"complex", format_complex(net, s.certifying_complex)}});
    }
    j["admissible"] = arr;
    if (o.json) {
        out << j.dump(2) << "\n";
        return kExitOk;
    }
    out << "target: " << fmt_vec(target) << "\n";
    out << "actuated species per law: r = " << net.n() - net.m() + 1 << "\n";
    if (sets.empty()) {
        out << "no admissible actuator set\n";
        return kExitOk;
    }
    out << "admissible sets:\n";
    for (const auto& s : sets) {
        out << "  " << std::left << std::setw(24) << species_set(net, s.indices) << "via complex "
            << s.certifying_complex + 1 << " (" << format_complex(net, s.certifying_complex) << ")\n";
    }
    return kExitOk;
}

// ----------------------------------------------------------------- margin

struct MarginOpts {
    std::string file;
    std::string cls;
    std::string at;
    std::uint64_t seed = 1;
    int samples = 100;
    bool json = false;
};

int cmd_margin(const MarginOpts& o, Manifest man, std::ostream& out) {
    const Loaded l = load(o.file);
    man.input_hash = hex64(fnv1a64(l.text));
    man.seed = o.seed;
    const ReactionNetwork& net = l.net;
    const CoordinateChart ch = chart(net);
    const Vector rep_x = class_representative(net, ch.bases, o.cls);
    const Vector x_bar = pi(ch, rep_x).x_bar;
    const Vector at = o.at.empty() ? x_bar : parse_state(net, o.at, "--at");
    if (!same_class(ch.bases, at, x_bar)) throw InfeasibleError("--at state is not in the requested class");
    if (!(at.array() > 0.0).all()) throw DomainError("--at state must be positive");
    const CertificateReport rep = certificate(net, x_bar, at);

    // Spot checks of the dissipation inequality at random points of the class
    // around x_bar.
    const DissipationChecker checker(net);
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = std::numeric_limits<double>::infinity();
    int negative = 0;
    int done = 0;
    for (int s = 0; s < o.samples && ch.bases.D.cols() > 0; ++s) {
        Vector c(ch.bases.D.cols());
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal(rng);
        const Vector u = ch.bases.D * c.normalized();
        double reach = std::numeric_limits<double>::infinity();
        for (int k = 0; k < net.n(); ++k) {
            if (u(k) < 0.0) reach = std::min(reach, -x_bar(k) / u(k));
        }
        const double rad = unif(rng) * std::min(reach * 0.99, 10.0 * (1.0 + x_bar.norm()));
        const Vector x = x_bar + rad * u;
        if (!(x.array() > 0.0).all()) continue;
        const auto chk = checker.check(x, x_bar);
        if (!chk.in_range) continue;
        ++done;
        worst = std::min(worst, chk.margin);
        if (chk.margin < -1e-9 * chk.scale) ++negative;
    }

    json j{{"manifest", man.to_json()},
           {"x_bar", to_json(x_bar)},
           {"at", to_json(at)},
           {"kappa", rep.kappa},
           {"c0", rep.c0_at},
           {"c", rep.c_at},
           {"delta_S", rep.delta_S_at},
           {"exp_rate", rep.exp.rate},
           {"exp_radius", rep.exp.radius},
           {"spot_checks", {{"samples", done}, {"negative", negative}}}};
    if (rep.inequality_54_margin) j["dissipation_margin"] = *rep.inequality_54_margin;
    if (done > 0) j["spot_checks"]["worst_margin"] = worst;
    if (o.json) {
        out << j.dump(2) << "\n";
        return kExitOk;
    }
    out << "x_bar:   " << fmt_vec(x_bar) << "\n";
    out << "at:      " << fmt_vec(at) << "\n";
    out << "kappa:   " << fmt(rep.kappa) << "\n";
    out << "c0:      " << fmt(rep.c0_at) << "\n";
    out << "c:       " << fmt(rep.c_at) << "\n";
    out << "delta_S: " << fmt(rep.delta_S_at) << "\n";
    out << "dissipation margin at (at, x_bar): "
        << (rep.inequality_54_margin ? fmt(*rep.inequality_54_margin) : std::string("out of range")) << "\n";
    out << "exponential rate: " << fmt(rep.exp.rate) << " within radius " << fmt(rep.exp.radius) << "\n";
    out << "spot checks: " << done << " samples, " << negative << " with negative margin";
    if (done > 0) out << ", worst " << fmt(worst);
    out << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- mckeithan

struct McKeithanOpts {
    int N = 1;
    double rate = 1.0;
    std::optional<double> k1;
    std::string kp;
    std::string km;
    std::string out_file;
};

int cmd_mckeithan(const McKeithanOpts& o, std::ostream& out) {
    McKeithanParams p = McKeithanParams::uniform(o.N, o.rate);
    if (o.k1) p.k1 = *o.k1;
    if (!o.kp.empty()) p.kp = parse_numbers(o.kp, "--kp");
    if (!o.km.empty()) p.km = parse_numbers(o.km, "--km");
    const std::string text = serialize(mckeithan(p));
    if (o.out_file.empty()) {
        out << text;
    } else {
        write_file(o.out_file, text);
    }
    return kExitOk;
}

// ------------------------------------------------------------------ sweep

struct SweepOpts {
    std::string file;
    std::string cls;
    std::string edge;
    std::string values;
    bool json = false;
};

unsigned worker_count(std::size_t jobs) {
    unsigned cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ZERODEF_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) cap = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(jobs, 1)));
}

int cmd_sweep(const SweepOpts& o, Manifest man, std::ostream& out) {
    const Loaded l = load(o.file);
    man.input_hash = hex64(fnv1a64(l.text));
    const ReactionNetwork& net = l.net;
    const auto edge = parse_numbers(o.edge, "--edge");
    if (edge.size() != 2) throw DomainError("--edge takes source,target complex numbers");
    const int src = static_cast<int>(edge[0]) - 1;
    const int dst = static_cast<int>(edge[1]) - 1;
    if (src < 0 || dst < 0 || src >= net.m() || dst >= net.m() || src == dst || edge[0] != src + 1 ||
        edge[1] != dst + 1) {
        throw DomainError("--edge must name two distinct complexes by their 1-based numbers");
    }
    const auto values = parse_numbers(o.values, "--values");
    const SubspaceBases bases = stoich_subspace(net);
    const Vector rep_x = class_representative(net, bases, o.cls);

    struct Row {
        bool ok = false;
        std::string error;
        Vector x_bar;
        double residual = 0.0;
        double kappa = 0.0;
        double c = 0.0;
        double rate = 0.0;
    };
    std::vector<Row> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            Row& r = rows[i];
            try {
                const ReactionNetwork var = net.with_rate(dst, src, values[i]);
                require_valid(var);
                const Equilibrium eq = pi(var, rep_x);
                r.x_bar = eq.x_bar;
                r.residual = eq.residual;
                r.kappa = kappa(var).kappa;
                r.c = c_of(var, r.kappa, eq.x_bar);
                r.rate = exp_rate(var, eq.x_bar).rate;
                r.ok = true;
            } catch (const std::exception& e) {
                r.error = e.what();
            }
        }
    };
    const unsigned nthreads = worker_count(values.size());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    json arr = json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Row& r = rows[i];
        json jr{{"value", values[i]}, {"ok", r.ok}};
        if (r.ok) {
            jr["x_bar"] = to_json(r.x_bar);
            jr["residual"] = r.residual;
            jr["kappa"] = r.kappa;
            jr["c"] = r.c;
            jr["exp_rate"] = r.rate;
        } else {
            jr["error"] = r.error;
        }
        arr.push_back(jr);
    }
    if (o.json) {
        out << json{{"manifest", man.to_json()}, {"rows", arr}}.dump(2) << "\n";
    } else {
        out << "edge " << src + 1 << " -> " << dst + 1 << " (" << format_complex(net, src) << " -> "
            << format_complex(net, dst) << ")\n";
        out << std::left << std::setw(14) << "value" << std::setw(14) << "kappa" << std::setw(14) << "c"
            << std::setw(14) << "exp_rate"
            << "x_bar\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            const Row& r = rows[i];
            out << std::left << std::setw(14) << fmt(values[i], 6);
            if (r.ok) {
                out << std::setw(14) << fmt(r.kappa, 6) << std::setw(14) << fmt(r.c, 6) << std::setw(14)
                    << fmt(r.rate, 6) << fmt_vec(r.x_bar, " ", 8) << "\n";
            } else {
                out << "error: " << r.error << "\n";
            }
        }
    }
    return std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.ok; }) ? kExitOk : kExitNumeric;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Analysis of deficiency-zero reaction networks", "zerodef"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    AnalyzeOpts analyze;
    auto* c_analyze = app.add_subcommand("analyze", "hypotheses, subspaces, support sets, boundary equilibria");
    c_analyze->add_option("file", analyze.file, ".crn network")->required();
    c_analyze->add_option("--class", analyze.cls, "class as a state or as conserved coordinates");
    c_analyze->add_flag("--json", analyze.json, "machine-readable output");

    EquilibriumOpts equil;
    auto* c_equil = app.add_subcommand("equilibrium", "positive equilibrium of a class");
    c_equil->add_option("file", equil.file, ".crn network")->required();
    c_equil->add_option("--class", equil.cls, "class as a state or as conserved coordinates");
    c_equil->add_flag("--json", equil.json, "machine-readable output");

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "integrate with runtime invariant monitors");
    c_sim->add_option("file", sim.file, ".crn network")->required();
    c_sim->add_option("--x0", sim.x0, "initial state")->required();
    c_sim->add_option("--perturb", sim.perturb, "class-preserving perturbation at this fraction of the margin");
    c_sim->add_option("--epsilon", sim.epsilon, "class-preserving perturbation with this fixed weight");
    c_sim->add_option("--feedback", sim.feedback, "actuated species (names or 1-based indices)");
    c_sim->add_option("--gains", sim.gains, "feedback gains (default 1)");
    c_sim->add_option("--target", sim.target, "feedback target: equilibrium of this state's class");
    c_sim->add_option("--method", sim.method, "rk4 or dopri")->capture_default_str();
    c_sim->add_option("--step", sim.step, "rk4 step")->capture_default_str();
    c_sim->add_option("--t-end", sim.t_end, "final time")->capture_default_str();
    c_sim->add_option("--rtol", sim.rtol, "relative tolerance")->capture_default_str();
    c_sim->add_option("--atol", sim.atol, "absolute tolerance")->capture_default_str();
    c_sim->add_flag("--no-stop", sim.no_stop, "integrate to t-end even after convergence");
    c_sim->add_option("--out", sim.out_csv, "trajectory CSV");
    c_sim->add_option("--json-out", sim.out_json, "summary JSON file");
    c_sim->add_flag("--json", sim.json, "machine-readable output");

    StabilizeOpts stab;
    auto* c_stab = app.add_subcommand("stabilize", "admissible actuator sets for inflow feedback");
    c_stab->add_option("file", stab.file, ".crn network")->required();
    c_stab->add_option("--target", stab.target, "target: equilibrium of this state's class");
    c_stab->add_flag("--json", stab.json, "machine-readable output");

    MarginOpts marg;
    auto* c_marg = app.add_subcommand("margin", "Lyapunov constants and robustness margin");
    c_marg->add_option("file", marg.file, ".crn network")->required();
    c_marg->add_option("--class", marg.cls, "class as a state or as conserved coordinates")->required();
    c_marg->add_option("--at", marg.at, "positive state of the class (default: its equilibrium)");
    c_marg->add_option("--seed", marg.seed, "seed for the spot checks")->capture_default_str();
    c_marg->add_option("--samples", marg.samples, "number of spot checks")->capture_default_str();
    c_marg->add_flag("--json", marg.json, "machine-readable output");

    McKeithanOpts mck;
    auto* c_mck = app.add_subcommand("mckeithan", "emit the kinetic proofreading network as .crn");
    c_mck->add_option("--N", mck.N, "chain length")->capture_default_str();
    c_mck->add_option("--rate", mck.rate, "value for every rate not given explicitly")->capture_default_str();
    c_mck->add_option("--k1", mck.k1, "association rate");
    c_mck->add_option("--kp", mck.kp, "N phosphorylation rates");
    c_mck->add_option("--km", mck.km, "N + 1 dissociation rates");
    c_mck->add_option("--out", mck.out_file, "output file (default stdout)");

    SweepOpts sweep;
    auto* c_sweep = app.add_subcommand("sweep", "class equilibrium and constants over a range of one rate");
    c_sweep->add_option("file", sweep.file, ".crn network")->required();
    c_sweep->add_option("--class", sweep.cls, "class as a state or as conserved coordinates")->required();
    c_sweep->add_option("--edge", sweep.edge, "source,target complex numbers")->required();
    c_sweep->add_option("--values", sweep.values, "rate values")->required();
    c_sweep->add_flag("--json", sweep.json, "machine-readable output");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    Manifest man;
    man.command = "zerodef";
    for (const auto& a : args) man.command += " " + a;

    try {
        if (c_analyze->parsed()) {
            man.config = {{"class", analyze.cls}};
            return cmd_analyze(analyze, man, out);
        }
        if (c_equil->parsed()) {
            man.config = {{"class", equil.cls}};
            return cmd_equilibrium(equil, man, out);
        }
        if (c_sim->parsed()) {
            man.config = {{"x0", sim.x0},         {"perturb", sim.perturb}, {"epsilon", sim.epsilon},
                          {"feedback", sim.feedback}, {"gains", sim.gains},   {"target", sim.target},
                          {"method", sim.method},     {"step", sim.step},     {"t_end", sim.t_end},
                          {"rtol", sim.rtol},         {"atol", sim.atol},     {"stop_on_convergence", !sim.no_stop}};
            return cmd_simulate(sim, man, out, err);
        }
        if (c_stab->parsed()) {
            man.config = {{"target", stab.target}};
            return cmd_stabilize(stab, man, out);
        }
        if (c_marg->parsed()) {
            man.config = {{"class", marg.cls}, {"at", marg.at}, {"samples", marg.samples}};
            return cmd_margin(marg, man, out);
        }
        if (c_mck->parsed()) return cmd_mckeithan(mck, out);
        if (c_sweep->parsed()) {
            man.config = {{"class", sweep.cls}, {"edge", sweep.edge}, {"values", sweep.values}};
            return cmd_sweep(sweep, man, out);
        }
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const HypothesisError& e) {
        err << "hypothesis violated: " << e.what() << "\n";
        return kExitHypothesis;
    } catch (const StructuralError& e) {
        err << "structural error: " << e.what() << "\n";
        return kExitHypothesis;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}

}  // namespace zerodef
