#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "zerodef/cli.hpp"
#include "zerodef/parser.hpp"

using namespace zerodef;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(ZERODEF_DATA_DIR) + "/" + name; }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "zerodef_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("analyze McKeithan N = 2") {
    const Run r = run({"analyze", data("mckeithan_n2.crn"), "--json"});
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["all_passed"] == true);
    CHECK(j["m"] == 4);
    CHECK(j["dim_D"] == 3);
    CHECK(j["dim_Dperp"] == 2);
    CHECK(j["support_sets"][0]["species"] == std::vector<std::string>{"T", "M"});
    CHECK(j["manifest"]["version"] == kVersion);
}

TEST_CASE("analyze names the unreachable complex") {
    const Run r = run({"analyze", data("one_way.crn")});
    CHECK(r.code == kExitHypothesis);
    CHECK(r.out.find("FAIL") != std::string::npos);
    CHECK(r.out.find("P3") != std::string::npos);
    CHECK(r.out.find("line 2") != std::string::npos);
}

TEST_CASE("analyze with a class") {
    const Run r = run({"analyze", "--class", "2,2,0", data("sec11.crn")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("no boundary equilibria in this class") != std::string::npos);
    const Run b = run({"analyze", "--class", "3,2", data("bistable_line.crn"), "--json"});
    CHECK(b.code == kExitOk);
    CHECK(nlohmann::json::parse(b.out)["class"]["boundary_equilibria"] == "present");
}

TEST_CASE("parse errors exit with 2") {
    const auto p = scratch("bad.crn");
    std::ofstream(p) << "A -> B @ 1\nA -> @ 2\n";
    const Run r = run({"analyze", p.string()});
    CHECK(r.code == kExitParse);
    CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("equilibrium of a class") {
    const Run r = run({"equilibrium", data("sec11.crn"), "--class", "2,2,0"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.rfind("x_bar: 1 1 1\n", 0) == 0);
    const Run j = run({"equilibrium", data("sec11.crn"), "--class", "2,2,0", "--json"});
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["residual"].get<double>() < 1e-9);
    // Class given by its conserved coordinates.
    const std::vector<double> coords = doc["class_coords"];
    const Run t = run({"equilibrium", data("sec11.crn"), "--class",
                       format_real(coords[0]) + "," + format_real(coords[1])});
    CHECK(t.code == kExitOk);
    CHECK(t.out.rfind("x_bar: 1 1 1\n", 0) == 0);
}

TEST_CASE("equilibrium of a class without positive states is infeasible") {
    CHECK(run({"equilibrium", data("sec11.crn"), "--class", "0,5,0"}).code == kExitInfeasible);
    CHECK(run({"equilibrium", data("sec11.crn"), "--class", "1,2,3,4"}).code == kExitUsage);
    CHECK(run({"equilibrium", data("one_way.crn")}).code == kExitHypothesis);
}

TEST_CASE("simulate converges and writes CSV") {
    const auto csv = scratch("traj.csv");
    const Run r = run({"simulate", data("sec11.crn"), "--x0", "2,2,0", "--out", csv.string(), "--json"});
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["termination"] == "converged");
    const std::vector<double> xf = j["final_state"];
    for (double v : xf) CHECK(std::abs(v - 1.0) < 1e-6);
    const std::string text = slurp(csv);
    CHECK(text.find("\nt,x1,x2,x3,V,class_drift\n") != std::string::npos);
    CHECK(text.rfind("# zerodef", 0) == 0);
}

TEST_CASE("fixed-step runs are byte-identical") {
    const auto a = scratch("same.csv");
    const std::vector<std::string> args = {"simulate", data("mckeithan_n2.crn"), "--x0", "1,2,0,0,0.5", "--method",
                                           "rk4", "--step", "0.01", "--t-end", "5", "--out", a.string()};
    REQUIRE(run(args).code == kExitOk);
    const std::string first = slurp(a);
    REQUIRE(run(args).code == kExitOk);
    CHECK(slurp(a) == first);
}

TEST_CASE("simulate modes") {
    CHECK(run({"simulate", data("sec11.crn"), "--x0", "2,2,0", "--perturb", "0.9"}).code == kExitOk);
    CHECK(run({"simulate", data("sec11.crn"), "--x0", "5,0.1,4", "--feedback", "P1,P3", "--t-end", "50"}).code ==
          kExitOk);
    CHECK(run({"simulate", data("sec11.crn"), "--x0", "5,0.1,4", "--feedback", "1,3", "--gains", "2,0.5"}).code ==
          kExitOk);
    CHECK(run({"simulate", data("sec11.crn"), "--x0", "5,0.1,4", "--feedback", "P3"}).code == kExitUsage);
    CHECK(run({"simulate", data("bistable_line.crn"), "--x0", "1,1", "--feedback", "X2"}).code ==
          kExitHypothesis);
    CHECK(run({"simulate", data("sec11.crn"), "--x0", "2,2"}).code == kExitUsage);
    CHECK(run({"simulate", data("sec11.crn"), "--x0", "2,2,0", "--method", "euler"}).code == kExitUsage);
    CHECK(run({"simulate", data("sec11.crn"), "--x0", "2,2,0", "--perturb", "1.5"}).code == kExitUsage);
}

TEST_CASE("stabilize lists T and M first") {
    const Run r = run({"stabilize", data("mck_n0.crn")});
    REQUIRE(r.code == kExitOk);
    const auto pos = r.out.find("admissible sets:\n");
    REQUIRE(pos != std::string::npos);
    CHECK(r.out.substr(pos + 17, 8) == "  {T, M}");
    const auto j = nlohmann::json::parse(run({"stabilize", data("mckeithan_n2.crn"), "--json"}).out);
    CHECK(j["admissible"][0]["species"] == std::vector<std::string>{"T", "M"});
}

TEST_CASE("margin report") {
    const Run r = run({"margin", data("sec11.crn"), "--class", "2,2,0", "--at", "1.5,1.5,0.5", "--json"});
    REQUIRE(r.code == kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["kappa"].get<double>() == doctest::Approx(1.0));
    CHECK(j["c0"].get<double>() == doctest::Approx(1.0));
    CHECK(j["c"].get<double>() == doctest::Approx(0.5));
    CHECK(j["delta_S"].get<double>() == doctest::Approx(2.0 * std::pow(std::log(4.5), 2) / 16.0));
    CHECK(j["manifest"]["seed"] == 1);
    CHECK(run({"margin", data("sec11.crn"), "--class", "2,2,0", "--at", "2,2,2"}).code == kExitInfeasible);
    // Same seed, same spot checks.
    const auto a = run({"margin", data("mckeithan_n2.crn"), "--class", "1,2,0,0,0", "--seed", "9"});
    const auto b = run({"margin", data("mckeithan_n2.crn"), "--class", "1,2,0,0,0", "--seed", "9"});
    CHECK(a.out == b.out);
}

TEST_CASE("mckeithan emits a parseable document") {
    const Run r = run({"mckeithan", "--N", "2"});
    REQUIRE(r.code == kExitOk);
    const ReactionNetwork net = parse(r.out);
    CHECK(net.n() == 5);
    CHECK(net.m() == 4);
    const Run custom = run({"mckeithan", "--N", "1", "--k1", "2", "--kp", "0.5", "--km", "1,3"});
    const ReactionNetwork c = parse(custom.out);
    CHECK(c.A()(1, 0) == 2.0);
    CHECK(c.A()(0, 2) == 3.0);
    CHECK(run({"mckeithan", "--N", "1", "--km", "1"}).code == kExitUsage);
}

TEST_CASE("sweep keeps input order for any pool size") {
    const std::vector<std::string> args = {"sweep",  data("sec11.crn"), "--class",  "2,2,0",
                                           "--edge", "1,2",            "--values", "0.5,1,2,4,8,16", "--json"};
    setenv("ZERODEF_THREADS", "1", 1);
    const Run one = run(args);
    setenv("ZERODEF_THREADS", "4", 1);
    const Run four = run(args);
    unsetenv("ZERODEF_THREADS");
    REQUIRE(one.code == kExitOk);
    CHECK(one.out == four.out);
    const auto j = nlohmann::json::parse(one.out);
    CHECK(j["rows"].size() == 6);
    CHECK(j["rows"][1]["value"] == 1.0);
    CHECK(j["rows"][1]["kappa"].get<double>() == doctest::Approx(1.0));
    CHECK(run({"sweep", data("sec11.crn"), "--class", "2,2,0", "--edge", "1,1", "--values", "1"}).code ==
          kExitUsage);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"analyze"}).code == kExitUsage);
    CHECK(run({"analyze", data("nope.crn")}).code == kExitUsage);
    const Run v = run({"--version"});
    CHECK(v.code == kExitOk);
    CHECK(v.out.find(kVersion) != std::string::npos);
}
