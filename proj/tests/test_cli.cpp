#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "frontcont/config.hpp"
#include "frontcont/errors.hpp"
#include "frontcont/output.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace frontcont;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(FRONTCONT_TEST_WORKDIR) / "cli_work";

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

struct Run {
    int code = -1;
    std::string out;
};

Run run_cli(const std::string& args) {
    fs::create_directories(kWork);
    const fs::path log = kWork / "stdout.txt";
    const std::string cmd = std::string(FRONTCONT_CLI) + " " + args + " > " + log.string() + " 2> " +
                            (kWork / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(log);
    return r;
}

/// Tiny Robin run that finishes in well under a second.
json small_robin() {
    return json{{"problem", "robin"},
                {"grid", {{"L", 60.0}, {"nx", 101}, {"ny", 11}}},
                {"continuation", {{"max_steps", 3}, {"ds", 0.005}, {"ds_max", 0.01}}},
                {"output", {{"snapshot_stride", 0}}}};
}

std::string config_error_key(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return {};
}

}  // namespace

TEST_CASE("defaults are echoed in full and round trip") {
    const RunConfig c = parse_config(json::object());
    const json echo = to_json(c);
    CHECK(echo["problem"] == "robin");
    CHECK(echo["grid"]["nx"] == 401);
    CHECK(echo["grid"]["ny"] == 41);
    CHECK(echo["grid"]["L"].is_null());
    CHECK(echo["continuation"]["sigma_guard"] == 1e-3);
    CHECK(echo["continuation"]["lambda_max"].is_null());
    CHECK(echo["bore"]["rho2"] == 0.25);
    CHECK(to_json(parse_config(echo)) == echo);

    const RunConfig b = parse_config(json{{"problem", "bore"}, {"grid", {{"L", 123.5}}}, {"continuation", {{"lambda_max", 0.9}}}});
    CHECK(to_json(parse_config(to_json(b))) == to_json(b));
    CHECK(*parse_config(to_json(b)).grid.L == 123.5);
}

TEST_CASE("unknown keys and bad values name the key path") {
    CHECK(config_error_key(json{{"bogus", 1}}) == "bogus");
    CHECK(config_error_key(json{{"grid", {{"nz", 3}}}}) == "grid.nz");
    CHECK(config_error_key(json{{"continuation", {{"ds", "big"}}}}) == "continuation.ds");
    CHECK(config_error_key(json{{"grid", {{"nx", 400}}}}) == "grid.nx");
    CHECK(config_error_key(json{{"bore", {{"rho1", 0.2}}}}) == "bore.rho2");
    CHECK(config_error_key(json{{"problem", "tidal"}}) == "problem");
    CHECK(config_error_key(json{{"continuation", {{"ds", 1.0}}}}) == "continuation.ds");
    CHECK(config_error_key(json{{"output", {{"precision", 0}}}}) == "output.precision");
    CHECK(config_error_key(json{{"grid", {{"nx", 401.5}}}}) == "grid.nx");
    CHECK(config_error_key(small_robin()).empty());
}

TEST_CASE("auto half-length puts the seed tail below 1e-8") {
    RunConfig c = parse_config(json::object());
    const double L = auto_half_length(c);
    const double k = std::sqrt(6.0) / 2 * 0.1;
    CHECK(L == std::ceil(std::log(1e8) / (2 * k)));
    CHECK(std::exp(-2 * k * L) <= 1e-8);
    RunConfig b = parse_config(json{{"problem", "bore"}});
    CHECK(auto_half_length(b) == std::ceil(std::log(1e8) / (2 * 2.25 * 0.02)));
    const Grid g = make_grid(b);
    CHECK(g.L == auto_half_length(b));
    CHECK(g.layout == Layout::two_layer);
}

TEST_CASE("fmt uses shortest round-trip digits") {
    CHECK(fmt(0.1) == "0.10000000000000001");
    CHECK(fmt(2.0) == "2");
    CHECK(fmt(0.1, 3) == "0.1");
}

TEST_CASE("cli exit codes") {
    const fs::path cfg = kWork / "small.json";
    write_file(cfg, small_robin().dump());

    SUBCASE("verify passes and a mutated check fails") {
        const Run ok = run_cli("verify");
        CHECK(ok.code == 0);
        CHECK(ok.out.find("FAIL") == std::string::npos);
        const Run bad = run_cli("verify --mutate 'kappa1_bore(1,0.25)'");
        CHECK(bad.code == 1);
        CHECK(bad.out.find("FAIL kappa1_bore(1,0.25)") != std::string::npos);
    }
    SUBCASE("conjugate and eigen") {
        const Run c = run_cli("conjugate --problem bore --lambda 0.5");
        CHECK(c.code == 0);
        CHECK(c.out.find("lambda_star") != std::string::npos);
        CHECK(run_cli("eigen --problem robin --gz 1").code == 0);
        CHECK(run_cli("eigen --problem bore --tag lambda_star").code == 0);
    }
    SUBCASE("continue succeeds and writes its artifacts") {
        const fs::path out = kWork / "run_ok";
        fs::remove_all(out);
        const Run r = run_cli("--quiet --config " + cfg.string() + " --out " + out.string() + " continue");
        CHECK(r.code == 0);
        CHECK(r.out.find("termination step_budget") != std::string::npos);
        CHECK(fs::exists(out / "branch.csv"));
        CHECK(fs::exists(out / "summary.json"));
        const json summary = json::parse(read_file(out / "summary.json"));
        CHECK(summary.contains("config"));
    }
    SUBCASE("configuration errors exit 2") {
        const fs::path bad = kWork / "bad.json";
        write_file(bad, R"({"grid": {"nx": 400}})");
        CHECK(run_cli("--config " + bad.string() + " continue").code == 2);
        write_file(bad, R"({"grid": {"nz": 5}})");
        CHECK(run_cli("--config " + bad.string() + " continue").code == 2);
        CHECK(run_cli("--config " + (kWork / "missing.json").string() + " continue").code == 2);
        CHECK(run_cli("no-such-command").code == 2);
        CHECK(run_cli("conjugate --problem tidal").code == 2);
    }
    SUBCASE("solver failure exits 1") {
        json j = small_robin();
        j["continuation"]["max_newton"] = 1;
        j["continuation"]["eps_newton"] = 1e-15;
        const fs::path f = kWork / "fail.json";
        write_file(f, j.dump());
        const Run r = run_cli("--quiet --config " + f.string() + " --out " + (kWork / "run_fail").string() + " continue");
        CHECK(r.code == 1);
        CHECK(r.out.find("solver_failure") != std::string::npos);
    }
    SUBCASE("unwritable output exits 3") {
        const fs::path blocker = kWork / "blocker";
        write_file(blocker, "not a directory");
        CHECK(run_cli("--quiet --config " + cfg.string() + " --out " + (blocker / "sub").string() + " continue").code ==
              3);
    }
}

TEST_CASE("repeated continue runs produce byte-identical CSVs") {
    const fs::path cfg = kWork / "repeat.json";
    write_file(cfg, small_robin().dump());
    std::string csv[2];
    for (int r = 0; r < 2; ++r) {
        const fs::path out = kWork / ("repeat_" + std::to_string(r));
        fs::remove_all(out);
        REQUIRE(run_cli("--quiet --config " + cfg.string() + " --out " + out.string() + " continue").code == 0);
        csv[r] = read_file(out / "branch.csv");
    }
    CHECK(!csv[0].empty());
    CHECK(csv[0] == csv[1]);
}
