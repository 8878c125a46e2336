#include "frontcont/bore.hpp"
#include "frontcont/config.hpp"
#include "frontcont/continuation.hpp"
#include "frontcont/errors.hpp"
#include "frontcont/output.hpp"
#include "frontcont/robin.hpp"
#include "frontcont/spectral.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace frontcont;

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, output_error = 3 };

struct Globals {
    std::string config;
    std::string out;
    bool quiet = false;
};

RunConfig load(const Globals& g) {
    RunConfig c = g.config.empty() ? parse_config(nlohmann::json::object()) : load_config(g.config);
    if (!g.out.empty()) c.output.directory = g.out;
    return c;
}

std::string f17(double v) { return fmt(v, 17); }

// ---- conjugate ----

struct ConjugateArgs {
    std::optional<std::string> problem;
    std::optional<double> lambda;
    std::optional<double> rho1, rho2, a;
};

int cmd_conjugate(const Globals& gl, const ConjugateArgs& args) {
    RunConfig c = load(gl);
    if (args.problem) c.problem = *args.problem;
    if (args.rho1) c.bore.rho1 = *args.rho1;
    if (args.rho2) c.bore.rho2 = *args.rho2;
    if (args.a) c.robin.a = *args.a;
    if (c.problem == "robin") {
        if (!(c.robin.a > 0.0)) throw ConfigError("robin.a", "must be positive");
        const RobinNonlinearity nl = make_nonlinearity(c.robin);
        const double lambda = args.lambda.value_or(c.robin.lambda_seed);
        std::cout << "problem robin\n";
        std::cout << "family " << nl.family() << " a " << f17(c.robin.a) << "\n";
        std::cout << "lambda " << f17(lambda) << "\n";
        std::cout << "kappa1 " << f17(kappa1_robin(nl)) << "\n";
        std::cout << "root,G,conjugate,flow_force\n";
        for (const ConjugateRoot& r : robin_roots(lambda, nl))
            std::cout << f17(r.r) << ',' << f17(r.G) << ',' << (r.conjugate ? "yes" : "excluded") << ','
                      << f17(r.G) << '\n';
        std::cout << "conjugate slopes";
        for (double r : conjugate_set_robin(lambda, nl)) std::cout << ' ' << f17(r);
        std::cout << '\n';
        return ok;
    }
    if (c.problem != "bore") throw ConfigError("problem", "must be \"robin\" or \"bore\"");
    if (!(c.bore.rho1 > 0.0)) throw ConfigError("bore.rho1", "density must be positive");
    if (!(c.bore.rho2 > 0.0)) throw ConfigError("bore.rho2", "density must be positive");
    if (!(c.bore.rho2 < c.bore.rho1)) throw ConfigError("bore.rho2", "requires rho2 < rho1 (stable stratification)");
    const double ls = lambda_star(c.bore.rho1, c.bore.rho2);
    std::cout << "problem bore\n";
    std::cout << "rho1 " << f17(c.bore.rho1) << " rho2 " << f17(c.bore.rho2) << "\n";
    std::cout << "lambda_star " << f17(ls) << "\n";
    std::cout << "F2 " << f17(froude_squared(c.bore.rho1, c.bore.rho2)) << "\n";
    std::cout << "kappa1 " << f17(kappa1_bore(c.bore.rho1, c.bore.rho2)) << "\n";
    BoreParams p{c.bore.rho1, c.bore.rho2, args.lambda.value_or(ls + c.bore.eps_seed)};
    validate(p);
    // x-independent states only need a single column; a tiny grid is enough
    const Grid g = build_grid(1.0, 5, c.grid.ny, Layout::two_layer);
    BoreState zero{Field(g), p};
    BoreState plus{Field(g), p};
    const std::vector<double> Up = conjugate_state_bore(p.lambda, p, g);
    for (int i = 0; i < g.nx; ++i)
        for (int k = 0; k < g.column_size(); ++k) plus.u(i, k) = Up[static_cast<size_t>(k)];
    std::cout << "lambda " << f17(p.lambda) << "\n";
    std::cout << "state,interface_value,flow_force\n";
    std::cout << "upstream," << f17(0.0) << ',' << f17(flow_force_bore(zero, g.center())) << '\n';
    std::cout << "conjugate," << f17(Up[static_cast<size_t>(g.ny - 1)]) << ','
              << f17(flow_force_bore(plus, g.center())) << '\n';
    return ok;
}

// ---- eigen ----

struct EigenArgs {
    std::optional<std::string> problem;
    std::string side = "upstream";
    std::string state;
    std::string tag;
    std::optional<double> gz;
    std::optional<double> lambda;
    bool print_eigenfunction = false;
};

int cmd_eigen(const Globals& gl, const EigenArgs& args) {
    RunConfig c = load(gl);
    if (args.problem) c.problem = *args.problem;
    const Side side = args.side == "downstream" ? Side::downstream : Side::upstream;
    Operator1D op;
    if (c.problem == "robin") {
        const RobinNonlinearity nl = make_nonlinearity(c.robin);
        const double lambda = args.lambda.value_or(c.robin.lambda_seed);
        if (args.gz) {
            op = robin_operator(c.grid.ny, *args.gz);
        } else if (!args.state.empty()) {
            RobinState s{read_snapshot(args.state), lambda};
            op = transversal_operator(s, nl, side, c.continuation.tail_tol);
        } else {
            const std::string tag = args.tag.empty() ? (side == Side::upstream ? "zero" : "conjugate") : args.tag;
            if (tag != "zero" && tag != "conjugate") throw ConfigError("eigen.tag", "robin accepts zero or conjugate");
            op = robin_operator(c.grid.ny, nl(tag == "zero" ? 0.0 : lambda, lambda).g_z);
        }
    } else if (c.problem == "bore") {
        BoreParams p{c.bore.rho1, c.bore.rho2, 0.0};
        const double ls = lambda_star(p.rho1, p.rho2);
        p.lambda = args.lambda.value_or(ls + c.bore.eps_seed);
        if (!args.state.empty()) {
            validate(p);
            BoreState s{read_snapshot(args.state), p};
            op = transversal_operator(s, side, c.continuation.tail_tol);
        } else {
            const std::string tag = args.tag.empty() ? (side == Side::upstream ? "zero" : "conjugate") : args.tag;
            if (tag == "lambda_star") p.lambda = ls;
            else if (tag != "zero" && tag != "conjugate")
                throw ConfigError("eigen.tag", "bore accepts zero, conjugate or lambda_star");
            validate(p);
            const double slope = tag == "conjugate" ? ls - p.lambda : 0.0;
            op = bore_operator(c.grid.ny, p, slope, -slope);
        }
    } else {
        throw ConfigError("problem", "must be \"robin\" or \"bore\"");
    }
    const EigenReport r = principal_eigenvalue(op);
    std::cout << "sigma0 " << f17(r.sigma0) << "\n";
    std::cout << "positivity " << (r.positivity_ok ? "ok" : "failed") << "\n";
    std::cout << "dominance " << (r.dominance_ok ? "ok" : "failed") << "\n";
    std::cout << "residual " << f17(r.residual) << "\n";
    std::cout << "iterations " << r.iterations << "\n";
    if (args.print_eigenfunction) {
        std::cout << "coordinate,eigenfunction\n";
        for (int k = 0; k < op.size(); ++k) std::cout << f17(op.coordinate[k]) << ',' << f17(r.eigenfunction[k]) << '\n';
    }
    return r.positivity_ok ? ok : failure;
}

// ---- seed ----

struct SeedArgs {
    bool printed_flow_force = false;
    bool correct = false;
};

int cmd_seed(const Globals& gl, const SeedArgs& args) {
    RunConfig c = load(gl);
    auto problem = make_problem(c);
    const ContinuationConfig& cc = c.continuation;
    auto [u, lambda] = problem->seed(problem->seed_parameter());
    double mu = 0.0;
    int iters = 0;
    if (args.correct) {
        const NewtonResult nr = newton_correct(*problem, u, lambda, 0.0, ArcConstraint::fixed(lambda), cc);
        u = nr.u;
        mu = nr.mu;
        iters = nr.iterations;
    }
    const PointDiagnostics d = diagnose(*problem, u, lambda, mu, cc);
    if (!directory_writable(c.output.directory)) {
        std::cerr << "error: output directory '" << c.output.directory << "' is not writable\n";
        return output_error;
    }
    const std::string path = (std::filesystem::path(c.output.directory) / "seed.txt").string();
    write_snapshot(path, u);
    std::cout << "problem " << problem->name() << "\n";
    std::cout << "grid L " << f17(problem->grid().L) << " nx " << problem->grid().nx << " ny " << problem->grid().ny
              << "\n";
    std::cout << "seed_parameter " << f17(problem->seed_parameter()) << "\n";
    std::cout << "lambda " << f17(lambda) << "\n";
    if (args.correct) std::cout << "newton_iters " << iters << "\nmu " << f17(mu) << "\n";
    std::cout << "residual " << f17(d.residual) << "\n";
    std::cout << "phase " << f17(d.phase) << "\n";
    std::cout << "flow_force " << f17(d.flow_force) << "\n";
    std::cout << "flow_force_dev " << f17(d.flow_force_dev) << "\n";
    std::cout << "monotone " << (d.monotone ? "ok" : "failed") << " min_dxu " << f17(d.min_dxu) << " max_dxu "
              << f17(d.max_dxu) << "\n";
    std::cout << "sigma_minus " << f17(d.sigma_minus) << " sigma_plus " << f17(d.sigma_plus) << "\n";
    for (const auto& e : d.extras) std::cout << e.first << ' ' << f17(e.second) << "\n";
    if (args.printed_flow_force) {
        if (c.problem != "robin") {
            std::cout << "printed_flow_force n/a (robin only)\n";
        } else {
            const RobinNonlinearity nl = make_nonlinearity(c.robin);
            RobinState s{u, lambda};
            const Grid& g = problem->grid();
            std::cout << "column,x,flow_force,printed_flow_force\n";
            for (int i : {0, g.center(), g.nx - 1})
                std::cout << i << ',' << f17(g.x(i)) << ',' << f17(flow_force_robin(s, nl, i)) << ','
                          << f17(flow_force_robin_printed(s, nl, i)) << '\n';
        }
    }
    std::cout << "snapshot " << path << "\n";
    return ok;
}

// ---- continue ----

int cmd_continue(const Globals& gl) {
    RunConfig c = load(gl);
    auto problem = make_problem(c);
    if (!directory_writable(c.output.directory)) {
        std::cerr << "error: output directory '" << c.output.directory << "' is not writable\n";
        return output_error;
    }
    StepObserver obs;
    if (!gl.quiet)
        obs = [](int step, const BranchPoint& p) {
            std::cerr << "step " << step << " lambda " << fmt(p.lambda, 10) << " mu " << fmt(p.mu, 3) << " newton "
                      << p.newton_iters << " sigma " << fmt(p.diag.sigma_minus, 6) << ' '
                      << fmt(p.diag.sigma_plus, 6) << '\n';
        };
    const Branch br = run_branch(*problem, c.continuation, obs);
    const std::vector<std::string> files = write_run_artifacts(c.output.directory, c, br);
    std::cout << "termination " << to_string(br.termination.kind) << " (" << tag(br.termination.kind) << ")\n";
    std::cout << "message " << br.termination.message << "\n";
    std::cout << "accepted_points " << br.points.size() << "\n";
    if (!gl.quiet)
        for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return br.termination.kind == Termination::solver_failure ? failure : ok;
}

// ---- verify ----

struct Check {
    std::string name;
    double value;
    double expected;
    double tol;
};

int cmd_verify(const std::string& mutate) {
    std::vector<Check> checks;
    bool mutated = false;
    auto add = [&](const std::string& name, double value, double expected, double tol) {
        if (name == mutate) {
            value *= 1.0 + 1e-6;
            mutated = true;
        }
        checks.push_back({name, value, expected, tol});
    };
    add("lambda_star(1,0.25)", lambda_star(1.0, 0.25), 2.0 / 3.0, 1e-14);
    add("froude_squared(1,0.25)", froude_squared(1.0, 0.25), 1.0 / 3.0, 1e-14);
    add("lambda_star(4,1)", lambda_star(4.0, 1.0), lambda_star(1.0, 0.25), 0.0);
    add("froude_squared(4,1)", froude_squared(4.0, 1.0), froude_squared(1.0, 0.25), 0.0);
    add("kappa1_bore(1,0.25)", kappa1_bore(1.0, 0.25), 2.25, 1e-14);
    add("kappa1_bore(1,1)", kappa1_bore(1.0, 1.0), 2.0 * std::sqrt(3.0), 1e-14);
    const RobinNonlinearity quartic = quartic_nonlinearity(1.0);
    add("kappa1_robin(quartic)", kappa1_robin(quartic), std::sqrt(6.0) / 2.0, 1e-14);
    add("g21(quartic)", quartic.reduced().g21, -6.0, 1e-14);
    add("g21(quartic, finite differences)", quartic.reduced_numeric().g21, -6.0, 1e-6);
    for (double l : {-0.3, -0.1, 0.1, 0.3})
        add("heteroclinic_defect(" + fmt(l, 3) + ")", verify_truncated_heteroclinic(l, quartic), 0.0, 1e-12);
    {
        const std::vector<double> set = conjugate_set_robin(0.3, quartic);
        add("robin_conjugate_count(0.3)", static_cast<double>(set.size()), 2.0, 0.0);
        add("robin_conjugate_low(0.3)", set.empty() ? NAN : set.front(), 0.0, 1e-12);
        add("robin_conjugate_high(0.3)", set.empty() ? NAN : set.back(), 0.3, 1e-12);
        double excluded = NAN, Gx = NAN;
        for (const ConjugateRoot& r : robin_roots(0.3, quartic))
            if (!r.conjugate) {
                excluded = r.r;
                Gx = r.G;
            }
        add("robin_excluded_root(0.3)", excluded, 0.15, 1e-12);
        add("robin_excluded_G(0.3)", Gx, 5.0625e-4, 1e-15);
    }
    add("robin_sigma_oracle(0)", robin_sigma_oracle(0.0), 0.0, 1e-12);
    add("robin_sigma_oracle(1)", robin_sigma_oracle(1.0), -M_PI * M_PI / 4.0, 1e-12);
    {
        const Grid g = build_grid(1.0, 5, 41, Layout::two_layer);
        BoreParams p{1.0, 0.25, 0.5};
        BoreState zero{Field(g), p}, plus{Field(g), p};
        const std::vector<double> Up = conjugate_state_bore(0.5, p, g);
        for (int i = 0; i < g.nx; ++i)
            for (int k = 0; k < g.column_size(); ++k) plus.u(i, k) = Up[static_cast<size_t>(k)];
        const double tol = g.dy * g.dy;
        add("bore_flow_force(0)", flow_force_bore(zero, 2), 0.90625, tol);
        add("bore_flow_force(U+)", flow_force_bore(plus, 2), 0.90625, tol);
        add("bore_flow_force(U+) - bore_flow_force(0)", flow_force_bore(plus, 2) - flow_force_bore(zero, 2), 0.0,
            tol);
    }
    if (!mutate.empty() && !mutated) throw ConfigError("verify.mutate", "no check named '" + mutate + "'");
    int failed = 0;
    for (const Check& c : checks) {
        const double err = std::abs(c.value - c.expected);
        const bool pass = err <= c.tol;
        failed += pass ? 0 : 1;
        std::cout << (pass ? "PASS " : "FAIL ") << c.name << " value " << f17(c.value) << " expected "
                  << f17(c.expected) << " error " << f17(err) << " tol " << f17(c.tol) << '\n';
    }
    std::cout << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
    return failed == 0 ? ok : failure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monotone front continuation on truncated cylinders"};
    Globals gl;
    app.add_option("--config", gl.config, "JSON run configuration");
    app.add_option("--out", gl.out, "output directory (overrides output.directory)");
    app.add_flag("--quiet", gl.quiet, "suppress progress output");
    app.require_subcommand(1);

    ConjugateArgs ca;
    auto* conj = app.add_subcommand("conjugate", "print the conjugate flows and their flow forces");
    conj->add_option("--problem", ca.problem)->check(CLI::IsMember({"robin", "bore"}));
    conj->add_option("--lambda", ca.lambda);
    conj->add_option("--rho1", ca.rho1);
    conj->add_option("--rho2", ca.rho2);
    conj->add_option("--a", ca.a, "quartic amplitude");

    EigenArgs ea;
    auto* eig = app.add_subcommand("eigen", "principal transversal eigenvalue; exit 0 iff the eigenfunction is positive");
    eig->add_option("--problem", ea.problem)->check(CLI::IsMember({"robin", "bore"}));
    eig->add_option("--side", ea.side)->check(CLI::IsMember({"upstream", "downstream"}));
    eig->add_option("--state", ea.state, "snapshot file");
    eig->add_option("--tag", ea.tag, "analytic state: zero, conjugate or lambda_star");
    eig->add_option("--gz", ea.gz, "robin: operator with this constant g_z");
    eig->add_option("--lambda", ea.lambda);
    eig->add_flag("--eigenfunction", ea.print_eigenfunction);

    SeedArgs sa;
    auto* seed = app.add_subcommand("seed", "build the small-amplitude seed and report its diagnostics");
    seed->add_flag("--printed-flow-force", sa.printed_flow_force, "also report the printed flow-force variant");
    seed->add_flag("--correct", sa.correct, "Newton-correct at the seed parameter before reporting");

    auto* cont = app.add_subcommand("continue", "run pseudo-arclength continuation and write artifacts");

    std::string mutate;
    auto* ver = app.add_subcommand("verify", "closed-form oracle suite");
    ver->add_option("--mutate", mutate, "perturb the named check (self-test of the suite)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*conj) return cmd_conjugate(gl, ca);
        if (*eig) return cmd_eigen(gl, ea);
        if (*seed) return cmd_seed(gl, sa);
        if (*cont) return cmd_continue(gl);
        if (*ver) return cmd_verify(mutate);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
    return ok;
}
