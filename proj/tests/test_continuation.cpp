#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "frontcont/continuation.hpp"
#include "frontcont/errors.hpp"

#include <cmath>

using namespace frontcont;

namespace {

const double kLambda = 0.1;

Grid small_grid() { return build_grid(60, 201, 11, Layout::single); }

RobinProblem small_problem() { return RobinProblem(small_grid(), quartic_nonlinearity(1.0), kLambda); }

/// Point with healthy diagnostics around the given field.
BranchPoint healthy_point(const Field& u, double lambda) {
    BranchPoint p;
    p.u = u;
    p.lambda = lambda;
    p.accepted = true;
    p.diag.sigma_minus = -1.0;
    p.diag.sigma_plus = -1.0;
    p.diag.eigen_positive = true;
    p.diag.monotone = true;
    p.diag.N = 1.0;
    return p;
}

/// Two tanh steps through the intermediate root lambda/2 of the quartic.
Field table_top(const Grid& g, double lambda, double half_gap, double width) {
    return sample(g, [&](double x, double y) {
        const double a = 0.5 * (1 + std::tanh((x + half_gap) / width));
        const double b = 0.5 * (1 + std::tanh((x - half_gap) / width));
        return 0.5 * lambda * (a + b) * y;
    });
}

double max_abs_diff(const Field& a, const Field& b) { return (a.values - b.values).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("phase_value examples") {
    const Grid g = small_grid();
    CHECK(phase_value(sample(g, [](double, double) { return 2.0; })) == 1.0);
    CHECK(phase_value(sample(g, [](double x, double) { return x; })) == -30.0);
    // the centred seed sits at the phase zero up to its tail
    const RobinState s = seed_robin(kLambda, g, quartic_nonlinearity(1.0));
    CHECK(std::abs(phase_value(s.u)) <= 1e-6);
    const RobinState shifted = seed_robin(kLambda, g, quartic_nonlinearity(1.0), 2.0);
    CHECK(phase_value(shifted.u) > 0.0);
}

TEST_CASE("bordering function is a unit Gaussian on the anchor row") {
    const Grid g = small_grid();
    const Eigen::VectorXd chi = bordering_function(g, 0.1);
    CHECK(std::abs(chi.norm() - 1.0) <= 1e-14);
    CHECK(chi.maxCoeff() == chi[g.index(g.center(), g.anchor_slot())]);
    for (int i = 0; i < g.nx; ++i)
        for (int k = 0; k < g.anchor_slot(); ++k) CHECK(chi[g.index(i, k)] == 0.0);
    CHECK(chi[g.index(0, g.anchor_slot())] == 0.0);
}

TEST_CASE("weighted_dot averages the field part") {
    Eigen::VectorXd a(4), b(4);
    a << 1, 2, 3, 4;
    b << 1, 1, 1, 1;
    CHECK(weighted_dot(a, 2.0, b, 0.5) == 3.5);
}

TEST_CASE("tangent_predict is exact on straight branches") {
    const Grid g = small_grid();
    const Field base = seed_robin(kLambda, g, quartic_nonlinearity(1.0)).u;
    BranchPoint p1 = healthy_point(Field(g, 1.0 * base.values), 0.1);
    BranchPoint p2 = healthy_point(Field(g, 1.5 * base.values), 0.15);
    const Prediction pr = tangent_predict(p1, p2, 0.2);
    const double t = (pr.lambda - 0.1) / 0.05;
    CHECK(max_abs_diff(pr.u, Field(g, (1.0 + 0.5 * t) * base.values)) <= 1e-14);
    // the step has weighted length ds
    const double du = std::sqrt(weighted_dot(pr.u.values - p2.u.values, pr.lambda - p2.lambda, pr.u.values - p2.u.values,
                                             pr.lambda - p2.lambda));
    CHECK(std::abs(du - 0.2) <= 1e-14);
    CHECK(std::abs(pr.arc.value(pr.u.values, pr.lambda)) <= 1e-14);
    CHECK_THROWS_AS(tangent_predict(p2, p2, 0.1), Error);
}

TEST_CASE("tangent_predict error is second order in the step") {
    const Grid g = small_grid();
    const Field base = seed_robin(kLambda, g, quartic_nonlinearity(1.0)).u;
    auto curve = [&](double l) { return healthy_point(Field(g, (l * l / kLambda) * base.values), l); };
    double err[2];
    for (int r = 0; r < 2; ++r) {
        const double h = 0.02 / (1 << r);
        const Prediction pr = tangent_predict(curve(0.1 - h), curve(0.1), h);
        err[r] = max_abs_diff(pr.u, curve(pr.lambda).u);
    }
    CHECK(err[0] / err[1] >= 3.5);
    CHECK(err[0] / err[1] <= 4.5);
}

TEST_CASE("monotone_check") {
    const RobinProblem pb = small_problem();
    const Grid& g = pb.grid();
    const Field up = seed_robin(kLambda, g, quartic_nonlinearity(1.0)).u;
    CHECK(monotone_check(pb, up, 1).ok);
    CHECK(monotone_check(pb, up, 0).ok);
    CHECK_FALSE(monotone_check(pb, up, -1).ok);
    CHECK(monotone_check(pb, Field(g, -up.values), -1).ok);
    CHECK(monotone_check(pb, up, 1).min_dxu >= 0.0);

    const Field bump = sample(g, [](double x, double y) { return std::exp(-x * x / 50) * y; });
    CHECK_FALSE(monotone_check(pb, bump, 0).ok);
    CHECK_FALSE(monotone_check(pb, bump, 1).ok);

    // a dip below the relative floor is tolerated, one above it is not
    Field dipped = up;
    dipped(50, 5) -= 1e-13;
    CHECK(monotone_check(pb, dipped, 1, 1e-6).ok);
    dipped(50, 5) -= 1e-3;
    CHECK_FALSE(monotone_check(pb, dipped, 1, 1e-6).ok);
    CHECK_FALSE(monotone_check(pb, Field(g), 0).ok);
}

TEST_CASE("newton_correct pins the translate") {
    const RobinProblem pb = small_problem();
    const Grid& g = pb.grid();
    const RobinNonlinearity nl = quartic_nonlinearity(1.0);
    ContinuationConfig cfg;
    const NewtonResult a = newton_correct(pb, seed_robin(kLambda, g, nl).u, kLambda, 0.0, ArcConstraint::fixed(kLambda), cfg);
    CHECK(a.residual <= cfg.eps_newton);
    CHECK(std::abs(a.phase) <= cfg.eps_newton);
    CHECK(std::abs(a.mu) <= 10 * cfg.eps_newton);
    CHECK(a.iterations <= cfg.max_newton);
    for (double shift : {g.dx, 2 * g.dx, -2 * g.dx}) {
        const NewtonResult b =
            newton_correct(pb, seed_robin(kLambda, g, nl, shift).u, kLambda, 0.0, ArcConstraint::fixed(kLambda), cfg);
        CAPTURE(shift);
        CHECK(max_abs_diff(a.u, b.u) <= 1e-8);
        CHECK(b.lambda == kLambda);
    }
}

TEST_CASE("newton_correct rejects a guess on another grid") {
    const RobinProblem pb = small_problem();
    const Grid other = build_grid(60, 101, 11, Layout::single);
    CHECK_THROWS_AS(newton_correct(pb, Field(other), kLambda, 0.0, ArcConstraint::fixed(kLambda), {}), ShapeError);
}

TEST_CASE("detect_plateau finds the intermediate state of a table-top fixture") {
    const RobinProblem pb = small_problem();
    const Grid& g = pb.grid();
    ContinuationConfig cfg;
    const PlateauReport r = detect_plateau(pb, table_top(g, kLambda, 25, 1.5), kLambda, cfg);
    CHECK(r.found);
    CHECK(r.width >= cfg.plateau_fraction * 2 * g.L);
    CHECK(g.x(r.first) < 0.0);
    CHECK(g.x(r.last) > 0.0);
    CHECK(r.state_residual <= cfg.plateau_state_tol);
    CHECK(std::abs(r.distance_upstream - 0.5 * kLambda) <= 1e-9);

    // a single front has no interior plateau
    CHECK_FALSE(detect_plateau(pb, seed_robin(kLambda, g, quartic_nonlinearity(1.0)).u, kLambda, cfg).found);
    // a flat run at a state that does not solve the problem is not a degeneracy
    Field fake(g);
    for (int i = 0; i < g.nx; ++i)
        for (int k = 0; k < g.column_size(); ++k)
            fake(i, k) = g.y(k) * (0.03 + 0.035 * (std::tanh((g.x(i) + 25) / 1.5) + std::tanh((g.x(i) - 25) / 1.5)));
    CHECK_FALSE(detect_plateau(pb, fake, kLambda, cfg).found);
}

TEST_CASE("termination classification on synthetic fixtures") {
    const RobinProblem pb = small_problem();
    const Grid& g = pb.grid();
    const Field front = seed_robin(kLambda, g, quartic_nonlinearity(1.0)).u;
    ContinuationConfig cfg;
    cfg.lambda_max = 0.5;

    SUBCASE("healthy point continues") {
        CHECK_FALSE(classify_termination(pb, {healthy_point(front, kLambda)}, cfg).has_value());
        CHECK_FALSE(classify_termination(pb, {}, cfg).has_value());
    }
    SUBCASE("sigma crossing gives A3") {
        std::vector<BranchPoint> pts;
        for (double s : {-0.5, -0.1, -0.01, -5e-4}) {
            BranchPoint p = healthy_point(front, kLambda);
            p.diag.sigma_plus = s;
            pts.push_back(p);
            const auto t = classify_termination(pb, pts, cfg);
            if (s < -cfg.sigma_guard) {
                CHECK_FALSE(t.has_value());
            } else {
                REQUIRE(t.has_value());
                CHECK(t->kind == Termination::spectral_degeneracy);
                CHECK(tag(t->kind) == "A3");
            }
        }
    }
    SUBCASE("plateau gives A2") {
        const auto t = classify_termination(pb, {healthy_point(table_top(g, kLambda, 25, 1.5), kLambda)}, cfg);
        REQUIRE(t.has_value());
        CHECK(t->kind == Termination::heteroclinic_degeneracy);
        CHECK(tag(t->kind) == "A2");
    }
    SUBCASE("lambda beyond lambda_max gives A1") {
        const auto t = classify_termination(pb, {healthy_point(front, 0.6)}, cfg);
        REQUIRE(t.has_value());
        CHECK(t->kind == Termination::blowup);
        CHECK(tag(t->kind) == "A1");
        BranchPoint big = healthy_point(front, kLambda);
        big.diag.N = 2 * cfg.N_max;
        CHECK(classify_termination(pb, {big}, cfg)->kind == Termination::blowup);
    }
    SUBCASE("revisited state gives A4") {
        std::vector<BranchPoint> pts;
        for (double l : {0.1, 0.11, 0.12, 0.11, 0.1}) pts.push_back(healthy_point(Field(g, (l / kLambda) * front.values), l));
        const auto t = classify_termination(pb, pts, cfg);
        REQUIRE(t.has_value());
        CHECK(t->kind == Termination::loop);
        CHECK(tag(t->kind) == "A4");
    }
    SUBCASE("priority is A3 over A2 over A1 and classification is deterministic") {
        BranchPoint all = healthy_point(table_top(g, 0.6, 25, 1.5), 0.6);
        all.diag.sigma_minus = 0.0;
        const auto t1 = classify_termination(pb, {all}, cfg);
        const auto t2 = classify_termination(pb, {all}, cfg);
        REQUIRE(t1.has_value());
        CHECK(t1->kind == Termination::spectral_degeneracy);
        CHECK(t1->kind == t2->kind);
        CHECK(t1->message == t2->message);
        all.diag.sigma_minus = -1.0;
        CHECK(classify_termination(pb, {all}, cfg)->kind == Termination::heteroclinic_degeneracy);
        all.u = front;
        CHECK(classify_termination(pb, {all}, cfg)->kind == Termination::blowup);
    }
}

TEST_CASE("termination names and tags") {
    CHECK(to_string(Termination::step_budget) == "step_budget");
    CHECK(to_string(Termination::solver_failure) == "solver_failure");
    CHECK(tag(Termination::blowup) == "A1");
    CHECK(tag(Termination::step_budget) == "budget");
}

TEST_CASE("invariant_violation names the broken invariant") {
    const Grid g = small_grid();
    ContinuationConfig cfg;
    BranchPoint p = healthy_point(Field(g), kLambda);
    CHECK(invariant_violation(p, cfg, 1).empty());
    p.mu = 1e-8;
    CHECK(invariant_violation(p, cfg, 1).find("mu") != std::string::npos);
    p.mu = 0.0;
    p.diag.monotone = false;
    CHECK(invariant_violation(p, cfg, 1).find("monotone") != std::string::npos);
    p.diag.monotone = true;
    p.diag.flow_force_dev = 1e-3;
    CHECK(invariant_violation(p, cfg, 1).find("flow-force") != std::string::npos);
}

TEST_CASE("run_branch with no steps returns the corrected seed") {
    const RobinProblem pb = small_problem();
    ContinuationConfig cfg;
    cfg.max_steps = 0;
    const Branch br = run_branch(pb, cfg);
    REQUIRE(br.points.size() == 1);
    CHECK(br.termination.kind == Termination::step_budget);
    CHECK(br.points[0].accepted);
    // the seed is corrected orthogonally to the branch, so lambda moves slightly
    CHECK(br.points[0].lambda == doctest::Approx(kLambda).epsilon(1e-4));
}

TEST_CASE("short robin branch stops at lambda_max with every invariant holding") {
    const RobinProblem pb = small_problem();
    ContinuationConfig cfg;
    cfg.ds = 0.01;
    cfg.ds_max = 0.02;
    cfg.lambda_max = 0.115;
    cfg.max_steps = 20;
    int observed = 0;
    const Branch br = run_branch(pb, cfg, [&](int, const BranchPoint&) { ++observed; });
    CHECK(br.termination.kind == Termination::blowup);
    CHECK(std::abs(br.points.back().lambda) >= cfg.lambda_max);
    CHECK(observed == static_cast<int>(br.points.size()));
    for (size_t n = 0; n < br.points.size(); ++n) {
        const BranchPoint& p = br.points[n];
        CAPTURE(n);
        CHECK(invariant_violation(p, cfg, 1).empty());
        CHECK(p.diag.sigma_minus < 0.0);
        CHECK(p.diag.sigma_plus < 0.0);
        if (n > 0) {
            CHECK(p.s > br.points[n - 1].s);
            CHECK(p.lambda > br.points[n - 1].lambda);
        }
        // downstream column is the conjugate slope lambda
        const Grid& g = p.u.grid;
        for (int k = 0; k < g.column_size(); ++k) CHECK(std::abs(p.u(g.nx - 1, k) - p.lambda * g.y(k)) <= 1e-12);
        CHECK_FALSE(detect_plateau(pb, p.u, p.lambda, cfg).found);
    }

    const Branch again = run_branch(pb, cfg);
    REQUIRE(again.points.size() == br.points.size());
    for (size_t n = 0; n < br.points.size(); ++n) {
        CHECK(again.points[n].lambda == br.points[n].lambda);
        CHECK(again.points[n].u.values == br.points[n].u.values);
    }
}

TEST_CASE("bore seed corrects to a monotone front") {
    const Grid g = build_grid(60, 121, 11, Layout::two_layer);
    const BoreProblem pb(g, 1, 0.25, 0.03);
    ContinuationConfig cfg;
    auto [u, l] = pb.seed(0.03);
    const NewtonResult r = newton_correct(pb, u, l, 0.0, ArcConstraint::fixed(l), cfg);
    CHECK(r.residual <= cfg.eps_newton);
    CHECK(std::abs(r.phase) <= cfg.eps_newton);
    const MonotoneReport m = monotone_check(pb, r.u, 0, cfg.mono_floor);
    CHECK(m.ok);
    CHECK_THROWS_AS(pb.require_admissible(u, 1.2), SolverError);
}
