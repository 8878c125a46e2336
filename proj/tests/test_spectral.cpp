#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "frontcont/errors.hpp"
#include "frontcont/spectral.hpp"

#include <cmath>
#include <limits>

using namespace frontcont;

namespace {

/// Smooth front blending two x-independent columns.
template <class Column>
Field blended_front(const Grid& g, double width, Column column) {
    Field u(g);
    for (int i = 0; i < g.nx; ++i) {
        const double t = 0.5 * (1.0 + std::tanh(g.x(i) / width));
        for (int k = 0; k < g.column_size(); ++k) u(i, k) = t * column(k);
    }
    return u;
}

}  // namespace

TEST_CASE("robin_sigma_oracle examples") {
    CHECK(robin_sigma_oracle(0.0) == 0.0);
    const double xi = 1.91501;
    CHECK(std::abs(robin_sigma_oracle(-1.0) - 3.66726) <= 2e-5);
    CHECK(std::abs(std::tanh(std::sqrt(robin_sigma_oracle(-1.0))) / std::sqrt(robin_sigma_oracle(-1.0)) - 0.5) <= 1e-12);
    CHECK(std::abs(robin_sigma_oracle(-1.0) - xi * xi) <= 1e-4);
    CHECK(std::abs(robin_sigma_oracle(1.0) + M_PI * M_PI / 4) <= 1e-12);
    // g_z = 2 sits on the tan branch below the g_z = 1 root
    const double x2 = std::sqrt(-robin_sigma_oracle(2.0));
    CHECK(std::abs(std::tan(x2) / x2 + 1.0) <= 1e-10);
}

TEST_CASE("discrete robin eigenvalue matches the oracle within 10 dy^2") {
    const int ny = 41;
    const double dy = 1.0 / (ny - 1);
    for (int n = 0; n < 10; ++n) {
        const double gz = -2.0 + 4.0 * n / 9.0;
        const EigenReport r = principal_eigenvalue(robin_operator(ny, gz));
        CAPTURE(gz);
        CHECK(std::abs(r.sigma0 - robin_sigma_oracle(gz)) <= 10 * dy * dy);
        CHECK(r.positivity_ok);
        CHECK(r.dominance_ok);
        CHECK(r.eigenfunction.maxCoeff() == doctest::Approx(1.0));
    }
    for (double gz : {-2.0, -1.0, 0.0, 0.5, 1.0})
        CHECK(std::abs(principal_eigenvalue(robin_operator(ny, gz)).sigma0 - robin_sigma_oracle(gz)) <= 10 * dy * dy);
}

TEST_CASE("robin eigenfunction at g_z = 1 is sin(pi y / 2)") {
    const Operator1D op = robin_operator(81, 1.0);
    const EigenReport r = principal_eigenvalue(op);
    double worst = 0.0;
    for (int k = 0; k < op.size(); ++k)
        worst = std::max(worst, std::abs(r.eigenfunction[k] - std::sin(M_PI * op.coordinate[k] / 2)));
    CHECK(worst <= 1e-3);
    CHECK(r.residual <= 1e-8 * r.scale);
}

TEST_CASE("robin eigenvalue strictly decreases in g_z") {
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= 16; ++n) {
        const double s = principal_eigenvalue(robin_operator(41, -2.0 + 0.25 * n)).sigma0;
        CHECK(s < prev);
        prev = s;
    }
}

TEST_CASE("robin eigenvalue converges at second order") {
    for (double gz : {-1.5, 0.5, 1.0}) {
        const double s1 = principal_eigenvalue(robin_operator(41, gz)).sigma0;
        const double s2 = principal_eigenvalue(robin_operator(81, gz)).sigma0;
        const double s4 = principal_eigenvalue(robin_operator(161, gz)).sigma0;
        const double ratio = std::abs(s1 - s2) / std::abs(s2 - s4);
        CAPTURE(gz);
        CHECK(ratio >= 3.2);
        CHECK(ratio <= 4.8);
    }
}

TEST_CASE("bore operator at lambda_star is degenerate with eigenfunction 1 - |p|") {
    const int ny = 41;
    const double dy = 1.0 / (ny - 1);
    const BoreParams p{1, 0.25, lambda_star(1, 0.25)};
    const Operator1D op = bore_operator(ny, p, 0.0, 0.0);
    const EigenReport r = principal_eigenvalue(op);
    CHECK(std::abs(r.sigma0) <= 10 * dy * dy);
    CHECK(r.positivity_ok);
    double worst = 0.0;
    for (int k = 0; k < op.size(); ++k)
        worst = std::max(worst, std::abs(r.eigenfunction[k] - (1 - std::abs(op.coordinate[k]))));
    CHECK(worst <= 1e-3);

    // every row, including the jump row, annihilates 1 - |p|
    Eigen::VectorXd w(op.size());
    for (int k = 0; k < op.size(); ++k) w[k] = 1 - std::abs(op.coordinate[k]);
    CHECK((op.A * w).cwiseAbs().maxCoeff() <= 1e-10 * op.A.cwiseAbs().maxCoeff());
    CHECK_FALSE(is_strict_supersolution(op, w));
}

TEST_CASE("bore eigenvalue is invariant under density scaling") {
    for (double l : {0.5, 0.8}) {
        const double s1 = principal_eigenvalue(bore_operator(41, {1, 0.25, l}, 0.0, 0.0)).sigma0;
        const double s4 = principal_eigenvalue(bore_operator(41, {4, 1, l}, 0.0, 0.0)).sigma0;
        CHECK(std::abs(s1 - s4) <= 1e-9 * (1 + std::abs(s1)));
    }
}

TEST_CASE("1 - |p| is a strict supersolution away from lambda_star") {
    Eigen::VectorXd w;
    for (double l : {0.75, 0.8, 0.9}) {
        const Operator1D op = bore_operator(41, {1, 0.25, l}, 0.0, 0.0);
        w.resize(op.size());
        for (int k = 0; k < op.size(); ++k) w[k] = 1 - std::abs(op.coordinate[k]);
        CAPTURE(l);
        CHECK(is_strict_supersolution(op, w));
        CHECK(principal_eigenvalue(op).sigma0 < 0.0);
    }
}

TEST_CASE("spectral margin of a robin front at lambda = 0.3 is negative on both ends") {
    const Grid g = build_grid(30, 121, 21, Layout::single);
    const RobinNonlinearity nl = quartic_nonlinearity(1.0);
    const double l = 0.3;
    RobinState s{blended_front(g, 1.0, [&](int k) { return l * g.y(k); }), l};
    const SpectralMargin m = spectral_margin(s, nl);
    CHECK(m.sigma_minus < 0.0);
    CHECK(m.sigma_plus < 0.0);
    CHECK(m.positivity_ok);
    // g_z = 2 a lambda^2 at both ends, so both margins agree with the oracle
    const double dy = g.dy;
    CHECK(std::abs(m.sigma_minus - robin_sigma_oracle(2 * l * l)) <= 10 * dy * dy);
    CHECK(std::abs(m.sigma_plus - robin_sigma_oracle(2 * l * l)) <= 10 * dy * dy);
}

TEST_CASE("spectral margin of a bore front at lambda = 0.8 is negative on both ends") {
    const Grid g = build_grid(30, 121, 21, Layout::two_layer);
    const BoreParams p{1, 0.25, 0.8};
    const std::vector<double> Up = conjugate_state_bore(p.lambda, p, g);
    BoreState s{blended_front(g, 1.0, [&](int k) { return Up[static_cast<size_t>(k)]; }), p};
    const SpectralMargin m = spectral_margin(s);
    CHECK(m.sigma_minus < 0.0);
    CHECK(m.sigma_plus < 0.0);
    CHECK(m.positivity_ok);
}

TEST_CASE("truncation too short is reported") {
    const Grid g = build_grid(3, 61, 11, Layout::single);
    const RobinNonlinearity nl = quartic_nonlinearity(1.0);
    RobinState s{blended_front(g, 1.0, [&](int k) { return 0.2 * g.y(k); }), 0.2};
    CHECK_THROWS_AS(transversal_operator(s, nl, Side::upstream), EigenError);
    CHECK_THROWS_AS(spectral_margin(s, nl), EigenError);
    CHECK_NOTHROW(transversal_operator(s, nl, Side::upstream, 1.0));
}
