#include "frontcont/spectral.hpp"

#include "frontcont/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace frontcont {

Operator1D robin_operator(int ny, double g_z) {
    if (ny < 5) throw ConfigError("ny", "ny must be at least 5");
    Operator1D op;
    op.layout = Layout::single;
    op.ny = ny;
    op.dy = 1.0 / (ny - 1);
    const int n = ny, N = ny - 1;
    const double dy = op.dy, idy2 = 1.0 / (dy * dy);
    op.A = Eigen::MatrixXd::Zero(n, n);
    op.mask = Eigen::VectorXi::Zero(n);
    op.outward = Eigen::VectorXi::Zero(n);
    op.dirichlet = Eigen::VectorXi::Zero(n);
    op.coordinate.resize(n);
    for (int k = 0; k < n; ++k) op.coordinate[k] = k * dy;
    op.A(0, 0) = 1.0;
    op.dirichlet[0] = 1;
    for (int k = 1; k < N; ++k) {
        op.A(k, k - 1) = idy2;
        op.A(k, k) = -2.0 * idy2;
        op.A(k, k + 1) = idy2;
        op.mask[k] = 1;
    }
    // third-order one-sided w'(1)
    op.A(N, N) = 11.0 / (6.0 * dy) + (g_z - 1.0);
    op.A(N, N - 1) = -18.0 / (6.0 * dy);
    op.A(N, N - 2) = 9.0 / (6.0 * dy);
    op.A(N, N - 3) = -2.0 / (6.0 * dy);
    op.outward[N] = 1;
    return op;
}

Operator1D bore_operator(int ny, const BoreParams& p, double Up_lower, double Up_upper) {
    if (ny < 5) throw ConfigError("ny", "ny must be at least 5");
    validate(p);
    const double H1 = p.h1() + Up_lower, H2 = p.h2() + Up_upper;
    if (!(H1 > 0.0) || !(H2 > 0.0)) throw DomainError("bore_operator: non-positive layer thickness h + U_p");
    Operator1D op;
    op.layout = Layout::two_layer;
    op.ny = ny;
    op.dy = 1.0 / (ny - 1);
    const int n = 2 * ny;
    const double dy = op.dy, idy2 = 1.0 / (dy * dy);
    op.A = Eigen::MatrixXd::Zero(n, n);
    op.mask = Eigen::VectorXi::Zero(n);
    op.outward = Eigen::VectorXi::Zero(n);
    op.dirichlet = Eigen::VectorXi::Zero(n);
    op.coordinate.resize(n);
    for (int k = 0; k < n; ++k) op.coordinate[k] = k < ny ? -1.0 + k * dy : (k - ny) * dy;
    op.A(0, 0) = 1.0;
    op.A(n - 1, n - 1) = 1.0;
    op.dirichlet[0] = 1;
    op.dirichlet[n - 1] = 1;
    for (int layer = 0; layer < 2; ++layer) {
        const double a = 1.0 / std::pow(layer == 0 ? H1 : H2, 3);
        for (int j = 1; j < ny - 1; ++j) {
            const int k = layer * ny + j;
            op.A(k, k - 1) = a * idy2;
            op.A(k, k) = -2.0 * a * idy2;
            op.A(k, k + 1) = a * idy2;
            op.mask[k] = 1;
        }
    }
    const int km = ny - 1, kp = ny;
    const double b1 = p.rho1 * p.h1() * p.h1() / std::pow(H1, 3);
    const double b2 = p.rho2 * p.h2() * p.h2() / std::pow(H2, 3);
    // third-order one-sided w_p on each side of p = 0
    const double c[4] = {11.0 / (6.0 * dy), -18.0 / (6.0 * dy), 9.0 / (6.0 * dy), -2.0 / (6.0 * dy)};
    for (int m = 0; m < 4; ++m) {
        op.A(km, kp + m) += -b2 * c[m];
        op.A(km, km - m) += -b1 * c[m];
    }
    op.A(km, km) += -(p.rho2 - p.rho1) / p.F2();
    op.outward[km] = -1;
    op.A(kp, kp) = 1.0;
    op.A(kp, km) = -1.0;
    return op;
}

namespace {

void require_settled(const Field& u, int far, int near, double tol, Side side) {
    const Grid& g = u.grid;
    double worst = 0.0;
    for (int k = 0; k < g.column_size(); ++k) worst = std::max(worst, std::abs(u(near, k) - u(far, k)));
    if (!(worst <= tol)) {
        std::ostringstream os;
        os << "truncation too short: " << (side == Side::upstream ? "upstream" : "downstream")
           << " tail variation " << worst << " exceeds " << tol;
        throw EigenError(os.str());
    }
}

}  // namespace

Operator1D transversal_operator(const RobinState& s, const RobinNonlinearity& nl, Side side, double tail_tol) {
    const Grid& g = s.u.grid;
    const int far = side == Side::upstream ? 0 : g.nx - 1;
    const int near = side == Side::upstream ? 1 : g.nx - 2;
    require_settled(s.u, far, near, tail_tol, side);
    const double r = s.u(far, g.ny - 1);
    return robin_operator(g.ny, nl(r, s.lambda).g_z);
}

Operator1D transversal_operator(const BoreState& s, Side side, double tail_tol) {
    const Grid& g = s.u.grid;
    const int far = side == Side::upstream ? 0 : g.nx - 1;
    const int near = side == Side::upstream ? 1 : g.nx - 2;
    require_settled(s.u, far, near, tail_tol, side);
    const int ny = g.ny;
    const double lower = s.u(far, ny - 1) - s.u(far, 0);
    const double upper = s.u(far, 2 * ny - 1) - s.u(far, ny);
    return bore_operator(ny, s.params, lower, upper);
}

namespace {

struct Condensed {
    std::vector<int> free, cons;
    Eigen::MatrixXd M;     // reduced operator on free slots
    Eigen::MatrixXd lift;  // w_cons = lift * w_free
};

Condensed condense(const Operator1D& op) {
    Condensed c;
    for (int k = 0; k < op.size(); ++k) (op.mask[k] ? c.free : c.cons).push_back(k);
    const int m = static_cast<int>(c.free.size()), q = static_cast<int>(c.cons.size());
    if (m == 0) throw EigenError("principal_eigenvalue: operator has no interior rows");
    Eigen::MatrixXd Aff(m, m), Afc(m, q), Acf(q, m), Acc(q, q);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) Aff(a, b) = op.A(c.free[a], c.free[b]);
        for (int b = 0; b < q; ++b) Afc(a, b) = op.A(c.free[a], c.cons[b]);
    }
    for (int a = 0; a < q; ++a) {
        for (int b = 0; b < m; ++b) Acf(a, b) = op.A(c.cons[a], c.free[b]);
        for (int b = 0; b < q; ++b) Acc(a, b) = op.A(c.cons[a], c.cons[b]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Acc);
    if (lu.rank() < q) throw EigenError("principal_eigenvalue: constraint rows are singular");
    c.lift = -lu.solve(Acf);
    c.M = Aff + Afc * c.lift;
    return c;
}

struct Pair {
    double sigma = 0.0;
    Eigen::VectorXd v;
    int iters = 0;
};

double rayleigh(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) { return v.dot(M * v) / v.dot(v); }

Pair shift_invert(const Eigen::MatrixXd& M, double scale, const EigenOptions& opt) {
    const int m = static_cast<int>(M.rows());
    double gersh = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) gersh = std::max(gersh, M(r, r) + (M.row(r).cwiseAbs().sum() - std::abs(M(r, r))));
    const double s = gersh + 1.0;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M - s * I);
    Pair p;
    p.v = Eigen::VectorXd::Ones(m) / std::sqrt(double(m));
    // Phase 1: Gershgorin-shifted power iteration until the residual is small
    // enough that the nearest eigenvalue is unambiguous.
    const double loose = 1e-6 * scale;
    double res = std::numeric_limits<double>::infinity();
    while (p.iters < opt.max_iters) {
        Eigen::VectorXd y = lu.solve(p.v);
        p.v = y / y.norm();
        ++p.iters;
        if (p.iters % 16 == 0 || p.iters < 16) {
            p.sigma = rayleigh(M, p.v);
            res = (M * p.v - p.sigma * p.v).cwiseAbs().maxCoeff();
            if (res <= loose) break;
        }
    }
    if (!(res <= loose)) {
        std::ostringstream os;
        os << "principal_eigenvalue: no convergence after " << p.iters << " iterations (sigma ~ " << p.sigma
           << ", residual " << res << ")";
        throw EigenError(os.str());
    }
    // Phase 2: inverse iteration just above the estimate.
    const double s2 = p.sigma + std::max(1e-6 * scale, 100.0 * res);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu2(M - s2 * I);
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd y = lu2.solve(p.v);
        p.v = y / y.norm();
        ++p.iters;
        const double prev = p.sigma;
        p.sigma = rayleigh(M, p.v);
        res = (M * p.v - p.sigma * p.v).cwiseAbs().maxCoeff();
        if (res <= opt.refine_tol * scale && std::abs(p.sigma - prev) <= opt.refine_tol * scale) break;
    }
    return p;
}

}  // namespace

EigenReport principal_eigenvalue(const Operator1D& op, const EigenOptions& opt) {
    if (op.A.rows() != op.A.cols() || op.mask.size() != op.A.rows() || op.dirichlet.size() != op.A.rows() ||
        op.outward.size() != op.A.rows())
        throw ShapeError("principal_eigenvalue: malformed operator");
    const Condensed c = condense(op);
    const int m = static_cast<int>(c.free.size());
    const double scale = std::max(c.M.cwiseAbs().maxCoeff(), 1.0);
    Eigen::MatrixXd M = c.M;
    EigenReport rep;
    rep.scale = scale;
    for (int attempt = 0; attempt < m; ++attempt) {
        Pair p = shift_invert(M, scale, opt);
        rep.iterations += p.iters;
        // eigenvector of the original reduced operator for this eigenvalue
        Eigen::VectorXd wf = p.v;
        if (attempt > 0) {
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(c.M - (p.sigma + 1e-9 * scale) * Eigen::MatrixXd::Identity(m, m));
            for (int it = 0; it < 50; ++it) {
                wf = lu.solve(wf);
                wf /= wf.norm();
            }
            p.sigma = rayleigh(c.M, wf);
        }
        Eigen::VectorXd w(op.size());
        const Eigen::VectorXd wc = c.lift * wf;
        for (int a = 0; a < m; ++a) w[c.free[a]] = wf[a];
        for (size_t a = 0; a < c.cons.size(); ++a) w[c.cons[a]] = wc[static_cast<Eigen::Index>(a)];
        if (w.sum() < 0.0) w = -w;
        w /= w.cwiseAbs().maxCoeff();
        bool positive = true;
        for (int k = 0; k < op.size(); ++k) {
            if (!op.dirichlet[k] && !(w[k] > 0.0)) positive = false;
        }
        if (positive) {
            rep.sigma0 = p.sigma;
            rep.eigenfunction = w;
            rep.positivity_ok = true;
            Eigen::VectorXd masked = w;
            for (int k = 0; k < op.size(); ++k) masked[k] *= op.mask[k];
            rep.residual = (op.A * w - p.sigma * masked).cwiseAbs().maxCoeff();
            Eigen::EigenSolver<Eigen::MatrixXd> es(c.M, false);
            const double rightmost = es.eigenvalues().real().maxCoeff();
            rep.dominance_ok = rightmost <= p.sigma + 1e-8 * scale;
            return rep;
        }
        // Wielandt deflation of the sign-changing pair, then restart.
        Eigen::Index piv;
        p.v.cwiseAbs().maxCoeff(&piv);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
        x[piv] = 1.0 / p.v[piv];
        M -= p.sigma * p.v * x.transpose();
    }
    throw EigenError("principal_eigenvalue: no eigenvector with a positive sign found");
}

double robin_sigma_oracle(double g_z) {
    if (g_z == 0.0) return 0.0;
    auto bisect = [](auto f, double a, double b) {
        double fa = f(a);
        for (int it = 0; it < 200; ++it) {
            const double c = 0.5 * (a + b);
            const double fc = f(c);
            if (fc == 0.0) return c;
            if ((fc < 0.0) == (fa < 0.0)) {
                a = c;
                fa = fc;
            } else {
                b = c;
            }
        }
        return 0.5 * (a + b);
    };
    const double c = 1.0 - g_z;
    if (g_z < 0.0) {
        // w = sinh(xi y): xi cosh xi = c sinh xi, sigma = xi^2
        auto f = [c](double xi) { return xi - c * std::tanh(xi); };
        const double xi = bisect(f, 1e-12, c + 1.0);
        return xi * xi;
    }
    // w = sin(xi y): xi cos xi = c sin xi on (0, pi), sigma = -xi^2
    auto f = [c](double xi) { return xi * std::cos(xi) - c * std::sin(xi); };
    const double xi = bisect(f, 1e-9, std::numbers::pi);
    return -xi * xi;
}

bool is_strict_supersolution(const Operator1D& op, const Eigen::VectorXd& w, double tol) {
    if (w.size() != op.size()) throw ShapeError("is_strict_supersolution: size mismatch");
    const Eigen::VectorXd Aw = op.A * w;
    // tolerance relative to the size of the row entries
    tol *= std::max(1.0, op.A.cwiseAbs().maxCoeff() * w.cwiseAbs().maxCoeff());
    bool strict = false;
    for (int k = 0; k < op.size(); ++k) {
        if (op.mask[k]) {
            if (!(w[k] > 0.0) || Aw[k] > tol) return false;
            if (Aw[k] < -tol) strict = true;
        } else if (op.outward[k] != 0) {
            const double b = op.outward[k] * Aw[k];
            if (!(w[k] > 0.0) || b < -tol) return false;
            if (b > tol) strict = true;
        }
    }
    return strict;
}

SpectralMargin spectral_margin(const RobinState& s, const RobinNonlinearity& nl, double tail_tol) {
    const EigenReport lo = principal_eigenvalue(transversal_operator(s, nl, Side::upstream, tail_tol));
    const EigenReport hi = principal_eigenvalue(transversal_operator(s, nl, Side::downstream, tail_tol));
    return {lo.sigma0, hi.sigma0, lo.positivity_ok && hi.positivity_ok};
}

SpectralMargin spectral_margin(const BoreState& s, double tail_tol) {
    const EigenReport lo = principal_eigenvalue(transversal_operator(s, Side::upstream, tail_tol));
    const EigenReport hi = principal_eigenvalue(transversal_operator(s, Side::downstream, tail_tol));
    return {lo.sigma0, hi.sigma0, lo.positivity_ok && hi.positivity_ok};
}

}  // namespace frontcont
