#include "frontcont/bore.hpp"

#include "frontcont/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace frontcont {

double BoreParams::F2() const { return froude_squared(rho1, rho2); }

void validate(const BoreParams& p) {
    if (!(p.rho1 > 0.0)) throw ConfigError("bore.rho1", "density must be positive");
    if (!(p.rho2 > 0.0)) throw ConfigError("bore.rho2", "density must be positive");
    if (!(p.rho2 < p.rho1)) throw ConfigError("bore.rho2", "requires rho2 < rho1 (stable stratification)");
    if (!(p.lambda > 0.0 && p.lambda < 1.0)) throw ConfigError("bore.lambda", "lambda must lie in (0, 1)");
}

namespace {

void check_densities(double rho1, double rho2) {
    if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw ConfigError("bore.rho", "densities must be positive");
}

}  // namespace

double froude_squared(double rho1, double rho2) {
    check_densities(rho1, rho2);
    const double a = std::sqrt(rho1), b = std::sqrt(rho2);
    return (a - b) / (a + b);
}

double lambda_star(double rho1, double rho2) {
    check_densities(rho1, rho2);
    const double a = std::sqrt(rho1), b = std::sqrt(rho2);
    return a / (a + b);
}

double kappa1_bore(double rho1, double rho2) {
    check_densities(rho1, rho2);
    const double a = std::sqrt(rho1), b = std::sqrt(rho2);
    const double s = (a + b) * (a + b);
    return std::sqrt(3.0 * s * s / (4.0 * rho1 * (rho1 - a * b + rho2)));
}

std::vector<double> conjugate_state_bore(double lambda, const BoreParams& p, const Grid& g) {
    if (g.layout != Layout::two_layer) throw ShapeError("conjugate_state_bore: needs a two-layer grid");
    const double c = lambda_star(p.rho1, p.rho2) - lambda;
    std::vector<double> out(static_cast<size_t>(g.column_size()));
    for (int k = 0; k < g.column_size(); ++k) out[static_cast<size_t>(k)] = c * (1.0 - std::abs(g.y(k)));
    return out;
}

namespace {

void check_state(const BoreState& s) {
    if (s.u.grid.layout != Layout::two_layer) throw ShapeError("bore: state must live on a two-layer grid");
    if (s.u.values.size() != s.u.grid.size()) throw ShapeError("bore: field does not match its grid");
    validate(s.params);
    require_finite(s.u, "bore state");
}

// A linearized scalar: value, d/dh of the layer thickness, and up to six node derivatives.
struct Lin {
    double v = 0.0;
    double dh = 0.0;
    std::array<std::pair<int, double>, 6> d{};
    int n = 0;
    void add(int col, double c) { d[static_cast<size_t>(n++)] = {col, c}; }
};

class Assembler {
public:
    Assembler(const BoreState& s, bool jac) : s_(s), g_(s.u.grid), u_(s.u), jac_(jac), R_(s.u.grid) {
        if (jac_) {
            t_.reserve(static_cast<size_t>(g_.size()) * 25);
            dl_ = Eigen::VectorXd::Zero(g_.size());
        }
    }

    void run() {
        const int ny = g_.ny, cs = g_.column_size();
        const BoreParams& p = s_.params;
        const std::vector<double> Up = conjugate_state_bore(p.lambda, p, g_);
        for (int k = 0; k < cs; ++k) {
            set_identity(0, k, 0.0, 0.0);
            const double w = 1.0 - std::abs(g_.y(k));
            set_identity(g_.nx - 1, k, Up[static_cast<size_t>(k)], w);
        }
        for (int i = 1; i < g_.nx - 1; ++i) {
            set_identity(i, 0, 0.0, 0.0);
            set_identity(i, cs - 1, 0.0, 0.0);
            for (int layer = 0; layer < 2; ++layer) {
                const double h = layer == 0 ? p.h1() : p.h2();
                const double rho = layer == 0 ? p.rho1 : p.rho2;
                const double sgn = layer == 0 ? 1.0 : -1.0;
                for (int j = 1; j < ny - 1; ++j) interior_row(i, layer * ny + j, h, rho, sgn);
            }
            interface_row(i);
            continuity_row(i);
        }
    }

    Field R() && { return std::move(R_); }
    Linearization lin() && {
        Linearization out;
        out.J.resize(g_.size(), g_.size());
        out.J.setFromTriplets(t_.begin(), t_.end());
        out.d_lambda = std::move(dl_);
        return out;
    }

private:
    int at(int i, int k) const { return g_.index(i, k); }

    void guard(double H, int i, int k, const char* where) const {
        if (!(H > 0.0)) {
            std::ostringstream os;
            os << "bore: ellipticity violated, h + u_p = " << H << " at " << where << " (i=" << i << ", k=" << k
               << ", q=" << g_.x(i) << ", p=" << g_.y(k) << ")";
            throw DomainError(os.str());
        }
    }

    void set_identity(int i, int k, double target, double dlam) {
        R_(i, k) = u_(i, k) - target;
        if (jac_) {
            t_.emplace_back(at(i, k), at(i, k), 1.0);
            dl_[at(i, k)] = dlam;
        }
    }

    // Flux u_q/H on the face between columns i and i+1, row k.
    Lin flux_a(int i, int k, double h) const {
        const double dx = g_.dx, dy = g_.dy;
        const double Uq = (u_(i + 1, k) - u_(i, k)) / dx;
        const double Up = (u_(i, k + 1) - u_(i, k - 1) + u_(i + 1, k + 1) - u_(i + 1, k - 1)) / (4.0 * dy);
        const double H = h + Up;
        guard(H, i, k, "q-face");
        Lin a;
        a.v = Uq / H;
        const double aq = 1.0 / H, ap = -Uq / (H * H);
        a.dh = ap;
        a.add(at(i + 1, k), aq / dx);
        a.add(at(i, k), -aq / dx);
        a.add(at(i, k + 1), ap / (4.0 * dy));
        a.add(at(i, k - 1), -ap / (4.0 * dy));
        a.add(at(i + 1, k + 1), ap / (4.0 * dy));
        a.add(at(i + 1, k - 1), -ap / (4.0 * dy));
        return a;
    }

    // Flux -(1+u_q^2)/(2H^2) on the face between rows k and k+1, column i.
    Lin flux_b(int i, int k, double h) const {
        const double dx = g_.dx, dy = g_.dy;
        const double Up = (u_(i, k + 1) - u_(i, k)) / dy;
        const double Uq = (u_(i + 1, k) - u_(i - 1, k) + u_(i + 1, k + 1) - u_(i - 1, k + 1)) / (4.0 * dx);
        const double H = h + Up;
        guard(H, i, k, "p-face");
        Lin b;
        b.v = -(1.0 + Uq * Uq) / (2.0 * H * H);
        const double bq = -Uq / (H * H), bp = (1.0 + Uq * Uq) / (H * H * H);
        b.dh = bp;
        b.add(at(i, k + 1), bp / dy);
        b.add(at(i, k), -bp / dy);
        b.add(at(i + 1, k), bq / (4.0 * dx));
        b.add(at(i - 1, k), -bq / (4.0 * dx));
        b.add(at(i + 1, k + 1), bq / (4.0 * dx));
        b.add(at(i - 1, k + 1), -bq / (4.0 * dx));
        return b;
    }

    void accumulate(int row, const Lin& f, double c, double dh_sign) {
        for (int m = 0; m < f.n; ++m) t_.emplace_back(row, f.d[static_cast<size_t>(m)].first, c * f.d[static_cast<size_t>(m)].second);
        dl_[row] += c * f.dh * dh_sign;
    }

    void interior_row(int i, int k, double h, double rho, double sgn) {
        const Lin ap = flux_a(i, k, h), am = flux_a(i - 1, k, h);
        const Lin bp = flux_b(i, k, h), bm = flux_b(i, k - 1, h);
        R_(i, k) = rho * ((ap.v - am.v) / g_.dx + (bp.v - bm.v) / g_.dy);
        if (jac_) {
            const int r = at(i, k);
            accumulate(r, ap, rho / g_.dx, sgn);
            accumulate(r, am, -rho / g_.dx, sgn);
            accumulate(r, bp, rho / g_.dy, sgn);
            accumulate(r, bm, -rho / g_.dy, sgn);
        }
    }

    void interface_row(int i) {
        const BoreParams& p = s_.params;
        const int ny = g_.ny;
        const int km = ny - 1, kp = ny;
        const double dx = g_.dx, dy = g_.dy;
        const double upm = (3.0 * u_(i, km) - 4.0 * u_(i, km - 1) + u_(i, km - 2)) / (2.0 * dy);
        const double upp = (-3.0 * u_(i, kp) + 4.0 * u_(i, kp + 1) - u_(i, kp + 2)) / (2.0 * dy);
        const double uqm = (u_(i + 1, km) - u_(i - 1, km)) / (2.0 * dx);
        const double uqp = (u_(i + 1, kp) - u_(i - 1, kp)) / (2.0 * dx);
        const double h1 = p.h1(), h2 = p.h2();
        const double Hm = h1 + upm, Hp = h2 + upp;
        guard(Hm, i, km, "interface (lower trace)");
        guard(Hp, i, kp, "interface (upper trace)");
        const double jr = p.rho2 - p.rho1;
        const double F2 = p.F2();
        const double Tm = p.rho1 * h1 * h1 * (1.0 + uqm * uqm) / (Hm * Hm);
        const double Tp = p.rho2 * h2 * h2 * (1.0 + uqp * uqp) / (Hp * Hp);
        R_(i, km) = -0.5 * (Tp - Tm) - jr / F2 * u_(i, km) + 0.5 * jr;
        if (!jac_) return;
        const int r = at(i, km);
        // d/d(u_q), d/d(u_p), d/dh of T for each side
        const double Tm_q = p.rho1 * h1 * h1 * 2.0 * uqm / (Hm * Hm);
        const double Tm_p = -2.0 * p.rho1 * h1 * h1 * (1.0 + uqm * uqm) / (Hm * Hm * Hm);
        const double Tm_h = p.rho1 * (1.0 + uqm * uqm) * 2.0 * h1 * upm / (Hm * Hm * Hm);
        const double Tp_q = p.rho2 * h2 * h2 * 2.0 * uqp / (Hp * Hp);
        const double Tp_p = -2.0 * p.rho2 * h2 * h2 * (1.0 + uqp * uqp) / (Hp * Hp * Hp);
        const double Tp_h = p.rho2 * (1.0 + uqp * uqp) * 2.0 * h2 * upp / (Hp * Hp * Hp);
        // lower side enters with +1/2, upper side with -1/2
        t_.emplace_back(r, at(i, km), 0.5 * Tm_p * 3.0 / (2.0 * dy) - jr / F2);
        t_.emplace_back(r, at(i, km - 1), 0.5 * Tm_p * -4.0 / (2.0 * dy));
        t_.emplace_back(r, at(i, km - 2), 0.5 * Tm_p * 1.0 / (2.0 * dy));
        t_.emplace_back(r, at(i + 1, km), 0.5 * Tm_q / (2.0 * dx));
        t_.emplace_back(r, at(i - 1, km), -0.5 * Tm_q / (2.0 * dx));
        t_.emplace_back(r, at(i, kp), -0.5 * Tp_p * -3.0 / (2.0 * dy));
        t_.emplace_back(r, at(i, kp + 1), -0.5 * Tp_p * 4.0 / (2.0 * dy));
        t_.emplace_back(r, at(i, kp + 2), -0.5 * Tp_p * -1.0 / (2.0 * dy));
        t_.emplace_back(r, at(i + 1, kp), -0.5 * Tp_q / (2.0 * dx));
        t_.emplace_back(r, at(i - 1, kp), 0.5 * Tp_q / (2.0 * dx));
        // h1 = lambda, h2 = 1 - lambda
        dl_[r] = 0.5 * Tm_h + 0.5 * Tp_h;
    }

    void continuity_row(int i) {
        const int km = g_.ny - 1, kp = g_.ny;
        R_(i, kp) = u_(i, kp) - u_(i, km);
        if (jac_) {
            t_.emplace_back(at(i, kp), at(i, kp), 1.0);
            t_.emplace_back(at(i, kp), at(i, km), -1.0);
        }
    }

    const BoreState& s_;
    const Grid& g_;
    const Field& u_;
    bool jac_;
    Field R_;
    std::vector<Eigen::Triplet<double>> t_;
    Eigen::VectorXd dl_;
};

void require_admissible(const BoreState& s) {
    const EllipticityReport e = bore_ellipticity(s);
    if (!(e.min > 0.0)) {
        std::ostringstream os;
        os << "bore: ellipticity violated, min(h + u_p) = " << e.min << " at (i=" << e.i << ", k=" << e.k
           << ", q=" << s.u.grid.x(e.i) << ", p=" << s.u.grid.y(e.k) << ")";
        throw DomainError(os.str());
    }
}

}  // namespace

Field bore_residual(const BoreState& s) {
    check_state(s);
    require_admissible(s);
    Assembler a(s, false);
    a.run();
    Field R = std::move(a).R();
    require_finite(R, "bore residual");
    return R;
}

Linearization bore_jacobian(const BoreState& s) {
    check_state(s);
    require_admissible(s);
    Assembler a(s, true);
    a.run();
    return std::move(a).lin();
}

EllipticityReport bore_ellipticity(const BoreState& s) {
    const Grid& g = s.u.grid;
    const Field up = differentiate(s.u, Axis::y, 1);
    EllipticityReport e;
    e.min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.nx; ++i)
        for (int k = 0; k < g.column_size(); ++k) {
            const double h = k < g.ny ? s.params.h1() : s.params.h2();
            const double H = h + up(i, k);
            if (H < e.min || std::isnan(H)) {
                e.min = H;
                e.i = i;
                e.k = k;
            }
        }
    return e;
}

namespace {

std::vector<double> flow_force_columns(const BoreState& s, int only) {
    check_state(s);
    require_admissible(s);
    const Grid& g = s.u.grid;
    const BoreParams& p = s.params;
    const double F2 = p.F2();
    const Field up = differentiate(s.u, Axis::y, 1);
    const Field uq = differentiate(s.u, Axis::x, 1);
    std::vector<double> out;
    const int i0 = only >= 0 ? only : 0, i1 = only >= 0 ? only + 1 : g.nx;
    Field integrand(g);
    for (int i = i0; i < i1; ++i) {
        for (int k = 0; k < g.column_size(); ++k) {
            const bool lower = k < g.ny;
            const double h = lower ? p.h1() : p.h2();
            const double rho = lower ? p.rho1 : p.rho2;
            const double H = h + up(i, k);
            const double q = uq(i, k);
            integrand(i, k) =
                rho * (h * h * (1.0 - q * q) / (2.0 * H * H) + 0.5 - (h * g.y(k) + s.u(i, k)) / F2) * H;
        }
        out.push_back(slice_integral(integrand, i));
    }
    return out;
}

}  // namespace

double flow_force_bore(const BoreState& s, int x_index) {
    if (x_index < 0 || x_index >= s.u.grid.nx) throw ShapeError("flow_force_bore: x index out of range");
    return flow_force_columns(s, x_index).front();
}

std::vector<double> flow_force_bore_profile(const BoreState& s) { return flow_force_columns(s, -1); }

BoreDiagnostics bore_diagnostics(const BoreState& s) {
    check_state(s);
    const Grid& g = s.u.grid;
    const BoreParams& p = s.params;
    const Field up = differentiate(s.u, Axis::y, 1);
    const Field uq = differentiate(s.u, Axis::x, 1);
    BoreDiagnostics d;
    d.ellipticity_margin = std::numeric_limits<double>::infinity();
    d.stagnation_indicator = std::numeric_limits<double>::infinity();
    d.wall_gap = std::numeric_limits<double>::infinity();
    const int km = g.ny - 1, kp = g.ny;
    for (int i = 0; i < g.nx; ++i) {
        for (int k = 0; k < g.column_size(); ++k) {
            const double h = k < g.ny ? p.h1() : p.h2();
            const double H = h + up(i, k);
            d.ellipticity_margin = std::min(d.ellipticity_margin, H);
            d.velocity_bound = std::max({d.velocity_bound, std::abs(uq(i, k) / H), 1.0 / H});
        }
        d.stagnation_indicator = std::min({d.stagnation_indicator, p.h1() / (p.h1() + up(i, km)),
                                           p.h2() / (p.h2() + up(i, kp))});
        d.interface_max_slope = std::max({d.interface_max_slope, std::abs(uq(i, km)), std::abs(uq(i, kp))});
        const double eta = s.u(i, km);
        d.wall_gap = std::min({d.wall_gap, p.h1() + eta, p.h2() - eta});
    }
    return d;
}

BoreState seed_bore(double eps, const Grid& g, double rho1, double rho2, double shift, double eps_seed_max) {
    if (g.layout != Layout::two_layer) throw ShapeError("seed_bore: needs a two-layer grid");
    if (eps == 0.0) throw SeedRangeError("seed_bore: eps = 0 gives the trivial state");
    if (std::abs(eps) > eps_seed_max) {
        std::ostringstream os;
        os << "seed_bore: |eps| = " << std::abs(eps) << " exceeds eps_seed_max = " << eps_seed_max;
        throw SeedRangeError(os.str());
    }
    BoreState s;
    s.params.rho1 = rho1;
    s.params.rho2 = rho2;
    s.params.lambda = lambda_star(rho1, rho2) + eps;
    if (!(s.params.lambda > 0.0 && s.params.lambda < 1.0))
        throw SeedRangeError("seed_bore: lambda* + eps leaves (0, 1)");
    validate(s.params);
    const double k = kappa1_bore(rho1, rho2) * std::abs(eps);
    s.u = sample(g, [&](double q, double pp) {
        return -0.5 * eps * (1.0 + std::tanh(k * (q + shift))) * (1.0 - std::abs(pp));
    });
    return s;
}

}  // namespace frontcont
