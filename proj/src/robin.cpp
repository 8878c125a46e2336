#include "frontcont/robin.hpp"

#include "frontcont/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace frontcont {

RobinNonlinearity::RobinNonlinearity(std::string family, Evaluator eval, std::optional<ReducedCoefficients> exact)
    : family_(std::move(family)), eval_(std::move(eval)), exact_(exact) {}

ReducedCoefficients RobinNonlinearity::reduced() const {
    return exact_ ? *exact_ : reduced_numeric();
}

ReducedCoefficients RobinNonlinearity::reduced_numeric() const {
    const double h = 1e-3;
    auto gz = [&](double z, double l) { return eval_(z, l).g_z; };
    ReducedCoefficients c;
    c.g12 = (gz(0, h) - 2.0 * gz(0, 0) + gz(0, -h)) / (2.0 * h * h);
    c.g21 = (gz(h, h) - gz(h, -h) - gz(-h, h) + gz(-h, -h)) / (8.0 * h * h);
    c.g30 = (gz(h, 0) - 2.0 * gz(0, 0) + gz(-h, 0)) / (6.0 * h * h);
    return c;
}

NonlinearityValues quartic_g(double z, double lambda, double a) {
    const double zl = z - lambda;
    NonlinearityValues v;
    v.G = a * z * z * zl * zl;
    v.g = 2.0 * a * z * zl * (2.0 * z - lambda);
    v.g_z = 2.0 * a * (6.0 * z * z - 6.0 * z * lambda + lambda * lambda);
    v.g_lambda = 2.0 * a * z * (2.0 * lambda - 3.0 * z);
    return v;
}

RobinNonlinearity quartic_nonlinearity(double a) {
    if (!(a > 0.0)) throw ConfigError("robin.a", "quartic coefficient a must be positive");
    ReducedCoefficients c{2.0 * a, -6.0 * a, 4.0 * a};
    return RobinNonlinearity(
        "quartic", [a](double z, double l) { return quartic_g(z, l, a); }, c);
}

namespace {

constexpr double kGaussT[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

void check_state(const RobinState& s) {
    if (s.u.grid.layout != Layout::single) throw ShapeError("robin: state must live on a single-layer grid");
    if (s.u.values.size() != s.u.grid.size()) throw ShapeError("robin: field does not match its grid");
    if (!std::isfinite(s.lambda)) throw NumericError("robin: lambda is not finite");
    require_finite(s.u, "robin state");
}

}  // namespace

DiscreteGradient discrete_gradient(const RobinNonlinearity& nl, double a, double b, double lambda) {
    DiscreteGradient d;
    for (int q = 0; q < 3; ++q) {
        const double t = kGaussT[q];
        const NonlinearityValues v = nl(a + t * (b - a), lambda);
        d.value += kGaussW[q] * v.g;
        d.d_a += kGaussW[q] * (1.0 - t) * v.g_z;
        d.d_b += kGaussW[q] * t * v.g_z;
        d.d_lambda += kGaussW[q] * v.g_lambda;
    }
    return d;
}

Field robin_residual(const RobinState& s, const RobinNonlinearity& nl) {
    check_state(s);
    const Grid& g = s.u.grid;
    const Field& u = s.u;
    const int N = g.ny - 1;
    const double idx2 = 1.0 / (g.dx * g.dx), idy2 = 1.0 / (g.dy * g.dy);
    Field R(g);
    for (int k = 0; k < g.ny; ++k) {
        R(0, k) = u(0, k);
        R(g.nx - 1, k) = u(g.nx - 1, k) - s.lambda * g.y(k);
    }
    for (int i = 1; i < g.nx - 1; ++i) {
        R(i, 0) = u(i, 0);
        for (int k = 1; k < N; ++k)
            R(i, k) = (u(i + 1, k) - 2.0 * u(i, k) + u(i - 1, k)) * idx2 +
                      (u(i, k + 1) - 2.0 * u(i, k) + u(i, k - 1)) * idy2;
        const double top = u(i, N);
        const double uxx = (u(i + 1, N) - 2.0 * top + u(i - 1, N)) * idx2;
        const double gbar = discrete_gradient(nl, u(i - 1, N), u(i + 1, N), s.lambda).value;
        R(i, N) = (top - u(i, N - 1)) / g.dy - 0.5 * g.dy * uxx - top + gbar;
    }
    require_finite(R, "robin residual");
    return R;
}

Linearization robin_jacobian(const RobinState& s, const RobinNonlinearity& nl) {
    check_state(s);
    const Grid& g = s.u.grid;
    const Field& u = s.u;
    const int N = g.ny - 1;
    const double idx2 = 1.0 / (g.dx * g.dx), idy2 = 1.0 / (g.dy * g.dy);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<size_t>(g.size()) * 5);
    Eigen::VectorXd dl = Eigen::VectorXd::Zero(g.size());
    auto at = [&](int i, int k) { return g.index(i, k); };
    for (int k = 0; k < g.ny; ++k) {
        t.emplace_back(at(0, k), at(0, k), 1.0);
        t.emplace_back(at(g.nx - 1, k), at(g.nx - 1, k), 1.0);
        dl[at(g.nx - 1, k)] = -g.y(k);
    }
    for (int i = 1; i < g.nx - 1; ++i) {
        t.emplace_back(at(i, 0), at(i, 0), 1.0);
        for (int k = 1; k < N; ++k) {
            const int r = at(i, k);
            t.emplace_back(r, r, -2.0 * idx2 - 2.0 * idy2);
            t.emplace_back(r, at(i + 1, k), idx2);
            t.emplace_back(r, at(i - 1, k), idx2);
            t.emplace_back(r, at(i, k + 1), idy2);
            t.emplace_back(r, at(i, k - 1), idy2);
        }
        const int r = at(i, N);
        const DiscreteGradient d = discrete_gradient(nl, u(i - 1, N), u(i + 1, N), s.lambda);
        t.emplace_back(r, r, 1.0 / g.dy + g.dy * idx2 - 1.0);
        t.emplace_back(r, at(i, N - 1), -1.0 / g.dy);
        t.emplace_back(r, at(i + 1, N), -0.5 * g.dy * idx2 + d.d_b);
        t.emplace_back(r, at(i - 1, N), -0.5 * g.dy * idx2 + d.d_a);
        dl[r] = d.d_lambda;
    }
    Linearization out;
    out.J.resize(g.size(), g.size());
    out.J.setFromTriplets(t.begin(), t.end());
    out.d_lambda = std::move(dl);
    return out;
}

double robin_half_slice_flow_force(const RobinState& s, const RobinNonlinearity& nl, int i,
                                   double gradient_factor) {
    const Grid& g = s.u.grid;
    if (i < 0 || i + 1 >= g.nx) throw ShapeError("flow force: half slice index out of range");
    const Field& u = s.u;
    const int N = g.ny - 1;
    double grad = 0.0;
    for (int k = 0; k < N; ++k)
        grad += (u(i, k + 1) - u(i, k)) * (u(i + 1, k + 1) - u(i + 1, k)) / g.dy;
    double ux2 = 0.0;
    for (int k = 0; k <= N; ++k) {
        const double w = (k == 0 || k == N) ? 0.5 * g.dy : g.dy;
        const double d = (u(i + 1, k) - u(i, k)) / g.dx;
        ux2 += w * d * d;
    }
    const double a = u(i, N), b = u(i + 1, N);
    const double G = 0.5 * (nl(a, s.lambda).G + nl(b, s.lambda).G);
    return gradient_factor * 0.5 * (grad - ux2) - 0.5 * a * b + G;
}

namespace {

double node_flow_force(const RobinState& s, const RobinNonlinearity& nl, int x_index, double factor) {
    const Grid& g = s.u.grid;
    if (x_index < 0 || x_index >= g.nx) throw ShapeError("flow force: x index out of range");
    if (x_index == 0) return robin_half_slice_flow_force(s, nl, 0, factor);
    if (x_index == g.nx - 1) return robin_half_slice_flow_force(s, nl, g.nx - 2, factor);
    return 0.5 * (robin_half_slice_flow_force(s, nl, x_index - 1, factor) +
                  robin_half_slice_flow_force(s, nl, x_index, factor));
}

}  // namespace

double flow_force_robin(const RobinState& s, const RobinNonlinearity& nl, int x_index) {
    return node_flow_force(s, nl, x_index, 1.0);
}

double flow_force_robin_printed(const RobinState& s, const RobinNonlinearity& nl, int x_index) {
    return node_flow_force(s, nl, x_index, 0.5);
}

std::vector<double> flow_force_robin_profile(const RobinState& s, const RobinNonlinearity& nl) {
    std::vector<double> out(static_cast<size_t>(s.u.grid.nx));
    for (int i = 0; i < s.u.grid.nx; ++i) out[static_cast<size_t>(i)] = flow_force_robin(s, nl, i);
    return out;
}

std::vector<ConjugateRoot> robin_roots(double lambda, const RobinNonlinearity& nl, const ConjugateOptions& opt) {
    const double lo = std::min(0.0, lambda) - opt.bracket_margin;
    const double hi = std::max(0.0, lambda) + opt.bracket_margin;
    auto g = [&](double z) { return nl(z, lambda).g; };
    std::vector<double> roots;
    auto add = [&](double r) {
        for (double q : roots)
            if (std::abs(q - r) <= 1e-12 * (1.0 + std::abs(r))) return;
        roots.push_back(r);
    };
    std::vector<std::pair<double, double>> failed;
    const int n = std::max(opt.samples, 10);
    double za = lo, ga = g(lo);
    if (ga == 0.0) add(lo);
    for (int m = 1; m <= n; ++m) {
        const double zb = lo + (hi - lo) * m / n;
        const double gb = g(zb);
        if (gb == 0.0) {
            add(zb);
        } else if (ga != 0.0 && (ga < 0.0) != (gb < 0.0)) {
            double a = za, b = zb, fa = ga;
            for (int it = 0; it < 200 && b - a > 4e-16 * (1.0 + std::abs(a)); ++it) {
                const double c = 0.5 * (a + b);
                const double fc = g(c);
                if (fc == 0.0) {
                    a = b = c;
                    break;
                }
                if ((fc < 0.0) == (fa < 0.0)) {
                    a = c;
                    fa = fc;
                } else {
                    b = c;
                }
            }
            const double r = 0.5 * (a + b);
            if (!std::isfinite(r)) failed.emplace_back(za, zb);
            else add(r);
        }
        za = zb;
        ga = gb;
    }
    if (!failed.empty()) {
        std::ostringstream os;
        os << "conjugate set: root bracketing failed on";
        for (auto [a, b] : failed) os << " [" << a << ", " << b << "]";
        throw Error(os.str());
    }
    std::sort(roots.begin(), roots.end());
    double scale = 0.0;
    std::vector<ConjugateRoot> out;
    for (double r : roots) {
        ConjugateRoot c;
        c.r = r;
        c.G = nl(r, lambda).G;
        scale = std::max(scale, std::abs(c.G));
        out.push_back(c);
    }
    const double G0 = nl(0.0, lambda).G;
    const double tol = 1e-10 * (1.0 + scale);
    for (auto& c : out) c.conjugate = std::abs(c.G - G0) <= tol;
    return out;
}

std::vector<double> conjugate_set_robin(double lambda, const RobinNonlinearity& nl, const ConjugateOptions& opt) {
    std::vector<double> out;
    for (const auto& c : robin_roots(lambda, nl, opt))
        if (c.conjugate) out.push_back(c.r);
    return out;
}

double kappa1_robin(const RobinNonlinearity& nl) {
    const double g21 = nl.reduced().g21;
    if (!(g21 < 0.0))
        throw HypothesisError("kappa1_robin: requires g21 < 0 (g_zz_lambda(0,0) < 0), got g21 = " +
                              std::to_string(g21));
    return 0.5 * std::sqrt(-g21);
}

RobinState seed_robin(double lambda, const Grid& g, const RobinNonlinearity& nl, double shift,
                      double lambda_seed_max) {
    if (g.layout != Layout::single) throw ShapeError("seed_robin: needs a single-layer grid");
    if (lambda == 0.0) throw SeedRangeError("seed_robin: lambda = 0 gives the trivial state");
    if (std::abs(lambda) > lambda_seed_max) {
        std::ostringstream os;
        os << "seed_robin: |lambda| = " << std::abs(lambda) << " exceeds lambda_seed_max = " << lambda_seed_max
           << " (outside the small-amplitude regime)";
        throw SeedRangeError(os.str());
    }
    const double k = kappa1_robin(nl) * std::abs(lambda);
    RobinState s;
    s.lambda = lambda;
    s.u = sample(g, [&](double x, double y) { return 0.5 * lambda * (1.0 + std::tanh(k * (x + shift))) * y; });
    return s;
}

double verify_truncated_heteroclinic(double lambda, const RobinNonlinearity& nl, int samples, double half_width) {
    const double g21 = nl.reduced().g21;
    const double k = kappa1_robin(nl) * std::abs(lambda);
    double worst = 0.0;
    for (int m = 0; m < samples; ++m) {
        const double x = samples > 1 ? -half_width + 2.0 * half_width * m / (samples - 1) : 0.0;
        const double th = std::tanh(k * x);
        const double ch = std::cosh(k * x);
        const double sech2 = 1.0 / (ch * ch);
        const double v = 0.5 * lambda * (1.0 + th);
        const double vxx = -lambda * k * k * sech2 * th;
        const double rhs = g21 * (-lambda * lambda * v + 3.0 * lambda * v * v - 2.0 * v * v * v);
        worst = std::max(worst, std::abs(vxx - rhs));
    }
    return worst;
}

}  // namespace frontcont
