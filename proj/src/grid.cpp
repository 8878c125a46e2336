#include "frontcont/grid.hpp"

#include "frontcont/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace frontcont {

std::string to_string(Layout layout) {
    return layout == Layout::two_layer ? "two-layer" : "single";
}

Layout parse_layout(const std::string& token) {
    if (token == "single") return Layout::single;
    if (token == "two-layer") return Layout::two_layer;
    throw ConfigError("layout", "unknown layout '" + token + "'");
}

double Grid::y(int k) const {
    if (layout == Layout::single) return k * dy;
    if (k < ny) return -1.0 + k * dy;
    return (k - ny) * dy;
}

Grid build_grid(double L, int nx, int ny, Layout layout) {
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("L", "L must be positive");
    if (nx < 5) throw ConfigError("nx", "nx must be at least 5");
    if (nx % 2 == 0) throw ConfigError("nx", "nx must be odd");
    if (ny < 5) throw ConfigError("ny", "ny must be at least 5");
    Grid g;
    g.L = L;
    g.nx = nx;
    g.ny = ny;
    g.layout = layout;
    g.dx = 2.0 * L / (nx - 1);
    g.dy = 1.0 / (ny - 1);
    return g;
}

Field::Field(const Grid& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
    if (values.size() != g.size())
        throw ShapeError("field length " + std::to_string(values.size()) + " does not match grid size " +
                         std::to_string(g.size()));
}

Field sample(const Grid& g, const std::function<double(double, double)>& f) {
    Field out(g);
    for (int i = 0; i < g.nx; ++i)
        for (int k = 0; k < g.column_size(); ++k) out(i, k) = f(g.x(i), g.y(k));
    return out;
}

namespace {

// Derivative along a strided line of n values starting at base.
void diff_line(const double* in, double* out, int n, std::ptrdiff_t stride, double h, int order) {
    auto v = [&](int m) { return in[m * stride]; };
    if (order == 1) {
        out[0] = (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
        for (int m = 1; m < n - 1; ++m) out[m * stride] = (v(m + 1) - v(m - 1)) / (2.0 * h);
        out[(n - 1) * stride] = (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) / (2.0 * h);
    } else {
        const double h2 = h * h;
        out[0] = (2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3)) / h2;
        for (int m = 1; m < n - 1; ++m) out[m * stride] = (v(m + 1) - 2.0 * v(m) + v(m - 1)) / h2;
        out[(n - 1) * stride] = (2.0 * v(n - 1) - 5.0 * v(n - 2) + 4.0 * v(n - 3) - v(n - 4)) / h2;
    }
}

}  // namespace

Field differentiate(const Field& f, Axis axis, int order) {
    const Grid& g = f.grid;
    if (f.values.size() != g.size()) throw ShapeError("differentiate: field does not match its grid");
    if (order != 1 && order != 2) throw ShapeError("differentiate: order must be 1 or 2");
    Field out(g);
    const int cs = g.column_size();
    if (axis == Axis::x) {
        for (int k = 0; k < cs; ++k)
            diff_line(f.values.data() + k, out.values.data() + k, g.nx, cs, g.dx, order);
    } else {
        for (int i = 0; i < g.nx; ++i)
            for (int layer = 0; layer < g.layers(); ++layer) {
                const int base = g.index(i, layer * g.ny);
                diff_line(f.values.data() + base, out.values.data() + base, g.ny, 1, g.dy, order);
            }
    }
    return out;
}

double slice_integral(const Field& f, int x_index) {
    const Grid& g = f.grid;
    if (x_index < 0 || x_index >= g.nx)
        throw ShapeError("slice_integral: x index " + std::to_string(x_index) + " out of range");
    double total = 0.0;
    for (int layer = 0; layer < g.layers(); ++layer) {
        const int base = layer * g.ny;
        double s = 0.5 * (f(x_index, base) + f(x_index, base + g.ny - 1));
        for (int j = 1; j < g.ny - 1; ++j) s += f(x_index, base + j);
        total += s * g.dy;
    }
    return total;
}

void require_finite(const Field& f, const std::string& what) {
    const Grid& g = f.grid;
    for (int i = 0; i < g.nx; ++i)
        for (int k = 0; k < g.column_size(); ++k)
            if (!std::isfinite(f(i, k))) {
                std::ostringstream os;
                os << what << ": non-finite value at node (i=" << i << ", k=" << k << ", x=" << g.x(i)
                   << ", y=" << g.y(k) << ")";
                throw NumericError(os.str());
            }
}

void write_snapshot(std::ostream& os, const Field& f) {
    const Grid& g = f.grid;
    os << std::setprecision(17);
    os << g.nx << ' ' << g.ny << ' ' << to_string(g.layout) << ' ' << g.L << '\n';
    for (int i = 0; i < g.nx; ++i) {
        for (int k = 0; k < g.column_size(); ++k) {
            if (k) os << ' ';
            os << f(i, k);
        }
        os << '\n';
    }
}

Field read_snapshot(std::istream& is) {
    int nx = 0, ny = 0;
    std::string layout;
    std::string Ltok;
    if (!(is >> nx >> ny >> layout >> Ltok)) throw ShapeError("snapshot: malformed header");
    const Grid g = build_grid(std::stod(Ltok), nx, ny, parse_layout(layout));
    Field f(g);
    std::string tok;
    for (Eigen::Index n = 0; n < f.values.size(); ++n) {
        if (!(is >> tok)) throw ShapeError("snapshot: expected " + std::to_string(g.size()) + " values");
        f.values[n] = std::strtod(tok.c_str(), nullptr);
    }
    return f;
}

void write_snapshot(const std::string& path, const Field& f) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_snapshot(os, f);
    if (!os) throw Error("write to '" + path + "' failed");
}

Field read_snapshot(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    return read_snapshot(is);
}

}  // namespace frontcont
