#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>

namespace frontcont {

enum class Layout { single, two_layer };

std::string to_string(Layout layout);
Layout parse_layout(const std::string& token);

/// Tensor-product mesh on [-L, L] times the cross-section.
///
/// Single layer: y in [0, 1] with ny nodes.
/// Two layers: p in [-1, 0] and [0, 1], ny nodes each; the interface p = 0
/// appears twice per column (lower trace at k = ny-1, upper trace at k = ny).
struct Grid {
    double L = 1.0;
    int nx = 5;
    int ny = 5;
    Layout layout = Layout::single;
    double dx = 0.0;
    double dy = 0.0;

    int layers() const { return layout == Layout::two_layer ? 2 : 1; }
    int column_size() const { return layers() * ny; }
    int size() const { return nx * column_size(); }
    int index(int i, int k) const { return i * column_size() + k; }
    int center() const { return (nx - 1) / 2; }

    double x(int i) const { return -L + i * dx; }
    /// Transverse coordinate of column-local slot k.
    double y(int k) const;
    /// Column-local slot of the Gamma_1 anchor: y = 1 (single) or the lower trace at p = 0.
    int anchor_slot() const { return ny - 1; }

    bool operator==(const Grid& o) const {
        return L == o.L && nx == o.nx && ny == o.ny && layout == o.layout;
    }
};

/// Validates counts and builds the grid. Throws ConfigError naming the field.
Grid build_grid(double L, int nx, int ny, Layout layout);

/// Node-wise values on a grid, column-major in x (one column per x node).
struct Field {
    Grid grid;
    Eigen::VectorXd values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(Eigen::VectorXd::Zero(g.size())) {}
    Field(const Grid& g, Eigen::VectorXd v);

    double& operator()(int i, int k) { return values[grid.index(i, k)]; }
    double operator()(int i, int k) const { return values[grid.index(i, k)]; }
};

/// Samples f(x, y) at every slot, with y the transverse coordinate.
Field sample(const Grid& g, const std::function<double(double, double)>& f);

enum class Axis { x, y };

/// Second-order finite differences; one-sided at outer boundaries and on each
/// side of the interface.
Field differentiate(const Field& f, Axis axis, int order);

/// Composite trapezoid over the cross-section at column x_index.
double slice_integral(const Field& f, int x_index);

/// Throws NumericError naming the first non-finite node.
void require_finite(const Field& f, const std::string& what);

void write_snapshot(std::ostream& os, const Field& f);
Field read_snapshot(std::istream& is);
void write_snapshot(const std::string& path, const Field& f);
Field read_snapshot(const std::string& path);

}  // namespace frontcont
