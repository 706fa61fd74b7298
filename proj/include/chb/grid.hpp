#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "chb/errors.hpp"
#include "chb/tensor.hpp"

namespace chb {

/// Structured quadrilateral mesh description. Cell sizes are derived,
/// node numbering is row-major with x fastest.
struct GridSpec {
    int nx = 0;
    int ny = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 1.0;
    double y1 = 1.0;

    bool operator==(const GridSpec&) const = default;
};

enum class Side { Left, Right, Bottom, Top };

class Grid {
public:
    Grid() = default;

    explicit Grid(const GridSpec& spec) : s_(spec) {
        if (spec.nx < 2 || spec.ny < 2)
            throw ConfigError("grid: need nx >= 2 and ny >= 2, got nx=" + std::to_string(spec.nx) +
                              " ny=" + std::to_string(spec.ny));
        if (!(spec.x1 > spec.x0) || !(spec.y1 > spec.y0))
            throw ConfigError("grid: invalid extents, require x1 > x0 and y1 > y0");
    }

    const GridSpec& spec() const { return s_; }
    int nx() const { return s_.nx; }
    int ny() const { return s_.ny; }
    double x0() const { return s_.x0; }
    double y0() const { return s_.y0; }
    double x1() const { return s_.x1; }
    double y1() const { return s_.y1; }
    double hx() const { return (s_.x1 - s_.x0) / s_.nx; }
    double hy() const { return (s_.y1 - s_.y0) / s_.ny; }

    int num_nodes() const { return (s_.nx + 1) * (s_.ny + 1); }
    int num_cells() const { return s_.nx * s_.ny; }

    int node_id(int i, int j) const { return j * (s_.nx + 1) + i; }
    int node_i(int node) const { return node % (s_.nx + 1); }
    int node_j(int node) const { return node / (s_.nx + 1); }
    Vec2 node_pos(int node) const {
        return {s_.x0 + node_i(node) * hx(), s_.y0 + node_j(node) * hy()};
    }

    int cell_id(int ci, int cj) const { return cj * s_.nx + ci; }
    /// Corner nodes in reference-square order (-1,-1), (1,-1), (1,1), (-1,1).
    std::array<int, 4> cell_nodes(int cell) const {
        const int ci = cell % s_.nx;
        const int cj = cell / s_.nx;
        return {node_id(ci, cj), node_id(ci + 1, cj), node_id(ci + 1, cj + 1), node_id(ci, cj + 1)};
    }

    bool on_side(int node, Side side) const {
        switch (side) {
            case Side::Left: return node_i(node) == 0;
            case Side::Right: return node_i(node) == s_.nx;
            case Side::Bottom: return node_j(node) == 0;
            case Side::Top: return node_j(node) == s_.ny;
        }
        return false;
    }

    bool is_boundary(int node) const {
        return on_side(node, Side::Left) || on_side(node, Side::Right) ||
               on_side(node, Side::Bottom) || on_side(node, Side::Top);
    }

    std::vector<int> boundary_nodes(Side side) const {
        std::vector<int> out;
        for (int n = 0; n < num_nodes(); ++n)
            if (on_side(n, side)) out.push_back(n);
        return out;
    }

    /// Cell indices (ci, cj) of the cell containing (x, y), clamped to the mesh.
    std::array<int, 2> cell_of_point(double x, double y) const {
        int ci = static_cast<int>(std::floor((x - s_.x0) / hx()));
        int cj = static_cast<int>(std::floor((y - s_.y0) / hy()));
        ci = std::clamp(ci, 0, s_.nx - 1);
        cj = std::clamp(cj, 0, s_.ny - 1);
        return {ci, cj};
    }

    bool contains(double x, double y) const {
        const double ex = 1e-12 * (s_.x1 - s_.x0);
        const double ey = 1e-12 * (s_.y1 - s_.y0);
        return x >= s_.x0 - ex && x <= s_.x1 + ex && y >= s_.y0 - ey && y <= s_.y1 + ey;
    }

    bool operator==(const Grid& o) const { return s_ == o.s_; }

private:
    GridSpec s_;
};

inline Grid make_grid(const GridSpec& spec) { return Grid(spec); }

/// One scalar per node, row-major with x fastest.
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double init = 0.0)
        : grid(g), values(static_cast<std::size_t>(g.num_nodes()), init) {}

    double& operator[](int node) { return values[static_cast<std::size_t>(node)]; }
    double operator[](int node) const { return values[static_cast<std::size_t>(node)]; }
};

/// Two scalars (ux, uy) per node, interleaved.
struct VectorField {
    Grid grid;
    std::vector<double> values;

    VectorField() = default;
    explicit VectorField(const Grid& g, double init = 0.0)
        : grid(g), values(2 * static_cast<std::size_t>(g.num_nodes()), init) {}

    double& at(int node, int comp) { return values[2 * static_cast<std::size_t>(node) + comp]; }
    double at(int node, int comp) const { return values[2 * static_cast<std::size_t>(node) + comp]; }
    Vec2 vec(int node) const { return {at(node, 0), at(node, 1)}; }
};

struct QuadraturePoint {
    double xi = 0.0;
    double eta = 0.0;
    double weight = 0.0; // reference-square weight; sums to 4 over the rule
};

/// Tensor-product Gauss rule on [-1,1]^2, order in {1, 2, 3}.
inline std::vector<QuadraturePoint> quadrature(int order) {
    std::vector<double> pts, wts;
    switch (order) {
        case 1:
            pts = {0.0};
            wts = {2.0};
            break;
        case 2:
            pts = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
            wts = {1.0, 1.0};
            break;
        case 3:
            pts = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
            wts = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
            break;
        default:
            throw ConfigError("quadrature: unsupported order " + std::to_string(order));
    }
    std::vector<QuadraturePoint> rule;
    rule.reserve(pts.size() * pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j)
        for (std::size_t i = 0; i < pts.size(); ++i)
            rule.push_back({pts[i], pts[j], wts[i] * wts[j]});
    return rule;
}

/// Bilinear shape values and physical-space gradients at a reference point.
/// The Jacobian is diagonal and constant, so the cell index is irrelevant
/// beyond fixing hx, hy.
struct ShapeEval {
    std::array<double, 4> value;
    std::array<Vec2, 4> grad;
};

inline ShapeEval shape_eval(const Grid& grid, double xi, double eta) {
    ShapeEval s;
    const double xm = 1.0 - xi, xp = 1.0 + xi;
    const double em = 1.0 - eta, ep = 1.0 + eta;
    s.value = {0.25 * xm * em, 0.25 * xp * em, 0.25 * xp * ep, 0.25 * xm * ep};
    const double ax = 2.0 / grid.hx(); // d(xi)/dx
    const double ay = 2.0 / grid.hy();
    s.grad[0] = {-0.25 * em * ax, -0.25 * xm * ay};
    s.grad[1] = {0.25 * em * ax, -0.25 * xp * ay};
    s.grad[2] = {0.25 * ep * ax, 0.25 * xp * ay};
    s.grad[3] = {-0.25 * ep * ax, 0.25 * xm * ay};
    return s;
}

namespace detail {

struct CellLocal {
    int cell_i = 0;
    int cell_j = 0;
    double xi = 0.0;
    double eta = 0.0;
};

inline CellLocal locate(const Grid& g, double x, double y) {
    if (!g.contains(x, y))
        throw RangeError("point (" + std::to_string(x) + ", " + std::to_string(y) +
                         ") outside domain");
    x = std::clamp(x, g.x0(), g.x1());
    y = std::clamp(y, g.y0(), g.y1());
    const auto [ci, cj] = g.cell_of_point(x, y);
    const double xc = g.x0() + (ci + 0.5) * g.hx();
    const double yc = g.y0() + (cj + 0.5) * g.hy();
    return {ci, cj, 2.0 * (x - xc) / g.hx(), 2.0 * (y - yc) / g.hy()};
}

} // namespace detail

/// Bilinear interpolation of a scalar field at (x, y).
inline double interpolate_at(const Field& f, double x, double y) {
    const Grid& g = f.grid;
    const auto loc = detail::locate(g, x, y);
    const auto s = shape_eval(g, loc.xi, loc.eta);
    const auto nodes = g.cell_nodes(g.cell_id(loc.cell_i, loc.cell_j));
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += s.value[a] * f[nodes[a]];
    return v;
}

inline Vec2 interpolate_at(const VectorField& f, double x, double y) {
    const Grid& g = f.grid;
    const auto loc = detail::locate(g, x, y);
    const auto s = shape_eval(g, loc.xi, loc.eta);
    const auto nodes = g.cell_nodes(g.cell_id(loc.cell_i, loc.cell_j));
    Vec2 v;
    for (int a = 0; a < 4; ++a) {
        v.x += s.value[a] * f.at(nodes[a], 0);
        v.y += s.value[a] * f.at(nodes[a], 1);
    }
    return v;
}

/// Gradient of the bilinear interpolant at (x, y), taken inside the cell
/// containing the point.
inline Vec2 gradient_at(const Field& f, double x, double y) {
    const Grid& g = f.grid;
    const auto loc = detail::locate(g, x, y);
    const auto s = shape_eval(g, loc.xi, loc.eta);
    const auto nodes = g.cell_nodes(g.cell_id(loc.cell_i, loc.cell_j));
    Vec2 v;
    for (int a = 0; a < 4; ++a) {
        v.x += s.grad[a].x * f[nodes[a]];
        v.y += s.grad[a].y * f[nodes[a]];
    }
    return v;
}

/// Displacement gradient [du_i/dx_j] of the bilinear interpolant at (x, y).
inline Mat2 vector_gradient_at(const VectorField& f, double x, double y) {
    const Grid& g = f.grid;
    const auto loc = detail::locate(g, x, y);
    const auto s = shape_eval(g, loc.xi, loc.eta);
    const auto nodes = g.cell_nodes(g.cell_id(loc.cell_i, loc.cell_j));
    Mat2 m;
    for (int a = 0; a < 4; ++a) {
        m.xx += f.at(nodes[a], 0) * s.grad[a].x;
        m.xy += f.at(nodes[a], 0) * s.grad[a].y;
        m.yx += f.at(nodes[a], 1) * s.grad[a].x;
        m.yy += f.at(nodes[a], 1) * s.grad[a].y;
    }
    return m;
}

struct LinePoint {
    double x = 0.0;
    double value = 0.0;
};

/// Bilinear samples of a field at n equispaced x positions along the
/// horizontal line at height y.
inline std::vector<LinePoint> sample_line(const Field& f, double y, int n) {
    if (n < 2) throw std::invalid_argument("sample_line: need n >= 2");
    const Grid& g = f.grid;
    if (y < g.y0() || y > g.y1())
        throw RangeError("sample_line: y=" + std::to_string(y) + " outside [" +
                         std::to_string(g.y0()) + ", " + std::to_string(g.y1()) + "]");
    std::vector<LinePoint> out(static_cast<std::size_t>(n));
    const double dx = (g.x1() - g.x0()) / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double x = (i == n - 1) ? g.x1() : g.x0() + i * dx;
        out[static_cast<std::size_t>(i)] = {x, interpolate_at(f, x, y)};
    }
    return out;
}

} // namespace chb
