#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "chb/errors.hpp"
#include "chb/grid.hpp"
#include "chb/model.hpp"
#include "chb/tensor.hpp"

// Quantitative probes of the sharp-interface behavior: interface location and
// width on a scan line, fit against the analytic tanh transition, one-sided
// trace jumps, the interfacial balance residuals, and the generalized
// Gibbs-Thomson condition. The interface normal points from phase 0 into
// phase 1; curvature is positive for a disk of phase-1 material.

namespace chb {

struct InterfaceReport {
    double x_half = 0.0;     // phi = 0.5 crossing on the scan line
    double width_19 = 0.0;   // distance between the 0.1 and 0.9 crossings
    double profile_l2 = 0.0; // normalized L2 error against the tanh profile
};

struct JumpReport {
    double jump_p = 0.0;
    double jump_u = 0.0;
    double jump_normal_stress = 0.0;
    double flux_balance_residual = 0.0; // |v_n + m [grad mu . n]|
    double flow_balance_residual = 0.0; // |v_n [theta] + [kappa grad p . n]|
    double gibbs_thomson_residual = 0.0;
    double offset = 0.0; // probe distance used for the one-sided traces
    double v_n = 0.0;
    double curvature = 0.0;
};

struct EnergyBreakdown {
    double e_interface = 0.0;
    double e_elastic = 0.0;
    double e_fluid = 0.0;
    double e_total = 0.0;
};

/// One-sided outer trace of the poroelastic fields next to the interface.
struct InterfaceTrace {
    Mat2 strain;
    Mat2 grad_u;
    double p = 0.0;
    double theta = 0.0;
};

struct InterfaceTraces {
    InterfaceTrace plus;  // phase-1 side (the side the normal points into)
    InterfaceTrace minus; // phase-0 side
    Vec2 normal{1.0, 0.0};
};

/// Probe offset at which the analytic profile is within 1% of its pure-phase
/// value, doubled for safety: 2 sqrt(2) atanh(0.98) ell.
inline double default_probe_offset(double ell) {
    return 2.0 * std::sqrt(2.0) * std::atanh(0.98) * ell;
}

namespace detail {

inline std::vector<double> level_crossings(const std::vector<LinePoint>& samples, double level) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const double a = samples[i].value - level;
        const double b = samples[i + 1].value - level;
        if ((a <= 0.0 && b > 0.0) || (a >= 0.0 && b < 0.0)) {
            const double t = (a == b) ? 0.0 : a / (a - b);
            out.push_back(samples[i].x + t * (samples[i + 1].x - samples[i].x));
        }
    }
    return out;
}

inline double single_crossing(const std::vector<LinePoint>& samples, double level,
                              const char* what) {
    const auto xs = level_crossings(samples, level);
    if (xs.size() != 1)
        throw DiagnosticError(std::string(what) + ": expected exactly one " +
                              std::to_string(level) + " crossing, found " +
                              std::to_string(xs.size()));
    return xs.front();
}

/// True when phi increases with x across the scan line's 0.5 crossing.
inline bool rising_profile(const std::vector<LinePoint>& samples) {
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const double a = samples[i].value - 0.5;
        const double b = samples[i + 1].value - 0.5;
        if ((a <= 0.0 && b > 0.0)) return true;
        if ((a >= 0.0 && b < 0.0)) return false;
    }
    return true;
}

} // namespace detail

inline constexpr int kDefaultLineSamples = 2049;

/// x position of the single phi = 0.5 crossing in a cross-section.
inline double locate_interface(const std::vector<LinePoint>& samples) {
    return detail::single_crossing(samples, 0.5, "locate_interface");
}

/// Same, sampling the field on the horizontal line at y.
inline double locate_interface(const Field& phi, double y, int n = kDefaultLineSamples) {
    return locate_interface(sample_line(phi, y, n));
}

/// Distance between the phi = 0.1 and phi = 0.9 crossings of a cross-section.
inline double interface_width(const std::vector<LinePoint>& samples) {
    const double a = detail::single_crossing(samples, 0.1, "interface_width");
    const double b = detail::single_crossing(samples, 0.9, "interface_width");
    return std::abs(b - a);
}

inline double interface_width(const Field& phi, double y, int n = kDefaultLineSamples) {
    return interface_width(sample_line(phi, y, n));
}

/// Normalized L2 distance between the sampled cross-section and the analytic
/// transition 1/2 (1 + tanh((x - x_half) / (sqrt(2) ell))), oriented to match
/// the measured profile.
inline double profile_fit(const std::vector<LinePoint>& samples, double ell) {
    const double x_half = detail::single_crossing(samples, 0.5, "profile_fit");
    const double sign = detail::rising_profile(samples) ? 1.0 : -1.0;
    const double scale = std::sqrt(2.0) * ell;
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double model = 0.5 * (1.0 + std::tanh(sign * (samples[i].x - x_half) / scale));
        const double d = samples[i].value - model;
        sq[i] = d * d;
    }
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < samples.size(); ++i)
        integral += 0.5 * (sq[i] + sq[i + 1]) * (samples[i + 1].x - samples[i].x);
    const double length = samples.back().x - samples.front().x;
    return std::sqrt(integral / length);
}

inline double profile_fit(const Field& phi, double y, double ell, int n = kDefaultLineSamples) {
    return profile_fit(sample_line(phi, y, n), ell);
}

/// Mean curvature H = -div(grad phi / |grad phi|) at a point, via nodal
/// central-difference gradient recovery; positive where the phase-1 region
/// is convex.
inline double curvature_at_interface(const Field& phi, const Vec2& point) {
    const Grid& g = phi.grid;
    const int nx = g.nx(), ny = g.ny();
    Field gx(g), gy(g);
    auto val = [&](int i, int j) { return phi[g.node_id(i, j)]; };
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            const int n = g.node_id(i, j);
            if (i == 0)
                gx[n] = (val(1, j) - val(0, j)) / g.hx();
            else if (i == nx)
                gx[n] = (val(nx, j) - val(nx - 1, j)) / g.hx();
            else
                gx[n] = (val(i + 1, j) - val(i - 1, j)) / (2.0 * g.hx());
            if (j == 0)
                gy[n] = (val(i, 1) - val(i, 0)) / g.hy();
            else if (j == ny)
                gy[n] = (val(i, ny) - val(i, ny - 1)) / g.hy();
            else
                gy[n] = (val(i, j + 1) - val(i, j - 1)) / (2.0 * g.hy());
        }
    }
    const Vec2 grad{interpolate_at(gx, point.x, point.y), interpolate_at(gy, point.x, point.y)};
    if (grad.norm() <= 1e-8)
        throw DiagnosticError("curvature_at_interface: |grad phi| <= 1e-8 at probe point");

    Field nx_f(g), ny_f(g);
    for (int n = 0; n < g.num_nodes(); ++n) {
        const double m = std::hypot(gx[n], gy[n]);
        if (m > 1e-14) {
            nx_f[n] = gx[n] / m;
            ny_f[n] = gy[n] / m;
        }
    }
    Field div(g);
    auto nxv = [&](int i, int j) { return nx_f[g.node_id(i, j)]; };
    auto nyv = [&](int i, int j) { return ny_f[g.node_id(i, j)]; };
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            double dnx, dny;
            if (i == 0)
                dnx = (nxv(1, j) - nxv(0, j)) / g.hx();
            else if (i == nx)
                dnx = (nxv(nx, j) - nxv(nx - 1, j)) / g.hx();
            else
                dnx = (nxv(i + 1, j) - nxv(i - 1, j)) / (2.0 * g.hx());
            if (j == 0)
                dny = (nyv(i, 1) - nyv(i, 0)) / g.hy();
            else if (j == ny)
                dny = (nyv(i, ny) - nyv(i, ny - 1)) / g.hy();
            else
                dny = (nyv(i, j + 1) - nyv(i, j - 1)) / (2.0 * g.hy());
            div[g.node_id(i, j)] = dnx + dny;
        }
    }
    return -interpolate_at(div, point.x, point.y);
}

/// Right-hand side of the interfacial chemical-potential condition:
/// gamma H / (3 sqrt 2) + [elastic + fluid energy density] - [grad u n . sigma n]
/// - [p theta], with per-side pure-phase material constants.
inline double gibbs_thomson_rhs(const InterfaceTraces& tr, const MaterialParams& params,
                                double H) {
    auto side = [&](const InterfaceTrace& t, double phase) {
        const Mat2 e = t.strain - swelling(phase, params);
        const Mat2 sigma_eff = stiffness_apply(phase, e, params);
        const double alpha = biot_alpha(phase, params);
        const Mat2 sigma{sigma_eff.xx - alpha * t.p, sigma_eff.xy, sigma_eff.yx,
                         sigma_eff.yy - alpha * t.p};
        const double energy = 0.5 * e.ddot(sigma_eff) +
                              fluid_energy_density(phase, t.theta, t.strain.trace(), params);
        const double traction = (t.grad_u * tr.normal).dot(sigma * tr.normal);
        return std::array<double, 3>{energy, traction, t.p * t.theta};
    };
    const auto plus = side(tr.plus, 1.0);
    const auto minus = side(tr.minus, 0.0);
    return params.gamma * H / (3.0 * std::sqrt(2.0)) + (plus[0] - minus[0]) -
           (plus[1] - minus[1]) - (plus[2] - minus[2]);
}

/// One-sided traces and interfacial balance residuals at x_half +- offset on
/// the scan line at y. The interface velocity is estimated by differencing
/// x_half between the two states, dt apart.
inline JumpReport jump_residuals(const State& state_new, const State& state_old,
                                 const MaterialParams& params, double dt, double y, double offset,
                                 int n = kDefaultLineSamples) {
    if (!(state_new.grid == state_old.grid))
        throw std::invalid_argument("jump_residuals: mismatched grids");
    const Grid& g = state_new.grid;
    const auto samples_new = sample_line(state_new.phi, y, n);
    const auto samples_old = sample_line(state_old.phi, y, n);
    const double x_new = detail::single_crossing(samples_new, 0.5, "jump_residuals");
    const double x_old = detail::single_crossing(samples_old, 0.5, "jump_residuals");
    const double width = interface_width(state_new.phi, y, n);
    if (!(offset > 0.5 * width))
        throw DiagnosticError("jump_residuals: offset " + std::to_string(offset) +
                              " does not clear the diffuse layer (width " +
                              std::to_string(width) + ")");

    const double nx = detail::rising_profile(samples_new) ? 1.0 : -1.0;
    const Vec2 normal{nx, 0.0};
    const double xp = x_new + nx * offset;
    const double xm = x_new - nx * offset;
    if (xp < g.x0() || xp > g.x1() || xm < g.x0() || xm > g.x1())
        throw RangeError("jump_residuals: probes at x_half +- " + std::to_string(offset) +
                         " fall outside the domain");

    auto trace_at = [&](double x) {
        InterfaceTrace t;
        t.grad_u = vector_gradient_at(state_new.u, x, y);
        t.strain = t.grad_u.sym();
        t.p = interpolate_at(state_new.p, x, y);
        t.theta = interpolate_at(state_new.theta, x, y);
        return t;
    };
    InterfaceTraces traces;
    traces.plus = trace_at(xp);
    traces.minus = trace_at(xm);
    traces.normal = normal;

    const Vec2 up = interpolate_at(state_new.u, xp, y);
    const Vec2 um = interpolate_at(state_new.u, xm, y);
    const double grad_mu_p = gradient_at(state_new.mu, xp, y).dot(normal);
    const double grad_mu_m = gradient_at(state_new.mu, xm, y).dot(normal);
    const double grad_p_p = gradient_at(state_new.p, xp, y).dot(normal);
    const double grad_p_m = gradient_at(state_new.p, xm, y).dot(normal);

    auto stress = [&](const InterfaceTrace& t, double phase) {
        const Mat2 eff =
            stiffness_apply(phase, t.strain - swelling(phase, params), params);
        const double alpha = biot_alpha(phase, params);
        return Mat2{eff.xx - alpha * t.p, eff.xy, eff.yx, eff.yy - alpha * t.p};
    };

    JumpReport rep;
    rep.offset = offset;
    rep.v_n = nx * (x_new - x_old) / dt;
    rep.jump_p = std::abs(traces.plus.p - traces.minus.p);
    rep.jump_u = (up - um).norm();
    rep.jump_normal_stress =
        ((stress(traces.plus, 1.0) - stress(traces.minus, 0.0)) * normal).norm();
    rep.flux_balance_residual =
        std::abs(rep.v_n + params.mobility * (grad_mu_p - grad_mu_m));
    rep.flow_balance_residual =
        std::abs(rep.v_n * (traces.plus.theta - traces.minus.theta) +
                 (params.kappa1 * grad_p_p - params.kappa0 * grad_p_m));
    rep.curvature = curvature_at_interface(state_new.phi, {x_new, y});
    const double mu_iface = interpolate_at(state_new.mu, x_new, y);
    rep.gibbs_thomson_residual =
        std::abs(mu_iface - gibbs_thomson_rhs(traces, params, rep.curvature));
    return rep;
}

/// Quadrature integrals of the three free-energy densities; the total is
/// their sum by construction.
inline EnergyBreakdown energy_breakdown(const State& state, const MaterialParams& params) {
    EnergyBreakdown e;
    e.e_interface = interface_energy(state.phi, params);
    const Grid& g = state.grid;
    const auto rule = quadrature(2);
    const double detj = 0.25 * g.hx() * g.hy();
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (const auto& q : rule) {
            const auto s = shape_eval(g, q.xi, q.eta);
            double phi = 0.0, theta = 0.0;
            Mat2 grad_u;
            for (int a = 0; a < 4; ++a) {
                const int nd = nodes[a];
                phi += s.value[a] * state.phi[nd];
                theta += s.value[a] * state.theta[nd];
                grad_u.xx += state.u.at(nd, 0) * s.grad[a].x;
                grad_u.xy += state.u.at(nd, 0) * s.grad[a].y;
                grad_u.yx += state.u.at(nd, 1) * s.grad[a].x;
                grad_u.yy += state.u.at(nd, 1) * s.grad[a].y;
            }
            const double w = q.weight * detj;
            e.e_elastic += w * elastic_energy_density(phi, grad_u.sym(), params);
            e.e_fluid += w * fluid_energy_density(phi, theta, grad_u.trace(), params);
        }
    }
    e.e_total = e.e_interface + e.e_elastic + e.e_fluid;
    return e;
}

} // namespace chb
