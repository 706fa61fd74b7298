#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chb/assembly.hpp"
#include "chb/diagnostics.hpp"
#include "chb/errors.hpp"
#include "chb/grid.hpp"
#include "chb/model.hpp"
#include "chb/solver.hpp"

// Run configuration (flat `key = value` grammar) and result serialization:
// time-series CSV, cross-section CSV, and legacy-VTK snapshots. Numeric
// output is locale-independent with 17 significant digits so that files
// round-trip bit-exactly.

namespace chb {

struct RunConfig {
    MaterialParams material;
    TimeScheme time;
    SolverConfig solver;
    BoundaryConditions bcs;

    // grid; nx = ny = 0 selects the mesh-size rule h = sqrt(ell) / 3.2
    int nx = 0;
    int ny = 0;
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

    double t_final = 0.1;
    int output_every = 10;    // snapshot cadence in steps
    double steady_tol = 0.0;  // stop when ||dphi||_inf / dt <= steady_tol (0 = off)
    double line_y = 0.5;      // scan line for cross-sections and diagnostics
    double probe_offset = 0.0; // trace probe distance; 0 = 2 sqrt(2) atanh(0.98) ell
                               // with a single halving when it leaves the domain

    std::string scenario = "paper_halfspace";
    double disk_r0 = 0.25;    // ch_disk initial radius
    double layer_x = 0.5;     // ch_relax_1d / paper_halfspace layer position
    double custom_phi0 = 0.5; // custom scenario: uniform phi value

    // constant source terms (default: all zero)
    double reaction = 0.0;
    double body_fx = 0.0;
    double body_fy = 0.0;
    double fluid_source = 0.0;

    bool operator==(const RunConfig&) const = default;

    SourceConfig make_sources() const {
        SourceConfig s;
        s.reaction.value = reaction;
        s.body_x.value = body_fx;
        s.body_y.value = body_fy;
        s.fluid.value = fluid_source;
        return s;
    }

    void validate() const {
        material.validate();
        time.validate();
        solver.validate();
        bcs.validate();
        if (nx != 0 && nx < 2) throw ConfigError("nx must be 0 (auto) or >= 2");
        if (ny != 0 && ny < 2) throw ConfigError("ny must be 0 (auto) or >= 2");
        if (!(x1 > x0) || !(y1 > y0)) throw ConfigError("domain extents require x1 > x0, y1 > y0");
        if (t_final < 0.0) throw ConfigError("t_final must be >= 0");
        if (output_every < 1) throw ConfigError("output_every must be >= 1");
        if (steady_tol < 0.0) throw ConfigError("steady_tol must be >= 0");
        if (probe_offset < 0.0) throw ConfigError("probe_offset must be >= 0");
        if (line_y < y0 || line_y > y1) throw ConfigError("line_y outside the domain");
        if (!(disk_r0 > 0.0)) throw ConfigError("disk_r0 must be > 0");
        if (scenario != "paper_halfspace" && scenario != "ch_relax_1d" && scenario != "ch_disk" &&
            scenario != "custom")
            throw ConfigError("unknown scenario '" + scenario + "'");
    }
};

/// Grid resolved from the config; unset cell counts follow the mesh rule
/// h = sqrt(ell) / 3.2.
inline GridSpec resolved_grid_spec(const RunConfig& cfg) {
    GridSpec s;
    s.x0 = cfg.x0;
    s.y0 = cfg.y0;
    s.x1 = cfg.x1;
    s.y1 = cfg.y1;
    const double h = std::sqrt(cfg.material.ell) / 3.2;
    s.nx = cfg.nx > 0 ? cfg.nx : std::max(2, static_cast<int>(std::llround((cfg.x1 - cfg.x0) / h)));
    s.ny = cfg.ny > 0 ? cfg.ny : std::max(2, static_cast<int>(std::llround((cfg.y1 - cfg.y0) / h)));
    return s;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, int line) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("line " + std::to_string(line) + ": cannot parse number '" + v + "'");
    return x;
}

inline int parse_int(const std::string& v, int line) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("line " + std::to_string(line) + ": cannot parse integer '" + v + "'");
    return static_cast<int>(x);
}

inline bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("line " + std::to_string(line) + ": cannot parse boolean '" + v + "'");
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline LinearMethod parse_linear_method(const std::string& v, int line) {
    if (v == "auto") return LinearMethod::Auto;
    if (v == "direct") return LinearMethod::Direct;
    if (v == "iterative") return LinearMethod::Iterative;
    throw ConfigError("line " + std::to_string(line) + ": unknown linear_method '" + v + "'");
}

inline const char* linear_method_name(LinearMethod m) {
    switch (m) {
        case LinearMethod::Auto: return "auto";
        case LinearMethod::Direct: return "direct";
        case LinearMethod::Iterative: return "iterative";
    }
    return "auto";
}

} // namespace detail

/// Parses the flat `key = value` grammar ('#' starts a comment, blank lines
/// ignored, unknown keys rejected) into a validated RunConfig. Omitted keys
/// keep the reference defaults.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");

        auto d = [&] { return detail::parse_double(val, lineno); };
        auto i = [&] { return detail::parse_int(val, lineno); };
        auto b = [&] { return detail::parse_bool(val, lineno); };

        if (key == "gamma") cfg.material.gamma = d();
        else if (key == "ell") cfg.material.ell = d();
        else if (key == "mobility") cfg.material.mobility = d();
        else if (key == "xi") cfg.material.xi = d();
        else if (key == "phi_ref") cfg.material.phi_ref = d();
        else if (key == "G0") cfg.material.G0 = d();
        else if (key == "G1") cfg.material.G1 = d();
        else if (key == "lam0") cfg.material.lam0 = d();
        else if (key == "lam1") cfg.material.lam1 = d();
        else if (key == "M0") cfg.material.M0 = d();
        else if (key == "M1") cfg.material.M1 = d();
        else if (key == "kappa0") cfg.material.kappa0 = d();
        else if (key == "kappa1") cfg.material.kappa1 = d();
        else if (key == "alpha0") cfg.material.alpha0 = d();
        else if (key == "alpha1") cfg.material.alpha1 = d();
        else if (key == "dt") cfg.time.dt = d();
        else if (key == "coupling_sweeps") cfg.time.coupling_sweeps = i();
        else if (key == "newton_abs_tol") cfg.solver.newton_abs_tol = d();
        else if (key == "newton_max_iter") cfg.solver.newton_max_iter = i();
        else if (key == "linear_rel_tol") cfg.solver.linear_rel_tol = d();
        else if (key == "linear_max_iter") cfg.solver.linear_max_iter = i();
        else if (key == "linear_method") cfg.solver.linear_method = detail::parse_linear_method(val, lineno);
        else if (key == "damping") cfg.solver.damping = d();
        else if (key == "u_dirichlet") cfg.bcs.u_dirichlet = b();
        else if (key == "p_neumann") cfg.bcs.p_dirichlet = !b();
        else if (key == "p_left") cfg.bcs.p_left = d();
        else if (key == "p_right") cfg.bcs.p_right = d();
        else if (key == "nx") cfg.nx = i();
        else if (key == "ny") cfg.ny = i();
        else if (key == "x0") cfg.x0 = d();
        else if (key == "y0") cfg.y0 = d();
        else if (key == "x1") cfg.x1 = d();
        else if (key == "y1") cfg.y1 = d();
        else if (key == "t_final") cfg.t_final = d();
        else if (key == "output_every") cfg.output_every = i();
        else if (key == "steady_tol") cfg.steady_tol = d();
        else if (key == "line_y") cfg.line_y = d();
        else if (key == "probe_offset") cfg.probe_offset = d();
        else if (key == "scenario") cfg.scenario = val;
        else if (key == "disk_r0") cfg.disk_r0 = d();
        else if (key == "layer_x") cfg.layer_x = d();
        else if (key == "custom_phi0") cfg.custom_phi0 = d();
        else if (key == "reaction") cfg.reaction = d();
        else if (key == "body_fx") cfg.body_fx = d();
        else if (key == "body_fy") cfg.body_fy = d();
        else if (key == "fluid_source") cfg.fluid_source = d();
        else
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

/// Emits every key in canonical order; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    auto kv = [&](const char* key, const std::string& value) { out << key << " = " << value << "\n"; };
    auto kd = [&](const char* key, double v) { kv(key, detail::fmt17(v)); };
    auto ki = [&](const char* key, int v) { kv(key, std::to_string(v)); };
    auto kb = [&](const char* key, bool v) { kv(key, v ? "true" : "false"); };

    kd("gamma", cfg.material.gamma);
    kd("ell", cfg.material.ell);
    kd("mobility", cfg.material.mobility);
    kd("xi", cfg.material.xi);
    kd("phi_ref", cfg.material.phi_ref);
    kd("G0", cfg.material.G0);
    kd("G1", cfg.material.G1);
    kd("lam0", cfg.material.lam0);
    kd("lam1", cfg.material.lam1);
    kd("M0", cfg.material.M0);
    kd("M1", cfg.material.M1);
    kd("kappa0", cfg.material.kappa0);
    kd("kappa1", cfg.material.kappa1);
    kd("alpha0", cfg.material.alpha0);
    kd("alpha1", cfg.material.alpha1);
    kd("dt", cfg.time.dt);
    ki("coupling_sweeps", cfg.time.coupling_sweeps);
    kd("newton_abs_tol", cfg.solver.newton_abs_tol);
    ki("newton_max_iter", cfg.solver.newton_max_iter);
    kd("linear_rel_tol", cfg.solver.linear_rel_tol);
    ki("linear_max_iter", cfg.solver.linear_max_iter);
    kv("linear_method", detail::linear_method_name(cfg.solver.linear_method));
    kd("damping", cfg.solver.damping);
    kb("u_dirichlet", cfg.bcs.u_dirichlet);
    kb("p_neumann", !cfg.bcs.p_dirichlet);
    kd("p_left", cfg.bcs.p_left);
    kd("p_right", cfg.bcs.p_right);
    ki("nx", cfg.nx);
    ki("ny", cfg.ny);
    kd("x0", cfg.x0);
    kd("y0", cfg.y0);
    kd("x1", cfg.x1);
    kd("y1", cfg.y1);
    kd("t_final", cfg.t_final);
    ki("output_every", cfg.output_every);
    kd("steady_tol", cfg.steady_tol);
    kd("line_y", cfg.line_y);
    kd("probe_offset", cfg.probe_offset);
    kv("scenario", cfg.scenario);
    kd("disk_r0", cfg.disk_r0);
    kd("layer_x", cfg.layer_x);
    kd("custom_phi0", cfg.custom_phi0);
    kd("reaction", cfg.reaction);
    kd("body_fx", cfg.body_fx);
    kd("body_fy", cfg.body_fy);
    kd("fluid_source", cfg.fluid_source);
    return out.str();
}

/// CSV cross-section of all fields at n equispaced positions along the line
/// at height y. Header: x,phi,mu,ux,uy,p,theta.
inline void write_cross_section(const State& state, double y, int n, const std::string& path) {
    const auto xs = sample_line(state.phi, y, n); // also validates y and n
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "x,phi,mu,ux,uy,p,theta\n";
    for (const auto& s : xs) {
        const double x = s.x;
        const Vec2 u = interpolate_at(state.u, x, y);
        out << detail::fmt17(x) << ',' << detail::fmt17(s.value) << ','
            << detail::fmt17(interpolate_at(state.mu, x, y)) << ',' << detail::fmt17(u.x) << ','
            << detail::fmt17(u.y) << ',' << detail::fmt17(interpolate_at(state.p, x, y)) << ','
            << detail::fmt17(interpolate_at(state.theta, x, y)) << '\n';
    }
    if (!out.good()) throw IoError("write failed for '" + path + "'");
}

/// Legacy-VTK ASCII snapshot (STRUCTURED_POINTS) with scalar fields phi, mu,
/// p, theta and the displacement as a 3-vector with zero z component.
inline void write_vtk(const State& state, const std::string& path) {
    const Grid& g = state.grid;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "# vtk DataFile Version 3.0\n";
    out << "chb snapshot\n";
    out << "ASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << (g.nx() + 1) << ' ' << (g.ny() + 1) << " 1\n";
    out << "ORIGIN " << detail::fmt17(g.x0()) << ' ' << detail::fmt17(g.y0()) << " 0\n";
    out << "SPACING " << detail::fmt17(g.hx()) << ' ' << detail::fmt17(g.hy()) << " 1\n";
    out << "POINT_DATA " << g.num_nodes() << "\n";
    auto scalars = [&](const char* name, const Field& f) {
        out << "SCALARS " << name << " double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (int node = 0; node < g.num_nodes(); ++node) out << detail::fmt17(f[node]) << "\n";
    };
    scalars("phi", state.phi);
    scalars("mu", state.mu);
    scalars("p", state.p);
    scalars("theta", state.theta);
    out << "VECTORS displacement double\n";
    for (int node = 0; node < g.num_nodes(); ++node)
        out << detail::fmt17(state.u.at(node, 0)) << ' ' << detail::fmt17(state.u.at(node, 1))
            << " 0\n";
    if (!out.good()) throw IoError("write failed for '" + path + "'");
}

/// One diagnostics row per snapshot. Interface and jump entries are NaN when
/// the corresponding diagnostic was not evaluable for that snapshot.
struct SnapshotRecord {
    double t = 0.0;
    EnergyBreakdown energy;
    InterfaceReport interface;
    JumpReport jumps;
    int newton_iters = 0;
};

inline constexpr const char* kTimeseriesHeader =
    "t,e_total,e_interface,e_elastic,e_fluid,x_half,width_19,profile_l2,"
    "jump_p,jump_u,jump_stress,flux_res,flow_res,gt_res,newton_iters";

inline void write_timeseries(const std::vector<SnapshotRecord>& records,
                             const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << kTimeseriesHeader << "\n";
    for (const auto& r : records) {
        out << detail::fmt17(r.t) << ',' << detail::fmt17(r.energy.e_total) << ','
            << detail::fmt17(r.energy.e_interface) << ',' << detail::fmt17(r.energy.e_elastic)
            << ',' << detail::fmt17(r.energy.e_fluid) << ',' << detail::fmt17(r.interface.x_half)
            << ',' << detail::fmt17(r.interface.width_19) << ','
            << detail::fmt17(r.interface.profile_l2) << ',' << detail::fmt17(r.jumps.jump_p) << ','
            << detail::fmt17(r.jumps.jump_u) << ',' << detail::fmt17(r.jumps.jump_normal_stress)
            << ',' << detail::fmt17(r.jumps.flux_balance_residual) << ','
            << detail::fmt17(r.jumps.flow_balance_residual) << ','
            << detail::fmt17(r.jumps.gibbs_thomson_residual) << ',' << r.newton_iters << '\n';
    }
    if (!out.good()) throw IoError("write failed for '" + path + "'");
}

} // namespace chb
