#pragma once

#include <Eigen/Sparse>

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chb/errors.hpp"
#include "chb/grid.hpp"
#include "chb/model.hpp"
#include "chb/solver.hpp"
#include "chb/system.hpp"

// Discrete-in-time, Q1-in-space residuals and Jacobians for the coupled
// system. Time stepping is backward Euler with a staggered splitting: the
// phase block (phi, mu) is solved by Newton with the poroelastic coupling
// loads frozen at the latest sweep iterate, then the poroelastic block
// (u, p, theta) is solved linearly with phi frozen at the new iterate.
// Dirichlet rows are replaced by constraint residuals x_i - g_i with a unit
// diagonal in the Jacobian. All terms use 2x2 Gauss quadrature.

namespace chb {

struct TimeScheme {
    double dt = 1e-3;
    int coupling_sweeps = 2;

    bool operator==(const TimeScheme&) const = default;

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
        if (coupling_sweeps < 1) throw ConfigError("coupling_sweeps must be >= 1");
    }
};

struct BoundaryConditions {
    bool u_dirichlet = true;  // homogeneous displacement on all sides
    bool p_dirichlet = true;  // false: natural (no-flux) pressure everywhere
    double p_left = 1.0;
    double p_right = 0.0;
    // top/bottom pressure and all phi/mu boundaries are natural (no-flux)

    bool operator==(const BoundaryConditions&) const = default;

    void validate() const {
        if (!std::isfinite(p_left) || !std::isfinite(p_right))
            throw ConfigError("boundary pressure values must be finite");
    }
};

inline constexpr int kChComponents = 2;   // (phi, mu) per node
inline constexpr int kBiotComponents = 4; // (ux, uy, p, theta) per node

inline int ch_dof(int node, int comp) { return kChComponents * node + comp; }
inline int biot_dof(int node, int comp) { return kBiotComponents * node + comp; }

inline Eigen::VectorXd ch_pack(const State& s) {
    const int n = s.grid.num_nodes();
    Eigen::VectorXd x(kChComponents * n);
    for (int i = 0; i < n; ++i) {
        x[ch_dof(i, 0)] = s.phi[i];
        x[ch_dof(i, 1)] = s.mu[i];
    }
    return x;
}

inline void ch_unpack(const Eigen::VectorXd& x, State& s) {
    const int n = s.grid.num_nodes();
    for (int i = 0; i < n; ++i) {
        s.phi[i] = x[ch_dof(i, 0)];
        s.mu[i] = x[ch_dof(i, 1)];
    }
}

inline Eigen::VectorXd biot_pack(const State& s) {
    const int n = s.grid.num_nodes();
    Eigen::VectorXd x(kBiotComponents * n);
    for (int i = 0; i < n; ++i) {
        x[biot_dof(i, 0)] = s.u.at(i, 0);
        x[biot_dof(i, 1)] = s.u.at(i, 1);
        x[biot_dof(i, 2)] = s.p[i];
        x[biot_dof(i, 3)] = s.theta[i];
    }
    return x;
}

inline void biot_unpack(const Eigen::VectorXd& x, State& s) {
    const int n = s.grid.num_nodes();
    for (int i = 0; i < n; ++i) {
        s.u.at(i, 0) = x[biot_dof(i, 0)];
        s.u.at(i, 1) = x[biot_dof(i, 1)];
        s.p[i] = x[biot_dof(i, 2)];
        s.theta[i] = x[biot_dof(i, 3)];
    }
}

namespace detail {

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": mismatched grids");
}

inline double source_at(const ScalarSource& src, const std::array<int, 4>& nodes,
                        const std::array<double, 4>& shape) {
    if (!src.is_field()) return src.value;
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += shape[a] * src.nodal[static_cast<std::size_t>(nodes[a])];
    return v;
}

/// Dirichlet DOF -> value pairs for the poroelastic block, in ascending
/// DOF order.
inline std::vector<std::pair<int, double>> biot_constraints(const Grid& g,
                                                            const BoundaryConditions& bcs) {
    std::vector<std::pair<int, double>> out;
    for (int node = 0; node < g.num_nodes(); ++node) {
        if (bcs.u_dirichlet && g.is_boundary(node)) {
            out.emplace_back(biot_dof(node, 0), 0.0);
            out.emplace_back(biot_dof(node, 1), 0.0);
        }
        if (bcs.p_dirichlet) {
            if (g.on_side(node, Side::Left))
                out.emplace_back(biot_dof(node, 2), bcs.p_left);
            else if (g.on_side(node, Side::Right))
                out.emplace_back(biot_dof(node, 2), bcs.p_right);
        }
    }
    return out;
}

/// Overwrites constrained rows with a unit diagonal, keeping the already
/// assembled entries as explicit zeros so the pattern stays symmetric.
inline void apply_unit_rows(DiscreteSystem& sys, const std::vector<std::pair<int, double>>& cons) {
    sys.constrained.assign(static_cast<std::size_t>(sys.matrix.rows()), 0);
    for (const auto& [dof, value] : cons) {
        (void)value;
        sys.constrained[static_cast<std::size_t>(dof)] = 1;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sys.matrix, dof); it;
             ++it)
            it.valueRef() = (it.col() == dof) ? 1.0 : 0.0;
    }
}

} // namespace detail

/// Backward-Euler weak-form residual of the phase block over the (phi, mu)
/// DOFs of state_new. The poroelastic coupling loads are evaluated from
/// load_state (the latest sweep iterate) and are constants with respect to
/// this block's unknowns.
inline Eigen::VectorXd residual_ch(const State& state_new, const State& state_old,
                                   const State& load_state, const MaterialParams& params,
                                   const SourceConfig& sources, double dt) {
    detail::require_same_grid(state_new.grid, state_old.grid, "residual_ch");
    detail::require_same_grid(state_new.grid, load_state.grid, "residual_ch");
    const Grid& g = state_new.grid;
    const auto rule = quadrature(2);
    const double detj = 0.25 * g.hx() * g.hy();
    const double gl = params.gamma * params.ell;
    const double gol = params.gamma / params.ell;

    Eigen::VectorXd r = Eigen::VectorXd::Zero(kChComponents * g.num_nodes());
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (const auto& q : rule) {
            const auto s = shape_eval(g, q.xi, q.eta);
            double phi1 = 0.0, phi0 = 0.0, mu1 = 0.0;
            Vec2 grad_phi1, grad_mu1;
            double phi_l = 0.0, theta_l = 0.0;
            Mat2 grad_u_l;
            for (int a = 0; a < 4; ++a) {
                const int n = nodes[a];
                phi1 += s.value[a] * state_new.phi[n];
                phi0 += s.value[a] * state_old.phi[n];
                mu1 += s.value[a] * state_new.mu[n];
                grad_phi1 = grad_phi1 + s.grad[a] * state_new.phi[n];
                grad_mu1 = grad_mu1 + s.grad[a] * state_new.mu[n];
                phi_l += s.value[a] * load_state.phi[n];
                theta_l += s.value[a] * load_state.theta[n];
                grad_u_l.xx += load_state.u.at(n, 0) * s.grad[a].x;
                grad_u_l.xy += load_state.u.at(n, 0) * s.grad[a].y;
                grad_u_l.yx += load_state.u.at(n, 1) * s.grad[a].x;
                grad_u_l.yy += load_state.u.at(n, 1) * s.grad[a].y;
            }
            const double load = dphi_elastic(phi_l, grad_u_l.sym(), params) +
                                dphi_fluid(phi_l, theta_l, grad_u_l.trace(), params);
            const double reac = detail::source_at(sources.reaction, nodes, s.value);
            const double w = q.weight * detj;
            for (int a = 0; a < 4; ++a) {
                r[ch_dof(nodes[a], 0)] +=
                    w * ((phi1 - phi0) / dt * s.value[a] +
                         params.mobility * grad_mu1.dot(s.grad[a]) - reac * s.value[a]);
                r[ch_dof(nodes[a], 1)] +=
                    w * (mu1 * s.value[a] - gl * grad_phi1.dot(s.grad[a]) -
                         (gol * double_well_prime(phi1) + load) * s.value[a]);
            }
        }
    }
    return r;
}

/// Exact Jacobian of residual_ch with respect to the (phi, mu) DOFs; the
/// only nonlinearity is Psi''(phi) in the mu rows.
inline DiscreteSystem jacobian_ch(const State& state_new, const MaterialParams& params,
                                  double dt) {
    const Grid& g = state_new.grid;
    const auto rule = quadrature(2);
    const double detj = 0.25 * g.hx() * g.hy();
    const double gl = params.gamma * params.ell;
    const double gol = params.gamma / params.ell;
    const int ndof = kChComponents * g.num_nodes();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(g.num_cells()) * 64);
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (const auto& q : rule) {
            const auto s = shape_eval(g, q.xi, q.eta);
            double phi1 = 0.0;
            for (int a = 0; a < 4; ++a) phi1 += s.value[a] * state_new.phi[nodes[a]];
            const double psi2 = double_well_second(phi1);
            const double w = q.weight * detj;
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    const double mass = s.value[a] * s.value[b];
                    const double stiff = s.grad[a].dot(s.grad[b]);
                    trips.emplace_back(ch_dof(nodes[a], 0), ch_dof(nodes[b], 0), w * mass / dt);
                    trips.emplace_back(ch_dof(nodes[a], 0), ch_dof(nodes[b], 1),
                                       w * params.mobility * stiff);
                    trips.emplace_back(ch_dof(nodes[a], 1), ch_dof(nodes[b], 0),
                                       w * (-gl * stiff - gol * psi2 * mass));
                    trips.emplace_back(ch_dof(nodes[a], 1), ch_dof(nodes[b], 1), w * mass);
                }
            }
        }
    }
    DiscreteSystem sys;
    sys.components_per_node = kChComponents;
    sys.matrix.resize(ndof, ndof);
    sys.matrix.setFromTriplets(trips.begin(), trips.end());
    sys.rhs = Eigen::VectorXd::Zero(ndof);
    return sys;
}

/// Weak-form residual of the poroelastic block (quasi-static momentum
/// balance, backward-Euler mass balance, and the pressure closure) over the
/// (ux, uy, p, theta) DOFs of state_new, with every coefficient evaluated at
/// phi_frozen. Dirichlet rows are replaced by x_i - g_i.
inline Eigen::VectorXd residual_biot(const State& state_new, const State& state_old,
                                     const MaterialParams& params, const SourceConfig& sources,
                                     const BoundaryConditions& bcs, double dt,
                                     const Field& phi_frozen) {
    detail::require_same_grid(state_new.grid, state_old.grid, "residual_biot");
    detail::require_same_grid(state_new.grid, phi_frozen.grid, "residual_biot");
    const Grid& g = state_new.grid;
    const auto rule = quadrature(2);
    const double detj = 0.25 * g.hx() * g.hy();

    Eigen::VectorXd r = Eigen::VectorXd::Zero(kBiotComponents * g.num_nodes());
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (const auto& q : rule) {
            const auto s = shape_eval(g, q.xi, q.eta);
            double phif = 0.0, p1 = 0.0, th1 = 0.0, th0 = 0.0;
            Vec2 grad_p1;
            Mat2 grad_u;
            for (int a = 0; a < 4; ++a) {
                const int n = nodes[a];
                phif += s.value[a] * phi_frozen[n];
                p1 += s.value[a] * state_new.p[n];
                th1 += s.value[a] * state_new.theta[n];
                th0 += s.value[a] * state_old.theta[n];
                grad_p1 = grad_p1 + s.grad[a] * state_new.p[n];
                grad_u.xx += state_new.u.at(n, 0) * s.grad[a].x;
                grad_u.xy += state_new.u.at(n, 0) * s.grad[a].y;
                grad_u.yx += state_new.u.at(n, 1) * s.grad[a].x;
                grad_u.yy += state_new.u.at(n, 1) * s.grad[a].y;
            }
            const Mat2 strain = grad_u.sym();
            const double div_u = grad_u.trace();
            const double alpha = biot_alpha(phif, params);
            const Mat2 eff = stiffness_apply(phif, strain - swelling(phif, params), params);
            const Mat2 sigma{eff.xx - alpha * p1, eff.xy, eff.yx, eff.yy - alpha * p1};
            const double kap = permeability(phif, params);
            const double comp = compressibility(phif, params);
            const double fx = detail::source_at(sources.body_x, nodes, s.value);
            const double fy = detail::source_at(sources.body_y, nodes, s.value);
            const double sf = detail::source_at(sources.fluid, nodes, s.value);
            const double w = q.weight * detj;
            for (int a = 0; a < 4; ++a) {
                const int n = nodes[a];
                r[biot_dof(n, 0)] += w * (sigma.xx * s.grad[a].x + sigma.xy * s.grad[a].y -
                                          fx * s.value[a]);
                r[biot_dof(n, 1)] += w * (sigma.yx * s.grad[a].x + sigma.yy * s.grad[a].y -
                                          fy * s.value[a]);
                r[biot_dof(n, 2)] += w * ((th1 - th0) / dt * s.value[a] +
                                          kap * grad_p1.dot(s.grad[a]) - sf * s.value[a]);
                r[biot_dof(n, 3)] +=
                    w * (p1 - comp * (th1 - alpha * div_u)) * s.value[a];
            }
        }
    }
    const Eigen::VectorXd x = biot_pack(state_new);
    for (const auto& [dof, value] : detail::biot_constraints(g, bcs)) r[dof] = x[dof] - value;
    return r;
}

/// Jacobian of residual_biot; the block is linear for frozen phi, so the
/// matrix is independent of the (u, p, theta) state.
inline DiscreteSystem jacobian_biot(const Grid& g, const MaterialParams& params,
                                    const BoundaryConditions& bcs, double dt,
                                    const Field& phi_frozen) {
    detail::require_same_grid(g, phi_frozen.grid, "jacobian_biot");
    const auto rule = quadrature(2);
    const double detj = 0.25 * g.hx() * g.hy();
    const int ndof = kBiotComponents * g.num_nodes();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(g.num_cells()) * 256);
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (const auto& q : rule) {
            const auto s = shape_eval(g, q.xi, q.eta);
            double phif = 0.0;
            for (int a = 0; a < 4; ++a) phif += s.value[a] * phi_frozen[nodes[a]];
            const double G = shear_modulus(phif, params);
            const double lam = lame_lambda(phif, params);
            const double alpha = biot_alpha(phif, params);
            const double kap = permeability(phif, params);
            const double comp = compressibility(phif, params);
            const double w = q.weight * detj;
            for (int a = 0; a < 4; ++a) {
                const int ra = nodes[a];
                for (int b = 0; b < 4; ++b) {
                    const int cb = nodes[b];
                    const double mass = s.value[a] * s.value[b];
                    const double stiff = s.grad[a].dot(s.grad[b]);
                    // momentum rows vs displacement columns:
                    // grad(N_a e_k) : C sym(e_l x grad N_b)
                    //   = G (grad N_a . grad N_b) delta_kl
                    //     + G dN_b/dx_k dN_a/dx_l + lam dN_b/dx_l dN_a/dx_k
                    for (int k = 0; k < 2; ++k) {
                        for (int l = 0; l < 2; ++l) {
                            const double ga_k = (k == 0) ? s.grad[a].x : s.grad[a].y;
                            const double ga_l = (l == 0) ? s.grad[a].x : s.grad[a].y;
                            const double gb_k = (k == 0) ? s.grad[b].x : s.grad[b].y;
                            const double gb_l = (l == 0) ? s.grad[b].x : s.grad[b].y;
                            double v = lam * gb_l * ga_k + G * gb_k * ga_l;
                            if (k == l) v += G * stiff;
                            trips.emplace_back(biot_dof(ra, k), biot_dof(cb, l), w * v);
                        }
                        // momentum vs pressure: -alpha p I : grad(N_a e_k)
                        const double ga_k = (k == 0) ? s.grad[a].x : s.grad[a].y;
                        trips.emplace_back(biot_dof(ra, k), biot_dof(cb, 2),
                                           w * (-alpha * s.value[b] * ga_k));
                        // structural zeros keeping the pattern symmetric
                        trips.emplace_back(biot_dof(ra, 2), biot_dof(cb, k), 0.0);
                        trips.emplace_back(biot_dof(ra, k), biot_dof(cb, 3), 0.0);
                    }
                    // mass balance rows
                    trips.emplace_back(biot_dof(ra, 2), biot_dof(cb, 3), w * mass / dt);
                    trips.emplace_back(biot_dof(ra, 2), biot_dof(cb, 2), w * kap * stiff);
                    // closure rows
                    trips.emplace_back(biot_dof(ra, 3), biot_dof(cb, 2), w * mass);
                    trips.emplace_back(biot_dof(ra, 3), biot_dof(cb, 3), w * (-comp * mass));
                    for (int l = 0; l < 2; ++l) {
                        const double gb_l = (l == 0) ? s.grad[b].x : s.grad[b].y;
                        trips.emplace_back(biot_dof(ra, 3), biot_dof(cb, l),
                                           w * comp * alpha * gb_l * s.value[a]);
                    }
                }
            }
        }
    }
    DiscreteSystem sys;
    sys.components_per_node = kBiotComponents;
    sys.matrix.resize(ndof, ndof);
    sys.matrix.setFromTriplets(trips.begin(), trips.end());
    sys.rhs = Eigen::VectorXd::Zero(ndof);
    detail::apply_unit_rows(sys, detail::biot_constraints(g, bcs));
    return sys;
}

/// Newton solve of the phase block. The coupling loads are frozen at
/// load_state; only (phi, mu) of the returned state differ from iterate.
inline std::pair<State, SolveReport> solve_ch_block(const State& iterate, const State& state_old,
                                                    const State& load_state,
                                                    const MaterialParams& params,
                                                    const SourceConfig& sources, double dt,
                                                    const SolverConfig& solver_cfg) {
    State trial = iterate;
    auto res_fn = [&](const Eigen::VectorXd& x) {
        ch_unpack(x, trial);
        return residual_ch(trial, state_old, load_state, params, sources, dt);
    };
    auto jac_fn = [&](const Eigen::VectorXd& x) {
        ch_unpack(x, trial);
        return jacobian_ch(trial, params, dt);
    };
    auto [x_ch, rep] = newton_solve(res_fn, jac_fn, ch_pack(iterate), solver_cfg);
    State out = iterate;
    ch_unpack(x_ch, out);
    return {std::move(out), std::move(rep)};
}

/// One exact linear solve of the poroelastic block with phi frozen at the
/// iterate's phase field.
inline std::pair<State, SolveReport> solve_biot_block(const State& iterate,
                                                      const State& state_old,
                                                      const MaterialParams& params,
                                                      const SourceConfig& sources,
                                                      const BoundaryConditions& bcs, double dt,
                                                      const SolverConfig& solver_cfg) {
    SolveReport rep;
    const auto t0 = std::chrono::steady_clock::now();
    DiscreteSystem sys = jacobian_biot(iterate.grid, params, bcs, dt, iterate.phi);
    sys.rhs = -residual_biot(iterate, state_old, params, sources, bcs, dt, iterate.phi);
    Eigen::VectorXd dx = linear_solve(sys, solver_cfg, &rep);
    Eigen::VectorXd xb = biot_pack(iterate) + dx;
    State out = iterate;
    biot_unpack(xb, out);
    rep.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(out), std::move(rep)};
}

struct StepResult {
    State state;
    int newton_iters = 0; // max over sweeps
    std::vector<SolveReport> ch_reports;
    std::vector<SolveReport> biot_reports;
};

/// Advances one backward-Euler step with coupling_sweeps alternations of
/// {Newton on the phase block, linear solve of the poroelastic block}.
/// Throws SolverError (with iteration log) if the Newton loop fails.
inline StepResult step(const State& state_old, const MaterialParams& params,
                       const SourceConfig& sources, const BoundaryConditions& bcs,
                       const TimeScheme& scheme, const SolverConfig& solver_cfg) {
    scheme.validate();
    if (!state_old.finite()) throw std::invalid_argument("step: state_old has non-finite values");

    StepResult result;
    State iterate = state_old;
    for (int sweep = 0; sweep < scheme.coupling_sweeps; ++sweep) {
        // phase block: coupling loads frozen at the current iterate
        auto [ch_state, rep] =
            solve_ch_block(iterate, state_old, iterate, params, sources, scheme.dt, solver_cfg);
        iterate = std::move(ch_state);
        result.newton_iters = std::max(result.newton_iters, rep.newton_iters);
        result.ch_reports.push_back(std::move(rep));

        auto [biot_state, brep] =
            solve_biot_block(iterate, state_old, params, sources, bcs, scheme.dt, solver_cfg);
        iterate = std::move(biot_state);
        result.biot_reports.push_back(std::move(brep));
    }
    if (!iterate.finite())
        throw SolverError("step: produced non-finite state");
    result.state = std::move(iterate);
    return result;
}

} // namespace chb
