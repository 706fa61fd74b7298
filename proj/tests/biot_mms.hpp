#pragma once

// Manufactured stationary Biot solution shared by the unit and acceptance
// suites. The fields honor the supported boundary types (homogeneous
// displacement, constant left/right pressure, no-flux top/bottom):
//   ux = x(1-x) y(1-y),  uy = x(1-x) y^2 (1-y),  p = (1-x)^2
// with theta closed by theta = p/M + alpha div u and sources derived from
// the exact fields (body force by central differences of the exact stress).

#include <cmath>

#include "chb/assembly.hpp"
#include "chb/solver.hpp"

namespace chb_mms {

struct BiotMms {
    double err_u = 0.0;
    double err_p = 0.0;
};

inline BiotMms solve_biot_mms(int ncells) {
    using namespace chb;
    const Grid g = make_grid({ncells, ncells});
    MaterialParams params; // reference coefficients, interpolated at phi = 0.4
    const double phiu = 0.4;
    const Field phif(g, phiu);
    const double alpha = biot_alpha(phiu, params);
    const double mcomp = compressibility(phiu, params);
    const double kap = permeability(phiu, params);

    auto ux = [](double x, double y) { return x * (1.0 - x) * y * (1.0 - y); };
    auto uy = [](double x, double y) { return x * (1.0 - x) * y * y * (1.0 - y); };
    auto pex = [](double x, double) { return (1.0 - x) * (1.0 - x); };
    auto grad_u = [](double x, double y) {
        Mat2 m;
        m.xx = (1.0 - 2.0 * x) * y * (1.0 - y);
        m.xy = x * (1.0 - x) * (1.0 - 2.0 * y);
        m.yx = (1.0 - 2.0 * x) * y * y * (1.0 - y);
        m.yy = x * (1.0 - x) * (2.0 * y - 3.0 * y * y);
        return m;
    };
    auto theta_ex = [&](double x, double y) {
        return pex(x, y) / mcomp + alpha * grad_u(x, y).trace();
    };
    auto sigma = [&](double x, double y) {
        const Mat2 eff =
            stiffness_apply(phiu, grad_u(x, y).sym() - swelling(phiu, params), params);
        const double pv = pex(x, y);
        return Mat2{eff.xx - alpha * pv, eff.xy, eff.yx, eff.yy - alpha * pv};
    };

    SourceConfig sources;
    sources.fluid.value = -kap * 2.0; // -kappa * laplace(p_ex)
    sources.body_x.nodal.resize(static_cast<std::size_t>(g.num_nodes()));
    sources.body_y.nodal.resize(static_cast<std::size_t>(g.num_nodes()));
    const double fd = 1e-5; // f = -div sigma via central differences
    for (int n = 0; n < g.num_nodes(); ++n) {
        const Vec2 pos = g.node_pos(n);
        const Mat2 sxp = sigma(pos.x + fd, pos.y), sxm = sigma(pos.x - fd, pos.y);
        const Mat2 syp = sigma(pos.x, pos.y + fd), sym = sigma(pos.x, pos.y - fd);
        sources.body_x.nodal[static_cast<std::size_t>(n)] =
            -((sxp.xx - sxm.xx) + (syp.xy - sym.xy)) / (2.0 * fd);
        sources.body_y.nodal[static_cast<std::size_t>(n)] =
            -((sxp.yx - sxm.yx) + (syp.yy - sym.yy)) / (2.0 * fd);
    }

    BoundaryConditions bcs; // u homogeneous, p: 1 left, 0 right
    State old_state(g);
    for (int n = 0; n < g.num_nodes(); ++n) {
        const Vec2 pos = g.node_pos(n);
        old_state.theta[n] = theta_ex(pos.x, pos.y);
    }
    const double dt = 1.0;
    State sol(g);
    sol.phi = phif;
    DiscreteSystem sys = jacobian_biot(g, params, bcs, dt, phif);
    sys.rhs = -residual_biot(sol, old_state, params, sources, bcs, dt, phif);
    const Eigen::VectorXd dx = linear_solve(sys, SolverConfig{});
    Eigen::VectorXd x = biot_pack(sol) + dx;
    biot_unpack(x, sol);

    BiotMms out;
    const auto rule = quadrature(2);
    const double detj = 0.25 * g.hx() * g.hy();
    double eu = 0.0, ep = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        const int ci = c % g.nx();
        const int cj = c / g.nx();
        for (const auto& q : rule) {
            const auto s = shape_eval(g, q.xi, q.eta);
            const double x_q = g.x0() + (ci + 0.5 * (q.xi + 1.0)) * g.hx();
            const double y_q = g.y0() + (cj + 0.5 * (q.eta + 1.0)) * g.hy();
            Vec2 uh;
            double ph = 0.0;
            for (int a = 0; a < 4; ++a) {
                uh.x += s.value[a] * sol.u.at(nodes[a], 0);
                uh.y += s.value[a] * sol.u.at(nodes[a], 1);
                ph += s.value[a] * sol.p[nodes[a]];
            }
            const double w = q.weight * detj;
            const double dux = uh.x - ux(x_q, y_q);
            const double duy = uh.y - uy(x_q, y_q);
            const double dp = ph - pex(x_q, y_q);
            eu += w * (dux * dux + duy * duy);
            ep += w * dp * dp;
        }
    }
    out.err_u = std::sqrt(eu);
    out.err_p = std::sqrt(ep);
    return out;
}

} // namespace chb_mms
