#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "chb/assembly.hpp"
#include "chb/diagnostics.hpp"
#include "chb/grid.hpp"
#include "chb/model.hpp"
#include "chb/solver.hpp"

// Quick executable invariant checks behind the CLI `selftest` subcommand.
// These duplicate a slice of the unit suites so a deployed binary can vouch
// for itself without the test harness.

namespace chb {

struct SelfTestResult {
    std::string name;
    bool passed = false;
};

namespace selftest_detail {

inline bool quadrature_weights() {
    for (int order : {1, 2, 3}) {
        double sum = 0.0;
        for (const auto& q : quadrature(order)) sum += q.weight;
        if (std::abs(sum - 4.0) > 1e-14) return false;
    }
    return true;
}

inline bool partition_of_unity() {
    const Grid g(GridSpec{4, 4});
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const auto s = shape_eval(g, unit(rng), unit(rng));
        const double sum = s.value[0] + s.value[1] + s.value[2] + s.value[3];
        if (std::abs(sum - 1.0) > 1e-14) return false;
    }
    return true;
}

inline bool interp_endpoints() {
    return interp(0.0, 3.0, 7.0) == 3.0 && interp(1.0, 3.0, 7.0) == 7.0 &&
           interp(-0.1, 2.0, 5.0) == 2.0 && interp(1.3, 2.0, 5.0) == 5.0;
}

inline bool double_well_derivative() {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-0.3, 1.3);
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
        const double phi = dist(rng);
        const double fd = (double_well(phi + h) - double_well(phi - h)) / (2.0 * h);
        if (std::abs(fd - double_well_prime(phi)) > 1e-9) return false;
    }
    return true;
}

inline bool variational_derivatives() {
    MaterialParams p; // reference values
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> phid(-0.2, 1.2);
    std::uniform_real_distribution<double> sd(-0.5, 0.5);
    const double h = 1e-6;
    int done = 0;
    while (done < 100) {
        const double phi = phid(rng);
        if (std::abs(phi) < 1e-4 || std::abs(phi - 1.0) < 1e-4) continue; // clamp kink
        ++done;
        Mat2 eps{sd(rng), 0.0, 0.0, sd(rng)};
        eps.xy = eps.yx = sd(rng);
        const double theta = sd(rng), divu = sd(rng);
        const double fde = (elastic_energy_density(phi + h, eps, p) -
                            elastic_energy_density(phi - h, eps, p)) /
                           (2.0 * h);
        const double de = dphi_elastic(phi, eps, p);
        if (std::abs(fde - de) > 1e-6 * std::max(1.0, std::abs(de))) return false;
        const double fdf = (fluid_energy_density(phi + h, theta, divu, p) -
                            fluid_energy_density(phi - h, theta, divu, p)) /
                           (2.0 * h);
        const double df = dphi_fluid(phi, theta, divu, p);
        if (std::abs(fdf - df) > 1e-6 * std::max(1.0, std::abs(df))) return false;
    }
    return true;
}

inline bool newton_scalar() {
    // x^2 - 4 = 0 from x0 = 3
    auto res = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(1);
        r[0] = x[0] * x[0] - 4.0;
        return r;
    };
    auto jac = [](const Eigen::VectorXd& x) {
        DiscreteSystem sys;
        sys.matrix.resize(1, 1);
        sys.matrix.insert(0, 0) = 2.0 * x[0];
        sys.matrix.makeCompressed();
        sys.rhs = Eigen::VectorXd::Zero(1);
        return sys;
    };
    Eigen::VectorXd x0(1);
    x0[0] = 3.0;
    SolverConfig cfg;
    cfg.newton_abs_tol = 1e-12;
    const auto [x, rep] = newton_solve(res, jac, x0, cfg);
    return std::abs(x[0] - 2.0) < 1e-10 && rep.converged;
}

inline bool mass_conservation() {
    const Grid g(GridSpec{8, 8});
    MaterialParams params;
    SourceConfig sources;
    BoundaryConditions bcs;
    bcs.p_dirichlet = false; // no-flux everywhere
    TimeScheme scheme;
    SolverConfig solver;
    State s(g);
    for (int n = 0; n < g.num_nodes(); ++n) {
        const Vec2 pos = g.node_pos(n);
        s.phi[n] = 0.5 + 0.4 * std::sin(3.0 * pos.x) * std::cos(2.0 * pos.y);
        s.theta[n] = 0.2 + 0.1 * pos.x;
    }
    auto integral = [&](const Field& f) {
        double total = 0.0;
        const auto rule = quadrature(2);
        const double detj = 0.25 * g.hx() * g.hy();
        for (int c = 0; c < g.num_cells(); ++c) {
            const auto nodes = g.cell_nodes(c);
            for (const auto& q : rule) {
                const auto sh = shape_eval(g, q.xi, q.eta);
                double v = 0.0;
                for (int a = 0; a < 4; ++a) v += sh.value[a] * f[nodes[a]];
                total += q.weight * detj * v;
            }
        }
        return total;
    };
    const double phi0 = integral(s.phi);
    const double th0 = integral(s.theta);
    const State s1 = step(s, params, sources, bcs, scheme, solver).state;
    const double dphi = std::abs(integral(s1.phi) - phi0);
    const double dth = std::abs(integral(s1.theta) - th0);
    return dphi <= 1e-10 * std::max(1.0, std::abs(phi0)) &&
           dth <= 1e-10 * std::max(1.0, std::abs(th0));
}

} // namespace selftest_detail

inline std::vector<SelfTestResult> run_selftests() {
    using namespace selftest_detail;
    std::vector<SelfTestResult> out;
    out.push_back({"quadrature weights sum to 4", quadrature_weights()});
    out.push_back({"shape partition of unity", partition_of_unity()});
    out.push_back({"interpolation endpoints exact", interp_endpoints()});
    out.push_back({"double-well derivative consistency", double_well_derivative()});
    out.push_back({"variational-derivative consistency", variational_derivatives()});
    out.push_back({"newton scalar benchmark", newton_scalar()});
    out.push_back({"phi/theta conservation over one step", mass_conservation()});
    return out;
}

} // namespace chb
