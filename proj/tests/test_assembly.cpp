#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "chb/assembly.hpp"
#include "chb/scenario.hpp"

#include "biot_mms.hpp"

using namespace chb;

namespace {

MaterialParams uniform_pure_ch() {
    MaterialParams p;
    p.xi = 0.0;
    p.G0 = p.G1 = 1.0;
    p.lam0 = p.lam1 = 0.1;
    p.M0 = p.M1 = 1.0;
    p.kappa0 = p.kappa1 = 1.0;
    p.alpha0 = p.alpha1 = 1.0;
    return p;
}

double field_integral(const Field& f) {
    const Grid& g = f.grid;
    const auto rule = quadrature(2);
    const double detj = 0.25 * g.hx() * g.hy();
    double total = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (const auto& q : rule) {
            const auto s = shape_eval(g, q.xi, q.eta);
            double v = 0.0;
            for (int a = 0; a < 4; ++a) v += s.value[a] * f[nodes[a]];
            total += q.weight * detj * v;
        }
    }
    return total;
}

// integral of each shape function, for converting residual entries into
// pointwise-strength values
std::vector<double> node_support_measure(const Grid& g) {
    std::vector<double> scale(static_cast<std::size_t>(g.num_nodes()), 0.0);
    const auto rule = quadrature(2);
    const double detj = 0.25 * g.hx() * g.hy();
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (const auto& q : rule) {
            const auto s = shape_eval(g, q.xi, q.eta);
            for (int a = 0; a < 4; ++a)
                scale[static_cast<std::size_t>(nodes[a])] += q.weight * detj * s.value[a];
        }
    }
    return scale;
}

} // namespace

TEST(ResidualCh, StationaryPurePhaseIsZeroWithoutSwelling) {
    const Grid g = make_grid({8, 8});
    const MaterialParams p = uniform_pure_ch();
    State s(g);
    for (int n = 0; n < g.num_nodes(); ++n) s.phi[n] = 1.0;
    const Eigen::VectorXd r = residual_ch(s, s, s, p, SourceConfig{}, 1e-3);
    EXPECT_LE(r.lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(ResidualCh, PurePhaseWithCompatibleChemicalPotential) {
    // with swelling on, phi = 1 is stationary once mu equals the constant
    // coupling load
    const Grid g = make_grid({8, 8});
    const MaterialParams p; // reference coefficients, xi = 0.1
    State s(g);
    const double load = dphi_elastic(1.0, Mat2{}, p) + dphi_fluid(1.0, 0.0, 0.0, p);
    for (int n = 0; n < g.num_nodes(); ++n) {
        s.phi[n] = 1.0;
        s.mu[n] = load;
    }
    const Eigen::VectorXd r = residual_ch(s, s, s, p, SourceConfig{}, 1e-3);
    EXPECT_LE(r.lpNorm<Eigen::Infinity>(), 1e-13);
}

TEST(ResidualCh, SpinodalMidpointIsStationary) {
    // phi = 0.5 uniform: Psi'(0.5) = 0 and T(0.5) = 0, so everything vanishes
    const Grid g = make_grid({6, 6});
    const MaterialParams p;
    State s(g);
    for (int n = 0; n < g.num_nodes(); ++n) s.phi[n] = 0.5;
    const Eigen::VectorXd r = residual_ch(s, s, s, p, SourceConfig{}, 1e-3);
    EXPECT_LE(r.lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(ResidualCh, MismatchedGridsViolateContract) {
    const State a{(make_grid({4, 4}))};
    const State b{(make_grid({5, 4}))};
    EXPECT_THROW(residual_ch(a, b, a, MaterialParams{}, SourceConfig{}, 1e-3),
                 std::invalid_argument);
}

// Manufactured 1D state: phi = (1 - cos(pi x))/2 with mu set to the exact
// chemical potential -gamma ell phi'' + (gamma/ell) Psi'(phi) and the
// reaction source balancing the mu-Laplacian. The scaled residual must
// vanish at second order under refinement.
TEST(ResidualCh, ManufacturedProfileResidualSecondOrder) {
    MaterialParams p = uniform_pure_ch();
    p.ell = 0.1;
    const double pi = std::acos(-1.0);

    auto scaled_residual = [&](int nx) {
        const Grid g = make_grid({nx, 2});
        State s(g);
        SourceConfig sources;
        sources.reaction.nodal.resize(static_cast<std::size_t>(g.num_nodes()));
        for (int n = 0; n < g.num_nodes(); ++n) {
            const double x = g.node_pos(n).x;
            const double phi = 0.5 * (1.0 - std::cos(pi * x));
            const double d1 = 0.5 * pi * std::sin(pi * x);
            const double d2 = 0.5 * pi * pi * std::cos(pi * x);
            const double d4 = -0.5 * pi * pi * pi * pi * std::cos(pi * x);
            const double psi2 = double_well_second(phi);
            const double psi3 = 24.0 * phi - 12.0;
            s.phi[n] = phi;
            s.mu[n] = -p.gamma * p.ell * d2 + (p.gamma / p.ell) * double_well_prime(phi);
            const double mu_xx =
                -p.gamma * p.ell * d4 + (p.gamma / p.ell) * (psi3 * d1 * d1 + psi2 * d2);
            sources.reaction.nodal[static_cast<std::size_t>(n)] = -p.mobility * mu_xx;
        }
        const Eigen::VectorXd r = residual_ch(s, s, s, p, sources, 1e-3);
        const auto scale = node_support_measure(g);
        double worst = 0.0;
        for (int n = 0; n < g.num_nodes(); ++n) {
            worst = std::max(worst, std::abs(r[ch_dof(n, 0)]) / scale[static_cast<std::size_t>(n)]);
            worst = std::max(worst, std::abs(r[ch_dof(n, 1)]) / scale[static_cast<std::size_t>(n)]);
        }
        return worst;
    };

    const double e16 = scaled_residual(16);
    const double e32 = scaled_residual(32);
    const double e64 = scaled_residual(64);
    EXPECT_GE(std::log2(e16 / e32), 1.8);
    EXPECT_GE(std::log2(e32 / e64), 1.8);
}

TEST(ResidualBiot, StressFreeRestStateIsZero) {
    const Grid g = make_grid({6, 6});
    const MaterialParams p;
    BoundaryConditions bcs;
    bcs.p_left = bcs.p_right = 0.0;
    State s(g);
    for (int n = 0; n < g.num_nodes(); ++n) s.phi[n] = p.phi_ref; // T = 0
    const Eigen::VectorXd r = residual_biot(s, s, p, SourceConfig{}, bcs, 1e-3, s.phi);
    EXPECT_LE(r.lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(ResidualBiot, PurePhaseClosureAtRest) {
    // phi = 1 with u = 0, theta = 0: the closure p = M (theta - alpha div u)
    // holds with p = 0, the constant swelling stress is weakly
    // divergence-free on interior rows, and Dirichlet rows carry the
    // constraint residual
    const Grid g = make_grid({6, 6});
    const MaterialParams p;
    BoundaryConditions bcs;
    bcs.p_left = bcs.p_right = 0.0;
    State s(g);
    for (int n = 0; n < g.num_nodes(); ++n) s.phi[n] = 1.0;
    const Eigen::VectorXd r = residual_biot(s, s, p, SourceConfig{}, bcs, 1e-3, s.phi);
    EXPECT_LE(r.lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(ResidualBiot, ManufacturedSolutionConvergence) {
    using chb_mms::solve_biot_mms;
    const auto a = solve_biot_mms(8);
    const auto b = solve_biot_mms(16);
    const auto c = solve_biot_mms(32);
    EXPECT_GE(std::log2(a.err_u / b.err_u), 1.7);
    EXPECT_GE(std::log2(b.err_u / c.err_u), 1.7);
    EXPECT_GE(std::log2(a.err_p / b.err_p), 1.7);
    EXPECT_GE(std::log2(b.err_p / c.err_p), 1.7);
}

TEST(JacobianCh, MatchesFiniteDifferenceDirectionalDerivative) {
    const Grid g = make_grid({8, 8});
    const MaterialParams p;
    std::mt19937 rng(91);
    std::uniform_real_distribution<double> dphi(-0.1, 1.1);
    std::uniform_real_distribution<double> dmu(-1.0, 1.0);

    State base(g);
    State load(g);
    for (int n = 0; n < g.num_nodes(); ++n) {
        base.phi[n] = dphi(rng);
        base.mu[n] = dmu(rng);
        load.phi[n] = dphi(rng);
        load.theta[n] = 0.3 * dmu(rng);
        load.u.at(n, 0) = 0.1 * dmu(rng);
        load.u.at(n, 1) = 0.1 * dmu(rng);
    }
    const State old_state(g);
    const double dt = 1e-3;
    auto res_at = [&](const Eigen::VectorXd& x) {
        State s = base;
        ch_unpack(x, s);
        return residual_ch(s, old_state, load, p, SourceConfig{}, dt);
    };
    const Eigen::VectorXd x0 = ch_pack(base);
    const DiscreteSystem sys = jacobian_ch(base, p, dt);

    const double h = 1e-7;
    for (int trial = 0; trial < 3; ++trial) {
        Eigen::VectorXd v(x0.size());
        for (int i = 0; i < v.size(); ++i) v[i] = dmu(rng);
        v /= v.lpNorm<Eigen::Infinity>();
        const Eigen::VectorXd fd = (res_at(x0 + h * v) - res_at(x0 - h * v)) / (2.0 * h);
        const Eigen::VectorXd jv = sys.matrix * v;
        const double rel =
            (fd - jv).lpNorm<Eigen::Infinity>() / std::max(1e-12, jv.lpNorm<Eigen::Infinity>());
        EXPECT_LE(rel, 1e-5);
    }
}

TEST(JacobianBiot, ResidualIsAffineInItsBlock) {
    const Grid g = make_grid({6, 5});
    const MaterialParams p;
    BoundaryConditions bcs;
    Field phif(g);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int n = 0; n < g.num_nodes(); ++n) phif[n] = 0.5 + 0.5 * d(rng);

    const State old_state(g);
    State s1(g), s2(g);
    s1.phi = phif;
    s2.phi = phif;
    for (int n = 0; n < g.num_nodes(); ++n) {
        s1.u.at(n, 0) = d(rng);
        s1.u.at(n, 1) = d(rng);
        s1.p[n] = d(rng);
        s1.theta[n] = d(rng);
        s2.u.at(n, 0) = d(rng);
        s2.u.at(n, 1) = d(rng);
        s2.p[n] = d(rng);
        s2.theta[n] = d(rng);
    }
    const double dt = 1e-2;
    const DiscreteSystem sys = jacobian_biot(g, p, bcs, dt, phif);
    const Eigen::VectorXd r1 = residual_biot(s1, old_state, p, SourceConfig{}, bcs, dt, phif);
    const Eigen::VectorXd r2 = residual_biot(s2, old_state, p, SourceConfig{}, bcs, dt, phif);
    const Eigen::VectorXd lhs = r2 - r1;
    const Eigen::VectorXd rhs = sys.matrix * (biot_pack(s2) - biot_pack(s1));
    EXPECT_LE((lhs - rhs).lpNorm<Eigen::Infinity>(),
              1e-9 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>()));
}

TEST(JacobianBiot, DirichletRowsCarryExactlyUnitDiagonal) {
    const Grid g = make_grid({5, 4});
    const MaterialParams p;
    BoundaryConditions bcs;
    const Field phif(g, 0.7);
    const DiscreteSystem sys = jacobian_biot(g, p, bcs, 1e-3, phif);
    ASSERT_EQ(sys.constrained.size(), static_cast<std::size_t>(sys.matrix.rows()));
    int constrained_rows = 0;
    for (int row = 0; row < sys.matrix.rows(); ++row) {
        if (!sys.constrained[static_cast<std::size_t>(row)]) continue;
        ++constrained_rows;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sys.matrix, row); it;
             ++it) {
            if (it.col() == row)
                EXPECT_DOUBLE_EQ(it.value(), 1.0);
            else
                EXPECT_DOUBLE_EQ(it.value(), 0.0);
        }
    }
    const int boundary_nodes = 2 * (g.nx() + 1) + 2 * (g.ny() - 1);
    EXPECT_EQ(constrained_rows, 2 * boundary_nodes + 2 * (g.ny() + 1));
}

TEST(Conservation, PhiAndThetaPreservedWithNaturalBoundaries) {
    const Grid g = make_grid({10, 10});
    const MaterialParams p;
    SourceConfig sources;
    BoundaryConditions bcs;
    bcs.p_dirichlet = false;
    TimeScheme scheme;
    SolverConfig solver;

    State s(g);
    for (int n = 0; n < g.num_nodes(); ++n) {
        const Vec2 pos = g.node_pos(n);
        s.phi[n] = pos.x <= 0.5 ? 0.0 : 1.0;
        s.theta[n] = 0.1 * std::sin(2.0 * pos.x + pos.y);
    }
    const double phi0 = field_integral(s.phi);
    const double th0 = field_integral(s.theta);
    for (int k = 0; k < 3; ++k) {
        s = step(s, p, sources, bcs, scheme, solver).state;
        EXPECT_LE(std::abs(field_integral(s.phi) - phi0), 1e-10 * std::max(1.0, std::abs(phi0)));
        EXPECT_LE(std::abs(field_integral(s.theta) - th0), 1e-10 * std::max(1.0, std::abs(th0)));
    }
}

TEST(Step, PurePhaseEquilibriumIsAFixedPoint) {
    const Grid g = make_grid({8, 8});
    const MaterialParams p = uniform_pure_ch();
    SourceConfig sources;
    BoundaryConditions bcs;
    bcs.p_dirichlet = false; // no pressure drive
    State s(g);
    for (int n = 0; n < g.num_nodes(); ++n) s.phi[n] = 1.0;

    const State s1 = step(s, p, sources, bcs, TimeScheme{}, SolverConfig{}).state;
    double dmax = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) {
        dmax = std::max(dmax, std::abs(s1.phi[n] - s.phi[n]));
        dmax = std::max(dmax, std::abs(s1.mu[n]));
        dmax = std::max(dmax, std::abs(s1.p[n]));
        dmax = std::max(dmax, std::abs(s1.theta[n]));
        dmax = std::max(dmax, std::abs(s1.u.at(n, 0)));
        dmax = std::max(dmax, std::abs(s1.u.at(n, 1)));
    }
    EXPECT_LE(dmax, 1e-10);
}

TEST(Step, ReferenceFirstStepConvergesWithinBudget) {
    // reference configuration at ell = 0.1 on the h = sqrt(ell)/3.2 grid, one
    // step from the sharp-layer initial data
    const MaterialParams p;
    const int n = static_cast<int>(std::llround(1.0 / (std::sqrt(p.ell) / 3.2)));
    const Grid g = make_grid({n, n});
    State s(g);
    for (int node = 0; node < g.num_nodes(); ++node)
        s.phi[node] = g.node_pos(node).x <= 0.5 ? 0.0 : 1.0;

    const StepResult sr =
        step(s, p, SourceConfig{}, BoundaryConditions{}, TimeScheme{}, SolverConfig{});
    EXPECT_LE(sr.newton_iters, 8);
    for (const auto& rep : sr.ch_reports) {
        EXPECT_TRUE(rep.converged);
        EXPECT_LE(rep.increment_norms.back(), 1e-6);
    }
}

TEST(Step, BackwardEulerIsFirstOrderInTime) {
    // smooth pure-CH relaxation; Richardson error against a dt/8 reference
    MaterialParams p = uniform_pure_ch();
    p.ell = 0.2;
    const Grid g = make_grid({16, 2});
    SourceConfig sources;
    BoundaryConditions bcs;
    bcs.p_dirichlet = false;
    SolverConfig solver;
    solver.newton_abs_tol = 1e-11;
    const double pi = std::acos(-1.0);

    State init(g);
    for (int n = 0; n < g.num_nodes(); ++n)
        init.phi[n] = 0.5 * (1.0 - std::cos(pi * g.node_pos(n).x));

    auto evolve = [&](double dt, int steps) {
        TimeScheme scheme;
        scheme.dt = dt;
        scheme.coupling_sweeps = 1;
        State s = init;
        for (int k = 0; k < steps; ++k) s = step(s, p, sources, bcs, scheme, solver).state;
        return s;
    };
    const double t_star = 0.04;
    const State ref = evolve(t_star / 80.0, 80);
    const State coarse = evolve(t_star / 10.0, 10);
    const State fine = evolve(t_star / 20.0, 20);

    double e1 = 0.0, e2 = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) {
        e1 = std::max(e1, std::abs(coarse.phi[n] - ref.phi[n]));
        e2 = std::max(e2, std::abs(fine.phi[n] - ref.phi[n]));
    }
    const double order = std::log2(e1 / e2);
    EXPECT_GE(order, 0.7);
    EXPECT_LE(order, 1.3);
}

TEST(Step, DeterministicAcrossRepeatedRuns) {
    const Grid g = make_grid({8, 8});
    const MaterialParams p;
    State s(g);
    for (int n = 0; n < g.num_nodes(); ++n) s.phi[n] = g.node_pos(n).x <= 0.5 ? 0.0 : 1.0;

    auto advance = [&] {
        State cur = s;
        for (int k = 0; k < 2; ++k)
            cur = step(cur, p, SourceConfig{}, BoundaryConditions{}, TimeScheme{}, SolverConfig{})
                      .state;
        return cur;
    };
    const State a = advance();
    const State b = advance();
    EXPECT_EQ(std::memcmp(a.phi.values.data(), b.phi.values.data(),
                          sizeof(double) * a.phi.values.size()),
              0);
    EXPECT_EQ(
        std::memcmp(a.u.values.data(), b.u.values.data(), sizeof(double) * a.u.values.size()), 0);
    EXPECT_EQ(
        std::memcmp(a.p.values.data(), b.p.values.data(), sizeof(double) * a.p.values.size()), 0);
}

TEST(Step, DecoupledConfigurationMatchesPhaseBlockOnlyPath) {
    // with xi = 0, uniform coefficients, no-flux pressure, and a zero
    // poroelastic state, step() must leave (u, p, theta) exactly zero and
    // produce the same phase fields as solving the phase block alone
    const Grid g = make_grid({16, 16});
    MaterialParams p = uniform_pure_ch();
    p.ell = 0.1;
    SourceConfig sources;
    BoundaryConditions bcs;
    bcs.p_dirichlet = false;
    TimeScheme scheme;
    scheme.coupling_sweeps = 1;
    SolverConfig solver;

    State s(g);
    for (int n = 0; n < g.num_nodes(); ++n) {
        const Vec2 pos = g.node_pos(n);
        const double r = std::hypot(pos.x - 0.5, pos.y - 0.5);
        s.phi[n] = 0.5 * (1.0 + std::tanh((0.25 - r) / (std::sqrt(2.0) * p.ell)));
    }
    const State via_step = step(s, p, sources, bcs, scheme, solver).state;
    const State via_ch = solve_ch_block(s, s, s, p, sources, scheme.dt, solver).first;

    EXPECT_EQ(std::memcmp(via_step.phi.values.data(), via_ch.phi.values.data(),
                          sizeof(double) * via_ch.phi.values.size()),
              0);
    EXPECT_EQ(std::memcmp(via_step.mu.values.data(), via_ch.mu.values.data(),
                          sizeof(double) * via_ch.mu.values.size()),
              0);
    for (int n = 0; n < g.num_nodes(); ++n) {
        EXPECT_EQ(via_step.u.at(n, 0), 0.0);
        EXPECT_EQ(via_step.u.at(n, 1), 0.0);
        EXPECT_EQ(via_step.p[n], 0.0);
        EXPECT_EQ(via_step.theta[n], 0.0);
    }
}

TEST(Jacobians, SparsityPatternsAreStructurallySymmetric) {
    const Grid g = make_grid({5, 4});
    const MaterialParams p;
    const Field phif(g, 0.6);
    State s(g);
    s.phi = phif;

    auto check_symmetric = [](const Eigen::SparseMatrix<double, Eigen::RowMajor>& m) {
        Eigen::SparseMatrix<double> a = m;
        a = a.unaryExpr([](double) { return 1.0; }); // structure only
        Eigen::SparseMatrix<double> diff = Eigen::SparseMatrix<double>(a.transpose()) - a;
        double worst = 0.0;
        for (int k = 0; k < diff.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
                worst = std::max(worst, std::abs(it.value()));
        return worst == 0.0;
    };
    EXPECT_TRUE(check_symmetric(jacobian_ch(s, p, 1e-3).matrix));
    EXPECT_TRUE(check_symmetric(jacobian_biot(g, p, BoundaryConditions{}, 1e-3, phif).matrix));
}
