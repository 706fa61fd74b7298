#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chb/model.hpp"

using namespace chb;

namespace {

MaterialParams reference_params() { return MaterialParams{}; }

Mat2 random_symmetric(std::mt19937& rng) {
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    Mat2 m{d(rng), 0.0, 0.0, d(rng)};
    m.xy = m.yx = d(rng);
    return m;
}

// random phi away from the clamp kinks at 0 and 1 where the one-sided
// derivative jumps
double random_phi(std::mt19937& rng) {
    std::uniform_real_distribution<double> d(-0.2, 1.2);
    double phi = d(rng);
    while (std::abs(phi) < 1e-4 || std::abs(phi - 1.0) < 1e-4) phi = d(rng);
    return phi;
}

} // namespace

TEST(DoubleWell, PurePhaseMinimaAndMidpoint) {
    EXPECT_DOUBLE_EQ(double_well(0.0), 0.0);
    EXPECT_DOUBLE_EQ(double_well(1.0), 0.0);
    EXPECT_DOUBLE_EQ(double_well(0.5), 0.0625);
}

TEST(DoubleWell, PrimeRoots) {
    EXPECT_DOUBLE_EQ(double_well_prime(0.5), 0.0);
    EXPECT_DOUBLE_EQ(double_well_prime(1.0), 0.0);
    EXPECT_DOUBLE_EQ(double_well_prime(0.0), 0.0);
    EXPECT_NEAR(double_well_prime(0.25), 0.1875, 1e-15);
}

TEST(DoubleWell, PrimeMatchesFiniteDifference) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> d(-0.3, 1.3);
    const double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
        const double phi = d(rng);
        const double fd = (double_well(phi + h) - double_well(phi - h)) / (2.0 * h);
        EXPECT_NEAR(fd, double_well_prime(phi), 1e-9);
    }
}

TEST(Interp, EndpointsBitExactAndClamped) {
    EXPECT_EQ(interp(0.0, 2.0, 5.0), 2.0);
    EXPECT_EQ(interp(1.0, 2.0, 5.0), 5.0);
    EXPECT_DOUBLE_EQ(interp(0.5, 0.0, 1.0), 0.5);
    EXPECT_EQ(interp(-0.1, 2.0, 5.0), 2.0);
    EXPECT_EQ(interp(1.7, 2.0, 5.0), 5.0);
    EXPECT_EQ(d_interp(-0.1, 2.0, 5.0), 0.0);
    EXPECT_EQ(d_interp(1.1, 2.0, 5.0), 0.0);
}

TEST(Swelling, ReferenceStateAndPresetValue) {
    const MaterialParams p = reference_params();
    const Mat2 zero = swelling(p.phi_ref, p);
    EXPECT_DOUBLE_EQ(zero.xx, 0.0);
    EXPECT_DOUBLE_EQ(zero.yy, 0.0);
    const Mat2 t = swelling(1.0, p); // xi = 0.1, phi_ref = 0.5
    EXPECT_DOUBLE_EQ(t.xx, 0.05);
    EXPECT_DOUBLE_EQ(t.yy, 0.05);
    EXPECT_DOUBLE_EQ(t.xy, 0.0);

    MaterialParams noswell = p;
    noswell.xi = 0.0;
    EXPECT_DOUBLE_EQ(swelling(0.73, noswell).xx, 0.0);
}

TEST(Stiffness, ZeroIdentityAndSymmetry) {
    const MaterialParams p = reference_params();
    const Mat2 z = stiffness_apply(0.3, Mat2{}, p);
    EXPECT_DOUBLE_EQ(z.frobenius_norm(), 0.0);

    // phase 1: G1 = 1, lam1 = 0.1 -> C(I) = (2 + 0.2) I
    const Mat2 ci = stiffness_apply(1.0, Mat2::identity(), p);
    EXPECT_NEAR(ci.xx, 2.2, 1e-14);
    EXPECT_NEAR(ci.yy, 2.2, 1e-14);
    EXPECT_NEAR(ci.xy, 0.0, 1e-14);

    std::mt19937 rng(17);
    for (int k = 0; k < 50; ++k) {
        const Mat2 a = random_symmetric(rng);
        const Mat2 ca = stiffness_apply(random_phi(rng), a, p);
        EXPECT_DOUBLE_EQ(ca.xy, ca.yx);
    }
}

TEST(ElasticEnergy, StressFreeSwellingStateAndHandValue) {
    const MaterialParams p = reference_params();
    std::mt19937 rng(3);
    for (int k = 0; k < 20; ++k) {
        const double phi = random_phi(rng);
        EXPECT_NEAR(elastic_energy_density(phi, swelling(phi, p), p), 0.0, 1e-18);
    }
    // phi = 1, eps = 0: A = -0.05 I, 1/2 A : C A = 0.005 (G + lam) = 0.0055
    const double e = elastic_energy_density(1.0, Mat2{}, p);
    EXPECT_NEAR(e, 0.0055, 1e-15);
    const double a = -0.05;
    const double oracle = p.G1 * (2.0 * a * a) + 0.5 * p.lam1 * (2.0 * a) * (2.0 * a);
    EXPECT_NEAR(e, oracle, 1e-16);
}

TEST(ElasticEnergy, NonNegativeForAdmissibleParams) {
    const MaterialParams p = reference_params();
    std::mt19937 rng(29);
    for (int k = 0; k < 200; ++k)
        EXPECT_GE(elastic_energy_density(random_phi(rng), random_symmetric(rng), p), 0.0);
}

TEST(FluidEnergy, EquilibratedAndPresetValue) {
    const MaterialParams p = reference_params();
    // theta = alpha div u (alpha interpolates to 1 throughout for the preset)
    EXPECT_DOUBLE_EQ(fluid_energy_density(0.7, 0.25, 0.25, p), 0.0);
    EXPECT_NEAR(fluid_energy_density(1.0, 0.2, 0.0, p), 0.02, 1e-16);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int k = 0; k < 200; ++k)
        EXPECT_GE(fluid_energy_density(random_phi(rng), d(rng), d(rng), p), 0.0);
}

TEST(VariationalDerivatives, VanishInDegenerateConfigurations) {
    const MaterialParams p = reference_params();
    std::mt19937 rng(37);
    for (int k = 0; k < 20; ++k) {
        const double phi = random_phi(rng);
        EXPECT_NEAR(dphi_elastic(phi, swelling(phi, p), p), 0.0, 1e-18);
    }
    // xi = 0 and uniform elastic moduli: energy independent of phi
    MaterialParams uni = p;
    uni.xi = 0.0;
    uni.G0 = uni.G1 = 2.0;
    uni.lam0 = uni.lam1 = 0.3;
    for (int k = 0; k < 20; ++k)
        EXPECT_DOUBLE_EQ(dphi_elastic(random_phi(rng), random_symmetric(rng), uni), 0.0);

    EXPECT_DOUBLE_EQ(dphi_fluid(0.4, 0.0, 0.0, p), 0.0);
    MaterialParams unif = p;
    unif.M0 = unif.M1 = 1.5;
    unif.alpha0 = unif.alpha1 = 0.8;
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int k = 0; k < 20; ++k)
        EXPECT_DOUBLE_EQ(dphi_fluid(random_phi(rng), d(rng), d(rng), unif), 0.0);
}

// Acceptance-grade gradient consistency: 1000 random pointwise states, both
// variational derivatives against central differences of their energies.
TEST(VariationalDerivatives, MatchFiniteDifferencesOfEnergies) {
    const MaterialParams p = reference_params();
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const double h = 1e-6;
    for (int k = 0; k < 1000; ++k) {
        const double phi = random_phi(rng);
        const Mat2 eps = random_symmetric(rng);
        const double theta = d(rng);
        const double divu = d(rng);

        const double fde =
            (elastic_energy_density(phi + h, eps, p) - elastic_energy_density(phi - h, eps, p)) /
            (2.0 * h);
        const double de = dphi_elastic(phi, eps, p);
        EXPECT_NEAR(fde, de, 1e-6 * std::max(1.0, std::abs(de)));

        const double fdf = (fluid_energy_density(phi + h, theta, divu, p) -
                            fluid_energy_density(phi - h, theta, divu, p)) /
                           (2.0 * h);
        const double df = dphi_fluid(phi, theta, divu, p);
        EXPECT_NEAR(fdf, df, 1e-6 * std::max(1.0, std::abs(df)));
    }
}

TEST(InterfaceEnergy, UniformFields) {
    const MaterialParams p = reference_params();
    const Grid g = make_grid({16, 16});
    Field zero(g, 0.0);
    EXPECT_DOUBLE_EQ(interface_energy(zero, p), 0.0);

    Field half(g, 0.5);
    EXPECT_NEAR(interface_energy(half, p), p.gamma * 0.0625 / p.ell, 1e-13);
}

TEST(InterfaceEnergy, TanhProfileMatches1dQuadratureOracle) {
    MaterialParams p = reference_params();
    p.ell = 0.1;
    const Grid g = make_grid({512, 2});
    Field phi(g);
    auto profile = [&](double x) { return 0.5 * (1.0 + std::tanh((x - 0.5) / (std::sqrt(2.0) * p.ell))); };
    for (int n = 0; n < g.num_nodes(); ++n) phi[n] = profile(g.node_pos(n).x);

    // independent 1D quadrature of the analytic integrand at 1e-4 resolution
    const double dx = 1e-4;
    double oracle = 0.0;
    for (double x = 0.0; x < 1.0 - 0.5 * dx; x += dx) {
        auto integrand = [&](double s) {
            const double t = std::tanh((s - 0.5) / (std::sqrt(2.0) * p.ell));
            const double dphi = (1.0 - t * t) / (2.0 * std::sqrt(2.0) * p.ell);
            return 0.5 * p.ell * dphi * dphi + double_well(profile(s)) / p.ell;
        };
        oracle += 0.5 * dx * (integrand(x) + integrand(x + dx));
    }
    oracle *= p.gamma;
    EXPECT_NEAR(oracle, p.gamma * std::sqrt(2.0) / 6.0, 2e-3); // exact profile energy
    EXPECT_NEAR(interface_energy(phi, p), oracle, 2e-3);
}
