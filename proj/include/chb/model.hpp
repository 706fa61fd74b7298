#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "chb/errors.hpp"
#include "chb/grid.hpp"
#include "chb/tensor.hpp"

namespace chb {

/// Physical coefficients of the coupled model. Phase-0 / phase-1 values are
/// blended with the smoothstep interpolation below; phase 1 is the soft,
/// low-permeability material.
struct MaterialParams {
    double gamma = 1.0;   // surface tension
    double ell = 0.1;     // diffuse-interface width
    double mobility = 1.0;
    double xi = 0.1;      // swelling magnitude
    double phi_ref = 0.5; // swelling reference state
    double G0 = 100.0, G1 = 1.0;
    double lam0 = 20.0, lam1 = 0.1;
    double M0 = 1.0, M1 = 1.0;
    double kappa0 = 1.0, kappa1 = 0.01;
    double alpha0 = 1.0, alpha1 = 1.0;

    bool operator==(const MaterialParams&) const = default;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be > 0");
        };
        positive(gamma, "gamma");
        positive(ell, "ell");
        positive(mobility, "mobility");
        positive(G0, "G0");
        positive(G1, "G1");
        positive(M0, "M0");
        positive(M1, "M1");
        positive(kappa0, "kappa0");
        positive(kappa1, "kappa1");
        if (lam0 < 0.0 || lam1 < 0.0) throw ConfigError("lam0/lam1 must be >= 0");
    }
};

/// Double-well potential phi^2 (1-phi)^2 with minima at the pure phases.
inline double double_well(double phi) {
    const double a = phi * (1.0 - phi);
    return a * a;
}

inline double double_well_prime(double phi) {
    return 2.0 * phi * (1.0 - phi) * (1.0 - 2.0 * phi);
}

inline double double_well_second(double phi) {
    return 12.0 * phi * phi - 12.0 * phi + 2.0;
}

/// Coefficient interpolation q0 + pi(phi) (q1 - q0) with the smoothstep
/// pi(s) = s^2 (3 - 2s); phi is clamped to [0,1] so overshooting Newton
/// iterates cannot drive coefficients out of range.
inline double interp(double phi, double q0, double q1) {
    const double s = std::clamp(phi, 0.0, 1.0);
    return q0 + s * s * (3.0 - 2.0 * s) * (q1 - q0);
}

inline double d_interp(double phi, double q0, double q1) {
    if (phi <= 0.0 || phi >= 1.0) return 0.0;
    return 6.0 * phi * (1.0 - phi) * (q1 - q0);
}

inline double shear_modulus(double phi, const MaterialParams& p) { return interp(phi, p.G0, p.G1); }
inline double lame_lambda(double phi, const MaterialParams& p) { return interp(phi, p.lam0, p.lam1); }
inline double compressibility(double phi, const MaterialParams& p) { return interp(phi, p.M0, p.M1); }
inline double permeability(double phi, const MaterialParams& p) { return interp(phi, p.kappa0, p.kappa1); }
inline double biot_alpha(double phi, const MaterialParams& p) { return interp(phi, p.alpha0, p.alpha1); }

/// Swelling eigenstrain xi (phi - phi_ref) I; linear in phi, unclamped.
inline Mat2 swelling(double phi, const MaterialParams& p) {
    const double s = p.xi * (phi - p.phi_ref);
    return {s, 0.0, 0.0, s};
}

/// Isotropic plane-strain stiffness: C(phi) A = 2 G(phi) A + lambda(phi) tr(A) I.
inline Mat2 stiffness_apply(double phi, const Mat2& A, const MaterialParams& p) {
    const double G = shear_modulus(phi, p);
    const double lam = lame_lambda(phi, p);
    const double t = lam * A.trace();
    return {2.0 * G * A.xx + t, 2.0 * G * A.xy, 2.0 * G * A.yx, 2.0 * G * A.yy + t};
}

/// C'(phi) A, the phi-derivative of the stiffness acting on A.
inline Mat2 stiffness_apply_dphi(double phi, const Mat2& A, const MaterialParams& p) {
    const double dG = d_interp(phi, p.G0, p.G1);
    const double dlam = d_interp(phi, p.lam0, p.lam1);
    const double t = dlam * A.trace();
    return {2.0 * dG * A.xx + t, 2.0 * dG * A.xy, 2.0 * dG * A.yx, 2.0 * dG * A.yy + t};
}

/// 1/2 (eps - T(phi)) : C(phi)(eps - T(phi)).
inline double elastic_energy_density(double phi, const Mat2& strain, const MaterialParams& p) {
    const Mat2 e = strain - swelling(phi, p);
    return 0.5 * e.ddot(stiffness_apply(phi, e, p));
}

/// M(phi)/2 (theta - alpha(phi) div u)^2.
inline double fluid_energy_density(double phi, double theta, double div_u, const MaterialParams& p) {
    const double d = theta - biot_alpha(phi, p) * div_u;
    return 0.5 * compressibility(phi, p) * d * d;
}

/// Variational derivative of the elastic energy with respect to phi:
/// -T'(phi) : C(phi)(eps - T) + 1/2 (eps - T) : C'(phi)(eps - T).
inline double dphi_elastic(double phi, const Mat2& strain, const MaterialParams& p) {
    const Mat2 e = strain - swelling(phi, p);
    const Mat2 Ce = stiffness_apply(phi, e, p);
    const double term1 = -p.xi * Ce.trace(); // T'(phi) = xi I
    const double term2 = 0.5 * e.ddot(stiffness_apply_dphi(phi, e, p));
    return term1 + term2;
}

/// Variational derivative of the fluid energy with respect to phi:
/// M'(phi)/2 (theta - alpha div u)^2 - M (theta - alpha div u) alpha'(phi) div u.
inline double dphi_fluid(double phi, double theta, double div_u, const MaterialParams& p) {
    const double d = theta - biot_alpha(phi, p) * div_u;
    const double dM = d_interp(phi, p.M0, p.M1);
    const double dalpha = d_interp(phi, p.alpha0, p.alpha1);
    return 0.5 * dM * d * d - compressibility(phi, p) * d * dalpha * div_u;
}

/// Ginzburg-Landau functional gamma int (ell/2 |grad phi|^2 + Psi(phi)/ell).
inline double interface_energy(const Field& phi, const MaterialParams& p) {
    const Grid& g = phi.grid;
    const auto rule = quadrature(2);
    const double detj = 0.25 * g.hx() * g.hy();
    double total = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (const auto& q : rule) {
            const auto s = shape_eval(g, q.xi, q.eta);
            double v = 0.0;
            Vec2 grad;
            for (int a = 0; a < 4; ++a) {
                v += s.value[a] * phi[nodes[a]];
                grad = grad + s.grad[a] * phi[nodes[a]];
            }
            total += q.weight * detj *
                     (0.5 * p.ell * grad.dot(grad) + double_well(v) / p.ell);
        }
    }
    return p.gamma * total;
}

/// The five unknown fields at one time level. All components share one grid.
struct State {
    Grid grid;
    Field phi;
    Field mu;
    VectorField u;
    Field p;
    Field theta;

    State() = default;
    explicit State(const Grid& g) : grid(g), phi(g), mu(g), u(g), p(g), theta(g) {}

    bool finite() const {
        auto ok = [](const std::vector<double>& v) {
            for (double x : v)
                if (!std::isfinite(x)) return false;
            return true;
        };
        return ok(phi.values) && ok(mu.values) && ok(u.values) && ok(p.values) && ok(theta.values);
    }
};

/// Reaction / body-force / fluid-source terms: constant unless a per-node
/// field is attached.
struct ScalarSource {
    double value = 0.0;
    std::vector<double> nodal; // empty means constant

    double at_node(int node) const {
        return nodal.empty() ? value : nodal[static_cast<std::size_t>(node)];
    }
    bool is_field() const { return !nodal.empty(); }
};

struct SourceConfig {
    ScalarSource reaction;   // R in the phase equation
    ScalarSource body_x;     // body force components
    ScalarSource body_y;
    ScalarSource fluid;      // S_f in the mass balance
};

} // namespace chb
