#pragma once

#include <cmath>

#include "chb/errors.hpp"
#include "chb/grid.hpp"
#include "chb/io.hpp"
#include "chb/model.hpp"

namespace chb {

/// Initial states for the experiment presets.
///
///   paper_halfspace  phi = 0 for x <= layer_x, 1 beyond; u, p, theta zero
///   ch_relax_1d      same layer initial condition, meant to be run with
///                    uniform materials and no pressure drive
///   ch_disk          radial tanh disk of phase 1 with radius disk_r0
///   custom           uniform phi = custom_phi0
inline State initial_state(const Grid& grid, const RunConfig& cfg) {
    State s(grid);
    if (cfg.scenario == "paper_halfspace" || cfg.scenario == "ch_relax_1d") {
        for (int n = 0; n < grid.num_nodes(); ++n)
            s.phi[n] = grid.node_pos(n).x <= cfg.layer_x ? 0.0 : 1.0;
    } else if (cfg.scenario == "ch_disk") {
        const double xc = 0.5 * (grid.x0() + grid.x1());
        const double yc = 0.5 * (grid.y0() + grid.y1());
        const double scale = std::sqrt(2.0) * cfg.material.ell;
        for (int n = 0; n < grid.num_nodes(); ++n) {
            const Vec2 pos = grid.node_pos(n);
            const double r = std::hypot(pos.x - xc, pos.y - yc);
            s.phi[n] = 0.5 * (1.0 + std::tanh((cfg.disk_r0 - r) / scale));
        }
    } else if (cfg.scenario == "custom") {
        for (int n = 0; n < grid.num_nodes(); ++n) s.phi[n] = cfg.custom_phi0;
    } else {
        throw ConfigError("unknown scenario '" + cfg.scenario + "'");
    }
    return s;
}

} // namespace chb
