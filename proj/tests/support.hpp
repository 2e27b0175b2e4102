#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "llrelax/llrelax.hpp"

namespace testsupport {

using namespace llrelax;

inline TrapConfig reference_trap(double atoms = 7000.0, Regime regime = Regime::thomas_fermi) {
    TrapConfig c;
    c.species = rubidium87;
    c.omega_perp = units::angular(1400.0);
    c.omega_long = units::angular(7.0);
    c.atom_number_total = atoms;
    c.regime = regime;
    return c;
}

inline TrapConfig homogeneous_box(double peak_density, double length) {
    TrapConfig c;
    c.species = rubidium87;
    c.omega_perp = units::angular(1400.0);
    c.peak_density_per_gas = peak_density;
    c.system_length = length;
    c.regime = Regime::homogeneous;
    return c;
}

/// Box at the density that gives the requested sound speed.
inline PhysicalParams box_with_sound_speed(double c, double length) {
    const double g = coupling_1d(rubidium87, units::angular(1400.0));
    return derive_params(homogeneous_box(c * c * rubidium87.mass / g, length));
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on std::legendre.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double r = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const double pn = std::legendre(n, r), pm = std::legendre(n - 1, r);
            const double dp = n * (r * pn - pm) / (r * r - 1.0);
            const double step = pn / dp;
            r -= step;
            if (std::abs(step) < 1e-16) break;
        }
        const double pn = std::legendre(n, r), pm = std::legendre(n - 1, r);
        const double dp = n * (r * pn - pm) / (r * r - 1.0);
        x[i] = r;
        w[i] = 2.0 / ((1.0 - r * r) * dp * dp);
    }
    return {x, w};
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testsupport
