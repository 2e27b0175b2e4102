#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llrelax/constants.hpp"
#include "llrelax/errors.hpp"

namespace llrelax {

enum class Regime { homogeneous, thomas_fermi, quasi_1d };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::homogeneous: return "homogeneous";
        case Regime::thomas_fermi: return "thomas_fermi";
        case Regime::quasi_1d: return "quasi_1d";
    }
    return "?";
}

inline bool is_trapped(Regime r) { return r != Regime::homogeneous; }

struct Species {
    double mass;               // kg
    double scattering_length;  // m
};

/// Rb-87 with a = 5.2 nm; reproduces the reference numbers used throughout.
inline constexpr Species rubidium87{1.44316e-25, 5.2e-9};

/// User-facing physical scenario, SI units.
struct TrapConfig {
    Species species = rubidium87;
    double omega_perp = 0.0;
    double omega_long = 0.0;  // 0 for homogeneous
    std::optional<double> atom_number_total;     // before splitting
    std::optional<double> peak_density_per_gas;  // atoms / m
    double system_length = 0.0;                  // homogeneous box size
    double squeezing = 1.0;                      // xi_n^2
    Regime regime = Regime::thomas_fermi;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ConfigError(std::string(name) + " must be strictly positive");
        };
        positive(species.mass, "atomic_mass");
        positive(species.scattering_length, "scattering_length");
        positive(omega_perp, "omega_perp");
        positive(squeezing, "squeezing");
        if (atom_number_total.has_value() == peak_density_per_gas.has_value())
            throw ConfigError("exactly one of atom_number_total / peak_density_per_gas must be set");
        if (atom_number_total) positive(*atom_number_total, "atom_number_total");
        if (peak_density_per_gas) positive(*peak_density_per_gas, "peak_density_per_gas");
        if (regime == Regime::homogeneous) {
            if (omega_long != 0.0)
                throw ConfigError("omega_long must be 0 for the homogeneous regime");
            if (atom_number_total) positive(system_length, "system_length");
        } else {
            positive(omega_long, "omega_long");
        }
    }
};

/// Every derived scalar of a scenario. Trapped regimes describe the parabolic
/// (Thomas-Fermi) profile; quasi-1D effective values come from trapped.hpp.
struct PhysicalParams {
    double mass = 0;
    double scattering_length = 0;
    double omega_perp = 0;
    double omega_long = 0;
    double squeezing = 1;
    Regime regime = Regime::homogeneous;

    double g = 0;       // J m
    double n_peak = 0;  // atoms / m, per gas
    double c = 0;       // m / s
    double K = 0;
    double mu = 0;      // J
    double xi_h = 0;    // m
    double l0 = 0;      // 2 hbar^2 / (m g), unsqueezed
    double T_eff = 0;   // K
    double R = 0;       // m, trapped only
    double v_N = 0;
    double v_J = 0;

    /// Prethermal correlation length including the squeezing factor.
    double l0_squeezed() const { return l0 / squeezing; }

    /// Thermal phase-coherence length lambda_T = hbar^2 n / (m k_B T).
    double thermal_length(double temperature) const {
        if (!(temperature > 0.0)) throw std::domain_error("temperature must be positive");
        return hbar * hbar * n_peak / (mass * boltzmann * temperature);
    }
};

inline double coupling_1d(const Species& s, double omega_perp) {
    return 2.0 * hbar * omega_perp * s.scattering_length;
}

/// Closed-form Thomas-Fermi inversion of N/2 = (4/3) n R(n), R = sqrt(2) c(n) / omega.
inline double peak_density_from_atom_number(double atom_number_total, const TrapConfig& config) {
    if (!is_trapped(config.regime))
        throw ConfigError("peak_density_from_atom_number requires a trapped regime");
    if (!(atom_number_total > 0.0)) throw ConfigError("atom number must be positive");
    const double g = coupling_1d(config.species, config.omega_perp);
    const double per_gas = 0.5 * atom_number_total;
    const double base = 3.0 * per_gas * config.omega_long * std::sqrt(config.species.mass / g) /
                        (4.0 * std::numbers::sqrt2);
    return std::cbrt(base * base);
}

namespace detail {

inline void fill_from_density(PhysicalParams& p) {
    p.c = std::sqrt(p.g * p.n_peak / p.mass);
    p.K = 0.5 * hbar * pi * std::sqrt(p.n_peak / (p.mass * p.g));
    p.mu = p.g * p.n_peak;
    p.xi_h = hbar / (p.mass * p.c);
    p.l0 = 2.0 * hbar * hbar / (p.mass * p.g);
    p.T_eff = p.squeezing * p.n_peak * p.g / (2.0 * boltzmann);
    p.v_N = p.c / p.K;
    p.v_J = p.c * p.K;
    p.R = is_trapped(p.regime) ? std::numbers::sqrt2 * p.c / p.omega_long : 0.0;
}

}  // namespace detail

inline PhysicalParams derive_params(const TrapConfig& config) {
    config.validate();
    PhysicalParams p;
    p.mass = config.species.mass;
    p.scattering_length = config.species.scattering_length;
    p.omega_perp = config.omega_perp;
    p.omega_long = config.omega_long;
    p.squeezing = config.squeezing;
    p.regime = config.regime;
    p.g = coupling_1d(config.species, config.omega_perp);
    if (config.peak_density_per_gas) {
        p.n_peak = *config.peak_density_per_gas;
    } else if (is_trapped(config.regime)) {
        p.n_peak = peak_density_from_atom_number(*config.atom_number_total, config);
    } else {
        p.n_peak = 0.5 * *config.atom_number_total / config.system_length;
    }
    detail::fill_from_density(p);
    return p;
}

/// Same scenario re-expressed at a different peak density (radius follows).
inline PhysicalParams with_peak_density(PhysicalParams p, double n_peak) {
    p.n_peak = n_peak;
    detail::fill_from_density(p);
    return p;
}

struct DephasingTimes {
    double tau0;  // k = 0 phase diffusion
    double tau;   // multimode dephasing
};

inline DephasingTimes dephasing_times(const PhysicalParams& p, double length) {
    if (!(length > 0.0)) throw std::domain_error("length must be positive");
    return {hbar / p.g * std::sqrt(length / p.n_peak), 8.0 * p.K * p.K / (pi * pi * p.n_peak * p.c)};
}

/// True when l0 / xi_n^2 < L / 2, i.e. multimode dephasing wins over k = 0 diffusion.
/// The boundary itself counts as not multimode.
inline bool multimode_condition(const PhysicalParams& p, double length, double squeezing) {
    if (!(length > 0.0) || !(squeezing > 0.0))
        throw std::domain_error("length and squeezing must be positive");
    return p.l0 / squeezing < 0.5 * length;
}

struct SqueezingLimit {
    double ratio;
    double decibel;
};

inline SqueezingLimit squeezing_limit(double omega_perp, double length, double mass,
                                      double scattering_length) {
    if (!(omega_perp > 0) || !(length > 0) || !(mass > 0) || !(scattering_length > 0))
        throw std::domain_error("squeezing_limit inputs must be positive");
    const double r = 2.0 * hbar / (mass * omega_perp * scattering_length * length);
    return {r, 10.0 * std::log10(r)};
}

/// Row-major matrix of dB values: rows follow omega_perp, columns follow length.
struct SqueezingMap {
    std::vector<double> omega_perp;
    std::vector<double> length;
    std::vector<double> decibel;

    double at(std::size_t row, std::size_t col) const { return decibel[row * length.size() + col]; }
};

inline SqueezingMap squeezing_map(std::span<const double> omega_perp_grid,
                                  std::span<const double> length_grid, double mass,
                                  double scattering_length) {
    if (omega_perp_grid.empty() || length_grid.empty())
        throw ConfigError("squeezing map grids must be non-empty");
    auto ascending = [](std::span<const double> v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1])) return false;
        return true;
    };
    if (!ascending(omega_perp_grid) || !ascending(length_grid))
        throw ConfigError("squeezing map grids must be strictly ascending");
    SqueezingMap out{{omega_perp_grid.begin(), omega_perp_grid.end()},
                     {length_grid.begin(), length_grid.end()},
                     {}};
    out.decibel.reserve(omega_perp_grid.size() * length_grid.size());
    for (double w : omega_perp_grid)
        for (double len : length_grid)
            out.decibel.push_back(squeezing_limit(w, len, mass, scattering_length).decibel);
    return out;
}

}  // namespace llrelax
