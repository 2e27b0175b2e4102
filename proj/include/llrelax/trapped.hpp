#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "llrelax/constants.hpp"
#include "llrelax/fields.hpp"
#include "llrelax/legendre.hpp"
#include "llrelax/params.hpp"
#include "llrelax/quadrature.hpp"

namespace llrelax {

/// omega_j = omega sqrt(j (j+1) / 2).
inline double mode_frequency(int j, double omega) {
    if (j < 1) throw std::domain_error("mode index must be >= 1");
    if (j == 1) return omega;
    return omega * std::sqrt(0.5 * j * (j + 1.0));
}

enum class ProfileKind { thomas_fermi, quasi_1d };

/// Longitudinal density of one gas. Dynamics always use the effective parabola
/// (n_peak, radius); the quasi-1D shape itself is kept for inspection.
struct DensityProfile {
    ProfileKind kind = ProfileKind::thomas_fermi;
    double n_peak = 0;
    double radius = 0;
    double chemical_potential = 0;  // J
    double normalization_residual = 0;
    // quasi-1D equation-of-state inputs
    double mass = 0, omega_long = 0, omega_perp = 0, scattering_length = 0;
    std::vector<double> z;
    std::vector<double> n;

    double density(double zz) const {
        if (std::abs(zz) >= radius) return 0.0;
        if (kind == ProfileKind::thomas_fermi) return n_peak * (1.0 - zz * zz / (radius * radius));
        const double x = (chemical_potential - 0.5 * mass * omega_long * omega_long * zz * zz) /
                         (hbar * omega_perp);
        return x > 0.0 ? x * (x + 2.0) / (4.0 * scattering_length) : 0.0;
    }

    double atoms(double rel_tol = 1e-12) const {
        const double guess = (4.0 / 3.0) * n_peak * radius;
        return adaptive_simpson([this](double zz) { return density(zz); }, -radius, radius,
                                rel_tol * guess);
    }
};

namespace detail {

inline void sample_profile(DensityProfile& p, std::size_t count = 201) {
    p.z = linspace(-p.radius, p.radius, count);
    p.n.resize(count);
    for (std::size_t i = 0; i < count; ++i) p.n[i] = p.density(p.z[i]);
}

}  // namespace detail

inline DensityProfile tf_profile(const PhysicalParams& params) {
    if (!is_trapped(params.regime)) throw ConfigError("tf_profile requires a trapped regime");
    DensityProfile p;
    p.kind = ProfileKind::thomas_fermi;
    p.n_peak = params.n_peak;
    p.radius = params.R;
    p.chemical_potential = params.mu;
    p.mass = params.mass;
    p.omega_long = params.omega_long;
    p.omega_perp = params.omega_perp;
    p.scattering_length = params.scattering_length;
    detail::sample_profile(p);
    return p;
}

/// Radially integrated equation of state mu(n) = hbar omega_perp (sqrt(1 + 4 n a) - 1).
inline double quasi1d_chemical_potential(double density, double omega_perp, double scattering_length) {
    return hbar * omega_perp * (std::sqrt(1.0 + 4.0 * density * scattering_length) - 1.0);
}

/// Local-density profile with the quasi-1D equation of state. The chemical
/// potential is fixed by bisection on the atom number (or directly from a given
/// peak density).
inline DensityProfile quasi1d_profile(const TrapConfig& config) {
    config.validate();
    if (config.regime != Regime::quasi_1d) throw ConfigError("quasi1d_profile requires regime quasi_1d");
    DensityProfile p;
    p.kind = ProfileKind::quasi_1d;
    p.mass = config.species.mass;
    p.omega_long = config.omega_long;
    p.omega_perp = config.omega_perp;
    p.scattering_length = config.species.scattering_length;

    auto set_mu = [&p](double mu) {
        p.chemical_potential = mu;
        p.radius = std::sqrt(2.0 * mu / p.mass) / p.omega_long;
        p.n_peak = p.density(0.0);
    };

    if (config.peak_density_per_gas) {
        set_mu(quasi1d_chemical_potential(*config.peak_density_per_gas, p.omega_perp,
                                          p.scattering_length));
        p.n_peak = *config.peak_density_per_gas;
    } else {
        const double target = 0.5 * *config.atom_number_total;
        auto atoms_at = [&](double mu) {
            set_mu(mu);
            return p.atoms(1e-12);
        };
        double lo = 0.0;
        double hi = hbar * config.omega_perp;
        for (int i = 0; atoms_at(hi) < target; ++i) {
            lo = hi;
            hi *= 2.0;
            if (i > 200) throw NonConvergence("chemical potential bracketing failed", atoms_at(hi) - target);
        }
        for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (atoms_at(mid) < target ? lo : hi) = mid;
        }
        const double got = atoms_at(0.5 * (lo + hi));
        p.normalization_residual = (got - target) / target;
        if (std::abs(p.normalization_residual) > 1e-8)
            throw NonConvergence("quasi-1D normalization did not converge", p.normalization_residual);
    }
    detail::sample_profile(p);
    return p;
}

/// Parameters of the effective parabola (n_peak, R) of a profile.
inline PhysicalParams params_from_profile(PhysicalParams base, const DensityProfile& profile) {
    base = with_peak_density(base, profile.n_peak);
    base.R = profile.radius;
    return base;
}

/// Dynamics parameters for any regime: quasi-1D swaps in its effective parabola.
inline PhysicalParams effective_params(const TrapConfig& config) {
    const PhysicalParams p = derive_params(config);
    if (config.regime != Regime::quasi_1d) return p;
    return params_from_profile(p, quasi1d_profile(config));
}

/// Largest j with hbar omega_j <= mu.
inline int default_j_max(const PhysicalParams& params) {
    const double ratio = params.mu / (hbar * params.omega_long);
    int j = static_cast<int>(std::floor(0.5 * (-1.0 + std::sqrt(1.0 + 8.0 * ratio * ratio))));
    while (j > 1 && mode_frequency(j, params.omega_long) > params.mu / hbar) --j;
    while (mode_frequency(j + 1, params.omega_long) <= params.mu / hbar) ++j;
    return std::max(1, j);
}

/// Legendre phonon basis of a parabolic cloud, j = 1 .. j_max, with the uniform
/// initial density noise xi_n^2 n_peak / (2R) per mode.
class LegendreModeSet {
  public:
    LegendreModeSet(const PhysicalParams& params, int j_max) : params_(params), j_max_(j_max) {
        if (j_max < 1) throw std::invalid_argument("j_max must be at least 1");
        if (!(params.R > 0.0)) throw std::invalid_argument("Legendre modes need a trapped radius");
        omega_.resize(static_cast<std::size_t>(j_max));
        for (int j = 1; j <= j_max; ++j) omega_[static_cast<std::size_t>(j - 1)] = mode_frequency(j, params.omega_long);
    }

    const PhysicalParams& params() const { return params_; }
    int j_max() const { return j_max_; }
    std::size_t mode_count() const { return omega_.size(); }
    const std::vector<double>& frequencies() const { return omega_; }
    double max_frequency() const { return omega_.back(); }
    double radius() const { return params_.R; }
    double cloud_radius() const { return params_.R; }

    /// v_N = 2 g / (pi hbar), uniform across a Thomas-Fermi cloud.
    double density_velocity() const { return 2.0 * params_.g / (pi * hbar); }
    double initial_density_variance() const {
        return params_.squeezing * params_.n_peak / (2.0 * params_.R);
    }
    double prefactor() const {
        const double vn = density_velocity();
        return pi * pi * vn * vn * initial_density_variance();
    }

    void time_weights(double t, std::vector<double>& out) const {
        out.resize(omega_.size());
        const double a = prefactor();
        for (std::size_t i = 0; i < omega_.size(); ++i) {
            const double s = std::sin(omega_[i] * t);
            out[i] = a * s * s / (omega_[i] * omega_[i]);
        }
    }

    void spatial_factors(double z, double zp, std::vector<double>& out) const {
        check_inside(z);
        check_inside(zp);
        std::vector<double> fz, fzp;
        legendre_f_all(j_max_, clamp_unit(z / params_.R), fz);
        legendre_f_all(j_max_, clamp_unit(zp / params_.R), fzp);
        out.resize(omega_.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double d = fz[i] - fzp[i];
            out[i] = d * d;
        }
    }

    LegendreModeSet doubled() const { return {params_, 2 * j_max_}; }

    void check_inside(double z) const {
        if (std::abs(z) > params_.R * (1.0 + 1e-12))
            throw std::domain_error("point z = " + std::to_string(z) + " m lies outside the cloud");
    }

  private:
    static double clamp_unit(double x) { return x > 1.0 ? 1.0 : (x < -1.0 ? -1.0 : x); }

    PhysicalParams params_;
    int j_max_;
    std::vector<double> omega_;
};

inline LegendreModeSet build_legendre_modes(const PhysicalParams& params, int j_max = 0) {
    return {params, j_max == 0 ? default_j_max(params) : j_max};
}

/// Two-point phase variance of the trapped gas, initial phase noise neglected.
inline double trapped_phase_variance(double z, double zp, double t, const LegendreModeSet& modes) {
    return evaluate_variance(modes, z, zp, t);
}

/// Equilibrium variance at temperature T in the Legendre basis: per-mode phase
/// variance (pi v_N / omega_j)^2 k_B T / (2 g R), stationary in time.
inline double trapped_thermal_variance(double z, double zp, double temperature, const LegendreModeSet& modes) {
    if (!(temperature > 0.0)) throw std::domain_error("temperature must be positive");
    std::vector<double> s;
    modes.spatial_factors(z, zp, s);
    const auto& p = modes.params();
    const double vn = modes.density_velocity();
    const double density_var = boltzmann * temperature / (2.0 * p.g * p.R);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double gain = pi * vn / modes.frequencies()[i];
        sum += gain * gain * density_var * s[i];
    }
    return sum;
}

}  // namespace llrelax
