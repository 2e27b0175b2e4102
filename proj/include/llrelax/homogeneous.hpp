#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "llrelax/constants.hpp"
#include "llrelax/fields.hpp"
#include "llrelax/params.hpp"

namespace llrelax {

/// Plane-wave phonon basis of a periodic box of length L, wave numbers
/// k = 2 pi p / L for p = +-1 .. +-p_max. Only p > 0 is stored; each entry
/// stands for the +k / -k pair.
class PlaneWaveModeSet {
  public:
    PlaneWaveModeSet(const PhysicalParams& params, double length, int p_max)
        : params_(params), length_(length), p_max_(p_max) {
        if (p_max < 1) throw std::invalid_argument("p_max must be at least 1");
        if (!(length > 0.0)) throw std::invalid_argument("box length must be positive");
        k_.resize(static_cast<std::size_t>(p_max));
        omega_.resize(k_.size());
        for (std::size_t i = 0; i < k_.size(); ++i) {
            k_[i] = 2.0 * pi * static_cast<double>(i + 1) / length;
            omega_[i] = params.c * k_[i];
        }
    }

    const PhysicalParams& params() const { return params_; }
    double length() const { return length_; }
    int p_max() const { return p_max_; }
    /// Number of physical modes (both signs of k).
    std::size_t size() const { return 2 * k_.size(); }
    std::size_t mode_count() const { return k_.size(); }
    const std::vector<double>& wave_numbers() const { return k_; }
    const std::vector<double>& frequencies() const { return omega_; }
    double max_frequency() const { return omega_.back(); }
    double cloud_radius() const { return 0.0; }

    double structure_factor(std::size_t i) const { return hbar * k_[i] / (2.0 * params_.mass * params_.c); }
    double structure_factor_luttinger(std::size_t i) const {
        return k_[i] * params_.K / (pi * params_.n_peak);
    }
    /// <b_k^dag b_k> = k_B T_eff / (hbar omega_k).
    double occupation(std::size_t i) const { return boltzmann * params_.T_eff / (hbar * omega_[i]); }
    double initial_phase_variance() const { return 1.0 / (2.0 * params_.squeezing * params_.n_peak); }
    double initial_density_variance() const { return 0.5 * params_.squeezing * params_.n_peak; }

    /// pi^2 n xi_n^2 / (L K^2); the squeezing factor scales the initial density noise.
    double prefactor() const {
        return pi * pi * params_.n_peak * params_.squeezing / (length_ * params_.K * params_.K);
    }

    /// Pairs +k and -k: weight 2 sin^2(omega t) / k^2 per stored entry.
    void time_weights(double t, std::vector<double>& out) const {
        out.resize(k_.size());
        const double a = prefactor();
        for (std::size_t i = 0; i < k_.size(); ++i) {
            const double s = std::sin(omega_[i] * t);
            out[i] = 2.0 * a * s * s / (k_[i] * k_[i]);
        }
    }

    void spatial_factors(double z, double zp, std::vector<double>& out) const {
        out.resize(k_.size());
        const double sep = z - zp;
        for (std::size_t i = 0; i < k_.size(); ++i) out[i] = 1.0 - std::cos(k_[i] * sep);
    }

    PlaneWaveModeSet doubled() const { return {params_, length_, 2 * p_max_}; }

  private:
    PhysicalParams params_;
    double length_;
    int p_max_;
    std::vector<double> k_;
    std::vector<double> omega_;
};

/// Phononic cutoff k_max ~ 1 / xi_h.
inline int default_p_max(const PhysicalParams& params, double length) {
    return std::max(1, static_cast<int>(std::ceil(length / (2.0 * pi * params.xi_h))));
}

inline PlaneWaveModeSet build_modes(const PhysicalParams& params, double length, int p_max = 0) {
    return {params, length, p_max == 0 ? default_p_max(params, length) : p_max};
}

/// Two-point relative-phase variance at separation zbar, initial phase noise neglected.
/// The sum is exactly L-periodic and even in zbar.
inline double phase_variance(double zbar, double t, const PlaneWaveModeSet& modes) {
    const auto& k = modes.wave_numbers();
    const auto& w = modes.frequencies();
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double s = std::sin(w[i] * t);
        sum += s * s * (1.0 - std::cos(k[i] * zbar)) / (k[i] * k[i]);
    }
    return 2.0 * modes.prefactor() * sum;
}

struct CheckedValue {
    double value;
    double doubled;
    bool converged;
};

/// phase_variance plus the p_max doubling test (relative 0.5%).
inline CheckedValue phase_variance_checked(double zbar, double t, const PlaneWaveModeSet& modes) {
    const double v = phase_variance(zbar, t, modes);
    const double v2 = phase_variance(zbar, t, modes.doubled());
    const bool ok = v2 == 0.0 ? v == 0.0 : std::abs(v2 - v) <= convergence_tolerance * std::abs(v2);
    return {v, v2, ok};
}

/// Dephased long-time limit 2|zbar| / l0 with l0 = 2 hbar^2 / (xi_n^2 m g).
inline double prethermal_variance(double zbar, const PhysicalParams& params) {
    return 2.0 * std::abs(zbar) / params.l0_squeezed();
}

/// Time average of phase_variance (sin^2 -> 1/2) on the finite box.
inline double time_averaged_variance(double zbar, const PlaneWaveModeSet& modes) {
    const auto& k = modes.wave_numbers();
    double sum = 0.0;
    for (double ki : k) sum += 0.5 * (1.0 - std::cos(ki * zbar)) / (ki * ki);
    return 2.0 * modes.prefactor() * sum;
}

/// Central-difference step: one twentieth of the fastest mode's half-period.
inline double derivative_step(const PlaneWaveModeSet& modes) { return pi / modes.max_frequency() / 20.0; }

/// d<dphi^2>/dt by central finite difference.
inline double variance_time_derivative(double zbar, double t, const PlaneWaveModeSet& modes) {
    if (!(t > 0.0)) throw std::domain_error("time derivative needs t > 0");
    const double dt = std::min(derivative_step(modes), 0.5 * t);
    return (phase_variance(zbar, t + dt, modes) - phase_variance(zbar, t - dt, modes)) / (2.0 * dt);
}

/// d<dphi^2>/d(zbar), summed term by term. Approaches (2 / l0) Theta(2ct - zbar).
inline double variance_separation_derivative(double zbar, double t, const PlaneWaveModeSet& modes) {
    const auto& k = modes.wave_numbers();
    const auto& w = modes.frequencies();
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double s = std::sin(w[i] * t);
        sum += s * s * std::sin(k[i] * zbar) / k[i];
    }
    return 2.0 * modes.prefactor() * sum;
}

/// Equilibrium variance at temperature T: mode variances 2 / (lambda_T k^2),
/// stationary in time. Tends to 2|zbar| / lambda_T on a large box.
inline double thermal_variance(double zbar, double temperature, const PlaneWaveModeSet& modes) {
    const double lambda_t = modes.params().thermal_length(temperature);
    const auto& k = modes.wave_numbers();
    double sum = 0.0;
    for (double ki : k) sum += (1.0 - std::cos(ki * zbar)) / (ki * ki);
    // (1/L) * sum over +-k of (2 / (lambda_T k^2)) * 2 (1 - cos k zbar)
    return 8.0 * sum / (lambda_t * modes.length());
}

/// Full rephasing time L / (2c); every omega_k t is then a multiple of pi.
inline double recurrence_time(double length, double c) {
    if (!(length > 0.0) || !(c > 0.0)) throw std::domain_error("recurrence_time needs positive inputs");
    return length / (2.0 * c);
}

}  // namespace llrelax
