#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "llrelax/constants.hpp"
#include "llrelax/errors.hpp"
#include "llrelax/homogeneous.hpp"
#include "llrelax/legendre.hpp"
#include "llrelax/parallel.hpp"
#include "llrelax/rng.hpp"
#include "llrelax/trapped.hpp"

namespace llrelax {

enum class InitialKind { split, thermal };

struct EnsembleSpec {
    std::size_t realizations = 10000;
    std::uint64_t master_seed = 20130901;
    InitialKind initial = InitialKind::split;
    double temperature = 0.0;  // thermal only, K
    bool include_initial_phase_noise = false;

    void validate() const {
        if (realizations < 2) throw ConfigError("oracle needs >= 2 realizations for a standard error");
        if (initial == InitialKind::thermal && !(temperature > 0.0))
            throw ConfigError("thermal initial condition needs a positive temperature");
    }
};

/// One real Gaussian degree of freedom of the relative phase field:
///   phi_c(t) = phase_sigma * b * cos(omega t) - gain * density_sigma * a * sin(omega t)
/// with a, b independent standard normals; phi(z, t) = sum_c phi_c(t) shape_c(z).
struct OracleComponent {
    double omega;
    double gain;
    double density_sigma;
    double phase_sigma;
};

/// Components plus their shapes sampled on the evaluation points. The last point
/// is the reference z'.
struct OracleBasis {
    std::vector<OracleComponent> components;
    std::vector<double> points;
    std::vector<double> shapes;  // [component][point]

    std::size_t point_count() const { return points.size(); }
};

namespace detail {

inline std::vector<double> with_reference(const std::vector<double>& positions, double reference) {
    std::vector<double> pts = positions;
    pts.push_back(reference);
    return pts;
}

}  // namespace detail

/// Real-field pairing of +k / -k: each stored k contributes a cosine and a sine
/// component with shape sqrt(2/L) {cos, sin}(k z).
inline OracleBasis oracle_basis(const PlaneWaveModeSet& modes, const EnsembleSpec& spec,
                                const std::vector<double>& positions, double reference) {
    spec.validate();
    const auto& p = modes.params();
    OracleBasis b;
    b.points = detail::with_reference(positions, reference);
    const double norm = std::sqrt(2.0 / modes.length());
    double lambda_t = 0.0;
    if (spec.initial == InitialKind::thermal) lambda_t = p.thermal_length(spec.temperature);
    for (std::size_t i = 0; i < modes.mode_count(); ++i) {
        const double k = modes.wave_numbers()[i];
        OracleComponent c{};
        c.omega = modes.frequencies()[i];
        c.gain = pi / (k * p.K);
        if (spec.initial == InitialKind::split) {
            c.density_sigma = std::sqrt(modes.initial_density_variance());
            c.phase_sigma = spec.include_initial_phase_noise ? std::sqrt(modes.initial_phase_variance()) : 0.0;
        } else {
            c.density_sigma = std::sqrt(boltzmann * spec.temperature / (2.0 * p.g));
            c.phase_sigma = std::sqrt(2.0 / (lambda_t * k * k));
        }
        b.components.push_back(c);
        b.components.push_back(c);
        for (double z : b.points) b.shapes.push_back(norm * std::cos(k * z));
        for (double z : b.points) b.shapes.push_back(norm * std::sin(k * z));
    }
    return b;
}

/// Legendre components f_j(z/R) with the uniform mode occupations.
inline OracleBasis oracle_basis(const LegendreModeSet& modes, const EnsembleSpec& spec,
                                const std::vector<double>& positions, double reference) {
    spec.validate();
    const auto& p = modes.params();
    OracleBasis b;
    b.points = detail::with_reference(positions, reference);
    for (double z : b.points) modes.check_inside(z);
    const double vn = modes.density_velocity();
    const double R = modes.radius();
    for (std::size_t i = 0; i < modes.mode_count(); ++i) {
        OracleComponent c{};
        c.omega = modes.frequencies()[i];
        c.gain = pi * vn / c.omega;
        if (spec.initial == InitialKind::split) {
            c.density_sigma = std::sqrt(modes.initial_density_variance());
            c.phase_sigma = spec.include_initial_phase_noise
                                ? std::sqrt(1.0 / (2.0 * p.squeezing * p.n_peak * R))
                                : 0.0;
        } else {
            c.density_sigma = std::sqrt(boltzmann * spec.temperature / (2.0 * p.g * R));
            c.phase_sigma = c.gain * c.density_sigma;
        }
        b.components.push_back(c);
    }
    std::vector<std::vector<double>> f(b.points.size());
    for (std::size_t k = 0; k < b.points.size(); ++k) {
        const double x = std::clamp(b.points[k] / R, -1.0, 1.0);
        legendre_f_all(modes.j_max(), x, f[k]);
    }
    for (std::size_t i = 0; i < modes.mode_count(); ++i)
        for (std::size_t k = 0; k < b.points.size(); ++k) b.shapes.push_back(f[k][i]);
    return b;
}

/// Relative phase phi(z, t) of one realization: values[time][point], last point = reference.
struct PhaseField {
    std::vector<double> points;
    std::vector<double> times;
    std::vector<double> values;

    double at(std::size_t ti, std::size_t pi_) const { return values[ti * points.size() + pi_]; }
};

/// Draws the initial quadratures of every component from the stream keyed by
/// (master_seed, realization index, component index) and evolves them harmonically.
inline PhaseField sample_realization(std::size_t index, const EnsembleSpec& spec, const OracleBasis& basis,
                                     const std::vector<double>& times) {
    if (index >= spec.realizations) throw std::out_of_range("realization index beyond ensemble size");
    const Philox4x32 gen(spec.master_seed);
    const std::size_t np = basis.point_count();
    PhaseField out{basis.points, times, std::vector<double>(times.size() * np, 0.0)};
    for (std::size_t c = 0; c < basis.components.size(); ++c) {
        const auto& comp = basis.components[c];
        const auto [a, b] = normal_pair(gen({static_cast<std::uint32_t>(index),
                                             static_cast<std::uint32_t>(std::uint64_t{index} >> 32),
                                             static_cast<std::uint32_t>(c), 0u}));
        const double* shape = basis.shapes.data() + c * np;
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            const double wt = comp.omega * times[ti];
            const double amp =
                comp.phase_sigma * b * std::cos(wt) - comp.gain * comp.density_sigma * a * std::sin(wt);
            if (amp == 0.0) continue;
            double* row = out.values.data() + ti * np;
            for (std::size_t k = 0; k < np; ++k) row[k] += amp * shape[k];
        }
    }
    return out;
}

/// Monte-Carlo estimate of C(z, z', t) = <cos(phi(z) - phi(z'))>, with the
/// imaginary channel <sin(...)> kept as a sanity check. Values are [time][position].
struct EnsembleStats {
    std::vector<double> positions;
    double reference = 0.0;
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> stderr_;
    std::vector<double> imag_mean;
    std::vector<double> imag_stderr;
    std::size_t realizations = 0;

    std::size_t index(std::size_t ti, std::size_t zi) const { return ti * positions.size() + zi; }
};

namespace detail {

struct Moments {
    std::vector<double> c, c2, s, s2;

    explicit Moments(std::size_t n = 0) : c(n, 0.0), c2(n, 0.0), s(n, 0.0), s2(n, 0.0) {}

    void add(const Moments& o) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i] += o.c[i];
            c2[i] += o.c2[i];
            s[i] += o.s[i];
            s2[i] += o.s2[i];
        }
    }
};

inline constexpr std::size_t oracle_block = 64;

}  // namespace detail

/// Fixed blocks of realizations are summed in order, then combined by a pairwise
/// tree, so the result is bit-identical for any thread count.
inline EnsembleStats estimate_pcf(const EnsembleSpec& spec, const OracleBasis& basis,
                                  const std::vector<double>& times) {
    spec.validate();
    const std::size_t np = basis.point_count();
    const std::size_t nz = np - 1;
    const std::size_t ng = times.size() * nz;
    const std::size_t blocks = (spec.realizations + detail::oracle_block - 1) / detail::oracle_block;
    std::vector<detail::Moments> partial(blocks);
    parallel_for(blocks, [&](std::size_t bi) {
        detail::Moments m(ng);
        const std::size_t lo = bi * detail::oracle_block;
        const std::size_t hi = std::min(spec.realizations, lo + detail::oracle_block);
        for (std::size_t r = lo; r < hi; ++r) {
            const auto field = sample_realization(r, spec, basis, times);
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                const double ref = field.at(ti, nz);
                for (std::size_t zi = 0; zi < nz; ++zi) {
                    const double d = field.at(ti, zi) - ref;
                    const double cd = std::cos(d), sd = std::sin(d);
                    const std::size_t g = ti * nz + zi;
                    m.c[g] += cd;
                    m.c2[g] += cd * cd;
                    m.s[g] += sd;
                    m.s2[g] += sd * sd;
                }
            }
        }
        partial[bi] = std::move(m);
    });
    for (std::size_t stride = 1; stride < blocks; stride *= 2)
        for (std::size_t i = 0; i + stride < blocks; i += 2 * stride) partial[i].add(partial[i + stride]);

    EnsembleStats st;
    st.positions.assign(basis.points.begin(), basis.points.end() - 1);
    st.reference = basis.points.back();
    st.times = times;
    st.realizations = spec.realizations;
    const double n = static_cast<double>(spec.realizations);
    auto finish = [n](double sum, double sum2, double& mean, double& se) {
        mean = sum / n;
        const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
        se = std::sqrt(var / n);
    };
    st.mean.resize(ng);
    st.stderr_.resize(ng);
    st.imag_mean.resize(ng);
    st.imag_stderr.resize(ng);
    const auto& tot = partial.front();
    for (std::size_t g = 0; g < ng; ++g) {
        finish(tot.c[g], tot.c2[g], st.mean[g], st.stderr_[g]);
        finish(tot.s[g], tot.s2[g], st.imag_mean[g], st.imag_stderr[g]);
    }
    return st;
}

template <class Modes>
EnsembleStats estimate_pcf(const EnsembleSpec& spec, const Modes& modes, const std::vector<double>& positions,
                           double reference, const std::vector<double>& times) {
    return estimate_pcf(spec, oracle_basis(modes, spec, positions, reference), times);
}

/// Var[dphi(zbar)] of the initial (shot-noise limited) phase, homogeneous basis.
inline double initial_phase_noise_variance(double zbar, const PlaneWaveModeSet& modes) {
    double sum = 0.0;
    for (double k : modes.wave_numbers()) sum += 1.0 - std::cos(k * zbar);
    return 4.0 * modes.initial_phase_variance() * sum / modes.length();
}

/// Var[phi(z) - phi(z')] of the initial phase, Legendre basis.
inline double initial_phase_noise_variance(double z, double zp, const LegendreModeSet& modes) {
    const auto& p = modes.params();
    std::vector<double> s;
    modes.spatial_factors(z, zp, s);
    double sum = 0.0;
    for (double x : s) sum += x;
    return sum / (2.0 * p.squeezing * p.n_peak * modes.radius());
}

}  // namespace llrelax
