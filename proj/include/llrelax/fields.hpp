#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "llrelax/params.hpp"
#include "llrelax/parallel.hpp"

namespace llrelax {

/// Inclusive uniform grid with `count` points.
inline std::vector<double> linspace(double start, double stop, std::size_t count) {
    if (count == 0) return {};
    if (count == 1) return {start};
    std::vector<double> out(count);
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = start + step * static_cast<double>(i);
    out.back() = stop;
    return out;
}

/// start, start+step, ... up to stop (inclusive within half a step).
inline std::vector<double> arange(double start, double stop, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5));
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out.push_back(start + step * static_cast<double>(i));
    return out;
}

/// A phase-variance model expressed as a truncated sum of non-negative terms
///   variance(z, z', t) = sum_i weight_i(t) * shape_i(z, z').
/// time_weights already carries the overall prefactor.
template <class M>
concept ModeSumModel = requires(const M& m, double t, double z, double zp, std::vector<double>& out) {
    { m.mode_count() } -> std::convertible_to<std::size_t>;
    { m.max_frequency() } -> std::convertible_to<double>;
    { m.frequencies() } -> std::convertible_to<const std::vector<double>&>;
    m.time_weights(t, out);
    m.spatial_factors(z, zp, out);
    { m.doubled() } -> std::same_as<M>;
    { m.cloud_radius() } -> std::convertible_to<double>;
};

template <ModeSumModel M>
double evaluate_variance(const M& model, double z, double zp, double t) {
    std::vector<double> w, s;
    model.time_weights(t, w);
    model.spatial_factors(z, zp, s);
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * s[i];
    return sum;
}

struct Truncation {
    std::size_t modes = 0;
    bool converged = true;
    double doubling_change = 0.0;  // max |delta| / max |value| under doubling
};

/// Values on a (position x time) grid. For separation layouts each position z is
/// paired with `reference` (z' = reference); values are row-major [time][position].
struct VarianceField {
    Regime regime = Regime::homogeneous;
    std::vector<double> positions;
    double reference = 0.0;
    std::vector<double> times;
    std::vector<double> values;
    Truncation truncation;
    double healing_length = 0.0;
    double cloud_radius = 0.0;  // 0: unbounded (homogeneous)

    std::size_t width() const { return positions.size(); }
    double at(std::size_t ti, std::size_t zi) const { return values[ti * positions.size() + zi]; }
    double& at(std::size_t ti, std::size_t zi) { return values[ti * positions.size() + zi]; }
};

/// exp(-variance/2) on the same grid as a VarianceField.
struct CorrelationField {
    Regime regime = Regime::homogeneous;
    std::vector<double> positions;
    double reference = 0.0;
    std::vector<double> times;
    std::vector<double> values;
    Truncation truncation;

    double at(std::size_t ti, std::size_t zi) const { return values[ti * positions.size() + zi]; }
};

/// Symmetric (z, z') matrix of correlations at a single time, for contrast integrals.
struct PairCorrelation {
    std::vector<double> points;
    double time = 0.0;
    std::vector<double> values;  // row-major [z][z']
    double cloud_radius = 0.0;

    double at(std::size_t i, std::size_t j) const { return values[i * points.size() + j]; }
};

namespace detail {

template <ModeSumModel M>
std::vector<double> sample_values(const M& model, const std::vector<double>& positions,
                                  double reference, const std::vector<double>& times) {
    const std::size_t nm = model.mode_count();
    const std::size_t nz = positions.size();
    std::vector<double> shapes(nz * nm);
    {
        std::vector<double> s;
        for (std::size_t zi = 0; zi < nz; ++zi) {
            model.spatial_factors(positions[zi], reference, s);
            std::copy(s.begin(), s.end(), shapes.begin() + static_cast<std::ptrdiff_t>(zi * nm));
        }
    }
    std::vector<double> values(times.size() * nz);
    parallel_for(times.size(), [&](std::size_t ti) {
        std::vector<double> w;
        model.time_weights(times[ti], w);
        for (std::size_t zi = 0; zi < nz; ++zi) {
            const double* s = shapes.data() + zi * nm;
            double sum = 0.0;
            for (std::size_t i = 0; i < nm; ++i) sum += w[i] * s[i];
            values[ti * nz + zi] = sum;
        }
    });
    return values;
}

}  // namespace detail

inline constexpr double convergence_tolerance = 0.005;

/// Samples variance(z, reference, t) and records the truncation doubling test.
template <ModeSumModel M>
VarianceField sample_variance_field(const M& model, Regime regime, std::vector<double> positions,
                                    double reference, std::vector<double> times,
                                    double healing_length, bool check_convergence = true) {
    VarianceField f;
    f.regime = regime;
    f.positions = std::move(positions);
    f.reference = reference;
    f.times = std::move(times);
    f.healing_length = healing_length;
    f.cloud_radius = model.cloud_radius();
    f.values = detail::sample_values(model, f.positions, reference, f.times);
    f.truncation.modes = model.mode_count();
    if (check_convergence && !f.values.empty()) {
        const auto fine = detail::sample_values(model.doubled(), f.positions, reference, f.times);
        double max_value = 0.0, max_delta = 0.0;
        for (std::size_t i = 0; i < fine.size(); ++i) {
            max_value = std::max(max_value, std::abs(fine[i]));
            max_delta = std::max(max_delta, std::abs(fine[i] - f.values[i]));
        }
        f.truncation.doubling_change = max_value > 0.0 ? max_delta / max_value : 0.0;
        f.truncation.converged = f.truncation.doubling_change < convergence_tolerance;
    }
    return f;
}

}  // namespace llrelax
