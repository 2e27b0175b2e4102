#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "llrelax/errors.hpp"
#include "llrelax/fields.hpp"
#include "llrelax/parallel.hpp"
#include "llrelax/quadrature.hpp"

namespace llrelax {

// ---------------------------------------------------------------------------
// Correlation functions

inline CorrelationField pcf(const VarianceField& variance) {
    CorrelationField c;
    c.regime = variance.regime;
    c.positions = variance.positions;
    c.reference = variance.reference;
    c.times = variance.times;
    c.truncation = variance.truncation;
    c.values.resize(variance.values.size());
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        if (variance.values[i] < 0.0) throw std::domain_error("negative phase variance");
        c.values[i] = std::exp(-0.5 * variance.values[i]);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Light-cone front

struct FrontOptions {
    /// Gaussian smoothing width along the separation axis; 0 selects the healing length.
    double smoothing = 0.0;
    /// Separations closer than this many smoothing widths to either grid end are not searched.
    double edge_margin = 3.0;
    /// Minimum rise of the smoothed time derivative across the peak, as a fraction of
    /// its row maximum. Weaker candidates are dropped.
    double min_prominence = 0.25;
};

struct FrontPoint {
    double t;
    double z;
    double prominence;
};

struct FrontTrace {
    std::vector<FrontPoint> points;
    std::string method;
    double smoothing = 0.0;
    std::string diagnostic;
    // filled by fit_velocity
    double velocity = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    std::size_t fitted = 0;
};

namespace detail {

inline double uniform_step(const std::vector<double>& v, const char* what) {
    if (v.size() < 2) throw std::invalid_argument(std::string(what) + " grid needs at least two points");
    const double h = (v.back() - v.front()) / static_cast<double>(v.size() - 1);
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs((v[i] - v[i - 1]) - h) > 1e-6 * std::abs(h))
            throw std::invalid_argument(std::string(what) + " grid must be uniform");
    return h;
}

/// Gaussian smoothing with edge renormalization; sigma in grid units.
inline std::vector<double> gaussian_smooth(const std::vector<double>& y, double sigma) {
    if (!(sigma > 0.0)) return y;
    const auto half = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    for (std::ptrdiff_t k = -half; k <= half; ++k)
        kernel[static_cast<std::size_t>(k + half)] = std::exp(-0.5 * (k * k) / (sigma * sigma));
    const auto n = static_cast<std::ptrdiff_t>(y.size());
    std::vector<double> out(y.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double s = 0.0, wsum = 0.0;
        for (std::ptrdiff_t k = -half; k <= half; ++k) {
            const std::ptrdiff_t j = i + k;
            if (j < 0 || j >= n) continue;
            const double w = kernel[static_cast<std::size_t>(k + half)];
            s += w * y[static_cast<std::size_t>(j)];
            wsum += w;
        }
        out[static_cast<std::size_t>(i)] = s / wsum;
    }
    return out;
}

inline std::vector<double> central_gradient(const std::vector<double>& y, double h) {
    const std::size_t n = y.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    d[0] = (y[1] - y[0]) / h;
    d[n - 1] = (y[n - 1] - y[n - 2]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    return d;
}

struct FrontRows {
    double dz;
    double sigma_grid;
    std::size_t lo, hi;  // searchable [lo, hi)
};

inline FrontRows prepare_rows(const VarianceField& f, const FrontOptions& opts, double& smoothing) {
    if (f.times.size() < 3) throw std::invalid_argument("front extraction needs at least three time rows");
    const double dz = uniform_step(f.positions, "separation");
    uniform_step(f.times, "time");
    smoothing = opts.smoothing > 0.0 ? opts.smoothing : f.healing_length;
    if (!(smoothing > 0.0)) throw std::invalid_argument("front smoothing width must be positive");
    if (!(dz < f.healing_length || opts.smoothing > 0.0))
        throw std::invalid_argument("separation grid must be finer than the healing length");
    const double sigma = smoothing / dz;
    const auto margin = static_cast<std::size_t>(std::ceil(opts.edge_margin * sigma));
    const std::size_t n = f.positions.size();
    if (2 * margin + 3 > n) throw std::invalid_argument("separation grid too short for the edge margin");
    return {dz, sigma, margin, n - margin};
}

inline std::vector<double> time_derivative_row(const VarianceField& f, std::size_t ti) {
    const double dt2 = f.times[ti + 1] - f.times[ti - 1];
    std::vector<double> d(f.width());
    for (std::size_t zi = 0; zi < d.size(); ++zi) d[zi] = (f.at(ti + 1, zi) - f.at(ti - 1, zi)) / dt2;
    return d;
}

}  // namespace detail

/// Front position per interior time row: argmax over separation of the smoothed
/// mixed derivative d^2<dphi^2>/(dt dz). Needs a regular grid.
inline FrontTrace extract_front(const VarianceField& f, const FrontOptions& opts = {}) {
    FrontTrace trace;
    trace.method = "mixed-derivative";
    const auto rows = detail::prepare_rows(f, opts, trace.smoothing);
    const auto reach = static_cast<std::size_t>(std::ceil(3.0 * rows.sigma_grid));
    for (std::size_t ti = 1; ti + 1 < f.times.size(); ++ti) {
        const auto dvt = detail::gaussian_smooth(detail::time_derivative_row(f, ti), rows.sigma_grid);
        const auto mixed = detail::central_gradient(dvt, rows.dz);
        std::size_t best = rows.lo;
        for (std::size_t i = rows.lo; i < rows.hi; ++i)
            if (mixed[i] > mixed[best]) best = i;
        if (best == rows.lo || best + 1 == rows.hi || !(mixed[best] > 0.0)) continue;
        double row_max = 0.0;
        for (std::size_t i = rows.lo; i < rows.hi; ++i) row_max = std::max(row_max, std::abs(dvt[i]));
        const std::size_t left = best > reach ? best - reach : 0;
        const std::size_t right = std::min(dvt.size() - 1, best + reach);
        const double prominence = row_max > 0.0 ? (dvt[right] - dvt[left]) / row_max : 0.0;
        if (prominence < opts.min_prominence) continue;
        // parabolic refinement of the peak location
        double z = f.positions[best];
        const double ym = mixed[best - 1], y0 = mixed[best], yp = mixed[best + 1];
        const double denom = ym - 2.0 * y0 + yp;
        if (denom < 0.0) z += 0.5 * (ym - yp) / denom * rows.dz;
        trace.points.push_back({f.times[ti], z, prominence});
    }
    if (trace.points.empty()) trace.diagnostic = "no front detected: every candidate below prominence threshold";
    return trace;
}

/// Independent detector: first separation where the smoothed time derivative rises
/// to half of its row maximum (linear interpolation between grid points).
inline FrontTrace extract_front_threshold(const VarianceField& f, const FrontOptions& opts = {}) {
    FrontTrace trace;
    trace.method = "half-rise";
    const auto rows = detail::prepare_rows(f, opts, trace.smoothing);
    for (std::size_t ti = 1; ti + 1 < f.times.size(); ++ti) {
        const auto dvt = detail::gaussian_smooth(detail::time_derivative_row(f, ti), rows.sigma_grid);
        double row_max = 0.0, row_min = dvt[rows.lo];
        for (std::size_t i = rows.lo; i < rows.hi; ++i) {
            row_max = std::max(row_max, dvt[i]);
            row_min = std::min(row_min, dvt[i]);
        }
        if (!(row_max > 0.0)) continue;
        const double level = 0.5 * row_max;
        if (dvt[rows.lo] >= level) continue;
        for (std::size_t i = rows.lo + 1; i < rows.hi; ++i) {
            if (dvt[i] >= level) {
                const double frac = (level - dvt[i - 1]) / (dvt[i] - dvt[i - 1]);
                const double z = f.positions[i - 1] + frac * rows.dz;
                trace.points.push_back({f.times[ti], z, (row_max - row_min) / row_max});
                break;
            }
        }
    }
    if (trace.points.empty()) trace.diagnostic = "no front detected: derivative never rises to half maximum";
    return trace;
}

struct VelocityFit {
    double velocity;
    double intercept;
    double residual_rms;
    std::size_t count;
};

/// Least-squares slope of the front position over detections with t in (lo, hi].
inline VelocityFit fit_velocity(FrontTrace& trace, double lo, double hi) {
    double st = 0, sz = 0, stt = 0, stz = 0;
    std::size_t n = 0;
    for (const auto& p : trace.points) {
        if (!(p.t > lo && p.t <= hi)) continue;
        st += p.t;
        sz += p.z;
        stt += p.t * p.t;
        stz += p.t * p.z;
        ++n;
    }
    if (n < 3)
        throw DetectionFailure("velocity fit needs at least 3 detections in the window, got " +
                               std::to_string(n));
    const double dn = static_cast<double>(n);
    const double denom = dn * stt - st * st;
    const double slope = (dn * stz - st * sz) / denom;
    const double intercept = (sz - slope * st) / dn;
    double ss = 0.0;
    for (const auto& p : trace.points) {
        if (!(p.t > lo && p.t <= hi)) continue;
        const double r = p.z - (intercept + slope * p.t);
        ss += r * r;
    }
    VelocityFit fit{slope, intercept, std::sqrt(ss / dn), n};
    trace.velocity = fit.velocity;
    trace.intercept = fit.intercept;
    trace.residual_rms = fit.residual_rms;
    trace.window_lo = lo;
    trace.window_hi = hi;
    trace.fitted = n;
    return fit;
}

/// Runs the mixed-derivative detector at each requested time on a local
/// three-row stencil (t - dt, t, t + dt) with dt = pi / (20 omega_max).
template <ModeSumModel M>
FrontTrace front_trace(const M& model, Regime regime, const std::vector<double>& separations,
                       double reference, const std::vector<double>& times, double healing_length,
                       const FrontOptions& opts = {}) {
    const double dt = pi / (20.0 * model.max_frequency());
    std::vector<FrontTrace> parts(times.size());
    parallel_for(times.size(), [&](std::size_t i) {
        const double t = times[i];
        if (!(t > dt)) return;
        std::vector<double> stencil{t - dt, t, t + dt};
        std::vector<double> positions(separations.size());
        for (std::size_t k = 0; k < separations.size(); ++k) positions[k] = reference + separations[k];
        auto field = sample_variance_field(model, regime, std::move(positions), reference,
                                           std::move(stencil), healing_length, false);
        for (auto& z : field.positions) z -= reference;
        parts[i] = extract_front(field, opts);
    });
    FrontTrace out;
    out.method = "mixed-derivative";
    out.smoothing = opts.smoothing > 0.0 ? opts.smoothing : healing_length;
    for (auto& p : parts)
        for (auto& pt : p.points) out.points.push_back(pt);
    if (out.points.empty()) out.diagnostic = "no front detected at any requested time";
    return out;
}

// ---------------------------------------------------------------------------
// Contrast and recurrences

/// Uniform pair grid spanning [-L/2, L/2] around `center`.
inline std::vector<double> contrast_points(double length, std::size_t count, double center = 0.0) {
    return linspace(center - 0.5 * length, center + 0.5 * length, count);
}

template <ModeSumModel M>
PairCorrelation pair_correlation(const M& model, const std::vector<double>& points, double t) {
    PairCorrelation pc;
    pc.points = points;
    pc.time = t;
    pc.cloud_radius = model.cloud_radius();
    const std::size_t n = points.size();
    pc.values.assign(n * n, 1.0);
    std::vector<double> w, s;
    model.time_weights(t, w);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            model.spatial_factors(points[i], points[j], s);
            double v = 0.0;
            for (std::size_t m = 0; m < w.size(); ++m) v += w[m] * s[m];
            pc.values[i * n + j] = pc.values[j * n + i] = std::exp(-0.5 * v);
        }
    return pc;
}

/// (1/L^2) double integral of C(z, z') over [-L/2, L/2]^2, trapezoidal.
inline double mean_squared_contrast(const PairCorrelation& corr, double length) {
    const auto& p = corr.points;
    if (p.empty()) throw std::invalid_argument("empty correlation grid");
    if (corr.cloud_radius > 0.0 && 0.5 * length > corr.cloud_radius * (1.0 + 1e-12))
        throw std::domain_error("contrast integration region exceeds the cloud");
    if (p.size() == 1 || length == 0.0) return corr.values[0];
    const double h = detail::uniform_step(p, "contrast");
    const double span = p.back() - p.front();
    if (std::abs(span - length) > 1e-9 * length)
        throw std::invalid_argument("contrast grid must span exactly the integration length");
    const std::size_t n = p.size();
    auto w = [n](std::size_t i) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; };
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sum += w(i) * w(j) * corr.values[i * n + j];
    return sum * h * h / (length * length);
}


/// C^2(t) on a uniform pair grid of `count` points across a window of length L
/// centred on 0. Pair shapes are computed once; each call evaluates one time.
template <ModeSumModel M>
class ContrastEvaluator {
  public:
    ContrastEvaluator(const M& model, double length, std::size_t count) : model_(model), length_(length) {
        if (model.cloud_radius() > 0.0 && 0.5 * length > model.cloud_radius() * (1.0 + 1e-12))
            throw std::domain_error("contrast integration region exceeds the cloud");
        const auto pts = contrast_points(length, count);
        n_ = pts.size();
        nm_ = model.mode_count();
        auto tw = [this](std::size_t i) { return (i == 0 || i + 1 == n_) ? 0.5 : 1.0; };
        std::vector<double> s;
        for (std::size_t i = 0; i < n_; ++i) {
            diagonal_ += tw(i) * tw(i);
            for (std::size_t j = i + 1; j < n_; ++j) {
                model.spatial_factors(pts[i], pts[j], s);
                shapes_.insert(shapes_.end(), s.begin(), s.end());
                pair_weight_.push_back(2.0 * tw(i) * tw(j));
            }
        }
        const double h = n_ > 1 ? length / static_cast<double>(n_ - 1) : 0.0;
        norm_ = n_ > 1 ? h * h / (length * length) : 1.0;
    }

    double operator()(double t) const {
        if (n_ < 2) return 1.0;
        std::vector<double> w;
        model_.time_weights(t, w);
        double sum = diagonal_;
        for (std::size_t p = 0; p < pair_weight_.size(); ++p) {
            const double* sp = shapes_.data() + p * nm_;
            double v = 0.0;
            for (std::size_t m = 0; m < nm_; ++m) v += w[m] * sp[m];
            sum += pair_weight_[p] * std::exp(-0.5 * v);
        }
        return sum * norm_;
    }

    double length() const { return length_; }

  private:
    const M& model_;
    double length_;
    std::size_t n_ = 0, nm_ = 0;
    std::vector<double> shapes_;
    std::vector<double> pair_weight_;
    double diagonal_ = 0.0;
    double norm_ = 1.0;
};

struct ContrastTrace {
    double length = 0.0;
    std::vector<double> times;
    std::vector<double> values;
};

template <ModeSumModel M>
ContrastTrace contrast_trace(const ContrastEvaluator<M>& eval, const std::vector<double>& times) {
    ContrastTrace out;
    out.length = eval.length();
    out.times = times;
    out.values.resize(times.size());
    parallel_for(times.size(), [&](std::size_t ti) { out.values[ti] = eval(times[ti]); });
    return out;
}

template <ModeSumModel M>
ContrastTrace contrast_trace(const M& model, double length, const std::vector<double>& times,
                             std::size_t count) {
    const ContrastEvaluator<M> eval(model, length, count);
    return contrast_trace(eval, times);
}

struct Recurrence {
    double time;
    double strength;
};

namespace detail {

template <class F>
double golden_maximize(const F& f, double a, double b, double& best_value) {
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    best_value = f(x);
    return x;
}

}  // namespace detail

inline constexpr double max_recurrence_step = 0.5e-3;  // s

/// Local maxima of C^2(t) after the first dephasing minimum, strongest first.
/// With `refine`, the `refine_top` strongest sampled maxima (all when 0) are
/// polished by golden-section search on C^2 between their neighbouring samples.
inline std::vector<Recurrence> recurrence_scan(const ContrastTrace& trace,
                                               const std::function<double(double)>& refine = {},
                                               std::size_t refine_top = 0) {
    const auto& t = trace.times;
    const auto& v = trace.values;
    if (t.size() < 3) throw std::invalid_argument("recurrence scan needs a non-empty time range");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] - t[i - 1] > max_recurrence_step * (1.0 + 1e-9))
            throw std::invalid_argument("recurrence scan needs time steps <= 0.5 ms");
    std::size_t start = 1;
    while (start + 1 < v.size() && !(v[start] <= v[start - 1] && v[start] <= v[start + 1])) ++start;
    std::vector<std::size_t> peaks;
    for (std::size_t i = start + 1; i + 1 < v.size(); ++i)
        if (v[i] > v[i - 1] && v[i] >= v[i + 1]) peaks.push_back(i);
    std::stable_sort(peaks.begin(), peaks.end(), [&v](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    std::vector<Recurrence> out;
    out.reserve(peaks.size());
    for (std::size_t rank = 0; rank < peaks.size(); ++rank) {
        const std::size_t i = peaks[rank];
        Recurrence r{t[i], v[i]};
        if (refine && (refine_top == 0 || rank < refine_top)) {
            double best = 0.0;
            const double x = detail::golden_maximize(refine, t[i - 1], t[i + 1], best);
            if (best >= r.strength) r = {x, best};
        }
        out.push_back(r);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Recurrence& a, const Recurrence& b) { return a.strength > b.strength; });
    return out;
}

/// (sin(omega t) / omega)^2 per mode: result[mode][time].
inline std::vector<std::vector<double>> mode_amplitude_trace(const std::vector<double>& frequencies,
                                                             const std::vector<double>& times,
                                                             std::size_t count) {
    count = std::min(count, frequencies.size());
    std::vector<std::vector<double>> out(count, std::vector<double>(times.size()));
    for (std::size_t m = 0; m < count; ++m)
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double a = std::sin(frequencies[m] * times[i]) / frequencies[m];
            out[m][i] = a * a;
        }
    return out;
}

}  // namespace llrelax
