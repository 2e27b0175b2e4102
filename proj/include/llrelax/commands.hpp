#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "llrelax/errors.hpp"
#include "llrelax/homogeneous.hpp"
#include "llrelax/observables.hpp"
#include "llrelax/oracle.hpp"
#include "llrelax/params.hpp"
#include "llrelax/scenario.hpp"
#include "llrelax/table.hpp"
#include "llrelax/trapped.hpp"

// Command layer: each cmd_* is a pure function of the scenario and returns a
// table in interface units (um, ms, mm/s, Hz, nK).

namespace llrelax {

namespace detail {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

inline std::string fmt(double v) { return format_number(v); }

inline std::string label_ms(double t) { return format_number(t / units::millisecond) + "ms"; }
inline std::string label_um(double z) { return format_number(z / units::micrometer) + "um"; }

inline std::vector<double> scaled(const std::vector<double>& v, double unit) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / unit;
    return out;
}

inline ResultTable start_table(const Scenario& sc, std::string command) {
    ResultTable t;
    t.command = std::move(command);
    t.note("config_hash", sc.hash());
    t.note("regime", to_string(sc.trap.regime));
    return t;
}

inline std::string truncation_note(const Truncation& tr) {
    return std::to_string(tr.modes) + " modes, doubling change " + fmt(tr.doubling_change) +
           (tr.converged ? " (converged)" : " (NOT converged)");
}

/// Calls fn(model) with the regime's mode set.
template <class Fn>
auto with_model(const PhysicalParams& p, const Scenario& sc, double box_length, Fn&& fn) {
    if (p.regime == Regime::homogeneous) return fn(build_modes(p, box_length, sc.p_max));
    return fn(build_legendre_modes(p, sc.j_max));
}

inline double dephasing_length(const PhysicalParams& p, const Scenario& sc) {
    return p.regime == Regime::homogeneous ? sc.trap.system_length : 2.0 * p.R;
}

}  // namespace detail

inline ResultTable cmd_params(const Scenario& sc) {
    const PhysicalParams base = derive_params(sc.trap);
    const PhysicalParams p = effective_params(sc.trap);
    const double L = detail::dephasing_length(p, sc);
    const auto times = dephasing_times(p, L);
    const auto limit = squeezing_limit(p.omega_perp, L, p.mass, p.scattering_length);
    ResultTable t = detail::start_table(sc, "params");
    t.note("dephasing_length_um", detail::fmt(L / units::micrometer));
    auto one = [&t](const char* name, const char* unit, double v) { t.add(name, unit, {v}); };
    one("g", "1e-39 J m", p.g / 1e-39);
    one("n_peak", "atoms/um", p.n_peak / units::per_micrometer);
    one("c", "mm/s", p.c / units::mm_per_s);
    one("K", "1", p.K);
    one("mu_over_h", "Hz", p.mu / (2.0 * pi * hbar));
    one("xi_h", "um", p.xi_h / units::micrometer);
    one("l0", "um", p.l0 / units::micrometer);
    one("l0_squeezed", "um", p.l0_squeezed() / units::micrometer);
    one("T_eff", "nK", p.T_eff / units::nanokelvin);
    one("R", "um", is_trapped(p.regime) ? p.R / units::micrometer : detail::nan);
    one("v_N", "mm/s", p.v_N / units::mm_per_s);
    one("v_J", "mm/s", p.v_J / units::mm_per_s);
    one("tau0", "ms", times.tau0 / units::millisecond);
    one("tau", "ms", times.tau / units::millisecond);
    one("multimode", "bool", multimode_condition(p, L, p.squeezing) ? 1.0 : 0.0);
    one("squeezing_limit", "1", limit.ratio);
    one("squeezing_limit_db", "dB", limit.decibel);
    one("t_rev", "ms",
        p.regime == Regime::homogeneous ? recurrence_time(sc.trap.system_length, p.c) / units::millisecond
                                        : detail::nan);
    if (p.regime == Regime::quasi_1d) {
        one("n_peak_tf", "atoms/um", base.n_peak / units::per_micrometer);
        one("R_tf", "um", base.R / units::micrometer);
    }
    one("modes", "count",
        p.regime == Regime::homogeneous ? static_cast<double>(default_p_max(p, sc.trap.system_length))
                                        : static_cast<double>(default_j_max(p)));
    return t;
}

inline ResultTable cmd_pcf(const Scenario& sc) {
    const PhysicalParams p = effective_params(sc.trap);
    const bool trapped = is_trapped(p.regime);
    const double L = sc.trap.system_length;
    std::vector<double> seps = sc.pcf.separations;
    if (seps.empty()) {
        seps = trapped ? linspace(0.0, p.R - std::abs(sc.pcf.reference), 201)
                       : arange(0.0, 0.5 * L, 0.25 * units::micrometer);
    }
    std::vector<double> times = sc.pcf.times;
    if (times.empty()) times = arange(0.0, 10e-3, 2e-3);
    const double ref = sc.pcf.reference;
    std::vector<double> positions(seps.size());
    for (std::size_t i = 0; i < seps.size(); ++i) {
        positions[i] = ref + seps[i];
        if (trapped && std::abs(positions[i]) > p.R * (1.0 + 1e-12))
            throw ConfigError("pcf grid point " + detail::label_um(positions[i]) + " lies outside the cloud (R = " +
                              detail::label_um(p.R) + ")");
    }
    if (trapped && std::abs(ref) > p.R) throw ConfigError("pcf reference point lies outside the cloud");

    const VarianceField var = detail::with_model(p, sc, L, [&](const auto& model) {
        return sample_variance_field(model, p.regime, positions, ref, times, p.xi_h);
    });
    const CorrelationField corr = pcf(var);
    ResultTable t = detail::start_table(sc, "pcf");
    t.note("reference_um", detail::fmt(ref / units::micrometer));
    t.note("truncation", detail::truncation_note(var.truncation));
    t.add(trapped ? "z" : "zbar", "um", detail::scaled(positions, units::micrometer));
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        std::vector<double> c(positions.size()), v(positions.size());
        for (std::size_t zi = 0; zi < positions.size(); ++zi) {
            c[zi] = corr.at(ti, zi);
            v[zi] = var.at(ti, zi);
        }
        t.add("C@" + detail::label_ms(times[ti]), "1", std::move(c));
        t.add("var@" + detail::label_ms(times[ti]), "rad^2", std::move(v));
    }
    return t;
}

struct FrontSeries {
    std::string label;
    PhysicalParams params;
    double box_length = 0.0;
    FrontTrace trace;
    FrontTrace threshold;
};

namespace detail {

inline std::vector<FrontSeries> front_series(const Scenario& sc) {
    std::vector<Regime> regimes = sc.front.regimes;
    if (regimes.empty()) regimes.push_back(sc.trap.regime);
    std::vector<double> atoms = sc.front.atom_numbers;
    std::vector<FrontSeries> out;
    auto series_for = [&](Regime regime, std::optional<double> n_atoms) {
        TrapConfig cfg = sc.trap;
        std::string label = to_string(regime);
        if (n_atoms) {
            cfg.atom_number_total = *n_atoms;
            cfg.peak_density_per_gas.reset();
            label += "_N" + format_number(*n_atoms);
        }
        FrontSeries s;
        s.label = label;
        if (regime == Regime::homogeneous) {
            // equal peak density to the Thomas-Fermi cloud of the same atom number
            PhysicalParams ref;
            if (sc.trap.regime == Regime::homogeneous && !n_atoms) {
                ref = derive_params(cfg);
                s.box_length = sc.trap.system_length;
            } else {
                cfg.regime = Regime::thomas_fermi;
                if (cfg.omega_long == 0.0) throw ConfigError("homogeneous comparison needs /trap/nu_long_hz");
                ref = derive_params(cfg);
                ref.regime = Regime::homogeneous;
                ref.R = 0.0;
                s.box_length = sc.front.homogeneous_length;
            }
            s.params = ref;
        } else {
            cfg.regime = regime;
            if (cfg.omega_long == 0.0) throw ConfigError("trapped front needs /trap/nu_long_hz");
            s.params = effective_params(cfg);
        }
        out.push_back(std::move(s));
    };
    for (Regime r : regimes) {
        if (atoms.empty()) series_for(r, std::nullopt);
        else
            for (double n : atoms) series_for(r, n);
    }
    return out;
}

}  // namespace detail

/// Front detections for each (regime, atom number) series; fits go in the provenance block.
inline std::pair<ResultTable, std::vector<FrontSeries>> run_front(const Scenario& sc) {
    auto series = detail::front_series(sc);
    std::vector<double> times = sc.front.times;
    if (times.empty()) times = arange(0.5e-3, 10e-3, 0.5e-3);
    const double t_max = *std::max_element(times.begin(), times.end());
    for (auto& s : series) {
        const auto& p = s.params;
        const double step = sc.front.separation_step > 0.0 ? sc.front.separation_step : 0.25 * p.xi_h;
        double zmax = sc.front.separation_max;
        if (zmax <= 0.0) {
            zmax = is_trapped(p.regime) ? 0.75 * p.R
                                        : std::min(0.5 * s.box_length, 2.0 * p.c * t_max + 20.0 * p.xi_h);
        }
        const auto seps = arange(0.0, zmax, step);
        FrontOptions opts;
        opts.smoothing = sc.front.smoothing;
        detail::with_model(p, sc, s.box_length, [&](const auto& model) {
            s.trace = front_trace(model, p.regime, seps, 0.0, times, p.xi_h, opts);
            // threshold detector on the same stencils
            const double dt = pi / (20.0 * model.max_frequency());
            for (double t : times) {
                if (!(t > dt)) continue;
                auto f = sample_variance_field(model, p.regime, seps, 0.0, {t - dt, t, t + dt}, p.xi_h, false);
                for (const auto& pt : extract_front_threshold(f, opts).points) s.threshold.points.push_back(pt);
            }
            return 0;
        });
        fit_velocity(s.trace, sc.front.fit_lo, sc.front.fit_hi);
    }
    ResultTable t = detail::start_table(sc, "front");
    t.note("fit_window_ms", detail::fmt(sc.front.fit_lo / units::millisecond) + ".." +
                                detail::fmt(sc.front.fit_hi / units::millisecond));
    t.note("detector", "mixed-derivative peak, Gaussian smoothing sigma = healing length");
    t.add("t", "ms", detail::scaled(times, units::millisecond));
    for (const auto& s : series) {
        t.note("velocity." + s.label + "_mm_s", detail::fmt(s.trace.velocity / units::mm_per_s));
        t.note("fit_rms." + s.label + "_um", detail::fmt(s.trace.residual_rms / units::micrometer));
        t.note("fit_points." + s.label, std::to_string(s.trace.fitted));
        t.note("c." + s.label + "_mm_s", detail::fmt(s.params.c / units::mm_per_s));
        auto lookup = [&times](const FrontTrace& tr) {
            std::vector<double> col(times.size(), detail::nan);
            for (const auto& pt : tr.points)
                for (std::size_t i = 0; i < times.size(); ++i)
                    if (std::abs(times[i] - pt.t) < 1e-12) col[i] = pt.z / units::micrometer;
            return col;
        };
        t.add("zc_" + s.label, "um", lookup(s.trace));
        t.add("zc_half_rise_" + s.label, "um", lookup(s.threshold));
        t.add("R_half_" + s.label, "um",
              std::vector<double>(times.size(),
                                  is_trapped(s.params.regime) ? 0.5 * s.params.R / units::micrometer : detail::nan));
    }
    return {std::move(t), std::move(series)};
}

inline ResultTable cmd_front(const Scenario& sc) { return run_front(sc).first; }

namespace detail {

inline std::vector<double> contrast_lengths(const Scenario& sc) {
    if (!sc.contrast.lengths.empty()) return sc.contrast.lengths;
    return {5e-6, 20e-6, 50e-6, 90e-6};
}

}  // namespace detail

inline ResultTable cmd_contrast(const Scenario& sc) {
    const PhysicalParams p = effective_params(sc.trap);
    std::vector<double> times = sc.contrast.times;
    if (times.empty()) times = arange(0.0, 300e-3, 0.5e-3);
    ResultTable t = detail::start_table(sc, "contrast");
    t.note("points", std::to_string(sc.contrast.points));
    t.add("t", "ms", detail::scaled(times, units::millisecond));
    for (double L : detail::contrast_lengths(sc)) {
        auto trace = detail::with_model(p, sc, sc.trap.system_length,
                                        [&](const auto& model) { return contrast_trace(model, L, times, sc.contrast.points); });
        t.add("C2@L=" + detail::label_um(L), "1", std::move(trace.values));
    }
    return t;
}

struct RecurrenceResult {
    ContrastTrace trace;
    std::vector<Recurrence> ranked;
};

inline RecurrenceResult run_recurrence(const Scenario& sc) {
    const PhysicalParams p = effective_params(sc.trap);
    const auto times = arange(0.0, sc.recurrence.t_max, sc.recurrence.step);
    return detail::with_model(p, sc, sc.trap.system_length, [&](const auto& model) {
        using Model = std::decay_t<decltype(model)>;
        const ContrastEvaluator<Model> eval(model, sc.recurrence.length, sc.recurrence.points);
        RecurrenceResult r;
        r.trace = contrast_trace(eval, times);
        r.ranked = recurrence_scan(r.trace, [&eval](double t) { return eval(t); }, sc.recurrence.top);
        return r;
    });
}

inline ResultTable cmd_recurrence(const Scenario& sc) {
    auto r = run_recurrence(sc);
    if (r.ranked.empty()) throw DetectionFailure("no recurrence found in the scanned range");
    ResultTable t = detail::start_table(sc, "recurrence");
    t.note("length_um", detail::fmt(sc.recurrence.length / units::micrometer));
    const std::size_t top = std::min(sc.recurrence.top, r.ranked.size());
    for (std::size_t i = 0; i < top; ++i)
        t.note("recurrence." + std::to_string(i + 1),
               "t_ms=" + detail::fmt(r.ranked[i].time / units::millisecond) +
                   " strength=" + detail::fmt(r.ranked[i].strength));
    t.add("t", "ms", detail::scaled(r.trace.times, units::millisecond));
    t.add("C2", "1", std::move(r.trace.values));
    return t;
}

inline ResultTable cmd_squeezing_map(const Scenario& sc) {
    auto omegas = sc.squeezing_map.omega_perp;
    auto lengths = sc.squeezing_map.length;
    if (omegas.empty()) omegas = arange(units::angular(500.0), units::angular(5000.0), units::angular(250.0));
    if (lengths.empty()) lengths = arange(10e-6, 200e-6, 10e-6);
    const auto map = squeezing_map(omegas, lengths, sc.trap.species.mass, sc.trap.species.scattering_length);
    ResultTable t = detail::start_table(sc, "squeezing-map");
    std::vector<double> nu(omegas.size());
    for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = units::hertz(omegas[i]);
    t.add("nu_perp", "Hz", std::move(nu));
    for (std::size_t c = 0; c < lengths.size(); ++c) {
        std::vector<double> col(omegas.size());
        for (std::size_t r = 0; r < omegas.size(); ++r) col[r] = map.at(r, c);
        t.add("xi2_lim@L=" + detail::label_um(lengths[c]), "dB", std::move(col));
    }
    return t;
}

struct OracleComparison {
    EnsembleStats stats;
    std::vector<double> analytic;  // exp(-variance/2), same layout as stats.mean
    double fraction_within = 0.0;  // |z| < 3
};

inline OracleComparison run_oracle(const Scenario& sc) {
    const PhysicalParams p = effective_params(sc.trap);
    const auto& spec = sc.oracle.spec;
    spec.validate();
    const bool trapped = is_trapped(p.regime);
    std::vector<double> seps = sc.oracle.separations;
    if (seps.empty()) seps = linspace(0.0, trapped ? 0.8 * p.R : std::min(30e-6, 0.5 * sc.trap.system_length), 15);
    std::vector<double> times = sc.oracle.times;
    if (times.empty()) times = {2e-3, 4e-3, 6e-3, 8e-3, 10e-3};
    const double ref = sc.oracle.reference;
    std::vector<double> positions(seps.size());
    for (std::size_t i = 0; i < seps.size(); ++i) positions[i] = ref + seps[i];

    return detail::with_model(p, sc, sc.trap.system_length, [&](const auto& modes) {
        OracleComparison out;
        out.stats = estimate_pcf(spec, modes, positions, ref, times);
        out.analytic.resize(out.stats.mean.size());
        std::size_t good = 0;
        for (std::size_t ti = 0; ti < times.size(); ++ti)
            for (std::size_t zi = 0; zi < positions.size(); ++zi) {
                double var;
                if (spec.initial == InitialKind::thermal) {
                    if constexpr (std::is_same_v<std::decay_t<decltype(modes)>, PlaneWaveModeSet>)
                        var = thermal_variance(positions[zi] - ref, spec.temperature, modes);
                    else
                        var = trapped_thermal_variance(positions[zi], ref, spec.temperature, modes);
                } else {
                    var = evaluate_variance(modes, positions[zi], ref, times[ti]);
                    if (spec.include_initial_phase_noise) {
                        if constexpr (std::is_same_v<std::decay_t<decltype(modes)>, PlaneWaveModeSet>)
                            var += initial_phase_noise_variance(positions[zi] - ref, modes);
                        else
                            var += initial_phase_noise_variance(positions[zi], ref, modes);
                    }
                }
                const std::size_t g = out.stats.index(ti, zi);
                out.analytic[g] = std::exp(-0.5 * var);
                const double diff = std::abs(out.stats.mean[g] - out.analytic[g]);
                if (diff < 3.0 * out.stats.stderr_[g] || diff == 0.0) ++good;
            }
        out.fraction_within = static_cast<double>(good) / static_cast<double>(out.analytic.size());
        return out;
    });
}

inline ResultTable cmd_oracle(const Scenario& sc) {
    const auto cmp = run_oracle(sc);
    const auto& st = cmp.stats;
    ResultTable t = detail::start_table(sc, "oracle");
    t.note("realizations", std::to_string(st.realizations));
    t.note("seed", std::to_string(sc.oracle.spec.master_seed));
    t.note("rng", "philox4x32-10 keyed by seed; counter = (realization, component)");
    t.note("initial", sc.oracle.spec.initial == InitialKind::split ? "split" : "thermal");
    t.note("reference_um", detail::fmt(st.reference / units::micrometer));
    t.note("fraction_within_3_stderr", detail::fmt(cmp.fraction_within));
    std::vector<double> tc, zc, ac, mc, se, zs, im;
    for (std::size_t ti = 0; ti < st.times.size(); ++ti)
        for (std::size_t zi = 0; zi < st.positions.size(); ++zi) {
            const std::size_t g = st.index(ti, zi);
            tc.push_back(st.times[ti] / units::millisecond);
            zc.push_back(st.positions[zi] / units::micrometer);
            ac.push_back(cmp.analytic[g]);
            mc.push_back(st.mean[g]);
            se.push_back(st.stderr_[g]);
            const double diff = st.mean[g] - cmp.analytic[g];
            zs.push_back(st.stderr_[g] > 0.0 ? diff / st.stderr_[g] : (diff == 0.0 ? 0.0 : detail::nan));
            im.push_back(st.imag_mean[g]);
        }
    t.add("t", "ms", std::move(tc));
    t.add("z", "um", std::move(zc));
    t.add("C_analytic", "1", std::move(ac));
    t.add("C_monte_carlo", "1", std::move(mc));
    t.add("stderr", "1", std::move(se));
    t.add("z_score", "1", std::move(zs));
    t.add("imag_mean", "1", std::move(im));
    return t;
}

}  // namespace llrelax
