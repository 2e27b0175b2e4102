// Acceptance checks 1-8. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "support.hpp"

using namespace llrelax;
using testsupport::rel;

namespace {

constexpr double um = units::micrometer;
constexpr double ms = units::millisecond;

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [out of tolerance]");
    }
};

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < limit_s;
    const bool ok = out.pass && in_time;
    if (!ok) ++failures;
    std::printf("criterion %d %s  %s: %s; runtime %.3f s (limit %g s%s)\n", id, ok ? "PASS" : "FAIL", title,
                out.detail.c_str(), secs, limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
}

double fraction_within(const OracleComparison& c) { return c.fraction_within; }

}  // namespace

int main() {
    criterion(1, "parameter anchors", 1.0, [] {
        Outcome o;
        const auto p = derive_params(testsupport::reference_trap());
        const double c = p.c / units::mm_per_s, n = p.n_peak / units::per_micrometer, R = p.R / um;
        o.require(std::abs(c - 1.8) <= 0.03 * 1.8, "c = " + num(c) + " mm/s (1.8 +- 3%)");
        o.require(std::abs(n - 46.0) <= 0.03 * 46.0, "n_peak = " + num(n) + " /um (46 +- 3%)");
        o.require(std::abs(R - 56.0) <= 0.02 * 56.0, "R = " + num(R) + " um (56 +- 2%)");
        return o;
    });

    criterion(2, "prethermalized correlation", 5.0, [] {
        Outcome o;
        const double L = 100 * um;
        const auto p = derive_params(testsupport::homogeneous_box(46 * units::per_micrometer, L));
        const auto m = build_modes(p, L);
        double worst = 0.0, at = 0.0;
        for (double z = 0.0; z <= 0.25 * L + 1e-12; z += 0.25 * um) {
            const double c = std::exp(-0.5 * time_averaged_variance(z, m));
            const double e = rel(c, std::exp(-z / p.l0));
            if (e > worst) worst = e, at = z;
        }
        o.require(worst <= 0.02, "max |C_avg/exp(-z/l0) - 1| over [0, L/4] = " + num(worst) + " at zbar = " +
                                     num(at / um) + " um (limit 0.02, p_max = " + std::to_string(m.p_max()) + ")");
        return o;
    });

    criterion(3, "light-cone step in the time derivative", 10.0, [] {
        Outcome o;
        const double L = 100 * um, t = 5 * ms;
        const auto p = testsupport::box_with_sound_speed(1e-3, L);
        const auto m = build_modes(p, L);
        const double plateau = 2.0 * p.c / p.l0, edge = 2.0 * p.c * t;
        double inside_worst = 0.0, outside_worst = 0.0, inside_mean = 0.0, outside_mean = 0.0;
        int ni = 0, no = 0;
        for (double z = 0.25 * p.xi_h; z <= 0.5 * L; z += 0.25 * p.xi_h) {
            const double d = variance_time_derivative(z, t, m);
            if (z < edge - 3 * p.xi_h) {
                inside_worst = std::max(inside_worst, std::abs(d - plateau) / plateau);
                inside_mean += d;
                ++ni;
            } else if (z > edge + 3 * p.xi_h) {
                outside_worst = std::max(outside_worst, std::abs(d) / plateau);
                outside_mean += d;
                ++no;
            }
        }
        inside_mean /= ni;
        outside_mean /= no;
        o.require(inside_worst <= 0.05, "inside cone max |d_t var / (2c/l0) - 1| = " + num(inside_worst) +
                                            " (mean d_t var = " + num(inside_mean / plateau) + " x 2c/l0)");
        o.require(outside_worst < 0.05, "outside cone max |d_t var| / (2c/l0) = " + num(outside_worst) +
                                            " (mean " + num(outside_mean / plateau) + " x 2c/l0)");
        return o;
    });

    criterion(4, "front velocities", 120.0, [] {
        Outcome o;
        const auto [table, series] = run_front(parse_scenario(preset("fig6")));
        auto find = [&series](const std::string& label) -> const FrontSeries& {
            for (const auto& s : series)
                if (s.label == label) return s;
            throw std::runtime_error("missing series " + label);
        };
        double worst = 0.0;
        bool ordered = true;
        std::string gaps;
        for (const char* n : {"3000", "5000", "7000", "9000"}) {
            const auto& h = find(std::string("homogeneous_N") + n);
            const auto& tf = find(std::string("thomas_fermi_N") + n);
            const auto& q = find(std::string("quasi_1d_N") + n);
            worst = std::max(worst, std::abs(h.trace.velocity / (2.0 * h.params.c) - 1.0));
            ordered = ordered && tf.trace.velocity < h.trace.velocity;
            gaps += std::string(gaps.empty() ? "" : ", ") + "N=" + n + ": " +
                    num(100.0 * (1.0 - q.trace.velocity / tf.trace.velocity), 3);
        }
        o.require(worst <= 0.02, "homogeneous max |v/2c - 1| = " + num(worst) + " (limit 0.02)");
        o.require(ordered, "Thomas-Fermi below homogeneous at equal peak density for every N");
        const auto& tf = find("thomas_fermi_N7000");
        const auto& q = find("quasi_1d_N7000");
        const double gap = 100.0 * (1.0 - q.trace.velocity / tf.trace.velocity);
        o.require(std::abs(gap - 10.0) <= 5.0,
                  "quasi-1D below Thomas-Fermi at the reference N=7000 by " + num(gap, 3) +
                      " points (10 +- 5; all N: " + gaps + ")");
        return o;
    });

    criterion(5, "quasi-1D profile", 10.0, [] {
        Outcome o;
        const auto tf = derive_params(testsupport::reference_trap());
        const auto q = quasi1d_profile(testsupport::reference_trap(7000.0, Regime::quasi_1d));
        const double r = q.radius / tf.R, n = q.n_peak / tf.n_peak;
        o.require(std::abs(r - 0.96) <= 0.02, "R_eff/R_TF = " + num(r) + " (0.96 +- 0.02)");
        o.require(std::abs(n - 1.10) <= 0.03, "n_eff/n_TF = " + num(n) + " (1.10 +- 0.03)");
        return o;
    });

    criterion(6, "recurrences", 120.0, [] {
        Outcome o;
        const double L = 100 * um;
        const auto p = derive_params(testsupport::homogeneous_box(46 * units::per_micrometer, L));
        const auto m = build_modes(p, L);
        const double trev = recurrence_time(L, p.c);
        double worst = 0.0;
        for (double z = 0.0; z <= L; z += 0.25 * um)
            worst = std::max(worst, std::abs(std::exp(-0.5 * phase_variance(z, trev, m)) - 1.0));
        o.require(worst <= 1e-10, "homogeneous max |C(zbar, L/2c) - 1| = " + num(worst) + " (limit 1e-10)");
        const auto r = run_recurrence(parse_scenario(preset("fig7")));
        if (r.ranked.empty()) throw DetectionFailure("no trapped recurrence found");
        double strongest_later = 0.0;
        for (const auto& x : r.ranked) strongest_later = std::max(strongest_later, x.strength);
        o.require(std::abs(r.ranked[0].time / ms - 202.0) <= 5.0,
                  "trapped strongest recurrence at " + num(r.ranked[0].time / ms) + " ms, C^2 = " +
                      num(r.ranked[0].strength) + " (202 +- 5 ms)");
        o.require(strongest_later < 0.99, "no trapped recurrence reaches full strength (max " +
                                              num(strongest_later) + ")");
        return o;
    });

    criterion(7, "stochastic oracle equivalence", 120.0, [] {
        Outcome o;
        auto timed = [](const char* file) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto c = run_oracle(load_scenario(std::string(LLRELAX_SCENARIO_DIR) + "/" + file));
            return std::make_pair(c, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        };
        for (const char* file : {"oracle_homogeneous.json", "oracle_trapped.json"}) {
            const auto [c, secs] = timed(file);
            o.require(c.stats.realizations == 10000 && fraction_within(c) >= 0.99,
                      std::string(file) + ": " + num(100.0 * fraction_within(c)) + "% within 3 stderr over " +
                          std::to_string(c.stats.mean.size()) + " points");
            o.require(secs < 60.0, std::string(file) + " runtime " + num(secs, 3) + " s (limit 60 s)");
        }
        auto sc = load_scenario(std::string(LLRELAX_SCENARIO_DIR) + "/oracle_homogeneous.json");
        sc.oracle.spec.realizations = 2500;
        const auto a = run_oracle(sc);
        sc.oracle.spec.realizations = 10000;
        const auto b = run_oracle(sc);
        double lo = 1e9, hi = 0.0;
        for (std::size_t g = 0; g < a.stats.stderr_.size(); ++g) {
            if (b.stats.stderr_[g] == 0.0) continue;
            const double ratio = a.stats.stderr_[g] / b.stats.stderr_[g];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        o.require(lo >= 2.0 * 0.85 && hi <= 2.0 * 1.15,
                  "stderr(2500)/stderr(10000) in [" + num(lo) + ", " + num(hi) + "] (2 +- 15%)");
        return o;
    });

    criterion(8, "property suite", 30.0, [] {
        Outcome o;
        const auto [x, w] = testsupport::gauss_legendre(32);
        double ortho = 0.0;
        for (int i = 1; i <= 10; ++i)
            for (int j = 1; j <= 10; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * legendre_f(i, x[k]) * legendre_f(j, x[k]);
                ortho = std::max(ortho, std::abs(s - (i == j ? 1.0 : 0.0)));
            }
        o.require(ortho <= 1e-10, "Legendre orthonormality error " + num(ortho) + " up to j = 10");
        const double omega = units::angular(7.0);
        o.require(mode_frequency(1, omega) == omega, "omega_1 == omega exactly");

        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> uz(-1.0, 1.0), ut(0.0, 0.3);
        const auto tp = derive_params(testsupport::reference_trap());
        const auto trap = build_legendre_modes(tp);
        const auto hp = derive_params(testsupport::homogeneous_box(46 * units::per_micrometer, 100 * um));
        const auto box = build_modes(hp, 100 * um);
        double asym = 0.0, most_negative = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const double a = uz(rng) * tp.R, b = uz(rng) * tp.R, t = ut(rng);
            const double v = trapped_phase_variance(a, b, t, trap);
            asym = std::max(asym, std::abs(v - trapped_phase_variance(b, a, t, trap)) / (1.0 + v));
            most_negative = std::min(most_negative, v);
            const double zb = uz(rng) * 100 * um;
            const double h = phase_variance(zb, t, box);
            asym = std::max(asym, std::abs(h - phase_variance(-zb, t, box)) / (1.0 + h));
            most_negative = std::min(most_negative, h);
        }
        o.require(asym <= 1e-12 && most_negative >= 0.0,
                  "variance symmetry " + num(asym) + ", minimum " + num(most_negative) + " over 4000 random points");

        std::uniform_real_distribution<double> un(1.0, 500.0), unu(100.0, 10000.0), ul(1.0, 500.0);
        double l0_spread = 0.0, sq_spread = 0.0;
        const double sq_ref = squeezing_limit(units::angular(1000.0), 100 * um, rubidium87.mass,
                                              rubidium87.scattering_length)
                                  .ratio *
                              units::angular(1000.0) * 100 * um;
        for (int i = 0; i < 500; ++i) {
            l0_spread = std::max(l0_spread, rel(with_peak_density(hp, un(rng) * units::per_micrometer).l0, hp.l0));
            const double wp = units::angular(unu(rng)), L = ul(rng) * um;
            sq_spread = std::max(
                sq_spread,
                rel(squeezing_limit(wp, L, rubidium87.mass, rubidium87.scattering_length).ratio * wp * L, sq_ref));
        }
        o.require(l0_spread <= 1e-12, "l0 invariance under density " + num(l0_spread));
        o.require(sq_spread <= 1e-12, "squeezing_limit * omega_perp * L spread " + num(sq_spread));

        bool identical = true;
        auto oracle_doc = preset("fig3");
        oracle_doc.erase("pcf");
        oracle_doc["oracle"] = {{"realizations", 1000}};
        const auto osc = parse_scenario(oracle_doc);
        const auto sc_params = parse_scenario(preset("reference"));
        const auto sc_pcf = parse_scenario(preset("fig4"));
        identical = identical && to_csv(cmd_params(sc_params)) == to_csv(cmd_params(sc_params));
        identical = identical && to_csv(cmd_pcf(sc_pcf)) == to_csv(cmd_pcf(sc_pcf));
        identical = identical && to_csv(cmd_oracle(osc)) == to_csv(cmd_oracle(osc));
        identical = identical && to_json(cmd_params(sc_params)).dump() == to_json(cmd_params(sc_params)).dump();
        o.require(identical, "byte-identical reruns of params, pcf, oracle tables");
        return o;
    });

    std::printf("%d of 8 criteria failed\n", failures);
    return failures;
}
