#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "llrelax/constants.hpp"
#include "llrelax/errors.hpp"
#include "llrelax/fields.hpp"
#include "llrelax/oracle.hpp"
#include "llrelax/params.hpp"
#include "llrelax/table.hpp"

namespace llrelax {

using json = nlohmann::json;

/// Parsed scenario file, converted to SI. Empty vectors / zero values mean
/// "use the command's default".
struct Scenario {
    json source;
    TrapConfig trap;
    int p_max = 0;
    int j_max = 0;

    struct Pcf {
        std::vector<double> separations;
        std::vector<double> times;
        double reference = 0.0;
    } pcf;

    struct Front {
        std::vector<double> times;
        double separation_max = 0.0;
        double separation_step = 0.0;
        double fit_lo = 0.0;
        double fit_hi = 10e-3;
        double smoothing = 0.0;
        double homogeneous_length = 300e-6;
        std::vector<double> atom_numbers;
        std::vector<Regime> regimes;
    } front;

    struct Contrast {
        std::vector<double> lengths;
        std::vector<double> times;
        std::size_t points = 101;
    } contrast;

    struct Recurrence {
        double length = 50e-6;
        double t_max = 300e-3;
        double step = 0.5e-3;
        std::size_t points = 101;
        std::size_t top = 10;
    } recurrence;

    struct SqueezeMap {
        std::vector<double> omega_perp;
        std::vector<double> length;
    } squeezing_map;

    struct Oracle {
        EnsembleSpec spec;
        std::vector<double> separations;
        std::vector<double> times;
        double reference = 0.0;
    } oracle;

    /// Hash of the canonical (sorted-key) JSON form.
    std::string hash() const { return hex64(fnv1a(source.dump())); }
};

namespace detail {

class SchemaReader {
  public:
    SchemaReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError("expected an object at '" + (path_.empty() ? std::string("/") : path_) + "'");
    }

    /// Rejects any key not in `allowed`.
    void only(std::initializer_list<const char*> allowed) const {
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : node_.items())
            if (!ok.count(k)) throw ConfigError("unknown key '" + path_ + "/" + k + "'");
    }

    bool has(const char* key) const { return node_.contains(key); }
    const json& raw(const char* key) const {
        if (!has(key)) throw ConfigError("missing required key '" + path_ + "/" + key + "'");
        return node_.at(key);
    }
    std::string at(const char* key) const { return path_ + "/" + key; }

    double number(const char* key) const {
        const auto& v = raw(key);
        if (!v.is_number()) throw ConfigError("expected a number at '" + at(key) + "'");
        return v.get<double>();
    }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::size_t count(const char* key, std::size_t fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError("expected a non-negative integer at '" + at(key) + "'");
        return v.get<std::size_t>();
    }

    std::string text(const char* key) const {
        const auto& v = raw(key);
        if (!v.is_string()) throw ConfigError("expected a string at '" + at(key) + "'");
        return v.get<std::string>();
    }

    bool flag(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_boolean()) throw ConfigError("expected true/false at '" + at(key) + "'");
        return v.get<bool>();
    }

    /// Either a list of numbers or {start, stop, step|count}; values times `scale`.
    std::vector<double> grid(const char* key, double scale) const {
        if (!has(key)) return {};
        const auto& v = node_.at(key);
        std::vector<double> out;
        if (v.is_array()) {
            for (const auto& x : v) {
                if (!x.is_number()) throw ConfigError("non-numeric grid entry at '" + at(key) + "'");
                out.push_back(x.get<double>() * scale);
            }
        } else if (v.is_object()) {
            SchemaReader g(v, at(key));
            g.only({"start", "stop", "step", "count"});
            const double a = g.number("start"), b = g.number("stop");
            if (g.has("step") == g.has("count"))
                throw ConfigError("grid '" + at(key) + "' needs exactly one of step / count");
            if (g.has("step")) {
                const double s = g.number("step");
                if (!(s > 0.0)) throw ConfigError("grid step must be positive at '" + at(key) + "'");
                out = arange(a, b, s);
            } else {
                out = linspace(a, b, g.count("count", 0));
            }
            for (auto& x : out) x *= scale;
        } else {
            throw ConfigError("expected a list or {start, stop, step} at '" + at(key) + "'");
        }
        if (out.empty()) throw ConfigError("empty grid at '" + at(key) + "'");
        return out;
    }

    SchemaReader child(const char* key) const { return {raw(key), at(key)}; }

  private:
    const json& node_;
    std::string path_;
};

inline Regime parse_regime(const std::string& s, const std::string& where) {
    if (s == "homogeneous") return Regime::homogeneous;
    if (s == "thomas_fermi") return Regime::thomas_fermi;
    if (s == "quasi_1d") return Regime::quasi_1d;
    throw ConfigError("unknown regime '" + s + "' at '" + where + "'");
}

}  // namespace detail

inline Scenario parse_scenario(const json& doc) {
    using detail::SchemaReader;
    Scenario sc;
    sc.source = doc;
    SchemaReader root(doc, "");
    root.only({"species", "regime", "trap", "atoms", "system_length_um", "squeezing", "truncation", "pcf",
               "front", "contrast", "recurrence", "squeezing_map", "oracle"});

    const auto& species = root.raw("species");
    if (species.is_string()) {
        if (species.get<std::string>() != "rb87")
            throw ConfigError("unknown species preset '" + species.get<std::string>() + "' at '/species'");
        sc.trap.species = rubidium87;
    } else {
        SchemaReader s(species, "/species");
        s.only({"mass_kg", "scattering_length_nm"});
        sc.trap.species = {s.number("mass_kg"), s.number("scattering_length_nm") * units::nanometer};
    }

    sc.trap.regime = detail::parse_regime(root.text("regime"), "/regime");
    {
        auto t = root.child("trap");
        t.only({"nu_perp_hz", "nu_long_hz"});
        sc.trap.omega_perp = units::angular(t.number("nu_perp_hz"));
        sc.trap.omega_long = units::angular(t.number("nu_long_hz", 0.0));
        if (is_trapped(sc.trap.regime) && !t.has("nu_long_hz"))
            throw ConfigError("missing required key '/trap/nu_long_hz'");
    }
    {
        auto a = root.child("atoms");
        a.only({"total", "peak_density_per_um"});
        if (a.has("total")) sc.trap.atom_number_total = a.number("total");
        if (a.has("peak_density_per_um"))
            sc.trap.peak_density_per_gas = a.number("peak_density_per_um") * units::per_micrometer;
    }
    sc.trap.system_length = root.number("system_length_um", 0.0) * units::micrometer;
    if (sc.trap.regime == Regime::homogeneous && !root.has("system_length_um"))
        throw ConfigError("missing required key '/system_length_um'");
    sc.trap.squeezing = root.number("squeezing", 1.0);
    sc.trap.validate();

    if (root.has("truncation")) {
        auto t = root.child("truncation");
        t.only({"p_max", "j_max"});
        sc.p_max = static_cast<int>(t.count("p_max", 0));
        sc.j_max = static_cast<int>(t.count("j_max", 0));
    }
    if (root.has("pcf")) {
        auto p = root.child("pcf");
        p.only({"separations_um", "times_ms", "reference_um"});
        sc.pcf.separations = p.grid("separations_um", units::micrometer);
        sc.pcf.times = p.grid("times_ms", units::millisecond);
        sc.pcf.reference = p.number("reference_um", 0.0) * units::micrometer;
    }
    if (root.has("front")) {
        auto f = root.child("front");
        f.only({"times_ms", "separation_max_um", "separation_step_um", "fit_window_ms", "smoothing_um",
                "homogeneous_length_um", "atom_numbers", "regimes"});
        sc.front.times = f.grid("times_ms", units::millisecond);
        sc.front.separation_max = f.number("separation_max_um", 0.0) * units::micrometer;
        sc.front.separation_step = f.number("separation_step_um", 0.0) * units::micrometer;
        sc.front.smoothing = f.number("smoothing_um", 0.0) * units::micrometer;
        sc.front.homogeneous_length = f.number("homogeneous_length_um", 300.0) * units::micrometer;
        if (f.has("fit_window_ms")) {
            const auto w = f.grid("fit_window_ms", units::millisecond);
            if (w.size() != 2 || !(w[1] > w[0])) throw ConfigError("'/front/fit_window_ms' must be [lo, hi]");
            sc.front.fit_lo = w[0];
            sc.front.fit_hi = w[1];
        }
        sc.front.atom_numbers = f.grid("atom_numbers", 1.0);
        if (f.has("regimes")) {
            const auto& list = f.raw("regimes");
            if (!list.is_array()) throw ConfigError("expected a list at '/front/regimes'");
            for (const auto& r : list) {
                if (!r.is_string()) throw ConfigError("expected regime names at '/front/regimes'");
                sc.front.regimes.push_back(detail::parse_regime(r.get<std::string>(), "/front/regimes"));
            }
        }
    }
    if (root.has("contrast")) {
        auto c = root.child("contrast");
        c.only({"lengths_um", "times_ms", "points"});
        sc.contrast.lengths = c.grid("lengths_um", units::micrometer);
        sc.contrast.times = c.grid("times_ms", units::millisecond);
        sc.contrast.points = c.count("points", 101);
    }
    if (root.has("recurrence")) {
        auto r = root.child("recurrence");
        r.only({"length_um", "t_max_ms", "step_ms", "points", "top"});
        sc.recurrence.length = r.number("length_um", 50.0) * units::micrometer;
        sc.recurrence.t_max = r.number("t_max_ms", 300.0) * units::millisecond;
        sc.recurrence.step = r.number("step_ms", 0.5) * units::millisecond;
        sc.recurrence.points = r.count("points", 101);
        sc.recurrence.top = r.count("top", 10);
    }
    if (root.has("squeezing_map")) {
        auto m = root.child("squeezing_map");
        m.only({"nu_perp_hz", "length_um"});
        sc.squeezing_map.omega_perp = m.grid("nu_perp_hz", 2.0 * pi);
        sc.squeezing_map.length = m.grid("length_um", units::micrometer);
    }
    if (root.has("oracle")) {
        auto o = root.child("oracle");
        o.only({"realizations", "seed", "initial", "temperature_nk", "initial_phase_noise", "separations_um",
                "times_ms", "reference_um"});
        auto& spec = sc.oracle.spec;
        spec.realizations = o.count("realizations", spec.realizations);
        if (o.has("seed")) {
            const auto& s = o.raw("seed");
            if (!s.is_number_unsigned() && !s.is_number_integer())
                throw ConfigError("expected an integer at '/oracle/seed'");
            spec.master_seed = s.get<std::uint64_t>();
        }
        if (o.has("initial")) {
            const auto kind = o.text("initial");
            if (kind == "split") spec.initial = InitialKind::split;
            else if (kind == "thermal") spec.initial = InitialKind::thermal;
            else throw ConfigError("unknown initial condition '" + kind + "' at '/oracle/initial'");
        }
        spec.temperature = o.number("temperature_nk", 0.0) * units::nanokelvin;
        spec.include_initial_phase_noise = o.flag("initial_phase_noise", false);
        sc.oracle.separations = o.grid("separations_um", units::micrometer);
        sc.oracle.times = o.grid("times_ms", units::millisecond);
        sc.oracle.reference = o.number("reference_um", 0.0) * units::micrometer;
    }
    return sc;
}

/// Parses JSON text; '//' and '/* */' comments are allowed.
inline Scenario parse_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
    }
    return parse_scenario(doc);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

/// Built-in figure scenarios with the reference parameters
/// (Rb-87, nu_perp = 1400 Hz, nu = 7 Hz, N = 7000).
inline json preset(const std::string& name) {
    json ref = {{"species", "rb87"},
                {"regime", "thomas_fermi"},
                {"trap", {{"nu_perp_hz", 1400.0}, {"nu_long_hz", 7.0}}},
                {"atoms", {{"total", 7000}}}};
    auto homogeneous = [&](double peak_per_um, double length_um) {
        json h = ref;
        h["regime"] = "homogeneous";
        h["trap"] = {{"nu_perp_hz", 1400.0}};
        h["atoms"] = {{"peak_density_per_um", peak_per_um}};
        h["system_length_um"] = length_um;
        return h;
    };
    const json pcf_times = {{"start", 0.0}, {"stop", 10.0}, {"step", 2.0}};
    if (name == "reference") return ref;
    if (name == "fig1") {
        json j = ref;
        j["squeezing_map"] = {{"nu_perp_hz", {{"start", 500.0}, {"stop", 5000.0}, {"step", 250.0}}},
                              {"length_um", {{"start", 10.0}, {"stop", 200.0}, {"step", 10.0}}}};
        return j;
    }
    if (name == "fig2") {
        // peak density giving c = 1 mm/s
        const double g = coupling_1d(rubidium87, units::angular(1400.0));
        const double n = 1e-3 * 1e-3 * rubidium87.mass / g;
        json j = homogeneous(n / units::per_micrometer, 100.0);
        j["pcf"] = {{"separations_um", {{"start", 0.0}, {"stop", 20.0}, {"step", 0.05}}}, {"times_ms", {5.0}}};
        return j;
    }
    if (name == "fig3") {
        json j = homogeneous(46.0, 100.0);
        j["pcf"] = {{"separations_um", {{"start", 0.0}, {"stop", 50.0}, {"step", 0.25}}}, {"times_ms", pcf_times}};
        return j;
    }
    if (name == "fig4") {
        json j = ref;
        j["atoms"] = {{"peak_density_per_um", 46.0}};
        j["pcf"] = {{"separations_um", {{"start", 0.0}, {"stop", 56.0}, {"step", 0.25}}}, {"times_ms", pcf_times}};
        return j;
    }
    if (name == "fig5") {
        json j = ref;
        j["front"] = {{"atom_numbers", {3000, 6000, 9000}},
                      {"times_ms", {{"start", 0.5}, {"stop", 20.0}, {"step", 0.5}}}};
        return j;
    }
    if (name == "fig6") {
        json j = ref;
        j["front"] = {{"atom_numbers", {3000, 5000, 7000, 9000}},
                      {"regimes", {"homogeneous", "thomas_fermi", "quasi_1d"}},
                      {"times_ms", {{"start", 0.5}, {"stop", 10.0}, {"step", 0.5}}}};
        return j;
    }
    if (name == "fig7") {
        json j = ref;
        j["recurrence"] = {{"length_um", 50.0}, {"t_max_ms", 300.0}, {"step_ms", 0.5}};
        return j;
    }
    if (name == "fig8") {
        json j = ref;
        j["contrast"] = {{"lengths_um", {5.0, 20.0, 50.0, 90.0}},
                         {"times_ms", {{"start", 0.0}, {"stop", 300.0}, {"step", 0.5}}}};
        return j;
    }
    throw ConfigError("unknown preset '" + name + "' (expected reference or fig1..fig8)");
}

}  // namespace llrelax
