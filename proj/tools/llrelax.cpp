// llrelax: command-line front end for the relaxation model.
//
// Exit codes: 0 ok, 1 usage / io, 2 configuration, 3 non-convergence, 4 detection failure.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "llrelax/llrelax.hpp"

namespace {

using llrelax::json;

struct Common {
    std::string config;
    std::string preset;
    std::string out;
    bool as_json = false;
    std::vector<double> times_ms;
    std::optional<double> t_max_ms;
    std::optional<std::size_t> realizations;
    std::optional<std::uint64_t> seed;
};

json load_document(const Common& c) {
    if (!c.config.empty() && !c.preset.empty()) throw llrelax::ConfigError("use either --config or --preset, not both");
    if (!c.config.empty()) {
        std::ifstream in(c.config);
        if (!in) throw llrelax::ConfigError("cannot open scenario file '" + c.config + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            return json::parse(ss.str(), nullptr, true, true);
        } catch (const json::parse_error& e) {
            throw llrelax::ConfigError(std::string("scenario is not valid JSON: ") + e.what());
        }
    }
    return llrelax::preset(c.preset.empty() ? "reference" : c.preset);
}

// Command-line overrides are written into the document so the config hash reflects them.
void apply_overrides(json& doc, const std::string& section, const Common& c) {
    if (!c.times_ms.empty()) doc[section]["times_ms"] = c.times_ms;
    if (c.t_max_ms) doc["recurrence"]["t_max_ms"] = *c.t_max_ms;
    if (c.realizations) doc["oracle"]["realizations"] = *c.realizations;
    if (c.seed) doc["oracle"]["seed"] = *c.seed;
}

void emit(const llrelax::ResultTable& table, const Common& c) {
    std::string text = c.as_json ? llrelax::to_json(table).dump(2) + "\n" : llrelax::to_csv(table);
    if (c.out.empty() || c.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(c.out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write '" + c.out + "'");
    os << text;
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const llrelax::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const llrelax::NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << " (residual " << llrelax::format_number(e.residual())
                  << ")\n";
        return 3;
    } catch (const llrelax::DetectionFailure& e) {
        std::cerr << "detection failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxation of a coherently split 1D Bose gas: correlation fronts, recurrences, squeezing"};
    app.set_version_flag("--version", std::string("llrelax ") + llrelax::tool_version);
    app.require_subcommand(1);

    Common common;
    using Command = llrelax::ResultTable (*)(const llrelax::Scenario&);
    struct Spec {
        const char* name;
        const char* help;
        const char* section;
        Command run;
    };
    const std::vector<Spec> specs = {
        {"params", "derived physical parameters and timescales", "", llrelax::cmd_params},
        {"pcf", "phase correlation function C(z, t)", "pcf", llrelax::cmd_pcf},
        {"front", "light-cone front positions and velocities", "front", llrelax::cmd_front},
        {"recurrence", "mean squared contrast scan and ranked recurrences", "recurrence", llrelax::cmd_recurrence},
        {"contrast", "mean squared contrast versus time for several lengths", "contrast", llrelax::cmd_contrast},
        {"squeezing-map", "squeezing limit over transverse frequency and length", "squeezing_map",
         llrelax::cmd_squeezing_map},
        {"oracle", "stochastic ensemble check of the analytic correlation", "oracle", llrelax::cmd_oracle},
    };

    int status = 0;
    for (const auto& s : specs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("-c,--config", common.config, "scenario JSON file");
        sub->add_option("-p,--preset", common.preset, "built-in scenario (reference, fig1..fig8)");
        sub->add_option("-o,--out", common.out, "output file (default stdout)");
        sub->add_flag("--json", common.as_json, "emit JSON instead of CSV");
        const std::string section = s.section;
        if (section == "pcf" || section == "front" || section == "contrast" || section == "oracle")
            sub->add_option("--times", common.times_ms, "evaluation times in ms")->delimiter(',');
        if (section == "recurrence") sub->add_option("--t-max", common.t_max_ms, "scan length in ms");
        if (section == "oracle") {
            sub->add_option("--realizations", common.realizations, "ensemble size");
            sub->add_option("--seed", common.seed, "master seed");
        }
        sub->callback([&status, &common, s, section]() {
            status = guarded([&] {
                json doc = load_document(common);
                if (!section.empty()) apply_overrides(doc, section, common);
                emit(s.run(llrelax::parse_scenario(doc)), common);
            });
        });
    }

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a CSV table written by this tool");
    validate->add_option("file", validate_path, "table file")->required();
    validate->callback([&]() {
        std::ifstream in(validate_path);
        if (!in) {
            std::cerr << "error: cannot open '" << validate_path << "'\n";
            status = 1;
            return;
        }
        const auto check = llrelax::read_and_validate(in);
        if (check.ok) {
            std::cout << "ok: " << check.table.command << ", " << check.table.rows() << " rows, "
                      << check.table.columns.size() << " columns\n";
            return;
        }
        for (const auto& p : check.problems) std::cerr << "invalid: " << p << '\n';
        status = 2;
    });

    std::string preset_name;
    auto* dump = app.add_subcommand("dump-preset", "print a built-in scenario as JSON");
    dump->add_option("name", preset_name, "preset name")->required();
    dump->callback([&]() { status = guarded([&] { std::cout << llrelax::preset(preset_name).dump(2) << '\n'; }); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    return status;
}
