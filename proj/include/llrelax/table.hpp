#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace llrelax {

inline constexpr const char* tool_version = "1.0.0";

struct Column {
    std::string name;
    std::string unit;
    std::vector<double> values;
};

/// Column-oriented numeric table with a provenance block. Serialized as CSV with
/// a leading '#' comment block; headers carry units as name[unit].
struct ResultTable {
    std::string command;
    std::vector<std::pair<std::string, std::string>> provenance;
    std::vector<Column> columns;

    void note(std::string key, std::string value) { provenance.emplace_back(std::move(key), std::move(value)); }

    Column& add(std::string name, std::string unit, std::vector<double> values = {}) {
        columns.push_back({std::move(name), std::move(unit), std::move(values)});
        return columns.back();
    }

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().values.size(); }

    const Column& column(const std::string& name) const {
        for (const auto& c : columns)
            if (c.name == name) return c;
        throw std::out_of_range("no column named " + name);
    }
};

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline void write_csv(const ResultTable& t, std::ostream& os) {
    for (const auto& c : t.columns)
        if (c.values.size() != t.rows()) throw std::logic_error("ragged table column " + c.name);
    os << "# llrelax " << tool_version << '\n';
    os << "# command: " << t.command << '\n';
    for (const auto& [k, v] : t.provenance) os << "# " << k << ": " << v << '\n';
    os << "# rows: " << t.rows() << '\n';
    os << "# columns: " << t.columns.size() << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i].name << '[' << t.columns[i].unit << ']';
    os << '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            os << (i ? "," : "") << format_number(t.columns[i].values[r]);
        os << '\n';
    }
}

inline std::string to_csv(const ResultTable& t) {
    std::ostringstream os;
    write_csv(t, os);
    return os.str();
}

/// Structured mirror; non-finite values become null.
inline nlohmann::ordered_json to_json(const ResultTable& t) {
    nlohmann::ordered_json j;
    j["tool"] = std::string("llrelax ") + tool_version;
    j["command"] = t.command;
    auto& prov = j["provenance"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.provenance) prov[k] = v;
    auto& cols = j["columns"] = nlohmann::ordered_json::array();
    for (const auto& c : t.columns) {
        nlohmann::ordered_json col;
        col["name"] = c.name;
        col["unit"] = c.unit;
        auto& vals = col["values"] = nlohmann::ordered_json::array();
        for (double v : c.values) {
            if (std::isfinite(v)) vals.push_back(v);
            else vals.push_back(nullptr);
        }
        cols.push_back(std::move(col));
    }
    return j;
}

struct TableCheck {
    bool ok = true;
    std::vector<std::string> problems;
    ResultTable table;

    void fail(std::string why) {
        ok = false;
        problems.push_back(std::move(why));
    }
};

/// Re-reads an emitted CSV and checks the header units, declared row and column
/// counts, and that every cell parses as a number.
inline TableCheck read_and_validate(std::istream& is) {
    TableCheck check;
    auto& t = check.table;
    std::string line;
    long declared_rows = -1, declared_cols = -1;
    bool saw_tool = false;
    while (is.peek() == '#' && std::getline(is, line)) {
        const std::string body = line.substr(line.size() > 1 ? 2 : 1);
        if (body.rfind("llrelax ", 0) == 0) {
            saw_tool = true;
            continue;
        }
        const auto colon = body.find(": ");
        if (colon == std::string::npos) {
            check.fail("malformed provenance line: " + line);
            continue;
        }
        const std::string key = body.substr(0, colon), value = body.substr(colon + 2);
        if (key == "rows") declared_rows = std::stol(value);
        else if (key == "columns") declared_cols = std::stol(value);
        else if (key == "command") t.command = value;
        else t.note(key, value);
    }
    if (!saw_tool) check.fail("missing tool/version line");
    if (!std::getline(is, line)) {
        check.fail("missing header row");
        return check;
    }
    static const std::regex cell(R"(^([^\[\],]+)\[([^\[\],]*)\]$)");
    std::stringstream hs(line);
    std::string h;
    while (std::getline(hs, h, ',')) {
        std::smatch m;
        if (!std::regex_match(h, m, cell)) {
            check.fail("header without unit: " + h);
            t.add(h, "");
        } else {
            t.add(m[1], m[2]);
        }
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream rs(line);
        std::string v;
        std::size_t i = 0;
        while (std::getline(rs, v, ',')) {
            if (i < t.columns.size()) {
                try {
                    std::size_t used = 0;
                    const double x = std::stod(v, &used);
                    if (used != v.size()) throw std::invalid_argument(v);
                    t.columns[i].values.push_back(x);
                } catch (const std::exception&) {
                    check.fail("non-numeric cell '" + v + "'");
                    t.columns[i].values.push_back(std::nan(""));
                }
            }
            ++i;
        }
        if (i != t.columns.size()) check.fail("row with " + std::to_string(i) + " cells, expected " +
                                              std::to_string(t.columns.size()));
    }
    if (declared_cols != static_cast<long>(t.columns.size())) check.fail("declared column count mismatch");
    if (declared_rows != static_cast<long>(t.rows())) check.fail("declared row count mismatch");
    return check;
}

}  // namespace llrelax
