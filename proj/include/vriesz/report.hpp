#pragma once
/**
 * @file report.hpp
 * @brief Structured verification records and their JSON / CSV output.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vriesz/core.hpp"

namespace vriesz {

/// One checked inequality or property.
struct CaseRecord {
    std::string name;
    /// The inequality or property the verdict refers to.
    std::string check;
    std::string tolerance;
    bool pass = true;
    nlohmann::json values = nlohmann::json::object();
};

/// Columns of plot data written as CSV with a header row.
struct PlotTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) {
        if (row.size() != columns.size()) throw Error("PlotTable " + name + ": row width does not match header");
        rows.push_back(std::move(row));
    }

    std::string to_csv() const {
        std::string s;
        for (std::size_t k = 0; k < columns.size(); ++k) s += (k ? "," : "") + columns[k];
        s += '\n';
        char buf[40];
        for (const auto& r : rows) {
            for (std::size_t k = 0; k < r.size(); ++k) {
                std::snprintf(buf, sizeof buf, "%.17g", r[k]);
                s += (k ? "," : "");
                s += buf;
            }
            s += '\n';
        }
        return s;
    }
};

struct Report {
    std::string id;
    /// FNV-1a digest of the resolved inputs.
    std::string digest;
    nlohmann::json inputs = nlohmann::json::object();
    /// Hypothesis checks, run before the expensive kernels.
    std::vector<CaseRecord> hypotheses;
    std::vector<CaseRecord> cases;
    nlohmann::json constants = nlohmann::json::object();
    std::vector<PlotTable> plots;
    double runtime_seconds = 0.0;

    bool pass() const {
        for (const auto& c : hypotheses)
            if (!c.pass) return false;
        for (const auto& c : cases)
            if (!c.pass) return false;
        return true;
    }

    CaseRecord& add_case(std::string name, std::string check, std::string tolerance, bool ok,
                         nlohmann::json values = nlohmann::json::object()) {
        cases.push_back({std::move(name), std::move(check), std::move(tolerance), ok, std::move(values)});
        return cases.back();
    }

    CaseRecord& add_hypothesis(std::string name, std::string check, bool ok,
                               nlohmann::json values = nlohmann::json::object()) {
        hypotheses.push_back({std::move(name), std::move(check), "", ok, std::move(values)});
        return hypotheses.back();
    }
};

inline std::string hex_digest(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline nlohmann::json case_json(const CaseRecord& c) {
    return {{"name", c.name}, {"check", c.check}, {"tolerance", c.tolerance}, {"pass", c.pass}, {"values", c.values}};
}

/// JSON form. Runtime is the only field that may differ between identical runs.
inline nlohmann::json report_to_json(const Report& r, bool with_runtime = true) {
    nlohmann::json j;
    j["id"] = r.id;
    j["digest"] = r.digest;
    j["inputs"] = r.inputs;
    j["pass"] = r.pass();
    j["hypotheses"] = nlohmann::json::array();
    for (const auto& c : r.hypotheses) j["hypotheses"].push_back(case_json(c));
    j["cases"] = nlohmann::json::array();
    for (const auto& c : r.cases) j["cases"].push_back(case_json(c));
    j["constants"] = r.constants;
    nlohmann::json plots = nlohmann::json::array();
    for (const auto& p : r.plots) plots.push_back(p.name + ".csv");
    j["plot_files"] = plots;
    if (with_runtime) j["runtime_seconds"] = r.runtime_seconds;
    return j;
}

/// Writes `<id>.json` and one CSV per plot table into dir; returns the JSON path.
inline std::filesystem::path write_report(const Report& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / (r.id + ".json");
    {
        std::ofstream os(path);
        if (!os) throw Error("cannot write " + path.string());
        os << report_to_json(r).dump(2) << '\n';
    }
    for (const auto& p : r.plots) {
        std::ofstream os(dir / (p.name + ".csv"));
        if (!os) throw Error("cannot write plot data " + p.name);
        os << p.to_csv();
    }
    return path;
}

/// JSON numbers cannot hold inf/nan; they are written as strings instead.
inline nlohmann::json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

}  // namespace vriesz
