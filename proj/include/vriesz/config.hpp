#pragma once
/**
 * @file config.hpp
 * @brief Experiment configuration files.
 *
 * A config is an INI-style text file: `key = value` lines grouped under
 * `[section]` headers, `;` or `#` comments. The `[general]` section sets
 * defaults shared by all experiments (seed, resolution, dim, out); every
 * other section is named after an experiment id and overrides them.
 *
 *   [general]
 *   seed = 7
 *
 *   [exponential_decay]
 *   domain = box:lo=0,hi=1
 *   battery = gaussian:count=10
 *   alpha = constant:value=1
 */

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "vriesz/fields.hpp"

namespace vriesz {

/// Flat key/value view of one section, with typed accessors.
class Section {
public:
    Section() = default;
    explicit Section(std::string name, std::map<std::string, std::string> kv = {})
        : name_(std::move(name)), kv_(std::move(kv)) {}

    const std::string& name() const { return name_; }
    const std::map<std::string, std::string>& entries() const { return kv_; }
    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    void set(const std::string& key, std::string value) { kv_[key] = std::move(value); }

    std::string text(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    double number(const std::string& key, double fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : parse_double(it->second, where(key));
    }

    long integer(const std::string& key, long fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        const double v = parse_double(it->second, where(key));
        if (v != static_cast<double>(static_cast<long>(v))) throw Error(where(key) + ": expected an integer");
        return static_cast<long>(v);
    }

    /// Comma separated list of numbers.
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!trim(item).empty()) out.push_back(parse_double(trim(item), where(key)));
        return out;
    }

    /// Rejects keys outside the allowed set, so typos do not pass silently.
    void require_known(const std::set<std::string>& allowed) const {
        for (const auto& [k, v] : kv_)
            if (!allowed.count(k)) throw Error("config [" + name_ + "]: unknown key '" + k + "'");
    }

private:
    std::string where(const std::string& key) const { return "config [" + name_ + "] " + key; }
    std::string name_;
    std::map<std::string, std::string> kv_;
};

class Config {
public:
    /// Parses INI text; errors carry the source name and line number.
    static Config parse(std::istream& in, const std::string& source = "<config>") {
        namespace pt = boost::property_tree;
        pt::ptree tree;
        try {
            pt::read_ini(in, tree);
        } catch (const pt::ini_parser_error& e) {
            throw Error("config " + source + ":" + std::to_string(e.line()) + ": " + e.message());
        }
        Config c;
        for (const auto& [name, sec] : tree) {
            if (sec.empty() && !sec.data().empty())
                throw Error("config " + source + ": key '" + name + "' must appear inside a [section]");
            std::map<std::string, std::string> kv;
            for (const auto& [k, v] : sec) kv[k] = trim(v.data());
            c.sections_[name] = Section(name, std::move(kv));
        }
        return c;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open config file " + path.string());
        return parse(in, path.string());
    }

    bool has(const std::string& section) const { return sections_.count(section) != 0; }

    /// One section as written; empty when absent.
    Section section(const std::string& name) const {
        auto it = sections_.find(name);
        return it == sections_.end() ? Section(name) : it->second;
    }

    /// The experiment's section merged over [general].
    Section experiment(const std::string& id) const {
        std::map<std::string, std::string> kv;
        if (auto it = sections_.find("general"); it != sections_.end()) kv = it->second.entries();
        if (auto it = sections_.find(id); it != sections_.end())
            for (const auto& [k, v] : it->second.entries()) kv[k] = v;
        return Section(id, std::move(kv));
    }

    std::vector<std::string> section_names() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : sections_) out.push_back(k);
        return out;
    }

private:
    std::map<std::string, Section> sections_;
};

}  // namespace vriesz
