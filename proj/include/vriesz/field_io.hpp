#pragma once
/**
 * @file field_io.hpp
 * @brief Field files: a JSON header plus a row-major data file.
 *
 * `<stem>.json` holds {dim, resolution, bbox, field_kind, encoding, data}.
 * With encoding "csv" the data file `<stem>.csv` has a `value,mask` header
 * row and one row per cell. With encoding "binary" the data file `<stem>.bin`
 * holds cell_count IEEE-754 little-endian doubles followed by cell_count mask
 * bytes (0 or 1).
 */

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "vriesz/fields.hpp"
#include "vriesz/grid.hpp"

namespace vriesz {

enum class Encoding { csv, binary };

inline const char* encoding_name(Encoding e) { return e == Encoding::csv ? "csv" : "binary"; }

inline Encoding parse_encoding(const std::string& s) {
    if (s == "csv") return Encoding::csv;
    if (s == "binary" || s == "bin") return Encoding::binary;
    throw Error("unknown field encoding '" + s + "'");
}

inline nlohmann::json grid_to_json(const Grid& g) {
    nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
    for (int a = 0; a < g.dim(); ++a) {
        lo.push_back(g.bbox().lo[a]);
        hi.push_back(g.bbox().hi[a]);
    }
    return {{"dim", g.dim()}, {"resolution", g.resolution()}, {"bbox", {{"lo", lo}, {"hi", hi}}}};
}

inline Grid grid_from_json(const nlohmann::json& j) {
    const int dim = j.at("dim").get<int>();
    Box b;
    const auto& lo = j.at("bbox").at("lo");
    const auto& hi = j.at("bbox").at("hi");
    if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
        throw Error("field header: bbox arity does not match dim");
    for (int a = 0; a < dim; ++a) {
        b.lo[a] = lo[a].get<double>();
        b.hi[a] = hi[a].get<double>();
    }
    return make_grid(dim, j.at("resolution").get<int>(), b);
}

namespace detail {

inline void put_le(std::ostream& os, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char buf[8];
    for (int k = 0; k < 8; ++k) buf[k] = static_cast<unsigned char>(bits >> (8 * k));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

inline double get_le(std::istream& is) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) throw Error("field data: truncated binary file");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
    return std::bit_cast<double>(bits);
}

}  // namespace detail

/// Writes `<stem>.json` and the data file next to it; returns the header path.
inline std::filesystem::path write_field(const ScalarField& f, const std::filesystem::path& stem,
                                         const std::string& field_kind, Encoding enc = Encoding::csv) {
    namespace fs = std::filesystem;
    if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
    const fs::path data = fs::path(stem).concat(enc == Encoding::csv ? ".csv" : ".bin");
    const fs::path header = fs::path(stem).concat(".json");
    nlohmann::json j = grid_to_json(f.grid());
    j["field_kind"] = field_kind;
    j["encoding"] = encoding_name(enc);
    j["data"] = data.filename().string();
    {
        std::ofstream os(header);
        if (!os) throw Error("cannot write " + header.string());
        os << j.dump(2) << "\n";
    }
    if (enc == Encoding::csv) {
        std::ofstream os(data);
        if (!os) throw Error("cannot write " + data.string());
        os << "value,mask\n";
        char buf[48];
        for (CellIndex i = 0; i < f.values().size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", f[i]);
            os << buf << ',' << (f.masked(i) ? 1 : 0) << '\n';
        }
    } else {
        std::ofstream os(data, std::ios::binary);
        if (!os) throw Error("cannot write " + data.string());
        for (double v : f.values()) detail::put_le(os, v);
        for (auto m : f.mask()) os.put(static_cast<char>(m ? 1 : 0));
    }
    return header;
}

struct LoadedField {
    ScalarField field;
    std::string field_kind;
};

inline LoadedField read_field(const std::filesystem::path& header_path) {
    namespace fs = std::filesystem;
    std::ifstream hs(header_path);
    if (!hs) throw Error("cannot open field header " + header_path.string());
    nlohmann::json j;
    try {
        hs >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("field header " + header_path.string() + ": " + e.what());
    }
    const Grid g = grid_from_json(j);
    const Encoding enc = parse_encoding(j.value("encoding", std::string("csv")));
    const fs::path data = header_path.parent_path() / j.at("data").get<std::string>();
    std::vector<double> values(g.cell_count());
    Mask mask(g.cell_count());
    if (enc == Encoding::csv) {
        std::ifstream is(data);
        if (!is) throw Error("cannot open field data " + data.string());
        std::string line;
        std::getline(is, line);
        for (CellIndex i = 0; i < g.cell_count(); ++i) {
            if (!std::getline(is, line)) throw Error("field data: expected " + std::to_string(g.cell_count()) + " rows");
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw Error("field data: malformed row " + std::to_string(i + 2));
            values[i] = parse_double(trim(line.substr(0, comma)), "field data row " + std::to_string(i + 2));
            mask[i] = trim(line.substr(comma + 1)) == "1" ? 1 : 0;
        }
    } else {
        std::ifstream is(data, std::ios::binary);
        if (!is) throw Error("cannot open field data " + data.string());
        for (double& v : values) v = detail::get_le(is);
        for (auto& m : mask) {
            const int c = is.get();
            if (c == EOF) throw Error("field data: truncated mask");
            m = c ? 1 : 0;
        }
    }
    return {ScalarField(g, std::move(values), std::move(mask)), j.value("field_kind", std::string())};
}

}  // namespace vriesz
