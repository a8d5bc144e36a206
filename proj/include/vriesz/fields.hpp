#pragma once
/**
 * @file fields.hpp
 * @brief Named analytic test functions and their sampling onto grids.
 *
 * A function is written as `name:key=value,key=value`, for example
 * `gaussian:cx=0.5,cy=0.5,sigma=0.1`. Recognised names and keys:
 *
 *   constant      value(0)
 *   ball          cx cy cz radius value(1)         indicator of the open ball
 *   gaussian      cx cy cz sigma amp(1)
 *   radial_power  cx cy cz gamma scale(1)          scale |x - c|^gamma
 *   log_holder    cx cy cz a(1) b(1)               a + b / log(e + 1/|x - c|)
 *   linear        a0 a1 a2 c(0)                    c + sum a_d x_d
 *   monomial      axis(0) power(1) scale(1)        scale x_axis^power
 *   step          axis(0) at(0) left right         left if x_axis < at
 *   noise         seed modes(8) kmax(3) amp(1) offset(0)
 *                 band-limited random trigonometric sum, |f - offset| <= amp
 *
 * The centre of radial_power is snapped to the nearest cell corner, so no
 * cell centre sits on the singular point.
 */

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "vriesz/grid.hpp"

namespace vriesz {

struct FieldSpec {
    std::string name;
    std::map<std::string, double> params;

    double get(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }

    double require(const std::string& key) const {
        auto it = params.find(key);
        if (it == params.end()) throw Error("field '" + name + "': missing parameter '" + key + "'");
        return it->second;
    }

    std::string to_string() const {
        std::string s = name;
        char sep = ':';
        for (const auto& [k, v] : params) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            s += sep;
            s += k + "=" + buf;
            sep = ',';
        }
        return s;
    }
};

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw Error(what + ": not a number: '" + text + "'");
    }
    if (used != text.size()) throw Error(what + ": not a number: '" + text + "'");
    return v;
}

inline FieldSpec parse_field_spec(const std::string& text) {
    FieldSpec spec;
    const auto colon = text.find(':');
    spec.name = trim(text.substr(0, colon));
    if (spec.name.empty()) throw Error("field spec: empty function name in '" + text + "'");
    if (colon == std::string::npos) return spec;
    std::string rest = text.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
        const auto comma = rest.find(',', pos);
        const std::string item = trim(rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (!item.empty()) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw Error("field spec: expected key=value, got '" + item + "'");
            const std::string key = trim(item.substr(0, eq));
            spec.params[key] = parse_double(trim(item.substr(eq + 1)), "field spec '" + spec.name + "." + key + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return spec;
}

using AnalyticFunction = std::function<double(const Point&)>;

namespace detail {

inline void check_keys(const FieldSpec& s, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : s.params)
        if (!ok.count(k)) throw Error("field '" + s.name + "': unknown parameter '" + k + "'");
}

inline Point center_of(const FieldSpec& s) { return {s.get("cx", 0.0), s.get("cy", 0.0), s.get("cz", 0.0)}; }

}  // namespace detail

/// Resolves a spec into a callable. Singular centres are snapped using `grid`.
inline AnalyticFunction make_function(const FieldSpec& s, const Grid& grid) {
    const int dim = grid.dim();
    const std::string& n = s.name;
    if (n == "constant") {
        detail::check_keys(s, {"value"});
        const double v = s.get("value", 0.0);
        return [v](const Point&) { return v; };
    }
    if (n == "ball") {
        detail::check_keys(s, {"cx", "cy", "cz", "radius", "value"});
        const Point c = detail::center_of(s);
        const double r = s.require("radius"), v = s.get("value", 1.0);
        if (!(r > 0.0)) throw Error("field 'ball': radius must be positive");
        return [=](const Point& x) { return distance_sq(x, c, dim) < r * r ? v : 0.0; };
    }
    if (n == "gaussian") {
        detail::check_keys(s, {"cx", "cy", "cz", "sigma", "amp"});
        const Point c = detail::center_of(s);
        const double sigma = s.require("sigma"), amp = s.get("amp", 1.0);
        if (!(sigma > 0.0)) throw Error("field 'gaussian': sigma must be positive");
        return [=](const Point& x) { return amp * std::exp(-distance_sq(x, c, dim) / (2.0 * sigma * sigma)); };
    }
    if (n == "radial_power") {
        detail::check_keys(s, {"cx", "cy", "cz", "gamma", "scale"});
        const Point c = grid.snap_to_corner(detail::center_of(s));
        const double gamma = s.require("gamma"), scale = s.get("scale", 1.0);
        return [=](const Point& x) { return scale * std::pow(distance(x, c, dim), gamma); };
    }
    if (n == "log_holder") {
        detail::check_keys(s, {"cx", "cy", "cz", "a", "b"});
        // Bounded with value a at c, so no snapping is needed.
        const Point c = detail::center_of(s);
        const double a = s.get("a", 1.0), b = s.get("b", 1.0);
        return [=](const Point& x) { return a + b / std::log(std::numbers::e + 1.0 / distance(x, c, dim)); };
    }
    if (n == "linear") {
        detail::check_keys(s, {"a0", "a1", "a2", "c"});
        const std::array<double, 3> a{s.get("a0", 0.0), s.get("a1", 0.0), s.get("a2", 0.0)};
        const double c = s.get("c", 0.0);
        return [=](const Point& x) {
            double v = c;
            for (int d = 0; d < dim; ++d) v += a[d] * x[d];
            return v;
        };
    }
    if (n == "monomial") {
        detail::check_keys(s, {"axis", "power", "scale"});
        const int axis = static_cast<int>(s.get("axis", 0.0));
        const double power = s.get("power", 1.0), scale = s.get("scale", 1.0);
        if (axis < 0 || axis >= dim) throw Error("field 'monomial': axis out of range");
        return [=](const Point& x) { return scale * std::pow(x[axis], power); };
    }
    if (n == "step") {
        detail::check_keys(s, {"axis", "at", "left", "right"});
        const int axis = static_cast<int>(s.get("axis", 0.0));
        const double at = s.get("at", 0.0), left = s.require("left"), right = s.require("right");
        if (axis < 0 || axis >= dim) throw Error("field 'step': axis out of range");
        return [=](const Point& x) { return x[axis] < at ? left : right; };
    }
    if (n == "noise") {
        detail::check_keys(s, {"seed", "modes", "kmax", "amp", "offset"});
        const int modes = static_cast<int>(s.get("modes", 8.0));
        const int kmax = static_cast<int>(s.get("kmax", 3.0));
        if (modes < 1) throw Error("field 'noise': modes must be at least 1");
        if (kmax < 1) throw Error("field 'noise': kmax must be at least 1");
        const double amp = s.get("amp", 1.0), offset = s.get("offset", 0.0);
        Rng rng(static_cast<std::uint64_t>(s.get("seed", 0.0)));
        struct Mode {
            std::array<double, 3> k;
            double a, phase;
        };
        std::vector<Mode> ms;
        double total = 0.0;
        const double two_pi_over_l = 2.0 * std::numbers::pi / grid.side();
        while (static_cast<int>(ms.size()) < modes) {
            Mode m{{0.0, 0.0, 0.0}, 0.0, 0.0};
            bool nonzero = false;
            for (int d = 0; d < dim; ++d) {
                const int k = static_cast<int>(rng.below(2 * kmax + 1)) - kmax;
                m.k[d] = k * two_pi_over_l;
                nonzero = nonzero || k != 0;
            }
            m.a = rng.uniform(-1.0, 1.0);
            m.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            if (!nonzero) continue;
            total += std::abs(m.a);
            ms.push_back(m);
        }
        const Point lo = grid.bbox().lo;
        return [=](const Point& x) {
            double v = 0.0;
            for (const auto& m : ms) {
                double arg = m.phase;
                for (int d = 0; d < dim; ++d) arg += m.k[d] * (x[d] - lo[d]);
                v += m.a * std::cos(arg);
            }
            return offset + amp * v / total;
        };
    }
    throw Error("unknown field function '" + n + "'");
}

/// Evaluates fn at every cell centre; the mask decides membership.
inline ScalarField sample_field(const Grid& grid, const AnalyticFunction& fn, Mask mask) {
    if (mask.size() != grid.cell_count()) throw Error("sample_field: mask size does not match grid");
    std::vector<double> v(grid.cell_count());
    for (CellIndex i = 0; i < v.size(); ++i) v[i] = fn(grid.center(i));
    return ScalarField(grid, std::move(v), std::move(mask));
}

inline ScalarField sample_field(const Grid& grid, const FieldSpec& spec, Mask mask) {
    return sample_field(grid, make_function(spec, grid), std::move(mask));
}

inline ScalarField sample_field(const Grid& grid, const std::string& spec, Mask mask) {
    return sample_field(grid, parse_field_spec(spec), std::move(mask));
}

inline ScalarField sample_field(const Grid& grid, const std::string& spec) {
    return sample_field(grid, spec, full_mask(grid));
}

inline ExponentField sample_exponent(const Grid& grid, const std::string& spec, Mask mask) {
    return ExponentField(sample_field(grid, spec, std::move(mask)));
}

inline ExponentField constant_exponent(const Grid& grid, double value, Mask mask) {
    return ExponentField(ScalarField(grid, std::vector<double>(grid.cell_count(), value), std::move(mask)));
}

/// Constant exponent on the grid and mask of an existing one.
inline ExponentField constant_exponent_like(const ExponentField& like, double value) {
    return ExponentField(like.field().with_values(std::vector<double>(like.grid().cell_count(), value)));
}

/// Pointwise map over all cells, keeping grid and mask.
template <class Fn>
ScalarField map_field(const ScalarField& f, Fn&& fn) {
    std::vector<double> v(f.values().size());
    for (CellIndex i = 0; i < v.size(); ++i) v[i] = fn(f[i], i);
    return f.with_values(std::move(v));
}

}  // namespace vriesz
