#pragma once
/**
 * @file battery.hpp
 * @brief Seeded families of test functions on a domain.
 *
 * A battery spec reads `kind:count=N,...`. Every random parameter is drawn
 * in physical units from the domain geometry, never from the grid, so the
 * same seed describes the same functions at every resolution.
 *
 *   gaussian   one bump, sigma in [sigma_lo, sigma_hi] L (default [0.1, 0.3])
 *   bumps      1 to 3 bumps with amplitudes in [0.5, 1]
 *   indicator  ball indicator, radius in [0.1, 0.4] L
 *   smooth     band-limited noise plus a random linear term
 *   zero       f = 0, for checking that vacuous cases pass
 *
 * L is the base-ball radius of the domain. Bump centres are drawn inside
 * the domain at distance at least L/4 from its boundary.
 */

#include <string>
#include <vector>

#include "vriesz/domains.hpp"
#include "vriesz/fields.hpp"

namespace vriesz {

struct BatteryMember {
    /// Analytic description of the member, reproducible with sample_field.
    std::string spec;
    ScalarField field;
};

namespace detail {

inline Point draw_centre(const DomainModel& D, Rng& rng) {
    const Grid& g = D.grid;
    const double margin = 0.25 * D.base_radius;
    for (int tries = 0; tries < 100000; ++tries) {
        Point p{0.0, 0.0, 0.0};
        for (int a = 0; a < g.dim(); ++a) p[a] = rng.uniform(g.bbox().lo[a], g.bbox().hi[a]);
        if (D.contains(p) && D.distance_at(p) >= margin) return p;
    }
    throw Error("battery: could not place a centre inside the domain");
}

inline std::string gaussian_spec(const Point& c, double sigma, double amp, int dim) {
    FieldSpec s{"gaussian", {{"cx", c[0]}, {"cy", c[1]}, {"sigma", sigma}, {"amp", amp}}};
    if (dim == 3) s.params["cz"] = c[2];
    return s.to_string();
}

}  // namespace detail

/// Sum of analytic functions given as specs separated by ';'.
inline ScalarField sample_sum(const Grid& g, const std::string& specs, const Mask& mask) {
    std::vector<AnalyticFunction> parts;
    std::size_t start = 0;
    while (start <= specs.size()) {
        const std::size_t end = std::min(specs.find(';', start), specs.size());
        const std::string item = trim(specs.substr(start, end - start));
        if (!item.empty()) parts.push_back(make_function(parse_field_spec(item), g));
        start = end + 1;
    }
    if (parts.empty()) throw Error("sample_sum: no function given");
    return sample_field(
        g,
        [&](const Point& x) {
            double v = 0.0;
            for (const auto& f : parts) v += f(x);
            return v;
        },
        mask);
}

/// Member specs of a battery; independent of the grid resolution.
inline std::vector<std::string> battery_specs(const DomainModel& D, const std::string& spec_text, std::uint64_t seed) {
    const FieldSpec spec = parse_field_spec(spec_text);
    const double count_d = spec.get("count", 10.0);
    if (count_d < 0 || count_d != std::floor(count_d)) throw Error("battery: count must be a non-negative integer");
    const auto count = static_cast<std::size_t>(count_d);
    const int dim = D.grid.dim();
    const double L = D.base_radius;
    Rng rng(seed ^ fnv1a(spec.name));
    std::vector<std::string> out;
    for (std::size_t k = 0; k < count; ++k) {
        std::string member;
        if (spec.name == "gaussian") {
            detail::check_keys(spec, {"count", "sigma_lo", "sigma_hi"});
            const double lo = spec.get("sigma_lo", 0.1), hi = spec.get("sigma_hi", 0.3);
            if (!(lo > 0.0 && lo <= hi)) throw Error("battery: need 0 < sigma_lo <= sigma_hi");
            const Point c = detail::draw_centre(D, rng);
            member = detail::gaussian_spec(c, rng.uniform(lo, hi) * L, 1.0, dim);
        } else if (spec.name == "bumps") {
            detail::check_keys(spec, {"count"});
            const std::size_t parts = 1 + rng.below(3);
            for (std::size_t j = 0; j < parts; ++j) {
                const Point c = detail::draw_centre(D, rng);
                const double sigma = rng.uniform(0.1, 0.3) * L;
                member += (j ? ";" : "") + detail::gaussian_spec(c, sigma, rng.uniform(0.5, 1.0), dim);
            }
        } else if (spec.name == "indicator") {
            detail::check_keys(spec, {"count"});
            const Point c = detail::draw_centre(D, rng);
            FieldSpec s{"ball", {{"cx", c[0]}, {"cy", c[1]}, {"radius", rng.uniform(0.1, 0.4) * L}}};
            if (dim == 3) s.params["cz"] = c[2];
            member = s.to_string();
        } else if (spec.name == "smooth") {
            detail::check_keys(spec, {"count", "kmax"});
            const double kmax = spec.get("kmax", 3.0);
            FieldSpec noise{"noise", {{"seed", static_cast<double>(rng.next() >> 20)}, {"kmax", kmax}, {"modes", 8.0}}};
            FieldSpec lin{"linear", {{"a0", rng.uniform(-1.0, 1.0) / L}, {"a1", rng.uniform(-1.0, 1.0) / L}}};
            if (dim == 3) lin.params["a2"] = rng.uniform(-1.0, 1.0) / L;
            member = noise.to_string() + ";" + lin.to_string();
        } else if (spec.name == "zero") {
            detail::check_keys(spec, {"count"});
            member = "constant:value=0";
        } else {
            throw Error("unknown battery kind '" + spec.name + "'");
        }
        out.push_back(member);
    }
    return out;
}

/// Samples every member of the battery on the domain's grid and mask.
inline std::vector<BatteryMember> make_battery(const DomainModel& D, const std::string& spec_text, std::uint64_t seed) {
    std::vector<BatteryMember> out;
    for (auto& s : battery_specs(D, spec_text, seed)) {
        ScalarField f = sample_sum(D.grid, s, D.mask);
        out.push_back({std::move(s), std::move(f)});
    }
    return out;
}

}  // namespace vriesz
