#pragma once
/**
 * @file verify.hpp
 * @brief Experiment drivers: each turns one config section into a Report of
 *        hypothesis checks, calibrated constants and pass/fail cases.
 *
 * An experiment id is `kind` or `kind.variant`; the kind selects the driver
 * and the full id selects the config section, so one config can hold, say,
 * `poincare.disk` and `poincare.mushroom`.
 *
 * Stability experiments run the same seeded battery at every resolution in
 * `resolutions` and compare the calibrated constant of consecutive entries
 * with relative_change against `tolerance`.
 */

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vriesz/battery.hpp"
#include "vriesz/config.hpp"
#include "vriesz/content.hpp"
#include "vriesz/domains.hpp"
#include "vriesz/potentials.hpp"
#include "vriesz/report.hpp"
#include "vriesz/vexp.hpp"

namespace vriesz {

/// Least-squares fit of log H = log c1 - c2 t^exponent.
struct DecayFit {
    double exponent = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double r2 = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t points = 0;
};

/// Fits the points with 0 < H < H_domain / 2. Fewer than two points give an
/// empty fit (points < 2, r2 = 0).
inline DecayFit fit_decay(std::span<const double> t, std::span<const double> H, double H_domain, double exponent) {
    DecayFit fit;
    fit.exponent = exponent;
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(H[k] > 0.0) || !(H[k] < 0.5 * H_domain)) continue;
        xs.push_back(std::pow(t[k], exponent));
        ys.push_back(std::log(H[k]));
        fit.t_lo = xs.size() == 1 ? t[k] : std::min(fit.t_lo, t[k]);
        fit.t_hi = std::max(fit.t_hi, t[k]);
    }
    fit.points = xs.size();
    if (xs.size() < 2) return fit;
    const double m = static_cast<double>(xs.size());
    const double mx = pairwise_sum(xs) / m, my = pairwise_sum(ys) / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    if (!(sxx > 0.0)) return fit;
    const double slope = sxy / sxx;
    fit.c2 = -slope;
    fit.c1 = std::exp(my - slope * mx);
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
    return fit;
}

/// `levels` geometric thresholds from the least positive to the largest
/// masked value; empty when no value is positive.
inline std::vector<double> observed_range_thresholds(const ScalarField& u, int levels) {
    auto t = geometric_thresholds(u, levels);
    t.erase(t.begin());
    return t;
}

/// `levels` thresholds evenly spaced in t from the smallest t whose level
/// content drops below half of `H_domain` up to `top` times the maximum.
/// Every threshold then lands inside the window the decay fit uses.
template <class Content>
std::vector<double> fit_window_thresholds(const ScalarField& u, int levels, double H_domain, double top,
                                          Content&& content) {
    double hi = 0.0;
    for (CellIndex i = 0; i < u.grid().cell_count(); ++i)
        if (u.masked(i)) hi = std::max(hi, u[i]);
    if (hi <= 0.0 || levels < 1) return {};
    double a = 0.0, b = hi;
    for (int it = 0; it < 40; ++it) {
        const double m = 0.5 * (a + b);
        (content(m) < 0.5 * H_domain ? b : a) = m;
    }
    const double t_top = std::max(b, top * hi);
    std::vector<double> t;
    for (int k = 0; k < levels; ++k) t.push_back(levels == 1 ? b : b + (t_top - b) * k / (levels - 1));
    return t;
}

struct RunOptions {
    std::optional<int> resolution;
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline nlohmann::json section_json(const Section& s) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : s.entries()) j[k] = v;
    return j;
}

inline std::string section_digest(const std::string& id, const Section& s) {
    std::string canon = id + "\n";
    for (const auto& [k, v] : s.entries()) canon += k + "=" + v + "\n";
    return hex_digest(fnv1a(canon));
}

inline std::vector<int> resolutions(const Section& s, std::vector<double> fallback) {
    std::vector<int> out;
    for (double r : s.numbers("resolutions", std::move(fallback))) {
        if (r != std::floor(r) || r < 4) throw Error("config [" + s.name() + "] resolutions: expected integers >= 4");
        out.push_back(static_cast<int>(r));
    }
    if (out.empty()) throw Error("config [" + s.name() + "] resolutions: empty list");
    return out;
}

inline std::uint64_t seed_of(const Section& s) {
    const long v = s.integer("seed", 1);
    if (v < 0) throw Error("config [" + s.name() + "] seed must be non-negative");
    return static_cast<std::uint64_t>(v);
}

inline bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

/// Adds finiteness cases per resolution and stability cases between
/// consecutive resolutions for one calibrated constant.
inline void stability_cases(Report& rep, const std::string& name, const std::vector<int>& res,
                            const std::vector<double>& values, double tolerance) {
    for (std::size_t k = 0; k < res.size(); ++k)
        rep.add_case(name + "_finite_" + std::to_string(res[k]), name + " is finite and positive", "", finite_positive(values[k]),
                     {{"resolution", res[k]}, {"value", num(values[k])}});
    for (std::size_t k = 0; k + 1 < res.size(); ++k) {
        const double change = relative_change(values[k], values[k + 1]);
        char tol[32];
        std::snprintf(tol, sizeof tol, "%g", tolerance);
        rep.add_case(name + "_stable_" + std::to_string(res[k]) + "_" + std::to_string(res[k + 1]),
                     "|c(fine) - c(coarse)| / c(coarse) <= tolerance", tol, change <= tolerance,
                     {{"coarse", num(values[k])}, {"fine", num(values[k + 1])}, {"relative_change", num(change)}});
    }
    nlohmann::json by_res = nlohmann::json::object();
    for (std::size_t k = 0; k < res.size(); ++k) by_res[std::to_string(res[k])] = num(values[k]);
    rep.constants[name] = by_res;
}

/// Exponent field from a spec on the domain.
inline ExponentField exponent_on(const DomainModel& D, const std::string& spec) {
    return ExponentField(sample_field(D.grid, spec, D.mask));
}

/// Hypothesis records for a variable exponent: finite log-Hölder constant
/// and bounds in [lo_min, hi_max) (or [lo_min, hi_max] when closed).
inline bool exponent_hypotheses(Report& rep, const std::string& name, const ExponentField& e, double lo_min,
                                double hi_max, bool lo_strict, bool hi_closed) {
    const bool lo_ok = lo_strict ? e.lo() > lo_min : e.lo() >= lo_min;
    const bool hi_ok = hi_closed ? e.hi() <= hi_max : e.hi() < hi_max;
    const bool lh = std::isfinite(e.logholder_c());
    char check[160];
    std::snprintf(check, sizeof check, "%g %s %s^- <= %s^+ %s %g and log-Hoelder constant finite", lo_min,
                  lo_strict ? "<" : "<=", name.c_str(), name.c_str(), hi_closed ? "<=" : "<", hi_max);
    rep.add_hypothesis(name + "_range", check, lo_ok && hi_ok && lh,
                       {{"lo", e.lo()}, {"hi", e.hi()}, {"logholder_c", num(e.logholder_c())},
                        {"logholder_exact", e.logholder().exact}});
    return lo_ok && hi_ok && lh;
}

/// sup over (alpha p)(x) on the mask.
inline double alpha_p_sup(const ExponentField& alpha, const ExponentField& p) {
    double m = 0.0;
    for (CellIndex i = 0; i < p.field().values().size(); ++i)
        if (p.field().masked(i)) m = std::max(m, alpha[i] * p[i]);
    return m;
}

/// Shared set-up of the battery experiments at one resolution.
struct Setup {
    DomainModel D;
    ExponentField alpha;
    ExponentField p;
    std::vector<BatteryMember> battery;
    EvalSet eval;
};

inline Setup make_setup(const Section& s, int resolution, const std::string& domain_default,
                        const std::string& battery_default, const std::string& alpha_default,
                        const std::string& p_default) {
    Setup st;
    st.D = make_domain(s.text("domain", domain_default), resolution);
    st.alpha = exponent_on(st.D, s.text("alpha", alpha_default));
    if (!p_default.empty()) st.p = exponent_on(st.D, s.text("p", p_default));
    st.battery = make_battery(st.D, s.text("battery", battery_default), seed_of(s));
    st.eval = stratified_eval_set(st.D.grid, st.D.mask, static_cast<int>(s.integer("eval_per_axis", 64)));
    return st;
}

/// Hypotheses shared by the L^{p(.)} experiments: alpha, p ranges and (alpha p)^+ < n.
inline void alpha_p_hypotheses(Report& rep, const Setup& st, double p_lo_min, bool p_lo_strict) {
    const int n = st.D.grid.dim();
    exponent_hypotheses(rep, "alpha", st.alpha, 0.0, n, true, false);
    exponent_hypotheses(rep, "p", st.p, p_lo_min, std::numeric_limits<double>::infinity(), p_lo_strict, false);
    const double ap = alpha_p_sup(st.alpha, st.p);
    rep.add_hypothesis("alpha_p_bound", "(alpha p)^+ < n", ap < n, {{"alpha_p_sup", ap}, {"n", n}});
}

inline void require_hypotheses(const Report& rep) {
    for (const auto& h : rep.hypotheses)
        if (!h.pass) throw Error(rep.id + ": hypothesis '" + h.name + "' (" + h.check + ") does not hold");
}

/// Potential at the evaluation cells extended to the mask.
inline ScalarField extended_potential(const ScalarField& f, const ExponentField& alpha, const EvalSet& eval) {
    const auto vals = riesz_potential(f, alpha, eval);
    return extend_nearest(f.grid(), f.mask(), eval, vals);
}

inline Mask level_mask(const ScalarField& u, double t) {
    Mask m(u.values().size(), 0);
    for (CellIndex i = 0; i < m.size(); ++i) m[i] = (u.masked(i) && u[i] > t) ? 1 : 0;
    return m;
}

inline ExponentField complement_exponent(const ExponentField& alpha) {
    const int n = alpha.grid().dim();
    std::vector<double> v(alpha.grid().cell_count());
    for (CellIndex i = 0; i < v.size(); ++i) v[i] = n - alpha[i];
    return ExponentField(alpha.field().with_values(std::move(v)));
}

inline ExponentField ratio_exponent(const ExponentField& alpha) {
    const int n = alpha.grid().dim();
    std::vector<double> v(alpha.grid().cell_count());
    for (CellIndex i = 0; i < v.size(); ++i) v[i] = n / alpha[i];
    return ExponentField(alpha.field().with_values(std::move(v)));
}

inline void begin(Report& rep, const std::string& id, const Section& s) {
    rep.id = id;
    rep.digest = section_digest(id, s);
    rep.inputs = section_json(s);
}

}  // namespace detail

/// Level sets of the potential of normalised data decay like exp(-c t^{n/(n - alpha^-)}).
inline Report verify_exponential_decay(const std::string& id, const Section& s) {
    Report rep;
    detail::begin(rep, id, s);
    const int res = static_cast<int>(s.integer("resolution", 256));
    auto st = detail::make_setup(s, res, "box:lo=0,hi=1", "gaussian:count=10,sigma_lo=0.1,sigma_hi=0.16",
                                "constant:value=1", "");
    const int n = st.D.grid.dim();
    const double r2_min = s.number("r2_min", 0.9);
    const auto min_points = static_cast<std::size_t>(s.integer("min_points", 3));
    const int levels = static_cast<int>(s.integer("thresholds", 16));
    const int depth = static_cast<int>(s.integer("depth", default_depth(st.D.grid)));
    const std::string schedule = s.text("schedule", "fit_window");
    const double top = s.number("top", 0.9);
    if (schedule != "fit_window" && schedule != "geometric")
        throw Error("schedule must be fit_window or geometric, got '" + schedule + "'");
    if (!(top > 0.0 && top < 1.0)) throw Error("top must lie in (0, 1)");

    detail::exponent_hypotheses(rep, "alpha", st.alpha, 0.0, n, true, false);
    const double omega = st.D.measure();
    const double target = 1.0 / (2.0 * (1.0 + omega));
    const ExponentField q = detail::ratio_exponent(st.alpha);
    const ExponentField beta = detail::complement_exponent(st.alpha);
    rep.add_hypothesis("norm_target", "||f||_{n/alpha(.)} <= 1 / (2 (1 + |Omega|)) after normalisation", target > 0.0,
                       {{"target", target}, {"measure", omega}});
    detail::require_hypotheses(rep);

    const double exponent = n / (n - st.alpha.lo());
    const double H_domain = dyadic_content(st.D.mask, beta, depth).value;
    rep.constants["fit_exponent"] = exponent;
    rep.constants["domain_content"] = H_domain;
    PlotTable levels_csv{id + "_levels", {"member", "t", "abscissa", "content", "used"}, {}};
    PlotTable fits_csv{id + "_fits", {"member", "c1", "c2", "r2", "points", "t_lo", "t_hi"}, {}};
    double worst_r2 = 1.0;
    for (std::size_t m = 0; m < st.battery.size(); ++m) {
        const auto& f = st.battery[m].field;
        const std::string name = "member_" + std::to_string(m);
        if (detail::is_zero(f)) {
            rep.add_case(name, "f = 0: every level set above 0 is empty", "", true, {{"spec", st.battery[m].spec}});
            continue;
        }
        const ScalarField fn = normalize(f, q, target);
        const double achieved = luxemburg_norm(fn, q).value;
        const ScalarField I = detail::extended_potential(fn, st.alpha, st.eval);
        auto content_at = [&](double t) {
            const Mask lm = detail::level_mask(I, t);
            return count_cells(lm) ? dyadic_content(lm, beta, depth).value : 0.0;
        };
        const auto ts = schedule == "geometric" ? observed_range_thresholds(I, levels)
                                                : fit_window_thresholds(I, levels, H_domain, top, content_at);
        std::vector<double> H;
        for (double t : ts) H.push_back(content_at(t));
        const DecayFit fit = fit_decay(ts, H, H_domain, exponent);
        for (std::size_t k = 0; k < ts.size(); ++k)
            levels_csv.add({static_cast<double>(m), ts[k], std::pow(ts[k], exponent), H[k],
                            (H[k] > 0.0 && H[k] < 0.5 * H_domain) ? 1.0 : 0.0});
        fits_csv.add({static_cast<double>(m), fit.c1, fit.c2, fit.r2, static_cast<double>(fit.points), fit.t_lo, fit.t_hi});
        const bool ok = fit.points >= min_points && fit.c2 > 0.0 && fit.r2 >= r2_min;
        worst_r2 = std::min(worst_r2, fit.r2);
        char tol[48];
        std::snprintf(tol, sizeof tol, "R^2 >= %g, points >= %zu", r2_min, min_points);
        rep.add_case(name, "log H({I f > t}) linear in t^{n/(n - alpha^-)} with negative slope", tol, ok,
                     {{"spec", st.battery[m].spec}, {"norm", achieved}, {"c1", num(fit.c1)}, {"c2", num(fit.c2)},
                      {"r2", fit.r2}, {"points", fit.points}, {"t_lo", fit.t_lo}, {"t_hi", fit.t_hi}});
    }
    rep.constants["worst_r2"] = worst_r2;
    rep.plots.push_back(std::move(levels_csv));
    rep.plots.push_back(std::move(fits_csv));
    return rep;
}

namespace detail {

/// Runs `per_resolution` at each resolution, collecting one constant each,
/// then adds stability cases.
inline std::vector<double> over_resolutions(Report& rep, const Section& s, const std::string& constant,
                                            const std::function<double(int, bool)>& per_resolution) {
    const auto res = resolutions(s, {128, 256});
    std::vector<double> values;
    for (std::size_t k = 0; k < res.size(); ++k) values.push_back(per_resolution(res[k], k == 0));
    stability_cases(rep, constant, res, values, s.number("tolerance", 0.25));
    return values;
}

inline const std::set<std::string>& battery_keys() {
    static const std::set<std::string> k{"domain", "battery", "alpha", "p", "resolutions", "seed", "thresholds",
                                         "eval_per_axis", "tolerance", "depth"};
    return k;
}

inline std::set<std::string> with_keys(std::initializer_list<const char*> extra) {
    auto k = battery_keys();
    for (const char* e : extra) k.insert(e);
    return k;
}

constexpr const char* kDefaultDomain = "box:lo=0,hi=1";
constexpr const char* kDefaultBattery = "bumps:count=50";
constexpr const char* kDefaultAlpha = "linear:a0=0.2,c=0.9";
constexpr const char* kDefaultP = "linear:a1=0.2,c=1.1";

}  // namespace detail

/// sup over battery and t of t^{p#} |{I f > t}| against \int|f|^p + |{0 < |f| <= 1}|.
inline Report verify_weak_type(const std::string& id, const Section& s) {
    Report rep;
    detail::begin(rep, id, s);
    PlotTable csv{id + "_ratios", {"resolution", "member", "sup_ratio", "t_at_sup"}, {}};
    const int levels = static_cast<int>(s.integer("thresholds", 16));
    detail::over_resolutions(rep, s, "weak_type_constant", [&](int res, bool first) {
        auto st = detail::make_setup(s, res, detail::kDefaultDomain, detail::kDefaultBattery, detail::kDefaultAlpha,
                                     detail::kDefaultP);
        if (first) {
            detail::alpha_p_hypotheses(rep, st, 1.0, false);
            detail::require_hypotheses(rep);
        }
        const ExponentField ps = sharp_exponent(st.p, st.alpha);
        const double vol = st.D.grid.cell_volume();
        double sup = 0.0;
        for (std::size_t m = 0; m < st.battery.size(); ++m) {
            const auto& f = st.battery[m].field;
            if (detail::is_zero(f)) continue;
            const ScalarField fn = normalize(f, st.p, 1.0);
            std::vector<double> rhs_terms;
            std::size_t small = 0;
            for (CellIndex i = 0; i < fn.values().size(); ++i) {
                if (!fn.masked(i)) continue;
                const double a = std::abs(fn[i]);
                rhs_terms.push_back(std::pow(a, st.p[i]));
                if (a > 0.0 && a <= 1.0) ++small;
            }
            const double rhs = vol * pairwise_sum(rhs_terms) + vol * static_cast<double>(small);
            const ScalarField I = detail::extended_potential(fn, st.alpha, st.eval);
            double best = 0.0, t_best = 0.0;
            for (double t : observed_range_thresholds(I, levels)) {
                std::vector<double> lhs_terms;
                for (CellIndex i = 0; i < I.values().size(); ++i)
                    if (I.masked(i) && I[i] > t) lhs_terms.push_back(std::pow(t, ps[i]));
                const double ratio = vol * pairwise_sum(lhs_terms) / rhs;
                if (ratio > best) best = ratio, t_best = t;
            }
            csv.add({static_cast<double>(res), static_cast<double>(m), best, t_best});
            sup = std::max(sup, best);
        }
        return sup;
    });
    rep.plots.push_back(std::move(csv));
    return rep;
}

/// sup over battery and t of t H^{n - alpha(.)}({M_alpha f > t}) / ||f||_1.
inline Report verify_maximal_weak_type(const std::string& id, const Section& s) {
    Report rep;
    detail::begin(rep, id, s);
    PlotTable csv{id + "_ratios", {"resolution", "member", "sup_ratio", "t_at_sup"}, {}};
    const int levels = static_cast<int>(s.integer("thresholds", 16));
    detail::over_resolutions(rep, s, "maximal_weak_type_constant", [&](int res, bool first) {
        auto st = detail::make_setup(s, res, detail::kDefaultDomain, detail::kDefaultBattery, detail::kDefaultAlpha, "");
        const int n = st.D.grid.dim();
        if (first) {
            detail::exponent_hypotheses(rep, "alpha", st.alpha, 0.0, n, false, false);
            detail::require_hypotheses(rep);
        }
        const int depth = static_cast<int>(s.integer("depth", default_depth(st.D.grid)));
        const ExponentField beta = detail::complement_exponent(st.alpha);
        const LadderStencils ladder(st.D.grid, default_ladder(st.D.grid, st.D.mask));
        double sup = 0.0;
        for (std::size_t m = 0; m < st.battery.size(); ++m) {
            const auto& f = st.battery[m].field;
            if (detail::is_zero(f)) continue;
            const double l1 = integrate(map_field(f, [](double v, CellIndex) { return std::abs(v); }));
            const auto vals = fractional_maximal_at(f, st.alpha, ladder, st.eval.cells());
            const ScalarField M = extend_nearest(st.D.grid, st.D.mask, st.eval, vals);
            double best = 0.0, t_best = 0.0;
            for (double t : observed_range_thresholds(M, levels)) {
                const Mask lm = detail::level_mask(M, t);
                const double H = count_cells(lm) ? dyadic_content(lm, beta, depth).value : 0.0;
                const double ratio = t * H / l1;
                if (ratio > best) best = ratio, t_best = t;
            }
            csv.add({static_cast<double>(res), static_cast<double>(m), best, t_best});
            sup = std::max(sup, best);
        }
        return sup;
    });
    rep.plots.push_back(std::move(csv));
    return rep;
}

/// Tail beyond r against max{1, p/(n - alpha p)}^{(p^+ - 1)/p^+} r^{-(n - alpha p)/p} at x.
inline Report verify_tail_bound(const std::string& id, const Section& s) {
    Report rep;
    detail::begin(rep, id, s);
    PlotTable csv{id + "_profile", {"resolution", "member", "sample", "r", "tail", "bound_shape", "ratio"}, {}};
    const auto samples = static_cast<std::size_t>(s.integer("samples", 16));
    const double r_min = s.number("r_min", 1.0 / 32.0);
    const double r_ratio = s.number("r_ratio", std::sqrt(2.0));
    if (!(r_min > 0.0) || !(r_ratio > 1.0)) throw Error("config [" + s.name() + "]: need r_min > 0 and r_ratio > 1");
    detail::over_resolutions(rep, s, "tail_constant", [&](int res, bool first) {
        auto st = detail::make_setup(s, res, detail::kDefaultDomain, detail::kDefaultBattery, detail::kDefaultAlpha,
                                     detail::kDefaultP);
        const int n = st.D.grid.dim();
        if (first) {
            detail::alpha_p_hypotheses(rep, st, 1.0, false);
            detail::require_hypotheses(rep);
        }
        Rng rng(detail::seed_of(s) ^ fnv1a("tail-samples"));
        std::vector<CellIndex> xs;
        for (std::size_t k = 0; k < samples; ++k) xs.push_back(st.D.grid.index(st.D.grid.locate(detail::draw_centre(st.D, rng))));
        const double diam = mask_diameter(st.D.grid, st.D.mask);
        std::vector<double> radii;
        for (double r = r_min; r <= diam; r *= r_ratio) radii.push_back(r);
        const double outer = (st.p.hi() - 1.0) / st.p.hi();
        double sup = 0.0;
        for (std::size_t m = 0; m < st.battery.size(); ++m) {
            const auto& f = st.battery[m].field;
            if (detail::is_zero(f)) continue;
            const ScalarField fn = normalize(f, st.p, 1.0);
            for (std::size_t k = 0; k < xs.size(); ++k) {
                const CellIndex x = xs[k];
                const double delta = (n - st.alpha[x] * st.p[x]) / st.p[x];
                const double lead = std::pow(std::max(1.0, 1.0 / delta), outer);
                const auto tails = tail_profile(fn, x, radii, st.alpha);
                for (std::size_t j = 0; j < radii.size(); ++j) {
                    const double shape = lead * std::pow(radii[j], -delta);
                    const double ratio = tails[j] / shape;
                    sup = std::max(sup, ratio);
                    if (m == 0) csv.add({static_cast<double>(res), 0.0, static_cast<double>(k), radii[j], tails[j], shape, ratio});
                }
            }
        }
        return sup;
    });
    rep.plots.push_back(std::move(csv));
    return rep;
}

/// Calibrated constants of the Hedberg and Samko pointwise estimates.
inline Report verify_pointwise(const std::string& id, const Section& s) {
    Report rep;
    detail::begin(rep, id, s);
    const double r = s.number("eps_ratio", 1.5);
    PlotTable csv{id + "_constants", {"resolution", "member", "hedberg_c", "samko_c", "unbounded"}, {}};
    const auto res = detail::resolutions(s, {128, 256});
    std::vector<double> hed, sam;
    bool any_unbounded = false;
    for (std::size_t ri = 0; ri < res.size(); ++ri) {
        auto st = detail::make_setup(s, res[ri], detail::kDefaultDomain, detail::kDefaultBattery, detail::kDefaultAlpha,
                                     detail::kDefaultP);
        const int n = st.D.grid.dim();
        const ExponentField eps = ExponentField(st.alpha.field().scaled(r - 1.0));
        if (ri == 0) {
            detail::alpha_p_hypotheses(rep, st, 1.0, false);
            rep.add_hypothesis("eps_range", "0 < eps(x) <= alpha(x) with eps = (r - 1) alpha", r > 1.0 && r <= 2.0,
                               {{"eps_ratio", r}});
            detail::require_hypotheses(rep);
        }
        std::vector<double> reduced(st.D.grid.cell_count());
        for (CellIndex i = 0; i < reduced.size(); ++i) reduced[i] = std::max(0.0, st.alpha[i] - eps[i]);
        const ExponentField alpha_eps(st.alpha.field().with_values(std::move(reduced)));
        const ExponentField zero = constant_exponent_like(st.alpha, 0.0);
        const LadderStencils ladder(st.D.grid, default_ladder(st.D.grid, st.D.mask));
        double ch = 0.0, cs = 0.0;
        for (std::size_t m = 0; m < st.battery.size(); ++m) {
            const auto& f = st.battery[m].field;
            if (detail::is_zero(f)) continue;
            const ScalarField fn = normalize(f, st.p, 1.0);
            check_hedberg_hypotheses(fn, st.alpha, st.p, eps);
            const auto I = riesz_potential(fn, st.alpha, st.eval);
            const auto m_eps = fractional_maximal_at(fn, alpha_eps, ladder, st.eval.cells());
            const auto m_zero = fractional_maximal_at(fn, zero, ladder, st.eval.cells());
            const auto h = compare_pointwise(st.eval.cells(), I,
                                             hedberg_right_side(st.alpha, st.p, eps, st.eval.cells(), m_eps));
            const auto k = compare_pointwise(st.eval.cells(), I, samko_right_side(st.alpha, st.p, st.eval.cells(), m_zero));
            const std::size_t unb = h.unbounded.size() + k.unbounded.size();
            any_unbounded = any_unbounded || unb > 0;
            csv.add({static_cast<double>(res[ri]), static_cast<double>(m), h.calibrated_c, k.calibrated_c,
                     static_cast<double>(unb)});
            ch = std::max(ch, h.calibrated_c);
            cs = std::max(cs, k.calibrated_c);
        }
        (void)n;
        hed.push_back(ch);
        sam.push_back(cs);
    }
    const double tol = s.number("tolerance", 0.25);
    detail::stability_cases(rep, "hedberg_constant", res, hed, tol);
    detail::stability_cases(rep, "samko_constant", res, sam, tol);
    rep.add_case("no_unbounded_points", "no point with right side 0 and left side > 0", "", !any_unbounded);
    rep.plots.push_back(std::move(csv));
    return rep;
}

/// sup over the battery of ||I f||_{p#(.)} / ||f||_{p(.)}.
inline Report verify_strong_type(const std::string& id, const Section& s) {
    Report rep;
    detail::begin(rep, id, s);
    PlotTable csv{id + "_ratios", {"resolution", "member", "ratio"}, {}};
    detail::over_resolutions(rep, s, "strong_type_constant", [&](int res, bool first) {
        auto st = detail::make_setup(s, res, detail::kDefaultDomain, detail::kDefaultBattery, detail::kDefaultAlpha,
                                     detail::kDefaultP);
        if (first) {
            detail::alpha_p_hypotheses(rep, st, 1.0, true);
            detail::require_hypotheses(rep);
        }
        const ExponentField ps = sharp_exponent(st.p, st.alpha);
        double sup = 0.0;
        for (std::size_t m = 0; m < st.battery.size(); ++m) {
            const auto& f = st.battery[m].field;
            if (detail::is_zero(f)) continue;
            const double nf = luxemburg_norm(f, st.p).value;
            const ScalarField I = detail::extended_potential(f, st.alpha, st.eval);
            const double ratio = luxemburg_norm(I, ps).value / nf;
            csv.add({static_cast<double>(res), static_cast<double>(m), ratio});
            sup = std::max(sup, ratio);
        }
        return sup;
    });
    rep.plots.push_back(std::move(csv));
    return rep;
}

/// sup over the battery of ||u - u_B||_{q(.)} / ||grad u||_p on an s(.)-John domain.
inline Report verify_poincare(const std::string& id, const Section& s) {
    Report rep;
    detail::begin(rep, id, s);
    const double p = s.number("p", 1.0);
    PlotTable csv{id + "_ratios", {"resolution", "member", "ratio"}, {}};
    detail::over_resolutions(rep, s, "poincare_constant", [&](int res, bool first) {
        const DomainModel D = make_domain(s.text("domain", "disk:radius=1"), res);
        const int n = D.grid.dim();
        const ExponentField q = poincare_target_exponent(D.s_field, p, n);
        if (first) {
            detail::exponent_hypotheses(rep, "s", D.s_field, 1.0, static_cast<double>(n) / (n - 1), false, false);
            const double p_cap = n / (n - D.s_field.lo() * (n - 1));
            rep.add_hypothesis("p_range", "p = 1 or 1 < p < n / (n - s^- (n - 1))", p == 1.0 || (p > 1.0 && p < p_cap),
                               {{"p", p}, {"upper", p_cap}});
            rep.constants["q_range"] = {q.lo(), q.hi()};
            detail::require_hypotheses(rep);
        }
        const auto battery = make_battery(D, s.text("battery", "smooth:count=20"), detail::seed_of(s));
        const ExponentField pe = constant_exponent(D.grid, p, D.mask);
        double sup = 0.0;
        for (std::size_t m = 0; m < battery.size(); ++m) {
            const auto& u = battery[m].field;
            const double ub = mean_over_ball(u, D.john_center, D.base_radius);
            const ScalarField osc = map_field(u, [ub](double v, CellIndex) { return v - ub; });
            const double grad = luxemburg_norm(gradient_magnitude(u), pe).value;
            if (grad == 0.0) continue;
            const double ratio = luxemburg_norm(osc, q).value / grad;
            csv.add({static_cast<double>(res), static_cast<double>(m), ratio});
            sup = std::max(sup, ratio);
        }
        return sup;
    });
    rep.plots.push_back(std::move(csv));
    return rep;
}

/// Largest a with upper Choquet bound of exp(a |u - u_B|^{n/(s^+(n-1))}) against
/// H^{s(.)(n-1)} at most the budget b, for gradient-normalised u.
inline Report verify_exp_integrability(const std::string& id, const Section& s) {
    Report rep;
    detail::begin(rep, id, s);
    const int levels = static_cast<int>(s.integer("levels", 64));
    const auto a_schedule = s.numbers("a_schedule", {0.25, 0.5, 1.0, 2.0, 4.0});
    PlotTable table{id + "_values", {"resolution", "a", "max_upper", "budget"}, {}};
    PlotTable per{id + "_members", {"resolution", "member", "a_star"}, {}};
    detail::over_resolutions(rep, s, "a_star", [&](int res, bool first) {
        const DomainModel D = make_domain(s.text("domain", "disk:radius=1"), res);
        const int n = D.grid.dim();
        const int depth = static_cast<int>(s.integer("depth", default_depth(D.grid)));
        const ExponentField alpha = alpha_from_s(D.s_field);
        std::vector<double> bv(D.grid.cell_count());
        for (CellIndex i = 0; i < bv.size(); ++i) bv[i] = D.s_field[i] * (n - 1);
        const ExponentField beta(D.s_field.field().with_values(std::move(bv)));
        const double gamma = n / (D.s_field.hi() * (n - 1));
        if (first) {
            detail::exponent_hypotheses(rep, "s", D.s_field, 1.0, static_cast<double>(n) / (n - 1), false, false);
            double mismatch = 0.0;
            for (CellIndex i = 0; i < bv.size(); ++i)
                if (D.mask[i]) mismatch = std::max(mismatch, std::abs((n - alpha[i]) - beta[i]));
            rep.add_hypothesis("beta_identity", "n - alpha(x) = s(x)(n - 1) on the mask", mismatch <= 1e-12,
                               {{"max_mismatch", mismatch}});
            rep.constants["gamma"] = gamma;
            detail::require_hypotheses(rep);
        }
        const double support = dyadic_content(D.mask, beta, depth).value;
        const double budget = s.has("budget") ? s.number("budget", 0.0) : s.number("budget_factor", 2.0) * support;
        if (!(budget > support)) throw Error(id + ": budget must exceed H(D) = " + std::to_string(support));
        const ExponentField grad_exp = detail::ratio_exponent(alpha);
        const auto battery = make_battery(D, s.text("battery", "smooth:count=20"), detail::seed_of(s));
        std::vector<double> worst_upper(a_schedule.size(), 0.0);
        double a_star = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < battery.size(); ++m) {
            const auto& u0 = battery[m].field;
            const double gn = luxemburg_norm(gradient_magnitude(u0), grad_exp).value;
            if (gn == 0.0) continue;
            const ScalarField u = u0.scaled(1.0 / gn);
            const double ub = mean_over_ball(u, D.john_center, D.base_radius);
            const ScalarField w = map_field(u, [&](double v, CellIndex) { return std::pow(std::abs(v - ub), gamma); });
            const auto lc = level_contents(w, beta, geometric_thresholds(w, levels), depth);
            auto upper = [&](double a) {
                return transformed_choquet(lc, support, [a](double x) { return std::exp(a * x); }).upper;
            };
            for (std::size_t k = 0; k < a_schedule.size(); ++k)
                worst_upper[k] = std::max(worst_upper[k], upper(a_schedule[k]));
            double lo = 0.0, hi = 1.0;
            int grow = 0;
            while (upper(hi) <= budget) {
                lo = hi;
                hi *= 2.0;
                if (++grow > 60) throw Error(id + ": no finite a exceeds the budget");
            }
            for (int it = 0; it < 100 && hi - lo > 1e-10 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (upper(mid) <= budget ? lo : hi) = mid;
            }
            per.add({static_cast<double>(res), static_cast<double>(m), lo});
            a_star = std::min(a_star, lo);
        }
        for (std::size_t k = 0; k < a_schedule.size(); ++k)
            table.add({static_cast<double>(res), a_schedule[k], worst_upper[k], budget});
        rep.constants["budget_" + std::to_string(res)] = budget;
        rep.constants["domain_content_" + std::to_string(res)] = support;
        return std::isfinite(a_star) ? a_star : 0.0;
    });
    rep.plots.push_back(std::move(table));
    rep.plots.push_back(std::move(per));
    return rep;
}

namespace detail {

/// Terminal cells outside the base ball. When the domain has cells with
/// s > 1 every second point is drawn from those, so cusps and attachments
/// get their share.
inline std::vector<CellIndex> terminal_cells(const DomainModel& D, std::size_t count, Rng& rng) {
    std::vector<CellIndex> all, special;
    for (CellIndex i = 0; i < D.mask.size(); ++i) {
        if (!D.mask[i]) continue;
        if (distance(D.grid.center(i), D.john_center, D.grid.dim()) < D.base_radius) continue;
        all.push_back(i);
        if (D.s_field[i] > 1.0) special.push_back(i);
    }
    if (all.empty()) throw Error("chains: no masked cell outside the base ball");
    std::vector<CellIndex> out;
    for (std::size_t k = 0; k < count; ++k) {
        const auto& pool = (!special.empty() && k % 2 == 1) ? special : all;
        out.push_back(pool[rng.below(pool.size())]);
    }
    return out;
}

}  // namespace detail

/// Chains of balls to random terminal points, certified per ball.
inline Report verify_chains(const std::string& id, const Section& s) {
    Report rep;
    detail::begin(rep, id, s);
    const DomainModel D = make_domain(s.text("domain", "disk:radius=1"), static_cast<int>(s.integer("resolution", 256)));
    const int n = D.grid.dim();
    detail::exponent_hypotheses(rep, "s", D.s_field, 1.0, static_cast<double>(n) / (n - 1), false, false);
    detail::require_hypotheses(rep);
    Rng rng(detail::seed_of(s) ^ fnv1a("chain-points"));
    const auto cells = detail::terminal_cells(D, static_cast<std::size_t>(s.integer("points", 50)), rng);
    const JohnTree tree = make_john_tree(D);
    PlotTable csv{id + "_chains", {"point", "x0", "x1", "s", "balls", "K", "N", "M", "contained", "tail_monotone", "reached"}, {}};
    bool contained = true, monotone = true, finite = true, under = true, reached = true;
    double K = 0.0, N = 0.0, M = 0.0;
    std::size_t total_balls = 0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const Point x = D.grid.center(cells[k]);
        const BallChain ch = build_chain(D, tree, x);
        const ChainReport cr = chain_check(ch, D);
        contained = contained && cr.contained;
        monotone = monotone && cr.tail_monotone;
        reached = reached && cr.reached;
        finite = finite && std::isfinite(cr.K) && std::isfinite(cr.N) && std::isfinite(cr.M);
        under = under && cr.N <= cr.n_ceiling;
        K = std::max(K, cr.K);
        N = std::max(N, cr.N);
        M = std::max(M, cr.M);
        total_balls += ch.balls.size();
        csv.add({static_cast<double>(k), x[0], x[1], D.s_field[cells[k]], static_cast<double>(ch.balls.size()), cr.K, cr.N,
                 cr.M, cr.contained ? 1.0 : 0.0, cr.tail_monotone ? 1.0 : 0.0, cr.reached ? 1.0 : 0.0});
    }
    const double ceiling = overlap_ceiling(n);
    rep.add_case("containment", "B(x_i, 2 r_i) inside D for every ball (cell-wise)", "", contained);
    rep.add_case("tail_monotone", "radii non-increasing toward the terminal point", "", monotone);
    rep.add_case("reached", "last ball centre within one cell of the terminal point", "", reached);
    rep.add_case("finite_constants", "observed K, N, M finite", "", finite, {{"K", num(K)}, {"N", num(N)}, {"M", num(M)}});
    rep.add_case("overlap_ceiling", "N <= 24^n times the Besicovitch constant", "", under, {{"N", num(N)}, {"ceiling", ceiling}});
    rep.constants = {{"K", num(K)}, {"N", num(N)}, {"M", num(M)}, {"points", cells.size()}, {"balls", total_balls},
                     {"john_center", {D.john_center[0], D.john_center[1]}}, {"base_radius", D.base_radius}};
    rep.plots.push_back(std::move(csv));
    return rep;
}

using ExperimentFn = std::function<Report(const std::string&, const Section&)>;

struct ExperimentInfo {
    ExperimentFn run;
    std::set<std::string> keys;
    /// Whether the experiment compares several resolutions.
    bool multi_resolution = true;
};

inline const std::map<std::string, ExperimentInfo>& experiments() {
    using detail::with_keys;
    static const std::map<std::string, ExperimentInfo> table{
        {"exponential_decay",
         {verify_exponential_decay,
          {"domain", "battery", "alpha", "resolution", "seed", "thresholds", "eval_per_axis", "r2_min", "min_points", "depth",
           "schedule", "top"},
          false}},
        {"weak_type", {verify_weak_type, with_keys({}), true}},
        {"maximal_weak_type", {verify_maximal_weak_type, with_keys({}), true}},
        {"tail_bound", {verify_tail_bound, with_keys({"samples", "r_min", "r_ratio"}), true}},
        {"pointwise", {verify_pointwise, with_keys({"eps_ratio"}), true}},
        {"strong_type", {verify_strong_type, with_keys({}), true}},
        {"poincare", {verify_poincare, {"domain", "battery", "p", "resolutions", "seed", "tolerance"}, true}},
        {"exp_integrability",
         {verify_exp_integrability,
          {"domain", "battery", "resolutions", "seed", "tolerance", "budget_factor", "budget", "levels", "a_schedule", "depth"},
          true}},
        {"chains", {verify_chains, {"domain", "resolution", "seed", "points"}, false}},
    };
    return table;
}

/// The driver for `kind` or `kind.variant`.
inline const ExperimentInfo& experiment_for(const std::string& id) {
    const std::string kind = id.substr(0, id.find('.'));
    const auto& table = experiments();
    auto it = table.find(kind);
    if (it == table.end()) {
        std::string known;
        for (const auto& [k, v] : table) known += (known.empty() ? "" : ", ") + k;
        throw Error("unknown experiment id '" + id + "' (known: " + known + ")");
    }
    return it->second;
}

/// The resolved section of one experiment: [general] keys the experiment
/// understands, overridden by its own section, then by command-line options.
/// Unknown keys in the experiment's own section are errors.
inline Section resolve_section(const Config& cfg, const std::string& id, const RunOptions& opt = {}) {
    const auto& info = experiment_for(id);
    std::map<std::string, std::string> kv;
    const Section general = cfg.section("general"), own = cfg.section(id);
    for (const auto& [k, v] : general.entries())
        if (info.keys.count(k)) kv[k] = v;
    for (const auto& [k, v] : own.entries()) {
        if (!info.keys.count(k)) throw Error("config [" + id + "]: unknown key '" + k + "'");
        kv[k] = v;
    }
    Section s(id, std::move(kv));
    if (opt.seed) s.set("seed", std::to_string(*opt.seed));
    if (opt.resolution) {
        const int r = *opt.resolution;
        if (info.multi_resolution) {
            const std::size_t count = s.has("resolutions") ? detail::resolutions(s, {}).size() : 2;
            std::string list;
            long cur = r;
            for (std::size_t k = 0; k < count; ++k, cur *= 2) list += (k ? "," : "") + std::to_string(cur);
            s.set("resolutions", list);
        } else {
            s.set("resolution", std::to_string(r));
        }
    }
    return s;
}

/// Runs one experiment; the runtime is the only field that varies between
/// identical invocations.
inline Report run_experiment(const Config& cfg, const std::string& id, const RunOptions& opt = {}) {
    const auto& info = experiment_for(id);
    const Section s = resolve_section(cfg, id, opt);
    const auto t0 = std::chrono::steady_clock::now();
    Report rep = info.run(id, s);
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace vriesz
