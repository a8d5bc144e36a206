#pragma once
/**
 * @file vexp.hpp
 * @brief Variable-exponent Lebesgue machinery on masked grids: the modular,
 *        the Luxemburg norm and derived exponents.
 */

#include <cmath>
#include <string>
#include <vector>

#include "vriesz/grid.hpp"

namespace vriesz {

struct NormResult {
    double value = 0.0;
    int iterations = 0;
    /// |rho(f / value) - 1|; zero for the zero function.
    double residual = 0.0;
};

namespace detail {

inline void require_same_support(const ScalarField& f, const ExponentField& p, const char* op) {
    if (!(f.grid() == p.grid())) throw Error(std::string(op) + ": field and exponent live on different grids");
    if (f.mask() != p.field().mask()) throw Error(std::string(op) + ": field and exponent masks differ");
}

inline double modular_scaled(const ScalarField& f, const ExponentField& p, double inv_lambda) {
    std::vector<double> terms;
    terms.reserve(f.values().size());
    for (CellIndex i = 0; i < f.values().size(); ++i) {
        if (!f.masked(i)) continue;
        const double a = std::abs(f[i]) * inv_lambda;
        terms.push_back(a == 0.0 ? 0.0 : std::pow(a, p[i]));
    }
    return f.grid().cell_volume() * pairwise_sum(terms);
}

inline bool is_zero(const ScalarField& f) {
    for (CellIndex i = 0; i < f.values().size(); ++i)
        if (f.masked(i) && f[i] != 0.0) return false;
    return true;
}

}  // namespace detail

/// rho(f) = h^n sum_masked |f(x)|^{p(x)}.
inline double modular(const ScalarField& f, const ExponentField& p) {
    detail::require_same_support(f, p, "modular");
    if (p.lo() < 1.0) throw Error("modular: exponent infimum " + std::to_string(p.lo()) + " is below 1");
    return detail::modular_scaled(f, p, 1.0);
}

/// inf { lambda > 0 : rho(f / lambda) <= 1 } by bracketing and bisection.
inline NormResult luxemburg_norm(const ScalarField& f, const ExponentField& p) {
    detail::require_same_support(f, p, "luxemburg_norm");
    if (p.lo() < 1.0) throw Error("luxemburg_norm: exponent infimum " + std::to_string(p.lo()) + " is below 1");
    if (detail::is_zero(f)) return {};

    double peak = 0.0;
    for (CellIndex i = 0; i < f.values().size(); ++i)
        if (f.masked(i)) peak = std::max(peak, std::abs(f[i]));

    auto rho = [&](double lambda) { return detail::modular_scaled(f, p, 1.0 / lambda); };

    // rho(f / lambda) is strictly decreasing in lambda; bracket rho = 1.
    double hi = peak, lo = peak;
    int doublings = 0;
    double r_hi = rho(hi);
    while (!(r_hi <= 1.0)) {
        if (++doublings > 60) throw Error("luxemburg_norm: no finite bracket after 60 doublings");
        hi *= 2.0;
        r_hi = rho(hi);
    }
    int halvings = 0;
    double r_lo = rho(lo);
    while (r_lo <= 1.0 && std::isfinite(r_lo)) {
        if (++halvings > 1100) throw Error("luxemburg_norm: lower bracket not found");
        lo *= 0.5;
        r_lo = rho(lo);
    }

    NormResult out;
    constexpr int max_iterations = 200;
    while (out.iterations < max_iterations) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ++out.iterations;
        if (rho(mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    out.value = hi;
    out.residual = std::abs(rho(hi) - 1.0);
    return out;
}

/// p#(x) = n p(x) / (n - alpha(x) p(x)); requires (alpha p)^+ < n.
inline ExponentField sharp_exponent(const ExponentField& p, const ExponentField& alpha) {
    if (!(p.grid() == alpha.grid()) || p.field().mask() != alpha.field().mask())
        throw Error("sharp_exponent: p and alpha have different supports");
    const Grid& g = p.grid();
    const double n = g.dim();
    std::vector<double> v(g.cell_count(), 0.0);
    for (CellIndex i = 0; i < v.size(); ++i) {
        const double ap = alpha[i] * p[i];
        if (p.field().masked(i) && !(ap < n))
            throw Error("sharp_exponent: (alpha p)^+ < n violated at cell " + std::to_string(i) +
                        " (alpha p = " + std::to_string(ap) + ")");
        v[i] = ap < n ? n * p[i] / (n - ap) : 0.0;
    }
    return ExponentField(p.field().with_values(std::move(v)));
}

/// Target exponent of the Sobolev-Poincaré inequality on an s(.)-John domain:
/// q = n / (s (n-1)) when p = 1, q = n p / (p n (s-1) + n - s p) when p > 1.
inline ExponentField poincare_target_exponent(const ExponentField& s, double p, int n) {
    if (n != s.grid().dim()) throw Error("poincare_target_exponent: n does not match the grid dimension");
    const double nn = n;
    const double s_cap = nn / (nn - 1.0);
    if (s.lo() < 1.0) throw Error("poincare_target_exponent: requires 1 <= s^-");
    if (!(s.hi() < s_cap)) throw Error("poincare_target_exponent: requires s^+ < n/(n-1)");
    if (p < 1.0) throw Error("poincare_target_exponent: requires p >= 1");
    if (p > 1.0) {
        const double p_cap = nn / (nn - s.lo() * (nn - 1.0));
        if (!(p < p_cap))
            throw Error("poincare_target_exponent: requires p < n/(n - s^-(n-1)) = " + std::to_string(p_cap));
    }
    std::vector<double> v(s.grid().cell_count());
    for (CellIndex i = 0; i < v.size(); ++i) {
        const double si = s[i];
        v[i] = p == 1.0 ? nn / (si * (nn - 1.0)) : nn * p / (p * nn * (si - 1.0) + nn - si * p);
    }
    return ExponentField(s.field().with_values(std::move(v)));
}

/// Scales f so that its Luxemburg norm equals target.
inline ScalarField normalize(const ScalarField& f, const ExponentField& p, double target) {
    if (!(target > 0.0)) throw Error("normalize: target must be positive");
    const NormResult n = luxemburg_norm(f, p);
    if (n.value == 0.0) throw Error("normalize: cannot normalise the zero function");
    return f.scaled(target / n.value);
}

}  // namespace vriesz
