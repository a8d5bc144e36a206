#pragma once
/**
 * @file content.hpp
 * @brief Variable-dimensional Hausdorff content of cell sets and Choquet
 *        integrals against it.
 *
 * The main estimator is a dynamic program over the dyadic tree of the grid:
 * every node either pays for its circumscribed ball, r^{beta(centre)}, or
 * hands the bill to its children. Empty nodes cost nothing. The optimal
 * choice is the estimate and the chosen balls form a certified cover.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vriesz/grid.hpp"

namespace vriesz {

struct CoverBall {
    Point center{};
    double radius = 0.0;
    double beta = 0.0;
    /// radius^beta
    double cost = 0.0;
};

struct Cover {
    std::vector<CoverBall> balls;
    double cost = 0.0;
};

enum class ContentMethod { dyadic_dp, greedy };

inline const char* method_name(ContentMethod m) { return m == ContentMethod::dyadic_dp ? "dyadic-dp" : "greedy"; }

struct ContentEstimate {
    double value = 0.0;
    Cover cover;
    ContentMethod method = ContentMethod::dyadic_dp;
    /// Tree depth used by the dynamic program; 0 for greedy.
    int depth = 0;
};

/// Sum of the cover's cost terms, recomputed from the ball list.
inline double cover_cost(const Cover& c) {
    std::vector<double> t;
    t.reserve(c.balls.size());
    for (const auto& b : c.balls) t.push_back(std::pow(b.radius, b.beta));
    return pairwise_sum(t);
}

/// True when every cell of E lies entirely inside some ball of the cover.
inline bool cover_contains(const Grid& g, const Mask& E, const Cover& c) {
    const int dim = g.dim();
    const double h = g.spacing();
    Mask hit(E.size(), 0);
    for (const auto& b : c.balls) {
        CellCoords lo{0, 0, 0}, hi{0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            lo[a] = std::max(0, static_cast<int>(std::floor((b.center[a] - b.radius - g.bbox().lo[a]) / h)));
            hi[a] = std::min(g.resolution() - 1, static_cast<int>(std::floor((b.center[a] + b.radius - g.bbox().lo[a]) / h)));
        }
        const double r2 = b.radius * b.radius * (1.0 + 1e-12);
        for (int a0 = lo[0]; a0 <= hi[0]; ++a0)
            for (int a1 = lo[1]; a1 <= hi[1]; ++a1)
                for (int a2 = lo[2]; a2 <= hi[2]; ++a2) {
                    const CellCoords q{a0, a1, a2};
                    const Point p = g.center(q);
                    double far2 = 0.0;
                    for (int a = 0; a < dim; ++a) {
                        const double t = std::abs(p[a] - b.center[a]) + 0.5 * h;
                        far2 += t * t;
                    }
                    if (far2 <= r2) hit[g.index(q)] = 1;
                }
    }
    for (CellIndex i = 0; i < E.size(); ++i)
        if (E[i] && !hit[i]) return false;
    return true;
}

/// Largest depth whose leaves are still at least one cell wide.
inline int default_depth(const Grid& g) {
    int d = 0;
    while ((2 << d) <= g.resolution()) ++d;
    return d;
}

namespace detail {

/// Inclusive prefix counts for O(1) box-emptiness tests.
class CellCounts {
public:
    CellCounts(const Grid& g, const Mask& m) : dim_(g.dim()), n_(g.resolution() + 1) {
        const std::size_t total = static_cast<std::size_t>(n_) * n_ * (dim_ == 3 ? n_ : 1);
        sat_.assign(total, 0);
        const int r = g.resolution();
        for (CellIndex i = 0; i < m.size(); ++i) {
            if (!m[i]) continue;
            const CellCoords c = g.coords(i);
            sat_[at(c[0] + 1, c[1] + 1, dim_ == 3 ? c[2] + 1 : 0)] = 1;
        }
        // cumulative sums along each axis in turn
        for (int axis = 0; axis < dim_; ++axis) {
            for (int a = 0; a <= r; ++a)
                for (int b = 0; b <= r; ++b)
                    for (int c = 0; c <= (dim_ == 3 ? r : 0); ++c) {
                        std::array<int, 3> k{a, b, c};
                        if (k[axis] == 0) continue;
                        std::array<int, 3> p = k;
                        --p[axis];
                        sat_[at(k[0], k[1], k[2])] += sat_[at(p[0], p[1], p[2])];
                    }
        }
    }

    /// Number of set cells in the half-open index box [lo, hi).
    std::int64_t count(const CellCoords& lo, const CellCoords& hi) const {
        if (dim_ == 2)
            return sat_[at(hi[0], hi[1], 0)] - sat_[at(lo[0], hi[1], 0)] - sat_[at(hi[0], lo[1], 0)] +
                   sat_[at(lo[0], lo[1], 0)];
        std::int64_t s = 0;
        for (int corner = 0; corner < 8; ++corner) {
            const int x = (corner & 1) ? lo[0] : hi[0];
            const int y = (corner & 2) ? lo[1] : hi[1];
            const int z = (corner & 4) ? lo[2] : hi[2];
            const int parity = __builtin_popcount(static_cast<unsigned>(corner)) & 1;
            s += parity ? -sat_[at(x, y, z)] : sat_[at(x, y, z)];
        }
        return s;
    }

private:
    std::size_t at(int a, int b, int c) const {
        return dim_ == 2 ? static_cast<std::size_t>(a) * n_ + b : (static_cast<std::size_t>(a) * n_ + b) * n_ + c;
    }
    int dim_;
    int n_;
    std::vector<std::int64_t> sat_;
};

inline void check_content_inputs(const Mask& E, const ExponentField& beta, const char* op) {
    if (E.size() != beta.grid().cell_count()) throw Error(std::string(op) + ": mask size does not match the grid");
    if (!(beta.lo() > 0.0))
        throw Error(std::string(op) + ": requires beta^- > 0 (got " + std::to_string(beta.lo()) + ")");
}

/// beta at a physical point: multilinear interpolation of the cell values,
/// clamped into the certified range [beta^-, beta^+].
inline double beta_at(const ExponentField& beta, const Point& p) {
    if (beta.is_constant()) return beta.lo();
    const double v = interpolate(beta.field(), p);
    if (!std::isfinite(v)) return beta.lo();
    return std::clamp(v, beta.lo(), beta.hi());
}

struct DyadicSolver {
    const Grid& g;
    const ExponentField& beta;
    const CellCounts& counts;
    int max_depth;

    struct Result {
        double cost = 0.0;
        std::vector<CoverBall> balls;
    };

    Result solve(const CellCoords& lo, const CellCoords& hi, int depth) const {
        Result out;
        if (counts.count(lo, hi) == 0) return out;
        const int dim = g.dim();
        const double h = g.spacing();
        Point c{0.0, 0.0, 0.0};
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
            c[a] = g.bbox().lo[a] + 0.5 * (lo[a] + hi[a]) * h;
            const double half = 0.5 * (hi[a] - lo[a]) * h;
            r2 += half * half;
        }
        const double b = beta_at(beta, c);
        // r^b through r^2 keeps exact dyadic values exact (r^2 = 1/2, b = 2)
        const double ball = std::pow(r2, 0.5 * b);
        CoverBall own{c, std::sqrt(r2), b, ball};
        if (depth >= max_depth) {
            out.cost = ball;
            out.balls.push_back(own);
            return out;
        }
        CellCoords mid{0, 0, 0};
        for (int a = 0; a < dim; ++a) mid[a] = (lo[a] + hi[a]) / 2;
        double children = 0.0;
        std::vector<CoverBall> parts;
        for (int corner = 0; corner < (1 << dim); ++corner) {
            CellCoords clo = lo, chi = hi;
            bool empty_box = false;
            for (int a = 0; a < dim; ++a) {
                if ((corner >> (dim - 1 - a)) & 1)
                    clo[a] = mid[a];
                else
                    chi[a] = mid[a];
                if (chi[a] <= clo[a]) empty_box = true;
            }
            if (empty_box) continue;
            Result r = solve(clo, chi, depth + 1);
            children += r.cost;
            if (children >= ball) break;  // the ball already wins
            parts.insert(parts.end(), r.balls.begin(), r.balls.end());
        }
        if (ball <= children) {
            out.cost = ball;
            out.balls.push_back(own);
        } else {
            out.cost = children;
            out.balls = std::move(parts);
        }
        return out;
    }
};

}  // namespace detail

/// Dyadic dynamic-programming estimate of H_infinity^{beta} of the union of
/// the cells of E.
inline ContentEstimate dyadic_content(const Mask& E, const ExponentField& beta, int max_depth) {
    detail::check_content_inputs(E, beta, "dyadic_content");
    const Grid& g = beta.grid();
    if (max_depth < 0) throw Error("dyadic_content: max_depth must be non-negative");
    if (max_depth > 30 || (1 << max_depth) > g.resolution())
        throw Error("dyadic_content: depth " + std::to_string(max_depth) + " is finer than the grid (resolution " +
                    std::to_string(g.resolution()) + ")");
    const detail::CellCounts counts(g, E);
    const detail::DyadicSolver solver{g, beta, counts, max_depth};
    CellCoords lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) hi[a] = g.resolution();
    auto res = solver.solve(lo, hi, 0);
    ContentEstimate est;
    est.method = ContentMethod::dyadic_dp;
    est.depth = max_depth;
    est.value = res.cost;
    est.cover.balls = std::move(res.balls);
    est.cover.cost = res.cost;
    return est;
}

inline ContentEstimate dyadic_content(const Mask& E, const ExponentField& beta) {
    return dyadic_content(E, beta, default_depth(beta.grid()));
}

/// Greedy cover: repeatedly place the ball with the smallest cost per newly
/// covered cell. Centres are uncovered cells of E, radii the ladder
/// (h sqrt(n) / 2) sqrt(2)^k, and a cell counts as covered when its farthest
/// corner is inside the ball.
inline ContentEstimate greedy_content(const Mask& E, const ExponentField& beta) {
    detail::check_content_inputs(E, beta, "greedy_content");
    const Grid& g = beta.grid();
    const int dim = g.dim();
    const int res = g.resolution();
    const double h = g.spacing();
    ContentEstimate est;
    est.method = ContentMethod::greedy;
    std::vector<double> radii;
    {
        const double diam = mask_diameter(g, E);
        for (double r = 0.5 * h * std::sqrt(static_cast<double>(dim));; r *= std::sqrt(2.0)) {
            radii.push_back(r);
            if (r >= 2.0 * diam + h) break;
        }
    }
    // For each radius: rows of the covered-cell pattern as (lead offsets, half width).
    struct Row {
        int a, b, half;
    };
    std::vector<std::vector<Row>> patterns;
    for (double r : radii) {
        const double rc2 = (r / h) * (r / h) * (1.0 + 1e-12);
        const int reach = static_cast<int>(std::ceil(r / h));
        std::vector<Row> rows;
        const int reach_a = dim == 3 ? reach : 0;
        for (int a = -reach_a; a <= reach_a; ++a)
            for (int b = -reach; b <= reach; ++b) {
                const double ta = dim == 3 ? (std::abs(a) + 0.5) : 0.0;
                const double tb = std::abs(b) + 0.5;
                const double lead = ta * ta + tb * tb;
                if (lead > rc2) continue;
                const int half = static_cast<int>(std::floor(std::sqrt(rc2 - lead) - 0.5));
                if (half >= 0) rows.push_back({a, b, half});
            }
        patterns.push_back(std::move(rows));
    }
    Mask uncovered(E);
    std::size_t remaining = count_cells(E);
    const std::size_t nrows = g.cell_count() / static_cast<std::size_t>(res);
    std::vector<std::int32_t> prefix(nrows * static_cast<std::size_t>(res + 1));
    auto rebuild = [&] {
        for (std::size_t r = 0; r < nrows; ++r) {
            std::int32_t acc = 0;
            std::int32_t* p = &prefix[r * static_cast<std::size_t>(res + 1)];
            p[0] = 0;
            for (int k = 0; k < res; ++k) {
                acc += uncovered[r * static_cast<std::size_t>(res) + k] ? 1 : 0;
                p[k + 1] = acc;
            }
        }
    };
    auto visit = [&](const CellCoords& c, const std::vector<Row>& rows, auto&& fn) {
        for (const auto& row : rows) {
            std::size_t row_id;
            if (dim == 3) {
                const int x = c[0] + row.a, y = c[1] + row.b;
                if (x < 0 || x >= res || y < 0 || y >= res) continue;
                row_id = static_cast<std::size_t>(x) * res + y;
            } else {
                const int x = c[0] + row.b;
                if (x < 0 || x >= res) continue;
                row_id = static_cast<std::size_t>(x);
            }
            const int last = c[dim - 1];
            const int lo = std::max(0, last - row.half), hi = std::min(res - 1, last + row.half);
            if (hi >= lo) fn(row_id, lo, hi);
        }
    };
    while (remaining > 0) {
        rebuild();
        double best = std::numeric_limits<double>::infinity();
        CellIndex best_c = 0;
        std::size_t best_k = 0;
        for (CellIndex i = 0; i < uncovered.size(); ++i) {
            if (!uncovered[i]) continue;
            const CellCoords c = g.coords(i);
            const double b = beta[i];
            for (std::size_t k = 0; k < radii.size(); ++k) {
                std::int64_t n_new = 0;
                visit(c, patterns[k], [&](std::size_t row, int lo, int hi) {
                    const std::int32_t* p = &prefix[row * static_cast<std::size_t>(res + 1)];
                    n_new += p[hi + 1] - p[lo];
                });
                const double per = std::pow(radii[k], b) / static_cast<double>(n_new);
                if (per < best) {
                    best = per;
                    best_c = i;
                    best_k = k;
                }
                if (static_cast<std::size_t>(n_new) == remaining) break;
            }
        }
        const CellCoords c = g.coords(best_c);
        visit(c, patterns[best_k], [&](std::size_t row, int lo, int hi) {
            for (int k = lo; k <= hi; ++k) {
                auto& u = uncovered[row * static_cast<std::size_t>(res) + k];
                if (u) {
                    u = 0;
                    --remaining;
                }
            }
        });
        const double b = beta[best_c];
        est.cover.balls.push_back({g.center(best_c), radii[best_k], b, std::pow(radii[best_k], b)});
    }
    est.cover.cost = cover_cost(est.cover);
    est.value = est.cover.cost;
    return est;
}

struct MaskPair {
    Mask a;
    Mask b;
    /// When set, a must be a subset of b and monotonicity is checked too.
    bool nested = true;
};

struct AxiomViolation {
    std::size_t pair = 0;
    std::string kind;  // "monotonicity" or "subadditivity"
    double lhs = 0.0;
    double rhs = 0.0;
};

struct AxiomReport {
    std::size_t pairs = 0;
    std::size_t monotonicity_checks = 0;
    std::size_t subadditivity_checks = 0;
    std::vector<AxiomViolation> violations;
    double tolerance = 1e-12;
    bool pass() const { return violations.empty(); }
};

/// Checks H(A) <= H(B) for nested pairs and H(A ∪ B) <= H(A) + H(B) for all.
inline AxiomReport content_axioms_check(const std::vector<MaskPair>& pairs, const ExponentField& beta,
                                        int max_depth = -1) {
    const int depth = max_depth < 0 ? default_depth(beta.grid()) : max_depth;
    AxiomReport rep;
    rep.pairs = pairs.size();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& [A, B, nested] = pairs[k];
        if (A.size() != B.size()) throw Error("content_axioms_check: pair " + std::to_string(k) + " has mismatched masks");
        Mask U(A.size());
        for (CellIndex i = 0; i < A.size(); ++i) {
            if (nested && A[i] && !B[i])
                throw Error("content_axioms_check: pair " + std::to_string(k) + " is not nested (A is not a subset of B)");
            U[i] = (A[i] || B[i]) ? 1 : 0;
        }
        const double ha = dyadic_content(A, beta, depth).value;
        const double hb = dyadic_content(B, beta, depth).value;
        if (nested) {
            ++rep.monotonicity_checks;
            if (ha > hb + rep.tolerance) rep.violations.push_back({k, "monotonicity", ha, hb});
        }
        const double hu = dyadic_content(U, beta, depth).value;
        ++rep.subadditivity_checks;
        if (hu > ha + hb + rep.tolerance) rep.violations.push_back({k, "subadditivity", hu, ha + hb});
    }
    return rep;
}

/// 0 followed by `levels` geometric levels from the least positive value of u
/// to its maximum. Empty (just {0}) when u has no positive value.
inline std::vector<double> geometric_thresholds(const ScalarField& u, int levels = 64) {
    if (levels < 1) throw Error("geometric_thresholds: need at least one level");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (CellIndex i = 0; i < u.values().size(); ++i) {
        if (!u.masked(i) || !(u[i] > 0.0)) continue;
        lo = std::min(lo, u[i]);
        hi = std::max(hi, u[i]);
    }
    std::vector<double> t{0.0};
    if (hi == 0.0) return t;
    if (levels == 1 || lo == hi) {
        t.push_back(hi);
        return t;
    }
    const double ratio = std::log(hi / lo);
    for (int k = 0; k < levels; ++k) t.push_back(k == levels - 1 ? hi : lo * std::exp(ratio * k / (levels - 1)));
    return t;
}

struct ChoquetResult {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> thresholds;
    /// H({u > t_k}) for each threshold.
    std::vector<double> content_above;
};

/// Riemann bracket of \int_0^inf H({u > t}) dt on the schedule. The upper sum
/// uses H({u > t_k}) on [t_k, t_{k+1}], the lower sum H({u >= t_{k+1}}), both
/// valid because t -> H({u > t}) is non-increasing. Values above the last
/// threshold are not allowed.
inline ChoquetResult choquet_integral(const ScalarField& u, const ExponentField& beta, std::vector<double> schedule,
                                      int max_depth = -1) {
    if (!(u.grid() == beta.grid())) throw Error("choquet_integral: field and beta grids differ");
    double top = 0.0;
    for (CellIndex i = 0; i < u.values().size(); ++i) {
        if (!u.masked(i)) continue;
        if (u[i] < 0.0) throw Error("choquet_integral: negative value at cell " + std::to_string(i));
        top = std::max(top, u[i]);
    }
    if (schedule.empty()) schedule = geometric_thresholds(u);
    if (schedule.front() != 0.0) throw Error("choquet_integral: threshold schedule must start at 0");
    for (std::size_t k = 1; k < schedule.size(); ++k)
        if (!(schedule[k] > schedule[k - 1])) throw Error("choquet_integral: thresholds must increase strictly");
    if (schedule.back() < top) throw Error("choquet_integral: threshold schedule does not reach max u");
    const int depth = max_depth < 0 ? default_depth(u.grid()) : max_depth;

    auto level = [&](double t, bool strict) {
        Mask m(u.values().size(), 0);
        bool any = false;
        for (CellIndex i = 0; i < m.size(); ++i)
            if (u.masked(i) && (strict ? u[i] > t : u[i] >= t)) m[i] = 1, any = true;
        return any ? dyadic_content(m, beta, depth).value : 0.0;
    };

    ChoquetResult out;
    out.thresholds = schedule;
    std::vector<double> up, lo;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const double above = level(schedule[k], true);
        out.content_above.push_back(above);
        if (k + 1 < schedule.size()) {
            const double dt = schedule[k + 1] - schedule[k];
            up.push_back(dt * above);
            lo.push_back(dt * level(schedule[k + 1], false));
        }
    }
    out.upper = pairwise_sum(up);
    out.lower = pairwise_sum(lo);
    return out;
}

/// Contents of the super-level sets {u > s_k} and {u >= s_k} on a schedule.
struct LevelContents {
    std::vector<double> thresholds;
    std::vector<double> above;
    std::vector<double> at_least;
};

inline LevelContents level_contents(const ScalarField& u, const ExponentField& beta, std::vector<double> schedule,
                                    int max_depth = -1) {
    if (!(u.grid() == beta.grid())) throw Error("level_contents: field and beta grids differ");
    for (std::size_t k = 1; k < schedule.size(); ++k)
        if (!(schedule[k] > schedule[k - 1])) throw Error("level_contents: thresholds must increase strictly");
    const int depth = max_depth < 0 ? default_depth(u.grid()) : max_depth;
    auto level = [&](double t, bool strict) {
        Mask m(u.values().size(), 0);
        bool any = false;
        for (CellIndex i = 0; i < m.size(); ++i)
            if (u.masked(i) && (strict ? u[i] > t : u[i] >= t)) m[i] = 1, any = true;
        return any ? dyadic_content(m, beta, depth).value : 0.0;
    };
    LevelContents lc;
    lc.thresholds = std::move(schedule);
    for (double t : lc.thresholds) {
        lc.above.push_back(level(t, true));
        lc.at_least.push_back(level(t, false));
    }
    return lc;
}

/// Choquet bracket of phi(u) for a nonnegative u and a strictly increasing
/// phi with phi(0) >= 0, reusing contents of the levels of u. The bracket
/// equals choquet_integral of phi(u) on the schedule {0, phi(s_0), phi(s_1), ...}
/// when s_0 = 0; `support` is H of the whole mask.
template <class Phi>
ChoquetResult transformed_choquet(const LevelContents& lc, double support, Phi&& phi) {
    const auto& s = lc.thresholds;
    if (s.empty() || s.front() != 0.0) throw Error("transformed_choquet: schedule must start at 0");
    ChoquetResult out;
    std::vector<double> up, lo;
    const double base = phi(0.0);
    if (base > 0.0) {
        up.push_back(base * support);
        lo.push_back(base * support);
        out.thresholds.push_back(0.0);
        out.content_above.push_back(support);
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
        out.thresholds.push_back(phi(s[k]));
        out.content_above.push_back(lc.above[k]);
        if (k + 1 < s.size()) {
            const double dt = phi(s[k + 1]) - phi(s[k]);
            up.push_back(dt * lc.above[k]);
            lo.push_back(dt * lc.at_least[k + 1]);
        }
    }
    out.upper = pairwise_sum(up);
    out.lower = pairwise_sum(lo);
    return out;
}

inline nlohmann::json content_to_json(const ContentEstimate& e, int dim) {
    nlohmann::json balls = nlohmann::json::array();
    for (const auto& b : e.cover.balls) {
        nlohmann::json c = nlohmann::json::array();
        for (int a = 0; a < dim; ++a) c.push_back(b.center[a]);
        balls.push_back({{"center", c}, {"radius", b.radius}, {"beta", b.beta}, {"cost", b.cost}});
    }
    return {{"value", e.value}, {"method", method_name(e.method)}, {"depth", e.depth},
            {"ball_count", e.cover.balls.size()}, {"balls", balls}};
}

/// CSV rows x0,x1[,x2],radius,beta,cost with a header.
inline std::string cover_to_csv(const Cover& c, int dim) {
    std::string s = dim == 3 ? "x0,x1,x2,radius,beta,cost\n" : "x0,x1,radius,beta,cost\n";
    char buf[64];
    for (const auto& b : c.balls) {
        for (int a = 0; a < dim; ++a) {
            std::snprintf(buf, sizeof buf, "%.17g,", b.center[a]);
            s += buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g,", b.radius);
        s += buf;
        std::snprintf(buf, sizeof buf, "%.17g,", b.beta);
        s += buf;
        std::snprintf(buf, sizeof buf, "%.17g\n", b.cost);
        s += buf;
    }
    return s;
}

}  // namespace vriesz
