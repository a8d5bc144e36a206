#pragma once
/**
 * @file potentials.hpp
 * @brief Variable-order Riesz potentials, fractional maximal functions, tail
 *        integrals and the pointwise Hedberg/Samko comparisons.
 *
 * The potential at a cell centre x is
 *
 *   I_{alpha} f(x) = h^n \sum_{y != x} |f(y)| |x - y|^{alpha(x) - n}
 *                    + |f(x)| sigma_{n-1} r_eq^{alpha(x)} / alpha(x),
 *
 * where the last term integrates the kernel exactly over the ball of the same
 * volume as the singular cell (r_eq = (h^n / omega_n)^{1/n}).
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "vriesz/ball_stencil.hpp"
#include "vriesz/fields.hpp"
#include "vriesz/grid.hpp"
#include "vriesz/vexp.hpp"

namespace vriesz {

/// Distinct masked evaluation cells, kept in ascending index order.
class EvalSet {
public:
    EvalSet() = default;

    EvalSet(const Grid& g, const Mask& mask, std::vector<CellIndex> cells) : cells_(std::move(cells)) {
        std::sort(cells_.begin(), cells_.end());
        if (std::adjacent_find(cells_.begin(), cells_.end()) != cells_.end())
            throw Error("EvalSet: duplicate evaluation cell");
        for (CellIndex c : cells_) {
            if (c >= g.cell_count()) throw Error("EvalSet: cell index out of range");
            if (!mask[c]) throw Error("EvalSet: evaluation cell " + std::to_string(c) + " is not masked");
        }
    }

    std::span<const CellIndex> cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    CellIndex operator[](std::size_t k) const { return cells_[k]; }

private:
    std::vector<CellIndex> cells_;
};

inline EvalSet all_cells(const Grid& g, const Mask& mask) { return {g, mask, masked_indices(mask)}; }

/// One masked cell per stratum of a per_axis^n partition of the grid: the
/// masked cell closest to the stratum centre (lowest index on ties).
inline EvalSet stratified_eval_set(const Grid& g, const Mask& mask, int per_axis = 0) {
    const int dim = g.dim();
    if (per_axis <= 0) per_axis = dim == 2 ? 64 : 16;
    const int res = g.resolution();
    if (per_axis >= res) return all_cells(g, mask);
    std::vector<CellIndex> chosen;
    const int strata = dim == 3 ? per_axis : 1;
    for (int s0 = 0; s0 < per_axis; ++s0)
        for (int s1 = 0; s1 < per_axis; ++s1)
            for (int s2 = 0; s2 < strata; ++s2) {
                std::array<int, 3> lo{}, hi{};
                const std::array<int, 3> s{s0, s1, s2};
                double best = std::numeric_limits<double>::infinity();
                CellIndex pick = 0;
                bool found = false;
                std::array<double, 3> mid{};
                for (int a = 0; a < dim; ++a) {
                    lo[a] = static_cast<int>(static_cast<long>(s[a]) * res / per_axis);
                    hi[a] = static_cast<int>(static_cast<long>(s[a] + 1) * res / per_axis);
                    mid[a] = 0.5 * (lo[a] + hi[a] - 1);
                }
                if (dim == 2) lo[2] = 0, hi[2] = 1;
                for (int a0 = lo[0]; a0 < hi[0]; ++a0)
                    for (int a1 = lo[1]; a1 < hi[1]; ++a1)
                        for (int a2 = lo[2]; a2 < hi[2]; ++a2) {
                            const CellCoords c{a0, a1, dim == 3 ? a2 : 0};
                            const CellIndex i = g.index(c);
                            if (!mask[i]) continue;
                            double d = 0.0;
                            for (int a = 0; a < dim; ++a) d += (c[a] - mid[a]) * (c[a] - mid[a]);
                            if (d < best) {
                                best = d;
                                pick = i;
                                found = true;
                            }
                        }
                if (found) chosen.push_back(pick);
            }
    return {g, mask, std::move(chosen)};
}

/// Cells nearest to the given physical points (duplicates merged).
inline EvalSet eval_set_from_points(const Grid& g, const Mask& mask, std::span<const Point> pts) {
    std::vector<CellIndex> cells;
    for (const auto& p : pts) cells.push_back(g.index(g.locate(p)));
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return {g, mask, std::move(cells)};
}

/// Extends values known at the evaluation cells to every masked cell: each
/// cell takes the value of its nearest evaluation cell, ties going to the
/// lowest cell index.
inline ScalarField extend_nearest(const Grid& g, const Mask& mask, const EvalSet& eval, std::span<const double> values) {
    namespace bg = boost::geometry;
    namespace bgi = boost::geometry::index;
    using BPoint = bg::model::point<double, 3, bg::cs::cartesian>;
    using Item = std::pair<BPoint, std::size_t>;
    if (values.size() != eval.size()) throw Error("extend_nearest: one value per evaluation cell expected");
    std::vector<double> out(g.cell_count(), 0.0);
    if (eval.size() == 0) return ScalarField(g, std::move(out), mask);
    auto to_b = [](const Point& p) { return BPoint(p[0], p[1], p[2]); };
    std::vector<Item> items;
    items.reserve(eval.size());
    for (std::size_t k = 0; k < eval.size(); ++k) items.emplace_back(to_b(g.center(eval[k])), k);
    const bgi::rtree<Item, bgi::rstar<16>> tree(items.begin(), items.end());
    // Enough neighbours to hold every lattice point on one circle at the
    // distances that occur between a cell and its nearest strata.
    constexpr unsigned k_query = 16;
    std::vector<Item> hits;
    for (CellIndex i = 0; i < out.size(); ++i) {
        if (!mask[i]) continue;
        const Point c = g.center(i);
        hits.clear();
        tree.query(bgi::nearest(to_b(c), k_query), std::back_inserter(hits));
        double best = std::numeric_limits<double>::infinity();
        std::size_t pick = 0;
        for (const auto& [pt, k] : hits) {
            const double d = distance_sq(c, g.center(eval[k]), g.dim());
            if (d < best || (d == best && k < pick)) {
                best = d;
                pick = k;
            }
        }
        out[i] = values[pick];
    }
    return ScalarField(g, std::move(out), mask);
}

namespace detail {

/// Squared integer lengths of non-negative offsets, deduplicated. Every
/// offset tuple maps to a slot holding log |offset| in physical units.
struct OffsetTable {
    int dim = 2;
    int res = 0;
    std::vector<std::int32_t> slot;
    std::vector<double> log_dist;

    explicit OffsetTable(const Grid& g) : dim(g.dim()), res(g.resolution()) {
        const std::size_t count = g.cell_count();
        std::vector<std::int64_t> sq(count);
        for (std::size_t i = 0; i < count; ++i) {
            const CellCoords c = g.coords(i);
            std::int64_t s = 0;
            for (int a = 0; a < dim; ++a) s += static_cast<std::int64_t>(c[a]) * c[a];
            sq[i] = s;
        }
        std::vector<std::int64_t> distinct(sq);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        slot.resize(count);
        for (std::size_t i = 0; i < count; ++i)
            slot[i] = static_cast<std::int32_t>(std::lower_bound(distinct.begin(), distinct.end(), sq[i]) - distinct.begin());
        log_dist.resize(distinct.size());
        const double log_h = std::log(g.spacing());
        for (std::size_t k = 0; k < distinct.size(); ++k)
            log_dist[k] = distinct[k] == 0 ? -std::numeric_limits<double>::infinity()
                                           : log_h + 0.5 * std::log(static_cast<double>(distinct[k]));
    }
};

/// Kernel |offset|^{alpha - n} laid out per lead offset as a symmetric row
/// of length 2 res - 1, centred at res - 1, so a row of sources is a dot
/// product against a contiguous slice.
class KernelRows {
public:
    explicit KernelRows(const OffsetTable& t)
        : table_(t), leads_(t.dim == 3 ? static_cast<std::size_t>(t.res) * t.res : static_cast<std::size_t>(t.res)),
          width_(2 * static_cast<std::size_t>(t.res) - 1), rows_(leads_ * width_, 0.0), kernel_(t.log_dist.size(), 0.0) {}

    void rebuild(double exponent) {
        kernel_[0] = 0.0;
        for (std::size_t k = 1; k < kernel_.size(); ++k) kernel_[k] = std::exp(exponent * table_.log_dist[k]);
        const std::size_t res = static_cast<std::size_t>(table_.res);
        for (std::size_t lead = 0; lead < leads_; ++lead) {
            double* row = &rows_[lead * width_];
            const std::int32_t* slots = &table_.slot[lead * res];
            for (std::size_t d = 0; d < res; ++d) {
                const double v = kernel_[static_cast<std::size_t>(slots[d])];
                row[res - 1 + d] = v;
                row[res - 1 - d] = v;
            }
        }
    }

    /// Row for the given lead offset, indexed by (res - 1) + signed last-axis offset.
    const double* row(std::size_t lead) const { return &rows_[lead * width_]; }

private:
    const OffsetTable& table_;
    std::size_t leads_;
    std::size_t width_;
    std::vector<double> rows_;
    std::vector<double> kernel_;
};

/// Nonzero |f| on masked cells, stored as dense runs along the last axis.
struct SourceRows {
    struct Run {
        std::array<int, 2> lead{0, 0};
        int first = 0;
        std::vector<double> weight;
    };
    std::vector<Run> runs;
};

inline SourceRows gather_sources(const ScalarField& f) {
    const Grid& g = f.grid();
    const int res = g.resolution();
    const std::size_t nrows = g.cell_count() / static_cast<std::size_t>(res);
    SourceRows s;
    for (std::size_t r = 0; r < nrows; ++r) {
        const CellIndex base = r * static_cast<std::size_t>(res);
        int first = -1, last = -1;
        for (int k = 0; k < res; ++k)
            if (f.masked(base + k) && f[base + k] != 0.0) {
                if (first < 0) first = k;
                last = k;
            }
        if (first < 0) continue;
        SourceRows::Run run;
        const CellCoords c = g.coords(base);
        run.lead = g.dim() == 3 ? std::array<int, 2>{c[0], c[1]} : std::array<int, 2>{c[0], 0};
        run.first = first;
        run.weight.resize(static_cast<std::size_t>(last - first + 1), 0.0);
        for (int k = first; k <= last; ++k)
            if (f.masked(base + k)) run.weight[static_cast<std::size_t>(k - first)] = std::abs(f[base + k]);
        s.runs.push_back(std::move(run));
    }
    return s;
}

/// Dot product with four interleaved accumulators, combined in a fixed order.
inline double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
    }
    for (; k < n; ++k) s0 += a[k] * b[k];
    return (s0 + s1) + (s2 + s3);
}

inline void check_alpha(const ExponentField& alpha, int n, const char* op, bool allow_zero) {
    const bool lo_ok = allow_zero ? alpha.lo() >= 0.0 : alpha.lo() > 0.0;
    if (!lo_ok || !(alpha.hi() < n))
        throw Error(std::string(op) + ": alpha must satisfy " + (allow_zero ? "0 <= " : "0 < ") +
                    "alpha^- <= alpha^+ < n (got [" + std::to_string(alpha.lo()) + ", " +
                    std::to_string(alpha.hi()) + "])");
}

inline void check_same_grid(const ScalarField& f, const ExponentField& e, const char* op) {
    if (!(f.grid() == e.grid())) throw Error(std::string(op) + ": field and exponent grids differ");
}

}  // namespace detail

/// Self-cell contribution: |f(x)| sigma_{n-1} r_eq^alpha / alpha.
inline double self_cell_term(const Grid& g, double fx, double alpha) {
    const int n = g.dim();
    const double r_eq = std::pow(g.cell_volume() / unit_ball_volume(n), 1.0 / n);
    return std::abs(fx) * unit_sphere_area(n) * std::pow(r_eq, alpha) / alpha;
}

/// Riesz potential with kernel |x - y|^{alpha(x) - n} at each evaluation cell.
inline std::vector<double> riesz_potential(const ScalarField& f, const ExponentField& alpha, const EvalSet& eval) {
    const Grid& g = f.grid();
    const int n = g.dim();
    detail::check_same_grid(f, alpha, "riesz_potential");
    detail::check_alpha(alpha, n, "riesz_potential", false);
    for (CellIndex x : eval.cells())
        if (!f.masked(x)) throw Error("riesz_potential: evaluation cell " + std::to_string(x) + " is not masked");

    std::vector<double> out(eval.size(), 0.0);
    const detail::SourceRows src = detail::gather_sources(f);
    if (src.runs.empty()) return out;

    const detail::OffsetTable table(g);
    detail::KernelRows kernel(table);
    double cached_alpha = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> rows(src.runs.size());
    const double vol = g.cell_volume();
    const int res = g.resolution();

    for (std::size_t e = 0; e < eval.size(); ++e) {
        const CellIndex xi = eval[e];
        const double a = alpha[xi];
        if (!(a == cached_alpha)) {
            kernel.rebuild(a - n);
            cached_alpha = a;
        }
        const CellCoords xc = g.coords(xi);
        const int xlast = xc[n - 1];
        for (std::size_t r = 0; r < src.runs.size(); ++r) {
            const auto& run = src.runs[r];
            std::size_t lead = static_cast<std::size_t>(std::abs(run.lead[0] - xc[0]));
            if (n == 3) lead = lead * static_cast<std::size_t>(res) + static_cast<std::size_t>(std::abs(run.lead[1] - xc[1]));
            const double* krow = kernel.row(lead) + (res - 1 + run.first - xlast);
            rows[r] = detail::dot(run.weight.data(), krow, run.weight.size());
        }
        out[e] = vol * pairwise_sum(rows) + self_cell_term(g, f[xi], a);
    }
    return out;
}

/// Potential with kernel |x - y|^{-s(x)(n-1)}, i.e. alpha = n - s(n-1).
inline std::vector<double> riesz_tilde(const ScalarField& f, const ExponentField& s, const EvalSet& eval) {
    const int n = s.grid().dim();
    const double cap = static_cast<double>(n) / (n - 1);
    if (s.lo() < 1.0 || !(s.hi() < cap))
        throw Error("riesz_tilde: s must satisfy 1 <= s^- <= s^+ < n/(n-1) (got [" + std::to_string(s.lo()) + ", " +
                    std::to_string(s.hi()) + "])");
    std::vector<double> v(s.grid().cell_count());
    for (CellIndex i = 0; i < v.size(); ++i) v[i] = n - s[i] * (n - 1);
    return riesz_potential(f, ExponentField(s.field().with_values(std::move(v))), eval);
}

/// alpha = n - s (n - 1) as an exponent field.
inline ExponentField alpha_from_s(const ExponentField& s) {
    const int n = s.grid().dim();
    std::vector<double> v(s.grid().cell_count());
    for (CellIndex i = 0; i < v.size(); ++i) v[i] = n - s[i] * (n - 1);
    return ExponentField(s.field().with_values(std::move(v)));
}

struct RadiusLadder {
    std::vector<double> radii;
};

/// r_k = h ratio^k, up to and including the first radius >= diam(mask).
inline RadiusLadder default_ladder(const Grid& g, const Mask& mask, double ratio = std::sqrt(2.0)) {
    if (!(ratio > 1.0)) throw Error("default_ladder: ratio must exceed 1");
    const double diam = std::max(mask_diameter(g, mask), g.spacing());
    RadiusLadder l;
    for (double r = g.spacing();; r *= ratio) {
        l.radii.push_back(r);
        if (r >= diam) break;
    }
    return l;
}

/// Ball stencils for a ladder, built once and reused across fields.
struct LadderStencils {
    std::vector<BallStencil> stencils;

    LadderStencils(const Grid& g, const RadiusLadder& ladder) {
        if (ladder.radii.empty()) throw Error("fractional_maximal: empty radius schedule");
        for (double r : ladder.radii) {
            if (!(r > 0.0)) throw Error("fractional_maximal: radii must be positive");
            stencils.push_back(make_ball_stencil(g, r));
        }
    }
};

/// sup over scheduled r of r^{alpha(x)} / (omega_n r^n) \int_{B(x,r) ∩ mask} |f|
/// at the listed cells. Ball integrals use exact cell overlap fractions.
inline std::vector<double> fractional_maximal_at(const ScalarField& f, const ExponentField& alpha,
                                                 const LadderStencils& ladder, std::span<const CellIndex> cells) {
    const Grid& g = f.grid();
    const int n = g.dim();
    detail::check_same_grid(f, alpha, "fractional_maximal");
    detail::check_alpha(alpha, n, "fractional_maximal", true);
    std::vector<double> cellv(g.cell_count(), 0.0);
    bool any = false;
    for (CellIndex i = 0; i < cellv.size(); ++i)
        if (f.masked(i) && f[i] != 0.0) {
            cellv[i] = std::abs(f[i]);
            any = true;
        }
    std::vector<double> out(cells.size(), 0.0);
    if (!any) return out;
    const RowPrefix prefix(g, cellv);
    const double vol = g.cell_volume();
    const double omega = unit_ball_volume(n);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const CellCoords c = g.coords(cells[k]);
        const double a = alpha[cells[k]];
        double best = 0.0;
        for (const auto& st : ladder.stencils) {
            const double integral = vol * stencil_sum(g, st, prefix, cellv, c);
            const double v = std::pow(st.radius, a - n) / omega * integral;
            best = std::max(best, v);
        }
        out[k] = best;
    }
    return out;
}

inline std::vector<double> fractional_maximal_at(const ScalarField& f, const ExponentField& alpha,
                                                 const RadiusLadder& radii, const EvalSet& eval) {
    return fractional_maximal_at(f, alpha, LadderStencils(f.grid(), radii), eval.cells());
}

/// Fractional maximal function on every masked cell (zero elsewhere).
inline ScalarField fractional_maximal(const ScalarField& f, const ExponentField& alpha, const RadiusLadder& radii) {
    const LadderStencils st(f.grid(), radii);
    const auto cells = masked_indices(f.mask());
    const auto vals = fractional_maximal_at(f, alpha, st, cells);
    std::vector<double> v(f.grid().cell_count(), 0.0);
    for (std::size_t k = 0; k < cells.size(); ++k) v[cells[k]] = vals[k];
    return f.with_values(std::move(v));
}

/// \int_{|x-y| >= r} |f(y)| |x - y|^{alpha(x) - n} dy for each r in radii,
/// sharing one pass over the sources.
inline std::vector<double> tail_profile(const ScalarField& f, CellIndex x, std::span<const double> radii,
                                        const ExponentField& alpha) {
    const Grid& g = f.grid();
    const int n = g.dim();
    detail::check_same_grid(f, alpha, "tail_integral");
    if (!f.masked(x)) throw Error("tail_integral: point is not a masked cell");
    for (double r : radii)
        if (!(r > 0.0)) throw Error("tail_integral: radius must be positive");
    const Point xc = g.center(x);
    const double expo = alpha[x] - n;
    std::vector<std::pair<double, double>> terms;  // (distance, term)
    for (CellIndex i = 0; i < f.values().size(); ++i) {
        if (!f.masked(i) || f[i] == 0.0 || i == x) continue;
        const double d = distance(xc, g.center(i), n);
        terms.emplace_back(d, std::abs(f[i]) * std::pow(d, expo));
    }
    std::sort(terms.begin(), terms.end());
    std::vector<double> out;
    out.reserve(radii.size());
    std::vector<double> buf;
    for (double r : radii) {
        const auto it = std::lower_bound(terms.begin(), terms.end(), r,
                                         [](const auto& t, double v) { return t.first < v; });
        buf.clear();
        for (auto jt = it; jt != terms.end(); ++jt) buf.push_back(jt->second);
        out.push_back(g.cell_volume() * pairwise_sum(buf));
    }
    return out;
}

inline double tail_integral(const ScalarField& f, CellIndex x, double r, const ExponentField& alpha) {
    const double radii[1] = {r};
    return tail_profile(f, x, radii, alpha)[0];
}

struct PointwiseComparison {
    std::vector<CellIndex> cells;
    std::vector<double> left;
    std::vector<double> right;
    /// left / right where right > 0, NaN otherwise.
    std::vector<double> ratio;
    /// Cells with right == 0 and left > 0.
    std::vector<CellIndex> unbounded;
    double max_ratio = 0.0;
    std::optional<CellIndex> argmax;
    /// max_ratio: the smallest constant making left <= c right on the set.
    double calibrated_c = 0.0;
};

inline PointwiseComparison compare_pointwise(std::span<const CellIndex> cells, std::vector<double> left,
                                             std::vector<double> right) {
    PointwiseComparison pc;
    pc.cells.assign(cells.begin(), cells.end());
    pc.ratio.assign(left.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < left.size(); ++k) {
        if (right[k] > 0.0) {
            pc.ratio[k] = left[k] / right[k];
            if (pc.ratio[k] > pc.max_ratio) {
                pc.max_ratio = pc.ratio[k];
                pc.argmax = cells[k];
            }
        } else if (left[k] > 0.0) {
            pc.unbounded.push_back(cells[k]);
        }
    }
    pc.calibrated_c = pc.max_ratio;
    pc.left = std::move(left);
    pc.right = std::move(right);
    return pc;
}

namespace detail {

inline void check_unit_norm(const ScalarField& f, const ExponentField& p, const char* op) {
    const double nrm = luxemburg_norm(f, p).value;
    if (nrm > 1.0 + 1e-9)
        throw Error(std::string(op) + ": hypothesis ||f||_{p(.)} <= 1 violated (norm " + std::to_string(nrm) + ")");
}

inline void check_alpha_p(const ExponentField& alpha, const ExponentField& p, int n, const char* op) {
    if (p.lo() < 1.0) throw Error(std::string(op) + ": requires p^- >= 1");
    double ap = 0.0;
    for (CellIndex i = 0; i < p.field().values().size(); ++i)
        if (p.field().masked(i)) ap = std::max(ap, alpha[i] * p[i]);
    if (!(ap < n)) throw Error(std::string(op) + ": hypothesis (alpha p)^+ < n violated ((alpha p)^+ = " +
                               std::to_string(ap) + ")");
}

}  // namespace detail

/// Precomputed inputs shared by the pointwise comparisons, so a battery can
/// reuse one potential evaluation.
struct HedbergInputs {
    std::vector<double> potential;
    std::vector<double> maximal;  // M_{alpha - eps} f at the evaluation cells
};

/// Right side c max{1, 1/delta}^{(p^+-1)/p^+} (M_{alpha-eps} f)^{delta/(delta+eps)}
/// with c = 1 and delta = (n - alpha p) / p.
inline std::vector<double> hedberg_right_side(const ExponentField& alpha, const ExponentField& p,
                                              const ExponentField& eps, std::span<const CellIndex> cells,
                                              std::span<const double> maximal) {
    const int n = p.grid().dim();
    const double outer = (p.hi() - 1.0) / p.hi();
    std::vector<double> right(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const CellIndex i = cells[k];
        const double delta = (n - alpha[i] * p[i]) / p[i];
        const double e = eps[i];
        right[k] = std::pow(std::max(1.0, 1.0 / delta), outer) * std::pow(maximal[k], delta / (delta + e));
    }
    return right;
}

inline void check_hedberg_hypotheses(const ScalarField& f, const ExponentField& alpha, const ExponentField& p,
                                     const ExponentField& eps) {
    const int n = f.grid().dim();
    detail::check_alpha(alpha, n, "hedberg_check", false);
    detail::check_alpha_p(alpha, p, n, "hedberg_check");
    for (CellIndex i = 0; i < f.values().size(); ++i) {
        if (!f.masked(i)) continue;
        if (!(eps[i] > 0.0) || eps[i] > alpha[i] + 1e-15)
            throw Error("hedberg_check: hypothesis 0 < eps(x) <= alpha(x) violated at cell " + std::to_string(i));
    }
    detail::check_unit_norm(f, p, "hedberg_check");
}

inline PointwiseComparison hedberg_check(const ScalarField& f, const ExponentField& alpha, const ExponentField& p,
                                         const ExponentField& eps, const EvalSet& eval,
                                         std::optional<RadiusLadder> ladder = std::nullopt) {
    check_hedberg_hypotheses(f, alpha, p, eps);
    std::vector<double> reduced(alpha.grid().cell_count());
    for (CellIndex i = 0; i < reduced.size(); ++i) reduced[i] = std::max(0.0, alpha[i] - eps[i]);
    const ExponentField alpha_eps(alpha.field().with_values(std::move(reduced)));
    const RadiusLadder radii = ladder ? *ladder : default_ladder(f.grid(), f.mask());
    auto left = riesz_potential(f, alpha, eval);
    const auto maximal = fractional_maximal_at(f, alpha_eps, radii, eval);
    return compare_pointwise(eval.cells(), std::move(left), hedberg_right_side(alpha, p, eps, eval.cells(), maximal));
}

/// Right side (M f)^{p(x)/p#(x)} = (M f)^{(n - alpha p)/n} with M the
/// Hardy-Littlewood maximal function.
inline std::vector<double> samko_right_side(const ExponentField& alpha, const ExponentField& p,
                                            std::span<const CellIndex> cells, std::span<const double> maximal) {
    const int n = p.grid().dim();
    std::vector<double> right(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const CellIndex i = cells[k];
        const double expo = (n - alpha[i] * p[i]) / n;
        right[k] = std::pow(maximal[k], expo);
    }
    return right;
}

inline PointwiseComparison samko_check(const ScalarField& f, const ExponentField& alpha, const ExponentField& p,
                                       const EvalSet& eval, std::optional<RadiusLadder> ladder = std::nullopt) {
    const int n = f.grid().dim();
    detail::check_alpha(alpha, n, "samko_check", false);
    detail::check_alpha_p(alpha, p, n, "samko_check");
    detail::check_unit_norm(f, p, "samko_check");
    const ExponentField zero = constant_exponent_like(alpha, 0.0);
    const RadiusLadder radii = ladder ? *ladder : default_ladder(f.grid(), f.mask());
    auto left = riesz_potential(f, alpha, eval);
    const auto maximal = fractional_maximal_at(f, zero, radii, eval);
    return compare_pointwise(eval.cells(), std::move(left), samko_right_side(alpha, p, eval.cells(), maximal));
}

}  // namespace vriesz
