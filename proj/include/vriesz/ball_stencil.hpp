#pragma once
/**
 * @file ball_stencil.hpp
 * @brief Exact ball/cell overlap weights and the row-run stencils used to
 *        evaluate ball integrals of piecewise-constant fields.
 *
 * The weight of a cell is |B(0, r) ∩ cell| / h^n. Cells entirely inside the
 * ball have weight exactly 1 and are stored as a contiguous run along the
 * last axis so that prefix sums can integrate them in O(1) per row.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "vriesz/grid.hpp"

namespace vriesz {

namespace detail {

/// \int_a^b sqrt(r^2 - u^2) du for -r <= a <= b <= r.
inline double chord_integral(double a, double b, double r) {
    auto prim = [r](double u) {
        const double t = std::clamp(u / r, -1.0, 1.0);
        return 0.5 * (u * std::sqrt(std::max(0.0, r * r - u * u)) + r * r * std::asin(t));
    };
    return prim(b) - prim(a);
}

/// Area of the disk B(0, r) intersected with the quadrant {u <= x, v <= y}.
inline double disk_corner_area(double x, double y, double r) {
    if (r <= 0.0) return 0.0;
    const double ub = std::min(x, r);
    if (ub <= -r) return 0.0;
    if (y <= -r) return 0.0;
    if (y >= r) return 2.0 * chord_integral(-r, ub, r);
    const double w = std::sqrt(r * r - y * y);
    double area = 0.0;
    // |u| > w: chord lies entirely below y (y > 0) or entirely above it (y < 0)
    if (y > 0.0) {
        area += 2.0 * chord_integral(-r, std::min(ub, -w), r);
        if (ub > w) area += 2.0 * chord_integral(w, ub, r);
    }
    // |u| <= w: the chord is cut at v = y
    const double a = -w, b = std::min(ub, w);
    if (b > a) area += y * (b - a) + chord_integral(a, b, r);
    return area;
}

inline double disk_rect_area(double x0, double x1, double y0, double y1, double r) {
    return disk_corner_area(x1, y1, r) - disk_corner_area(x0, y1, r) - disk_corner_area(x1, y0, r) +
           disk_corner_area(x0, y0, r);
}

inline double ball_box_volume(const std::array<double, 3>& lo, const std::array<double, 3>& hi, double r) {
    const double z0 = std::max(lo[0], -r), z1 = std::min(hi[0], r);
    if (z1 <= z0) return 0.0;
    // breakpoints where the slice disk radius crosses a distance feature of the rectangle
    std::vector<double> cuts{z0, z1};
    const std::array<double, 4> feats{lo[1], hi[1], lo[2], hi[2]};
    std::vector<double> d2;
    for (double a : feats) d2.push_back(a * a);
    for (double a : {lo[1], hi[1]})
        for (double b : {lo[2], hi[2]}) d2.push_back(a * a + b * b);
    for (double d : d2) {
        if (d >= r * r) continue;
        const double z = std::sqrt(r * r - d);
        for (double c : {z, -z})
            if (c > z0 && c < z1) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    static constexpr std::array<double, 8> gx{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                              -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                              0.7966664774136267,  0.9602898564975363};
    static constexpr std::array<double, 8> gw{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                              0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};
    double vol = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        if (b <= a) continue;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int q = 0; q < 8; ++q) {
            const double z = mid + half * gx[q];
            const double rho = std::sqrt(std::max(0.0, r * r - z * z));
            vol += half * gw[q] * disk_rect_area(lo[1], hi[1], lo[2], hi[2], rho);
        }
    }
    return vol;
}

}  // namespace detail

/// |B(0, r) ∩ cell| / h^n for the cell at integer offset `off` from the cell
/// containing the centre.
inline double cell_overlap_fraction(const CellCoords& off, double r_cells, int dim) {
    std::array<double, 3> lo{}, hi{};
    for (int a = 0; a < dim; ++a) {
        lo[a] = off[a] - 0.5;
        hi[a] = off[a] + 0.5;
    }
    if (dim == 2) return detail::disk_rect_area(lo[0], hi[0], lo[1], hi[1], r_cells);
    return detail::ball_box_volume(lo, hi, r_cells);
}

struct StencilRow {
    /// Offsets along all axes but the last.
    std::array<int, 2> lead{0, 0};
    /// Cells with |last offset| <= full_half have weight 1; -1 means none.
    int full_half = -1;
    std::vector<std::pair<int, double>> partial;
};

struct BallStencil {
    double radius = 0.0;
    std::vector<StencilRow> rows;
};

/// Row-run stencil of the closed ball of the given physical radius.
inline BallStencil make_ball_stencil(const Grid& g, double radius) {
    const int dim = g.dim();
    const double rc = radius / g.spacing();
    const int reach = static_cast<int>(std::ceil(rc + 0.5));
    BallStencil st;
    st.radius = radius;
    auto near2 = [](int k) {
        const double t = std::max(0.0, std::abs(k) - 0.5);
        return t * t;
    };
    auto far2 = [](int k) {
        const double t = std::abs(k) + 0.5;
        return t * t;
    };
    const int reach0 = dim == 3 ? reach : 0;
    for (int a = -reach0; a <= reach0; ++a) {
        for (int b = -reach; b <= reach; ++b) {
            const double lead_near = (dim == 3 ? near2(a) : 0.0) + near2(b);
            if (lead_near >= rc * rc) continue;
            const double lead_far = (dim == 3 ? far2(a) : 0.0) + far2(b);
            StencilRow row;
            row.lead = dim == 3 ? std::array<int, 2>{a, b} : std::array<int, 2>{b, 0};
            for (int c = -reach; c <= reach; ++c) {
                if (lead_near + near2(c) >= rc * rc) continue;
                if (lead_far + far2(c) <= rc * rc) {
                    row.full_half = std::max(row.full_half, std::abs(c));
                    continue;
                }
                const CellCoords off = dim == 3 ? CellCoords{a, b, c} : CellCoords{b, c, 0};
                const double w = cell_overlap_fraction(off, rc, dim);
                if (w > 0.0) row.partial.emplace_back(c, std::min(1.0, w));
            }
            if (row.full_half >= 0 || !row.partial.empty()) st.rows.push_back(std::move(row));
        }
    }
    return st;
}

/// Prefix sums of a cell array along the last axis, one row per lead index.
class RowPrefix {
public:
    RowPrefix(const Grid& g, std::span<const double> cells) : res_(g.resolution()) {
        const std::size_t nrows = g.cell_count() / static_cast<std::size_t>(res_);
        prefix_.assign(nrows * static_cast<std::size_t>(res_ + 1), 0.0);
        for (std::size_t r = 0; r < nrows; ++r) {
            double acc = 0.0;
            const std::size_t base = r * static_cast<std::size_t>(res_);
            double* out = &prefix_[r * static_cast<std::size_t>(res_ + 1)];
            out[0] = 0.0;
            for (int k = 0; k < res_; ++k) {
                acc += cells[base + static_cast<std::size_t>(k)];
                out[k + 1] = acc;
            }
        }
    }

    /// Sum over cells [lo, hi] of the given row (inclusive, already clipped).
    double range(std::size_t row, int lo, int hi) const {
        const double* p = &prefix_[row * static_cast<std::size_t>(res_ + 1)];
        return p[hi + 1] - p[lo];
    }

private:
    int res_;
    std::vector<double> prefix_;
};

/// \sum_y w(y) cells(y) over the stencil centred at cell c, without the h^n factor.
inline double stencil_sum(const Grid& g, const BallStencil& st, const RowPrefix& prefix, std::span<const double> cells,
                          const CellCoords& c) {
    const int dim = g.dim();
    const int res = g.resolution();
    const int last = dim - 1;
    double total = 0.0;
    for (const auto& row : st.rows) {
        CellCoords q = c;
        if (dim == 3) {
            q[0] += row.lead[0];
            q[1] += row.lead[1];
            if (q[0] < 0 || q[0] >= res || q[1] < 0 || q[1] >= res) continue;
        } else {
            q[0] += row.lead[0];
            if (q[0] < 0 || q[0] >= res) continue;
        }
        const std::size_t row_id = dim == 3 ? static_cast<std::size_t>(q[0]) * res + q[1] : static_cast<std::size_t>(q[0]);
        const std::size_t base = row_id * static_cast<std::size_t>(res);
        const int x = c[last];
        if (row.full_half >= 0) {
            const int lo = std::max(0, x - row.full_half), hi = std::min(res - 1, x + row.full_half);
            if (hi >= lo) total += prefix.range(row_id, lo, hi);
        }
        for (const auto& [dx, w] : row.partial) {
            const int k = x + dx;
            if (k < 0 || k >= res) continue;
            total += w * cells[base + static_cast<std::size_t>(k)];
        }
    }
    return total;
}

}  // namespace vriesz
