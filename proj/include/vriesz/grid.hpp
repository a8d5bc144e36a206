#pragma once
/**
 * @file grid.hpp
 * @brief Uniform cell-centred grids, masked scalar fields, exponent fields and
 *        the discrete calculus the rest of the toolkit is built on.
 *
 * Cells are stored row-major with axis 0 slowest. The centre of cell k along
 * an axis is lo + (k + 1/2) h. Integrals use the midpoint rule over masked
 * cells: \int g = h^n \sum_{masked} g(centre).
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vriesz/core.hpp"

namespace vriesz {

using Mask = std::vector<std::uint8_t>;
using CellIndex = std::size_t;
using CellCoords = std::array<int, 3>;

struct Box {
    Point lo{};
    Point hi{};
};

class Grid {
public:
    Grid() = default;

    int dim() const { return dim_; }
    int resolution() const { return resolution_; }
    const Box& bbox() const { return bbox_; }
    double spacing() const { return h_; }
    double cell_volume() const { return std::pow(h_, dim_); }
    std::size_t cell_count() const { return cell_count_; }
    double side() const { return h_ * resolution_; }
    double diagonal() const { return side() * std::sqrt(static_cast<double>(dim_)); }

    std::size_t stride(int axis) const {
        std::size_t s = 1;
        for (int a = dim_ - 1; a > axis; --a) s *= static_cast<std::size_t>(resolution_);
        return s;
    }

    CellCoords coords(CellIndex i) const {
        CellCoords c{0, 0, 0};
        for (int a = dim_ - 1; a >= 0; --a) {
            c[a] = static_cast<int>(i % static_cast<std::size_t>(resolution_));
            i /= static_cast<std::size_t>(resolution_);
        }
        return c;
    }

    CellIndex index(const CellCoords& c) const {
        CellIndex i = 0;
        for (int a = 0; a < dim_; ++a) i = i * static_cast<std::size_t>(resolution_) + static_cast<std::size_t>(c[a]);
        return i;
    }

    bool in_range(const CellCoords& c) const {
        for (int a = 0; a < dim_; ++a)
            if (c[a] < 0 || c[a] >= resolution_) return false;
        return true;
    }

    Point center(const CellCoords& c) const {
        Point p{0.0, 0.0, 0.0};
        for (int a = 0; a < dim_; ++a) p[a] = bbox_.lo[a] + (c[a] + 0.5) * h_;
        return p;
    }

    Point center(CellIndex i) const { return center(coords(i)); }

    /// Cell whose closed box contains p, clamped into the grid.
    CellCoords locate(const Point& p) const {
        CellCoords c{0, 0, 0};
        for (int a = 0; a < dim_; ++a) {
            const int k = static_cast<int>(std::floor((p[a] - bbox_.lo[a]) / h_));
            c[a] = std::clamp(k, 0, resolution_ - 1);
        }
        return c;
    }

    /// Nearest cell corner, used to keep analytic singularities off cell centres.
    Point snap_to_corner(const Point& p) const {
        Point q = p;
        for (int a = 0; a < dim_; ++a) q[a] = bbox_.lo[a] + std::round((p[a] - bbox_.lo[a]) / h_) * h_;
        return q;
    }

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && resolution_ == o.resolution_ && bbox_.lo == o.bbox_.lo && bbox_.hi == o.bbox_.hi;
    }

    friend Grid make_grid(int dim, int resolution, const Box& bbox);

private:
    int dim_ = 2;
    int resolution_ = 0;
    Box bbox_{};
    double h_ = 0.0;
    std::size_t cell_count_ = 0;
};

/// Builds a cubic grid. The box must have equal positive side lengths.
inline Grid make_grid(int dim, int resolution, const Box& bbox) {
    if (dim != 2 && dim != 3) throw Error("make_grid: dimension must be 2 or 3, got " + std::to_string(dim));
    if (resolution < 4) throw Error("make_grid: resolution must be at least 4, got " + std::to_string(resolution));
    const double side = bbox.hi[0] - bbox.lo[0];
    if (!(side > 0.0) || !std::isfinite(side)) throw Error("make_grid: degenerate bounding box");
    for (int a = 1; a < dim; ++a) {
        const double s = bbox.hi[a] - bbox.lo[a];
        if (!(s > 0.0)) throw Error("make_grid: degenerate bounding box");
        if (std::abs(s - side) > 1e-12 * side) throw Error("make_grid: bounding box must be a cube");
    }
    Grid g;
    g.dim_ = dim;
    g.resolution_ = resolution;
    g.bbox_ = bbox;
    for (int a = dim; a < 3; ++a) g.bbox_.lo[a] = g.bbox_.hi[a] = 0.0;
    g.h_ = side / resolution;
    g.cell_count_ = 1;
    for (int a = 0; a < dim; ++a) g.cell_count_ *= static_cast<std::size_t>(resolution);
    return g;
}

/// Box [lo, hi]^dim.
inline Box cube_box(int dim, double lo, double hi) {
    Box b;
    for (int a = 0; a < dim; ++a) {
        b.lo[a] = lo;
        b.hi[a] = hi;
    }
    return b;
}

inline Mask full_mask(const Grid& g) { return Mask(g.cell_count(), 1); }

inline std::vector<CellIndex> masked_indices(const Mask& m) {
    std::vector<CellIndex> out;
    for (CellIndex i = 0; i < m.size(); ++i)
        if (m[i]) out.push_back(i);
    return out;
}

inline std::size_t count_cells(const Mask& m) {
    return static_cast<std::size_t>(std::count_if(m.begin(), m.end(), [](std::uint8_t v) { return v != 0; }));
}

/// Real values on every cell plus a membership mask. Only masked cells take
/// part in integrals, norms and operators.
class ScalarField {
public:
    ScalarField() = default;

    ScalarField(Grid grid, std::vector<double> values, Mask mask)
        : grid_(std::move(grid)), values_(std::move(values)), mask_(std::move(mask)) {
        if (values_.size() != grid_.cell_count() || mask_.size() != grid_.cell_count())
            throw Error("ScalarField: value/mask size does not match the grid");
        for (CellIndex i = 0; i < values_.size(); ++i)
            if (mask_[i] && !std::isfinite(values_[i]))
                throw Error("ScalarField: non-finite value on masked cell " + std::to_string(i));
    }

    const Grid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    const Mask& mask() const { return mask_; }
    double operator[](CellIndex i) const { return values_[i]; }
    bool masked(CellIndex i) const { return mask_[i] != 0; }
    std::size_t masked_count() const { return count_cells(mask_); }

    /// Same grid and mask, new values.
    ScalarField with_values(std::vector<double> values) const { return {grid_, std::move(values), mask_}; }

    ScalarField scaled(double c) const {
        std::vector<double> v(values_);
        for (double& x : v) x *= c;
        return with_values(std::move(v));
    }

    bool same_support(const ScalarField& o) const { return grid_ == o.grid_ && mask_ == o.mask_; }

private:
    Grid grid_{};
    std::vector<double> values_;
    Mask mask_;
};

struct LogHolderEstimate {
    double value = 0.0;
    /// False when the pair set was sampled; the value is then a lower bound.
    bool exact = true;
    std::size_t pairs = 0;
};

inline constexpr std::size_t kExactPairLimit = std::size_t{1} << 12;

/// max |g(x) - g(y)| log(e + 1/|x - y|) over masked pairs.
///
/// Up to 2^12 masked cells every pair is scanned. Larger masks use a two-scale
/// sample: every pair within 8 cells plus 2^16 seeded random distant pairs.
inline LogHolderEstimate log_holder_constant(const ScalarField& g) {
    const auto idx = masked_indices(g.mask());
    if (idx.empty()) throw Error("log_holder_constant: empty mask");
    const Grid& grid = g.grid();
    const int dim = grid.dim();
    LogHolderEstimate est;

    auto pair_value = [&](CellIndex a, CellIndex b) {
        const double dv = std::abs(g[a] - g[b]);
        if (dv == 0.0) return 0.0;
        const double r = distance(grid.center(a), grid.center(b), dim);
        return dv * std::log(std::numbers::e + 1.0 / r);
    };

    double lo = g[idx[0]], hi = g[idx[0]];
    for (CellIndex i : idx) {
        lo = std::min(lo, g[i]);
        hi = std::max(hi, g[i]);
    }
    if (lo == hi) {
        est.exact = true;
        return est;
    }

    if (idx.size() <= kExactPairLimit) {
        std::vector<Point> centers(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) centers[k] = grid.center(idx[k]);
        for (std::size_t a = 0; a < idx.size(); ++a) {
            for (std::size_t b = a + 1; b < idx.size(); ++b) {
                const double dv = std::abs(g[idx[a]] - g[idx[b]]);
                if (dv == 0.0) continue;
                const double r = distance(centers[a], centers[b], dim);
                est.value = std::max(est.value, dv * std::log(std::numbers::e + 1.0 / r));
            }
        }
        est.pairs = idx.size() * (idx.size() - 1) / 2;
        est.exact = true;
        return est;
    }

    est.exact = false;
    constexpr int reach = 8;
    std::vector<CellCoords> offsets;
    const int zr = dim == 3 ? reach : 0;
    for (int dz = -zr; dz <= zr; ++dz)
        for (int dy = -reach; dy <= reach; ++dy)
            for (int dx = -reach; dx <= reach; ++dx) {
                const CellCoords o = dim == 3 ? CellCoords{dz, dy, dx} : CellCoords{dy, dx, 0};
                // one representative per unordered pair
                if (o > CellCoords{0, 0, 0}) offsets.push_back(o);
            }
    for (CellIndex i : idx) {
        const CellCoords c = grid.coords(i);
        for (const auto& o : offsets) {
            CellCoords q{c[0] + o[0], c[1] + o[1], c[2] + o[2]};
            if (!grid.in_range(q)) continue;
            const CellIndex j = grid.index(q);
            if (!g.masked(j)) continue;
            est.value = std::max(est.value, pair_value(i, j));
            ++est.pairs;
        }
    }
    Rng rng(0x5eed1064ULL);
    for (int k = 0; k < (1 << 16); ++k) {
        const CellIndex a = idx[rng.below(idx.size())];
        const CellIndex b = idx[rng.below(idx.size())];
        if (a == b) continue;
        est.value = std::max(est.value, pair_value(a, b));
        ++est.pairs;
    }
    return est;
}

/// A scalar field used as a variable exponent, with its discrete essential
/// bounds (min/max over masked cells) and log-Hölder constant.
class ExponentField {
public:
    ExponentField() = default;

    explicit ExponentField(ScalarField base) : base_(std::move(base)) {
        const auto idx = masked_indices(base_.mask());
        if (idx.empty()) throw Error("ExponentField: empty mask");
        lo_ = hi_ = base_[idx[0]];
        for (CellIndex i : idx) {
            lo_ = std::min(lo_, base_[i]);
            hi_ = std::max(hi_, base_[i]);
        }
        logholder_ = log_holder_constant(base_);
    }

    const ScalarField& field() const { return base_; }
    const Grid& grid() const { return base_.grid(); }
    double operator[](CellIndex i) const { return base_[i]; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double logholder_c() const { return logholder_.value; }
    const LogHolderEstimate& logholder() const { return logholder_; }
    bool is_constant() const { return lo_ == hi_; }

private:
    ScalarField base_{};
    double lo_ = 0.0;
    double hi_ = 0.0;
    LogHolderEstimate logholder_{};
};

/// Midpoint-rule integral over the mask, pairwise summed.
inline double integrate(const ScalarField& f) {
    std::vector<double> terms;
    terms.reserve(f.values().size());
    for (CellIndex i = 0; i < f.values().size(); ++i)
        if (f.masked(i)) terms.push_back(f[i]);
    return f.grid().cell_volume() * pairwise_sum(terms);
}

inline double measure(const Grid& g, const Mask& m) { return g.cell_volume() * static_cast<double>(count_cells(m)); }

/// Multilinear interpolation of cell-centred values, clamped at the grid edge.
inline double interpolate(const ScalarField& f, const Point& p) {
    const Grid& g = f.grid();
    const int dim = g.dim();
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> w{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) {
        double t = (p[a] - g.bbox().lo[a]) / g.spacing() - 0.5;
        t = std::clamp(t, 0.0, static_cast<double>(g.resolution() - 1));
        int k = std::min(static_cast<int>(std::floor(t)), g.resolution() - 2);
        base[a] = k;
        w[a] = t - k;
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << dim); ++corner) {
        double weight = 1.0;
        CellCoords c{0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            const int bit = (corner >> a) & 1;
            c[a] = base[a] + bit;
            weight *= bit ? w[a] : 1.0 - w[a];
        }
        if (weight != 0.0) acc += weight * f[g.index(c)];
    }
    return acc;
}

/// Euclidean norm of the discrete gradient. Central differences where both
/// axis neighbours are masked, one-sided where only one is, and a zero
/// component where neither is.
inline ScalarField gradient_magnitude(const ScalarField& u) {
    const Grid& g = u.grid();
    const double h = g.spacing();
    std::vector<double> out(g.cell_count(), 0.0);
    for (CellIndex i = 0; i < out.size(); ++i) {
        if (!u.masked(i)) continue;
        const CellCoords c = g.coords(i);
        double sq = 0.0;
        bool any_neighbour = false;
        for (int a = 0; a < g.dim(); ++a) {
            CellCoords lo = c, hi = c;
            --lo[a];
            ++hi[a];
            const bool has_lo = g.in_range(lo) && u.masked(g.index(lo));
            const bool has_hi = g.in_range(hi) && u.masked(g.index(hi));
            double d = 0.0;
            if (has_lo && has_hi)
                d = (u[g.index(hi)] - u[g.index(lo)]) / (2.0 * h);
            else if (has_hi)
                d = (u[g.index(hi)] - u[i]) / h;
            else if (has_lo)
                d = (u[i] - u[g.index(lo)]) / h;
            any_neighbour = any_neighbour || has_lo || has_hi;
            sq += d * d;
        }
        if (!any_neighbour) throw Error("gradient_magnitude: isolated masked cell " + std::to_string(i));
        out[i] = std::sqrt(sq);
    }
    return u.with_values(std::move(out));
}

/// Mean of u over masked cells whose centre lies in the closed ball.
inline double mean_over_ball(const ScalarField& u, const Point& center, double radius) {
    const Grid& g = u.grid();
    const double r2 = radius * radius;
    std::vector<double> terms;
    CellCoords lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor((center[a] - radius - g.bbox().lo[a]) / g.spacing())) - 1);
        hi[a] = std::min(g.resolution() - 1,
                         static_cast<int>(std::floor((center[a] + radius - g.bbox().lo[a]) / g.spacing())) + 1);
    }
    for (int a0 = lo[0]; a0 <= hi[0]; ++a0)
        for (int a1 = lo[1]; a1 <= hi[1]; ++a1)
            for (int a2 = lo[2]; a2 <= hi[2]; ++a2) {
                const CellCoords c{a0, a1, a2};
                const CellIndex i = g.index(c);
                if (!u.masked(i)) continue;
                if (distance_sq(g.center(c), center, g.dim()) <= r2) terms.push_back(u[i]);
            }
    if (terms.empty()) throw Error("mean_over_ball: ball contains no masked cell centre");
    return pairwise_sum(terms) / static_cast<double>(terms.size());
}

/// Diagonal of the bounding box of the masked cells; an upper bound for the
/// diameter of the masked region.
inline double mask_diameter(const Grid& g, const Mask& m) {
    CellCoords lo{g.resolution(), g.resolution(), g.resolution()}, hi{-1, -1, -1};
    bool any = false;
    for (CellIndex i = 0; i < m.size(); ++i) {
        if (!m[i]) continue;
        any = true;
        const CellCoords c = g.coords(i);
        for (int a = 0; a < g.dim(); ++a) {
            lo[a] = std::min(lo[a], c[a]);
            hi[a] = std::max(hi[a], c[a]);
        }
    }
    if (!any) return 0.0;
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double ext = (hi[a] - lo[a] + 1) * g.spacing();
        s += ext * ext;
    }
    return std::sqrt(s);
}

}  // namespace vriesz
