#pragma once
/**
 * @file domains.hpp
 * @brief Test domains, distance-to-boundary fields, John centres and chains
 *        of balls along discrete John curves.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <nlohmann/json.hpp>

#include "vriesz/grid.hpp"
#include "vriesz/potentials.hpp"

namespace vriesz {

using Membership = std::function<bool(const Point&)>;

struct DomainModel {
    std::string kind;
    Grid grid;
    Mask mask;
    /// Distance to the boundary, positive exactly on masked cells.
    ScalarField dist;
    CellIndex john_cell = 0;
    Point john_center{};
    /// Radius of the base ball B = B(x0, dist(x0)).
    double base_radius = 0.0;
    ExponentField s_field;
    /// Analytic membership of a physical point.
    Membership contains;
    /// Distance to the boundary at an arbitrary interior point.
    std::function<double(const Point&)> distance_at;
    nlohmann::json manifest;

    double measure() const { return vriesz::measure(grid, mask); }
};

namespace detail {

inline Mask analytic_mask(const Grid& g, const Membership& inside) {
    Mask m(g.cell_count(), 0);
    for (CellIndex i = 0; i < m.size(); ++i) m[i] = inside(g.center(i)) ? 1 : 0;
    return m;
}

/// Rejects domains whose cells reach the outermost layer of the grid.
inline void require_margin(const Grid& g, const Mask& m, const std::string& what) {
    bool any = false;
    for (CellIndex i = 0; i < m.size(); ++i) {
        if (!m[i]) continue;
        any = true;
        const CellCoords c = g.coords(i);
        for (int a = 0; a < g.dim(); ++a)
            if (c[a] == 0 || c[a] == g.resolution() - 1)
                throw Error(what + ": domain exceeds the bounding box (needs a margin of one cell)");
    }
    if (!any) throw Error(what + ": domain contains no cell centre at this resolution");
}

/// Nearest-point queries against a fixed point cloud (bulk-loaded R-tree).
class NearestSamples {
public:
    explicit NearestSamples(const std::vector<Point>& pts, int dim) : dim_(dim) {
        std::vector<BPoint> bp;
        bp.reserve(pts.size());
        for (const auto& p : pts) bp.emplace_back(p[0], p[1], dim == 3 ? p[2] : 0.0);
        tree_ = Tree(bp.begin(), bp.end());
    }

    bool empty() const { return tree_.empty(); }

    /// Distance from p to the nearest stored point; infinite when empty.
    double nearest(const Point& p) const {
        const BPoint q(p[0], p[1], dim_ == 3 ? p[2] : 0.0);
        for (auto it = tree_.qbegin(boost::geometry::index::nearest(q, 1)); it != tree_.qend(); ++it)
            return boost::geometry::distance(q, *it);
        return std::numeric_limits<double>::infinity();
    }

private:
    using BPoint = boost::geometry::model::point<double, 3, boost::geometry::cs::cartesian>;
    using Tree = boost::geometry::index::rtree<BPoint, boost::geometry::index::rstar<16>>;
    int dim_;
    Tree tree_;
};

/// Boundary samples: midpoints between face-adjacent points of the h/4 grid
/// whose analytic membership differs.
inline std::vector<Point> sample_boundary(const Grid& g, const Membership& inside) {
    const int dim = g.dim();
    const int fine = 4 * g.resolution();
    const double fh = g.spacing() / 4.0;
    const Box& box = g.bbox();
    const std::size_t row = static_cast<std::size_t>(fine);
    const std::size_t total = dim == 3 ? row * row * row : row * row;
    std::vector<std::uint8_t> in(total);
    auto fine_center = [&](int i, int j, int k) {
        Point p{box.lo[0] + (i + 0.5) * fh, box.lo[1] + (j + 0.5) * fh, 0.0};
        if (dim == 3) p[2] = box.lo[2] + (k + 0.5) * fh;
        return p;
    };
    const int kmax = dim == 3 ? fine : 1;
    for (int i = 0; i < fine; ++i)
        for (int j = 0; j < fine; ++j)
            for (int k = 0; k < kmax; ++k) in[(static_cast<std::size_t>(i) * row + j) * kmax + k] = inside(fine_center(i, j, k));
    std::vector<Point> out;
    for (int i = 0; i < fine; ++i)
        for (int j = 0; j < fine; ++j)
            for (int k = 0; k < kmax; ++k) {
                const bool here = in[(static_cast<std::size_t>(i) * row + j) * kmax + k];
                const std::array<std::array<int, 3>, 3> steps{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
                for (int a = 0; a < dim; ++a) {
                    const int ni = i + steps[a][0], nj = j + steps[a][1], nk = k + steps[a][2];
                    if (ni >= fine || nj >= fine || nk >= kmax) continue;
                    if (in[(static_cast<std::size_t>(ni) * row + nj) * kmax + nk] == here) continue;
                    Point p = fine_center(i, j, k);
                    p[a] += 0.5 * fh;
                    out.push_back(p);
                }
            }
    return out;
}

/// Distance field from sampled boundary points. Values are floored at h/16
/// on masked cells so the field stays positive exactly on the mask.
inline ScalarField sampled_distance(const Grid& g, const Mask& mask, const NearestSamples& boundary) {
    std::vector<double> d(g.cell_count(), 0.0);
    const double floor_value = g.spacing() / 16.0;
    for (CellIndex i = 0; i < d.size(); ++i)
        if (mask[i]) d[i] = std::max(floor_value, boundary.nearest(g.center(i)));
    return ScalarField(g, std::move(d), mask);
}

inline ScalarField analytic_distance(const Grid& g, const Mask& mask, const std::function<double(const Point&)>& fn) {
    std::vector<double> d(g.cell_count(), 0.0);
    const double floor_value = g.spacing() / 16.0;
    for (CellIndex i = 0; i < d.size(); ++i)
        if (mask[i]) d[i] = std::max(floor_value, fn(g.center(i)));
    return ScalarField(g, std::move(d), mask);
}

/// Fills in the John centre (argmax of dist, lowest index on ties) and base ball.
inline void place_john_center(DomainModel& D) {
    double best = -1.0;
    for (CellIndex i = 0; i < D.mask.size(); ++i)
        if (D.mask[i] && D.dist[i] > best) {
            best = D.dist[i];
            D.john_cell = i;
        }
    D.john_center = D.grid.center(D.john_cell);
    D.base_radius = best;
}

inline nlohmann::json point_json(const Point& p, int dim) {
    nlohmann::json a = nlohmann::json::array();
    for (int k = 0; k < dim; ++k) a.push_back(p[k]);
    return a;
}

inline void finish_manifest(DomainModel& D) {
    D.manifest["kind"] = D.kind;
    D.manifest["dim"] = D.grid.dim();
    D.manifest["resolution"] = D.grid.resolution();
    D.manifest["john_center"] = point_json(D.john_center, D.grid.dim());
    D.manifest["base_radius"] = D.base_radius;
    D.manifest["measure"] = D.measure();
    D.manifest["masked_cells"] = count_cells(D.mask);
    D.manifest["s_range"] = {D.s_field.lo(), D.s_field.hi()};
}

}  // namespace detail

/// Open ball of the given radius; dist is r - |x - c|.
inline DomainModel make_disk(const Grid& g, double radius, const Point& center = {0.0, 0.0, 0.0}) {
    if (!(radius > 0.0)) throw Error("make_disk: radius must be positive");
    const int dim = g.dim();
    DomainModel D;
    D.kind = "disk";
    D.grid = g;
    D.contains = [=](const Point& x) { return distance_sq(x, center, dim) < radius * radius; };
    D.distance_at = [=](const Point& x) { return std::max(0.0, radius - distance(x, center, dim)); };
    D.mask = detail::analytic_mask(g, D.contains);
    detail::require_margin(g, D.mask, "make_disk");
    D.dist = detail::analytic_distance(g, D.mask, D.distance_at);
    D.s_field = constant_exponent(g, 1.0, D.mask);
    detail::place_john_center(D);
    D.manifest = {{"radius", radius}, {"center", detail::point_json(center, dim)}};
    detail::finish_manifest(D);
    return D;
}

/// Open axis-aligned cube of the given side; dist is the distance to the nearest face.
inline DomainModel make_square(const Grid& g, double side, const Point& center = {0.0, 0.0, 0.0}) {
    if (!(side > 0.0)) throw Error("make_square: side must be positive");
    const int dim = g.dim();
    const double half = 0.5 * side;
    DomainModel D;
    D.kind = "square";
    D.grid = g;
    D.contains = [=](const Point& x) {
        for (int a = 0; a < dim; ++a)
            if (!(std::abs(x[a] - center[a]) < half)) return false;
        return true;
    };
    D.distance_at = [=](const Point& x) {
        double d = std::numeric_limits<double>::infinity();
        for (int a = 0; a < dim; ++a) d = std::min(d, half - std::abs(x[a] - center[a]));
        return std::max(0.0, d);
    };
    D.mask = detail::analytic_mask(g, D.contains);
    detail::require_margin(g, D.mask, "make_square");
    D.dist = detail::analytic_distance(g, D.mask, D.distance_at);
    D.s_field = constant_exponent(g, 1.0, D.mask);
    detail::place_john_center(D);
    D.manifest = {{"side", side}, {"center", detail::point_json(center, dim)}};
    detail::finish_manifest(D);
    return D;
}

/// Builds a domain from a membership test alone, with dist from boundary
/// samples on the h/4 grid.
inline DomainModel make_sampled_domain(const Grid& g, std::string kind, Membership inside, ExponentField s_field) {
    DomainModel D;
    D.kind = std::move(kind);
    D.grid = g;
    D.contains = std::move(inside);
    D.mask = detail::analytic_mask(g, D.contains);
    detail::require_margin(g, D.mask, "make_" + D.kind);
    auto samples = detail::sample_boundary(g, D.contains);
    auto buckets = std::make_shared<detail::NearestSamples>(samples, g.dim());
    D.dist = detail::sampled_distance(g, D.mask, *buckets);
    auto contains = D.contains;
    D.distance_at = [buckets, contains](const Point& x) { return contains(x) ? buckets->nearest(x) : 0.0; };
    D.s_field = ExponentField(ScalarField(g, std::vector<double>(s_field.field().values().begin(),
                                                                 s_field.field().values().end()),
                                          D.mask));
    detail::place_john_center(D);
    return D;
}

/// Bounding box used for cusp domains: [-1/4, 9/4] x [-5/4, 5/4]^{n-1}.
inline Box cusp_box(int dim) {
    Box b;
    b.lo[0] = -0.25;
    b.hi[0] = 2.25;
    for (int a = 1; a < dim; ++a) {
        b.lo[a] = -1.25;
        b.hi[a] = 1.25;
    }
    return b;
}

/// {0 < x1 < 1, |x'| < x1^s} ∪ B((1, 0, ...), 1/2), an outward power cusp.
inline DomainModel make_cusp(const Grid& g, double s) {
    const int n = g.dim();
    const double cap = static_cast<double>(n) / (n - 1);
    if (!(s >= 1.0 && s < cap))
        throw Error("make_cusp: requires 1 <= s < n/(n-1) = " + std::to_string(cap) + " (got " + std::to_string(s) + ")");
    Membership inside = [n, s](const Point& x) {
        double tail2 = 0.0;
        for (int a = 1; a < n; ++a) tail2 += x[a] * x[a];
        if (x[0] > 0.0 && x[0] < 1.0 && std::sqrt(tail2) < std::pow(x[0], s)) return true;
        const double dx = x[0] - 1.0;
        return dx * dx + tail2 < 0.25;
    };
    DomainModel D = make_sampled_domain(g, "cusp", inside, constant_exponent(g, s, full_mask(g)));
    D.manifest = {{"cusp_exponent", s}};
    detail::finish_manifest(D);
    return D;
}

struct Mushroom {
    double r = 0.0;
    /// Half-width of the stem, phi(r) = r^{3/2}.
    double phi = 0.0;
    /// Centre line of the mushroom along the attachment side.
    double offset = 0.0;
};

/// Bounding box used for mushroom domains: [-7/4, 49/4]^2.
inline Box mushroom_box() { return cube_box(2, -1.75, 12.25); }

inline std::vector<double> mushroom_radii(int count) {
    if (count < 1) throw Error("make_mushroom: count must be at least 1");
    std::vector<double> r;
    for (int m = 1; m <= count; ++m) r.push_back(std::ldexp(1.0, -m));
    return r;
}

/// Q = [0,12]^2 with `radii.size()` mushrooms on the side x1 = 0 and mirror
/// copies on the side x2 = 0. Mushroom m has a stem of length r_m and width
/// 2 r_m^{3/2} and a cap of side 2 r_m; they sit in the band [1, 4] along the
/// side with equal gaps. s = 1 in Q, 3/2 in caps and linear along stems.
inline DomainModel make_mushroom(const Grid& g, const std::vector<double>& radii) {
    if (g.dim() != 2) throw Error("make_mushroom: only n = 2 is supported");
    if (radii.empty()) throw Error("make_mushroom: empty radius schedule");
    std::vector<Mushroom> ms;
    double total = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double r = radii[k];
        if (!(r > 0.0)) throw Error("make_mushroom: radii must be positive");
        if (k > 0 && !(r < radii[k - 1])) throw Error("make_mushroom: radii must decrease");
        const double phi = std::pow(r, 1.5);
        if (phi > r) throw Error("make_mushroom: phi(r_m) <= r_m violated for r_m = " + std::to_string(r));
        if (r < 4.0 * g.spacing())
            throw Error("make_mushroom: r_m = " + std::to_string(r) + " is below 4h = " + std::to_string(4.0 * g.spacing()) +
                        "; increase the resolution");
        total += 2.0 * r;
        ms.push_back({r, phi, 0.0});
    }
    const double band_lo = 1.0, band_hi = 4.0;
    const double gap = (band_hi - band_lo - total) / static_cast<double>(ms.size() + 1);
    if (!(gap > 0.0)) throw Error("make_mushroom: mushrooms overlap (caps do not fit into the band [1, 4])");
    double at = band_lo + gap;
    for (auto& m : ms) {
        m.offset = at + m.r;
        at += 2.0 * m.r + gap;
    }
    const Box& b = g.bbox();
    if (b.lo[0] > -3.0 * ms[0].r - g.spacing() || b.lo[1] > -3.0 * ms[0].r - g.spacing() || b.hi[0] < 12.0 + g.spacing() ||
        b.hi[1] < 12.0 + g.spacing())
        throw Error("make_mushroom: domain exceeds the bounding box");

    // Position along a mushroom on the x1 = 0 side: u = -x1 (outward), v = x2.
    auto part = [ms](double u, double v) -> std::pair<int, double> {
        // 0 outside, 1 stem, 2 cap; second = s value
        for (const auto& m : ms) {
            if (u > 0.0 && u < m.r && std::abs(v - m.offset) < m.phi) return {1, 1.0 + 0.5 * u / m.r};
            if (u >= m.r && u < 3.0 * m.r && std::abs(v - m.offset) < m.r) return {2, 1.5};
        }
        return {0, 1.0};
    };
    Membership inside = [part](const Point& x) {
        if (x[0] > 0.0 && x[0] < 12.0 && x[1] > 0.0 && x[1] < 12.0) return true;
        return part(-x[0], x[1]).first != 0 || part(-x[1], x[0]).first != 0;
    };
    auto s_of = [part](const Point& x) {
        if (x[0] > 0.0 && x[1] > 0.0) return 1.0;
        const auto a = part(-x[0], x[1]);
        if (a.first) return a.second;
        const auto c = part(-x[1], x[0]);
        return c.first ? c.second : 1.0;
    };
    std::vector<double> s(g.cell_count());
    for (CellIndex i = 0; i < s.size(); ++i) s[i] = s_of(g.center(i));
    DomainModel D = make_sampled_domain(g, "mushroom", inside, ExponentField(ScalarField(g, s, full_mask(g))));
    nlohmann::json list = nlohmann::json::array();
    for (const auto& m : ms)
        list.push_back({{"r", m.r}, {"phi", m.phi}, {"offset", m.offset}, {"cap_center", {-2.0 * m.r, m.offset}}});
    D.manifest = {{"square", {0.0, 12.0}}, {"mushrooms", list}, {"band", {band_lo, band_hi}}, {"gap", gap}};
    detail::finish_manifest(D);
    return D;
}

/// The whole grid box as a domain. dist is the distance to the nearest face;
/// no margin is required because the box boundary is the grid boundary.
inline DomainModel make_box_domain(const Grid& g) {
    const int dim = g.dim();
    const Box b = g.bbox();
    DomainModel D;
    D.kind = "box";
    D.grid = g;
    D.contains = [=](const Point& x) {
        for (int a = 0; a < dim; ++a)
            if (!(x[a] > b.lo[a] && x[a] < b.hi[a])) return false;
        return true;
    };
    D.distance_at = [=](const Point& x) {
        double d = std::numeric_limits<double>::infinity();
        for (int a = 0; a < dim; ++a) d = std::min({d, x[a] - b.lo[a], b.hi[a] - x[a]});
        return std::max(0.0, d);
    };
    D.mask = full_mask(g);
    D.dist = detail::analytic_distance(g, D.mask, D.distance_at);
    D.s_field = constant_exponent(g, 1.0, D.mask);
    detail::place_john_center(D);
    D.manifest = {{"lo", b.lo[0]}, {"hi", b.hi[0]}};
    detail::finish_manifest(D);
    return D;
}

/// Builds a domain from a spec such as `disk:radius=1` at the given
/// resolution. The bounding box is chosen from the shape, independent of
/// the resolution:
///
///   box       lo(0) hi(1) dim(2)       the full box [lo, hi]^n
///   disk      radius(1) dim(2)         box [-1.25 R, 1.25 R]^n
///   square    side(2) dim(2)           box [-0.625 L, 0.625 L]^n
///   cusp      s dim(2)                 box from cusp_box
///   mushroom  count(3)                 r_m = 2^-m, box from mushroom_box
inline DomainModel make_domain(const std::string& spec_text, int resolution) {
    const FieldSpec spec = parse_field_spec(spec_text);
    auto allow = [&](std::initializer_list<const char*> keys) { detail::check_keys(spec, keys); };
    const int dim = static_cast<int>(spec.get("dim", 2.0));
    if (spec.name == "box") {
        allow({"lo", "hi", "dim"});
        return make_box_domain(make_grid(dim, resolution, cube_box(dim, spec.get("lo", 0.0), spec.get("hi", 1.0))));
    }
    if (spec.name == "disk") {
        allow({"radius", "dim"});
        const double r = spec.get("radius", 1.0);
        if (!(r > 0.0)) throw Error("domain 'disk': radius must be positive");
        return make_disk(make_grid(dim, resolution, cube_box(dim, -1.25 * r, 1.25 * r)), r);
    }
    if (spec.name == "square") {
        allow({"side", "dim"});
        const double l = spec.get("side", 2.0);
        if (!(l > 0.0)) throw Error("domain 'square': side must be positive");
        return make_square(make_grid(dim, resolution, cube_box(dim, -0.625 * l, 0.625 * l)), l);
    }
    if (spec.name == "cusp") {
        allow({"s", "dim"});
        return make_cusp(make_grid(dim, resolution, cusp_box(dim)), spec.require("s"));
    }
    if (spec.name == "mushroom") {
        allow({"count"});
        const double count = spec.get("count", 3.0);
        if (count != std::floor(count) || count < 1 || count > 8)
            throw Error("domain 'mushroom': count must be an integer in [1, 8]");
        return make_mushroom(make_grid(2, resolution, mushroom_box()), mushroom_radii(static_cast<int>(count)));
    }
    throw Error("unknown domain '" + spec.name + "'");
}

/// Shortest-path-tree style parents of the widest-path (max-min clearance)
/// tree rooted at the John centre; ties on clearance prefer shorter paths.
struct JohnTree {
    std::vector<std::int64_t> parent;  // -1 for the root and unreachable cells
    std::vector<double> bottleneck;    // min dist along the tree path; 0 when unreachable
    CellIndex root = 0;
};

inline JohnTree make_john_tree(const DomainModel& D) {
    const Grid& g = D.grid;
    const int dim = g.dim();
    JohnTree t;
    t.root = D.john_cell;
    t.parent.assign(g.cell_count(), -1);
    t.bottleneck.assign(g.cell_count(), 0.0);
    std::vector<double> length(g.cell_count(), std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> done(g.cell_count(), 0);
    std::vector<CellCoords> nbrs;
    std::vector<double> step;
    const int zr = dim == 3 ? 1 : 0;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -zr; c <= zr; ++c) {
                if (a == 0 && b == 0 && c == 0) continue;
                nbrs.push_back({a, b, c});
                step.push_back(g.spacing() * std::sqrt(static_cast<double>(a * a + b * b + c * c)));
            }
    struct Item {
        double clear;
        double len;
        CellIndex cell;
        bool operator<(const Item& o) const {
            if (clear != o.clear) return clear < o.clear;
            if (len != o.len) return len > o.len;
            return cell > o.cell;
        }
    };
    std::priority_queue<Item> pq;
    t.bottleneck[t.root] = D.dist[t.root];
    length[t.root] = 0.0;
    pq.push({t.bottleneck[t.root], 0.0, t.root});
    while (!pq.empty()) {
        const Item it = pq.top();
        pq.pop();
        if (done[it.cell]) continue;
        done[it.cell] = 1;
        const CellCoords c = g.coords(it.cell);
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
            const CellCoords q{c[0] + nbrs[k][0], c[1] + nbrs[k][1], c[2] + nbrs[k][2]};
            if (!g.in_range(q)) continue;
            const CellIndex j = g.index(q);
            if (!D.mask[j] || done[j]) continue;
            const double clear = std::min(it.clear, D.dist[j]);
            const double len = it.len + step[k];
            if (clear > t.bottleneck[j] || (clear == t.bottleneck[j] && len < length[j])) {
                t.bottleneck[j] = clear;
                length[j] = len;
                t.parent[j] = static_cast<std::int64_t>(it.cell);
                pq.push({clear, len, j});
            }
        }
    }
    return t;
}

struct ChainBall {
    Point center{};
    CellIndex cell = 0;
    double radius = 0.0;
    /// True when the radius was reduced to keep 2B inside the mask.
    bool shrunk = false;
};

struct BallChain {
    std::vector<ChainBall> balls;
    Point terminal{};
    CellIndex terminal_cell = 0;
    /// Cells on the discrete John curve from x0 to the terminal point.
    std::size_t curve_cells = 0;
    double K = 0.0;
    double N = 0.0;
    double M = 0.0;
};

namespace detail {

/// Whether every cell whose centre lies within `radius` of p is masked.
inline bool ball_inside(const Grid& g, const Mask& mask, const Point& p, double radius) {
    const double h = g.spacing();
    CellCoords lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        lo[a] = static_cast<int>(std::floor((p[a] - radius - g.bbox().lo[a]) / h - 0.5));
        hi[a] = static_cast<int>(std::ceil((p[a] + radius - g.bbox().lo[a]) / h - 0.5));
    }
    const double r2 = radius * radius;
    for (int a0 = lo[0]; a0 <= hi[0]; ++a0)
        for (int a1 = lo[1]; a1 <= hi[1]; ++a1)
            for (int a2 = lo[2]; a2 <= hi[2]; ++a2) {
                const CellCoords q{a0, a1, a2};
                if (distance_sq(g.center(q), p, g.dim()) > r2) continue;
                if (!g.in_range(q) || !mask[g.index(q)]) return false;
            }
    return true;
}

/// Masked cells whose centre lies in the open ball.
inline std::vector<CellIndex> cells_in_ball(const Grid& g, const Mask& mask, const Point& p, double radius) {
    std::vector<CellIndex> out;
    const double h = g.spacing();
    CellCoords lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor((p[a] - radius - g.bbox().lo[a]) / h - 0.5)));
        hi[a] = std::min(g.resolution() - 1, static_cast<int>(std::ceil((p[a] + radius - g.bbox().lo[a]) / h - 0.5)));
    }
    const double r2 = radius * radius;
    for (int a0 = lo[0]; a0 <= hi[0]; ++a0)
        for (int a1 = lo[1]; a1 <= hi[1]; ++a1)
            for (int a2 = lo[2]; a2 <= hi[2]; ++a2) {
                const CellCoords q{a0, a1, a2};
                const CellIndex i = g.index(q);
                if (mask[i] && distance_sq(g.center(q), p, g.dim()) < r2) out.push_back(i);
            }
    return out;
}

}  // namespace detail

/// |B(a) ∩ B(b)| for balls with radii ra, rb whose centres are d apart.
inline double ball_intersection(double ra, double rb, double d, int n) {
    if (d >= ra + rb) return 0.0;
    const double rmin = std::min(ra, rb);
    if (d <= std::abs(ra - rb)) return unit_ball_volume(n) * std::pow(rmin, n);
    if (n == 2) {
        const double ca = std::clamp((d * d + ra * ra - rb * rb) / (2.0 * d * ra), -1.0, 1.0);
        const double cb = std::clamp((d * d + rb * rb - ra * ra) / (2.0 * d * rb), -1.0, 1.0);
        const double k = (-d + ra + rb) * (d + ra - rb) * (d - ra + rb) * (d + ra + rb);
        return ra * ra * std::acos(ca) + rb * rb * std::acos(cb) - 0.5 * std::sqrt(std::max(0.0, k));
    }
    const double s = ra + rb - d;
    return std::numbers::pi * s * s * (d * d + 2.0 * d * (ra + rb) - 3.0 * (ra - rb) * (ra - rb)) / (12.0 * d);
}

/// Observed chain constants: K = max dist(x, B_i)^{s(x)} / r_i, N = largest
/// number of balls containing one cell centre, M = largest ratio
/// |B_i ∪ B_{i+1}| / |B_i ∩ B_{i+1}| from exact ball volumes.
inline void measure_chain(const DomainModel& D, BallChain& ch) {
    const Grid& g = D.grid;
    const int dim = g.dim();
    ch.K = ch.N = ch.M = 0.0;
    if (ch.balls.empty()) return;
    const double sx = D.s_field[ch.terminal_cell];
    for (const auto& b : ch.balls) {
        const double d = std::max(0.0, distance(ch.terminal, b.center, dim) - b.radius);
        ch.K = std::max(ch.K, std::pow(d, sx) / b.radius);
    }
    std::vector<std::uint32_t> hits(g.cell_count(), 0);
    for (const auto& b : ch.balls)
        for (CellIndex i : detail::cells_in_ball(g, D.mask, b.center, b.radius))
            ch.N = std::max(ch.N, static_cast<double>(++hits[i]));
    const double omega = unit_ball_volume(dim);
    for (std::size_t k = 0; k + 1 < ch.balls.size(); ++k) {
        const auto& a = ch.balls[k];
        const auto& b = ch.balls[k + 1];
        const double both = ball_intersection(a.radius, b.radius, distance(a.center, b.center, dim), dim);
        const double uni = omega * (std::pow(a.radius, dim) + std::pow(b.radius, dim)) - both;
        ch.M = std::max(ch.M, both > 0.0 ? uni / both : std::numeric_limits<double>::infinity());
    }
}

/// Chain of balls from B0 = B(x0, dist(x0)/2) toward x along the widest-path
/// curve. The curve is the polyline through the tree path's cell centres,
/// sampled at least every h/8 and finer where the clearance is small, so
/// that chains can thread passages a single cell wide. Radii follow r = min(dist(y), |y - x|) / 2, shrunk until 2B is
/// inside the mask; each next centre is the farthest sample with
/// |x_i - x_{i+1}| <= min(r_i, r_{i+1}) / 2.
inline BallChain build_chain(const DomainModel& D, const JohnTree& tree, const Point& x) {
    const Grid& g = D.grid;
    const int dim = g.dim();
    const CellIndex xc = g.index(g.locate(x));
    if (!D.mask[xc]) throw Error("build_chain: terminal point is outside the domain");
    BallChain ch;
    ch.terminal = x;
    ch.terminal_cell = xc;
    if (distance(x, D.john_center, dim) < D.base_radius) return ch;
    if (xc != tree.root && tree.parent[xc] < 0) throw Error("build_chain: terminal point is not connected to the John centre");

    std::vector<CellIndex> path;
    for (std::int64_t c = static_cast<std::int64_t>(xc); c >= 0; c = tree.parent[static_cast<std::size_t>(c)]) {
        path.push_back(static_cast<CellIndex>(c));
        if (static_cast<CellIndex>(c) == tree.root) break;
    }
    std::reverse(path.begin(), path.end());
    ch.curve_cells = path.size();

    struct Sample {
        Point p;
        CellIndex cell;
        double dist;
    };
    std::vector<Sample> curve;
    const double floor_value = g.spacing() / 16.0;
    auto sample_at = [&](const Point& q) {
        const CellIndex qc = g.index(g.locate(q));
        // Same floor as the distance field, so steps past a clipped corner keep a positive radius.
        return Sample{q, qc, D.mask[qc] ? std::max(D.distance_at(q), floor_value) : 0.0};
    };
    std::vector<Sample> segment;
    for (std::size_t k = 0; k < path.size(); ++k) {
        const Point a = g.center(path[k]);
        curve.push_back({a, path[k], D.dist[path[k]]});
        if (k + 1 == path.size()) break;
        const Point b = g.center(path[k + 1]);
        const double len = distance(a, b, dim);
        // Steps are at most a quarter of the clearance, so refine until samples sit an eighth apart.
        for (int sub = 8;;) {
            segment.clear();
            double clear = std::min(D.dist[path[k]], D.dist[path[k + 1]]);
            for (int j = 1; j < sub; ++j) {
                Point q{};
                for (int d = 0; d < dim; ++d) q[d] = a[d] + (b[d] - a[d]) * j / sub;
                segment.push_back(sample_at(q));
                if (segment.back().dist > 0.0) clear = std::min(clear, segment.back().dist);
            }
            const int need = static_cast<int>(std::ceil(8.0 * len / clear));
            if (sub >= need || sub >= 8192) break;
            sub = std::min(8192, std::max(need, 2 * sub));
        }
        curve.insert(curve.end(), segment.begin(), segment.end());
    }
    // The terminal point itself closes the curve.
    curve.push_back({x, xc, std::max(D.distance_at(x), floor_value)});

    std::vector<double> radius(curve.size(), -1.0);
    std::vector<std::uint8_t> shrunk(curve.size(), 0);
    auto raw_radius = [&](std::size_t k) {
        if (k == 0) return 0.5 * curve[0].dist;
        return 0.5 * std::min(curve[k].dist, distance(curve[k].p, x, dim));
    };
    auto radius_of = [&](std::size_t k) {
        if (radius[k] >= 0.0) return radius[k];
        double r = raw_radius(k);
        while (r > 0.0 && !detail::ball_inside(g, D.mask, curve[k].p, 2.0 * r)) {
            r *= 0.875;
            shrunk[k] = 1;
            if (r < 1e-3 * g.spacing()) r = 0.0;
        }
        radius[k] = r;
        return r;
    };

    std::size_t cur = 0;
    const double r0 = radius_of(0);
    if (!(r0 > 0.0)) throw Error("build_chain: base ball is degenerate");
    ch.balls.push_back({curve[0].p, curve[0].cell, r0, shrunk[0] != 0});
    while (true) {
        const Point pc = curve[cur].p;
        const double rc = radius_of(cur);
        std::size_t next = cur;
        for (std::size_t k = curve.size(); k-- > cur + 1;) {
            const double d = distance(pc, curve[k].p, dim);
            if (d > 0.5 * rc) continue;
            if (d > 0.5 * raw_radius(k)) continue;
            const double rk = radius_of(k);
            if (rk > 0.0 && d <= 0.5 * std::min(rc, rk)) {
                next = k;
                break;
            }
        }
        if (next == cur) break;
        cur = next;
        ch.balls.push_back({curve[cur].p, curve[cur].cell, radius[cur], shrunk[cur] != 0});
    }
    measure_chain(D, ch);
    return ch;
}

inline BallChain build_chain(const DomainModel& D, const Point& x) { return build_chain(D, make_john_tree(D), x); }

struct ChainReport {
    bool contained = true;          // every 2B_i inside the mask, cell-wise
    std::size_t first_violation = 0;
    bool tail_monotone = true;      // radii non-increasing where |x_i - x| limits them
    bool reached = true;            // the last centre lies within one cell of x
    double terminal_ratio = 0.0;    // r_last / r_0
    double K = 0.0, N = 0.0, M = 0.0;
    double n_ceiling = 0.0;
    bool pass = true;
};

/// Besicovitch-derived overlap ceiling 24^n N_B(n) with N_B(2) = 19.
inline double overlap_ceiling(int n) {
    const double besicovitch = n == 2 ? 19.0 : 1.0e6;
    return std::pow(24.0, n) * besicovitch;
}

inline ChainReport chain_check(const BallChain& ch, const DomainModel& D) {
    const Grid& g = D.grid;
    ChainReport rep;
    rep.n_ceiling = overlap_ceiling(g.dim());
    rep.K = ch.K;
    rep.N = ch.N;
    rep.M = ch.M;
    if (ch.balls.empty()) return rep;
    for (std::size_t i = 0; i < ch.balls.size(); ++i)
        if (!detail::ball_inside(g, D.mask, ch.balls[i].center, 2.0 * ch.balls[i].radius) && rep.contained) {
            rep.contained = false;
            rep.first_violation = i;
        }
    std::size_t tail = ch.balls.size();
    while (tail > 1) {
        const auto& b = ch.balls[tail - 1];
        const double to_x = 0.5 * distance(b.center, ch.terminal, g.dim());
        if (to_x < 0.5 * D.dist[b.cell]) {
            --tail;
        } else {
            break;
        }
    }
    for (std::size_t i = tail + 1; i < ch.balls.size(); ++i)
        if (ch.balls[i].radius > ch.balls[i - 1].radius) rep.tail_monotone = false;
    rep.terminal_ratio = ch.balls.back().radius / ch.balls.front().radius;
    rep.reached = distance(ch.balls.back().center, ch.terminal, g.dim()) <= g.spacing();
    rep.pass = rep.contained && rep.tail_monotone && rep.reached && std::isfinite(rep.K) && std::isfinite(rep.N) &&
               std::isfinite(rep.M) && rep.N <= rep.n_ceiling;
    return rep;
}

/// |u(x) - u_B| against the potential with kernel |x - y|^{-s(x)(n-1)} of |grad u|.
inline PointwiseComparison pointwise_chain_bound(const ScalarField& u, const DomainModel& D, const EvalSet& eval) {
    if (!(u.grid() == D.grid) || u.mask() != D.mask) throw Error("pointwise_chain_bound: u must live on the domain mask");
    const double ub = mean_over_ball(u, D.john_center, D.base_radius);
    const ScalarField grad = gradient_magnitude(u);
    auto right = riesz_tilde(grad, D.s_field, eval);
    std::vector<double> left(eval.size());
    for (std::size_t k = 0; k < eval.size(); ++k) left[k] = std::abs(u[eval[k]] - ub);
    return compare_pointwise(eval.cells(), std::move(left), std::move(right));
}

}  // namespace vriesz
