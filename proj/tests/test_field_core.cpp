#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "vriesz/field_io.hpp"
#include "vriesz/fields.hpp"
#include "vriesz/grid.hpp"

using namespace vriesz;

namespace {

Grid unit_grid(int res) { return make_grid(2, res, cube_box(2, 0.0, 1.0)); }

// Exhaustive pair scan, written independently of log_holder_constant.
double brute_log_holder(const ScalarField& g) {
    const auto idx = masked_indices(g.mask());
    double best = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            const Point pa = g.grid().center(idx[a]), pb = g.grid().center(idx[b]);
            const double r = std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
            best = std::max(best, std::abs(g[idx[a]] - g[idx[b]]) * std::log(std::numbers::e + 1.0 / r));
        }
    return best;
}

}  // namespace

TEST(Grid, SpacingFollowsBoxAndResolution) {
    EXPECT_DOUBLE_EQ(unit_grid(64).spacing(), 1.0 / 64);
    EXPECT_DOUBLE_EQ(make_grid(2, 4, cube_box(2, 0.0, 12.0)).spacing(), 3.0);
    const Grid g3 = make_grid(3, 32, cube_box(3, 0.0, 2.0));
    EXPECT_DOUBLE_EQ(g3.spacing(), 1.0 / 16);
    EXPECT_EQ(g3.cell_count(), 32u * 32u * 32u);
}

TEST(Grid, RejectsBadInputs) {
    EXPECT_THROW(make_grid(4, 16, cube_box(3, 0.0, 1.0)), Error);
    EXPECT_THROW(make_grid(1, 16, cube_box(2, 0.0, 1.0)), Error);
    EXPECT_THROW(make_grid(2, 16, cube_box(2, 1.0, 1.0)), Error);
    EXPECT_THROW(make_grid(2, 2, cube_box(2, 0.0, 1.0)), Error);
}

TEST(Grid, CellCentresAndRowMajorIndexing) {
    const Grid g = unit_grid(4);
    const Point c = g.center(CellCoords{1, 2, 0});
    EXPECT_DOUBLE_EQ(c[0], 0.375);
    EXPECT_DOUBLE_EQ(c[1], 0.625);
    // Last axis varies fastest.
    EXPECT_EQ(g.index(CellCoords{1, 2, 0}), 6u);
    for (CellIndex i = 0; i < g.cell_count(); ++i) EXPECT_EQ(g.index(g.coords(i)), i);
    EXPECT_EQ(g.index(g.locate(c)), 6u);
}

TEST(SampleField, ConstantZero) {
    const ScalarField f = sample_field(unit_grid(8), "constant:value=0");
    for (double v : f.values()) EXPECT_EQ(v, 0.0);
}

TEST(SampleField, BallIndicatorAreaMatchesDisk) {
    const Grid g = make_grid(2, 256, cube_box(2, -1.0, 1.0));
    const ScalarField f = sample_field(g, "ball:radius=0.5");
    std::size_t inside = 0;
    for (double v : f.values()) inside += v == 1.0;
    const double area = inside * g.cell_volume();
    EXPECT_NEAR(area, std::numbers::pi * 0.25, 0.02 * std::numbers::pi * 0.25);
}

TEST(SampleField, RadialPowerSingularityIsSnappedToACorner) {
    const Grid g = unit_grid(16);
    // Requested centre is a cell centre; it is moved to the nearest corner.
    const ScalarField f = sample_field(g, "radial_power:cx=0.53125,cy=0.53125,gamma=-0.5");
    for (double v : f.values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(SampleField, NamedFunctionsAndErrors) {
    const Grid g = unit_grid(8);
    const ScalarField lin = sample_field(g, "linear:a0=2,c=1");
    EXPECT_DOUBLE_EQ(lin[g.index(CellCoords{3, 5, 0})], 1.0 + 2.0 * g.center(CellCoords{3, 5, 0})[0]);
    const ScalarField gs = sample_field(g, "gaussian:cx=0.5,cy=0.5,sigma=0.1,amp=2");
    EXPECT_NEAR(gs[g.index(CellCoords{4, 4, 0})], 2.0 * std::exp(-2 * 0.0625 * 0.0625 / 0.02), 1e-15);
    const ScalarField n1 = sample_field(g, "noise:seed=3");
    const ScalarField n2 = sample_field(g, "noise:seed=3");
    EXPECT_TRUE(std::equal(n1.values().begin(), n1.values().end(), n2.values().begin()));
    EXPECT_THROW(sample_field(g, "nonsense"), Error);
    EXPECT_THROW(sample_field(g, "gaussian:sigma=-1"), Error);
    EXPECT_THROW(sample_field(g, "gaussian:sigma=0.1,bogus=1"), Error);
}

TEST(SampleField, MaskControlsMembershipNotValues) {
    const Grid g = unit_grid(8);
    Mask m(g.cell_count(), 0);
    m[5] = 1;
    const ScalarField f = sample_field(g, "constant:value=2", m);
    EXPECT_EQ(f.masked_count(), 1u);
    EXPECT_DOUBLE_EQ(integrate(f), 2.0 * g.cell_volume());
}

TEST(LogHolder, ConstantFieldIsZero) {
    EXPECT_EQ(log_holder_constant(sample_field(unit_grid(16), "constant:value=3")).value, 0.0);
}

TEST(LogHolder, StepFieldMatchesNearestPair) {
    const ScalarField f = sample_field(unit_grid(64), "step:at=0.5,left=1,right=1.5");
    const auto est = log_holder_constant(f);
    EXPECT_TRUE(est.exact);
    EXPECT_NEAR(est.value, 0.5 * std::log(std::numbers::e + 64.0), 1e-12);
    EXPECT_NEAR(est.value, 2.10, 0.01);
}

TEST(LogHolder, LogarithmicProfileAgreesWithPairScan) {
    // Pole on the centre of cell (0, 0); the pairs through it approach the
    // continuum constant 1.
    const ScalarField f = sample_field(unit_grid(64), "log_holder:a=1,b=1,cx=0.0078125,cy=0.0078125");
    const auto est = log_holder_constant(f);
    EXPECT_TRUE(est.exact);
    EXPECT_GE(est.value, 0.9);
    EXPECT_LE(est.value, 1.1);
    EXPECT_NEAR(est.value, brute_log_holder(f), 1e-12);
}

TEST(LogHolder, ScaleCovariantAndSampledAboveCutoff) {
    const ScalarField f = sample_field(unit_grid(16), "noise:seed=9");
    EXPECT_DOUBLE_EQ(log_holder_constant(f.scaled(2.0)).value, 2.0 * log_holder_constant(f).value);
    const ScalarField big = sample_field(unit_grid(128), "noise:seed=9");
    const auto est = log_holder_constant(big);
    EXPECT_FALSE(est.exact);
    EXPECT_GT(est.value, 0.0);
}

TEST(Gradient, ConstantLinearAndQuadratic) {
    const Grid g = unit_grid(32);
    const ScalarField flat = gradient_magnitude(sample_field(g, "constant:value=4"));
    for (double v : flat.values()) EXPECT_EQ(v, 0.0);
    const ScalarField lin = gradient_magnitude(sample_field(g, "linear:a0=1"));
    for (int i = 1; i < 31; ++i)
        for (int j = 1; j < 31; ++j) EXPECT_NEAR(lin[g.index(CellCoords{i, j, 0})], 1.0, 1e-12);
    const ScalarField quad = gradient_magnitude(sample_field(g, "monomial:axis=0,power=2"));
    // The centre line x1 = 0.5 is a cell face at even resolution, so probe an
    // odd grid where a cell centre sits on it.
    const Grid odd = make_grid(2, 33, cube_box(2, 0.0, 1.0));
    const ScalarField q2 = gradient_magnitude(sample_field(odd, "monomial:axis=0,power=2"));
    EXPECT_NEAR(q2[odd.index(CellCoords{16, 10, 0})], 1.0, 1e-12);
    EXPECT_GT(quad[g.index(CellCoords{20, 5, 0})], 1.0);
}

TEST(Gradient, AffineFieldIsExactOnInteriorCells) {
    const Grid g = unit_grid(24);
    const ScalarField gm = gradient_magnitude(sample_field(g, "linear:a0=3,a1=-4,c=2"));
    for (int i = 1; i < 23; ++i)
        for (int j = 1; j < 23; ++j) EXPECT_NEAR(gm[g.index(CellCoords{i, j, 0})], 5.0, 1e-12);
}

TEST(Gradient, IsolatedCellIsAnError) {
    const Grid g = unit_grid(8);
    Mask m(g.cell_count(), 0);
    m[g.index(CellCoords{3, 3, 0})] = 1;
    EXPECT_THROW(gradient_magnitude(sample_field(g, "constant:value=1", m)), Error);
}

TEST(MeanOverBall, ConstantSymmetricAndSingleCell) {
    const Grid g = unit_grid(64);
    EXPECT_DOUBLE_EQ(mean_over_ball(sample_field(g, "constant:value=2.5"), {0.5, 0.5, 0}, 0.3), 2.5);
    const ScalarField x = sample_field(g, "linear:a0=1");
    EXPECT_NEAR(mean_over_ball(x, {0.4, 0.6, 0}, 0.2), 0.4, g.spacing());
    const Point c = g.center(CellCoords{10, 20, 0});
    EXPECT_DOUBLE_EQ(mean_over_ball(x, c, 0.4 * g.spacing()), x[g.index(CellCoords{10, 20, 0})]);
    Mask none(g.cell_count(), 0);
    none[0] = 1;
    EXPECT_THROW(mean_over_ball(sample_field(g, "constant:value=1", none), {0.9, 0.9, 0}, 0.01), Error);
}

TEST(Quadrature, LinearityAndRefinement) {
    const Grid g = unit_grid(64);
    const ScalarField f = sample_field(g, "noise:seed=1");
    const ScalarField h = sample_field(g, "gaussian:cx=0.3,cy=0.7,sigma=0.2");
    std::vector<double> comb(g.cell_count());
    for (CellIndex i = 0; i < comb.size(); ++i) comb[i] = 2.0 * f[i] - 3.0 * h[i];
    const double lhs = integrate(f.with_values(comb));
    const double rhs = 2.0 * integrate(f) - 3.0 * integrate(h);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));

    // Lipschitz integrand: the change under refinement is O(h).
    auto abs_integral = [](int res) {
        const ScalarField u = sample_field(unit_grid(res), "linear:a0=1,a1=-1");
        return integrate(map_field(u, [](double v, CellIndex) { return std::abs(v); }));
    };
    EXPECT_LE(std::abs(abs_integral(64) - abs_integral(128)), 1.0 / 64);
}

TEST(FieldIo, RoundTripCsvAndBinary) {
    const Grid g = make_grid(2, 16, cube_box(2, -1.0, 1.0));
    Mask m(g.cell_count(), 1);
    m[7] = 0;
    const ScalarField f = sample_field(g, "noise:seed=4", m);
    const auto dir = std::filesystem::temp_directory_path() / "vriesz_io_test";
    for (Encoding enc : {Encoding::csv, Encoding::binary}) {
        const auto header = write_field(f, dir / encoding_name(enc), "test", enc);
        const LoadedField back = read_field(header);
        EXPECT_EQ(back.field_kind, "test");
        EXPECT_TRUE(back.field.grid() == g);
        EXPECT_EQ(back.field.mask(), m);
        for (CellIndex i = 0; i < g.cell_count(); ++i) EXPECT_EQ(back.field[i], f[i]);
    }
    std::filesystem::remove_all(dir);
}

TEST(ExponentField, BoundsAreMaskedMinMax) {
    const Grid g = unit_grid(8);
    Mask m(g.cell_count(), 0);
    for (CellIndex i = 0; i < 32; ++i) m[i] = 1;
    const ExponentField e = sample_exponent(g, "linear:a0=1,c=1", m);
    EXPECT_DOUBLE_EQ(e.lo(), 1.0 + g.center(CellIndex{0})[0]);
    EXPECT_DOUBLE_EQ(e.hi(), 1.0 + g.center(CellIndex{31})[0]);
    EXPECT_THROW(ExponentField(sample_field(g, "constant:value=1", Mask(g.cell_count(), 0))), Error);
}
