#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "vriesz/potentials.hpp"

#include "oracles.hpp"

using namespace vriesz;

namespace {

Grid square(int res) { return make_grid(2, res, cube_box(2, -1.0, 1.0)); }

EvalSet at_origin(const Grid& g, const Mask& m) {
    const Point pts[1] = {Point{0.0, 0.0, 0.0}};
    return eval_set_from_points(g, m, pts);
}

using oracle::brute_potential;

}  // namespace

TEST(RieszPotential, ZeroField) {
    const Grid g = square(32);
    const Mask m = full_mask(g);
    const auto v = riesz_potential(sample_field(g, "constant:value=0"), constant_exponent(g, 1.0, m), all_cells(g, m));
    for (double x : v) EXPECT_EQ(x, 0.0);
}

TEST(RieszPotential, RadialOracle) {
    for (auto [res, tol] : {std::pair{256, 0.01}, std::pair{512, 0.005}}) {
        const Grid g = square(res);
        const Mask m = full_mask(g);
        const ScalarField f = sample_field(g, "ball:radius=0.5");
        const double v = riesz_potential(f, constant_exponent(g, 1.0, m), at_origin(g, m))[0];
        // sigma_1 r^alpha / alpha with r = 0.5 and alpha = 1.
        const double exact = 2.0 * std::numbers::pi * 0.5;
        EXPECT_NEAR(v, exact, tol * exact) << "resolution " << res;
    }
}

TEST(RieszPotential, MatchesBruteForce) {
    const Grid g = square(24);
    const Mask m = full_mask(g);
    const ScalarField f = sample_field(g, "noise:seed=3");
    const ExponentField alpha = sample_exponent(g, "linear:a0=0.3,a1=-0.2,c=0.9", m);
    const EvalSet eval = stratified_eval_set(g, m, 6);
    const auto v = riesz_potential(f, alpha, eval);
    for (std::size_t k = 0; k < eval.size(); ++k) {
        const double want = brute_potential(f, alpha, eval[k]);
        EXPECT_NEAR(v[k], want, 1e-12 * want);
    }
}

TEST(RieszPotential, LinearityOnNonnegativeInputs) {
    const Grid g = square(40);
    const Mask m = full_mask(g);
    const ExponentField alpha = sample_exponent(g, "linear:a0=0.4,c=1.0", m);
    const ScalarField f = sample_field(g, "gaussian:sigma=0.3");
    const ScalarField h = sample_field(g, "ball:radius=0.6,cx=0.2");
    const EvalSet eval = stratified_eval_set(g, m, 8);
    const auto If = riesz_potential(f, alpha, eval), Ih = riesz_potential(h, alpha, eval);
    const auto I2f = riesz_potential(f.scaled(2.0), alpha, eval);
    const ScalarField comb = map_field(f, [&](double v, CellIndex i) { return 0.7 * v + 3.0 * h[i]; });
    const auto Ic = riesz_potential(comb, alpha, eval);
    for (std::size_t k = 0; k < eval.size(); ++k) {
        EXPECT_EQ(I2f[k], 2.0 * If[k]);
        const double want = 0.7 * If[k] + 3.0 * Ih[k];
        EXPECT_NEAR(Ic[k], want, 1e-12 * want);
    }
}

TEST(RieszPotential, Monotone) {
    const Grid g = square(40);
    const Mask m = full_mask(g);
    const ExponentField alpha = constant_exponent(g, 0.8, m);
    const ScalarField big = sample_field(g, "noise:seed=9,offset=3");
    const ScalarField small = map_field(big, [](double v, CellIndex i) { return (i % 3 == 0 ? 0.2 : 0.9) * v; });
    const EvalSet eval = stratified_eval_set(g, m, 8);
    const auto a = riesz_potential(small, alpha, eval), b = riesz_potential(big, alpha, eval);
    const RadiusLadder ladder = default_ladder(g, m);
    const auto ma = fractional_maximal_at(small, alpha, ladder, eval);
    const auto mb = fractional_maximal_at(big, alpha, ladder, eval);
    for (std::size_t k = 0; k < eval.size(); ++k) {
        EXPECT_LE(a[k], b[k]);
        EXPECT_LE(ma[k], mb[k]);
    }
}

TEST(RieszPotential, Errors) {
    const Grid g = square(16);
    const Mask m = full_mask(g);
    const ScalarField f = sample_field(g, "constant:value=1");
    EXPECT_THROW(riesz_potential(f, constant_exponent(g, 0.0, m), all_cells(g, m)), Error);
    EXPECT_THROW(riesz_potential(f, constant_exponent(g, 2.0, m), all_cells(g, m)), Error);
    Mask half = m;
    half[0] = 0;
    EXPECT_THROW(EvalSet(g, half, {0}), Error);
    EXPECT_THROW(EvalSet(g, m, {3, 3}), Error);
}

TEST(RieszTilde, SubstitutionIsExact) {
    const Grid g = square(32);
    const Mask m = full_mask(g);
    const ExponentField s32 = constant_exponent(g, 1.5, m);
    const ExponentField a = alpha_from_s(s32);
    for (CellIndex i = 0; i < g.cell_count(); ++i) EXPECT_EQ(a[i], 0.5);
    const ExponentField s1 = constant_exponent(g, 1.0, m);
    EXPECT_EQ(alpha_from_s(s1)[0], 1.0);

    const ExponentField s = sample_exponent(g, "linear:a0=0.1,c=1.2", m);
    const ScalarField f = sample_field(g, "noise:seed=1");
    const EvalSet eval = stratified_eval_set(g, m, 8);
    const auto t = riesz_tilde(f, s, eval), r = riesz_potential(f, alpha_from_s(s), eval);
    ASSERT_EQ(t.size(), r.size());
    for (std::size_t k = 0; k < t.size(); ++k) EXPECT_EQ(t[k], r[k]);
    EXPECT_THROW(riesz_tilde(f, constant_exponent(g, 2.0, m), eval), Error);
    EXPECT_THROW(riesz_tilde(f, constant_exponent(g, 0.9, m), eval), Error);
}

TEST(FractionalMaximal, BallIndicatorAtCentre) {
    const Grid g = square(256);
    const Mask m = full_mask(g);
    const ScalarField f = sample_field(g, "ball:radius=0.25");
    const double v = fractional_maximal_at(f, constant_exponent(g, 0.5, m), default_ladder(g, m), at_origin(g, m))[0];
    EXPECT_NEAR(v, 0.5, 0.02 * 0.5);
}

TEST(FractionalMaximal, AveragesOfOne) {
    const Grid g = square(64);
    const Mask m = full_mask(g);
    const ScalarField one = sample_field(g, "constant:value=1");
    const ExponentField zero = constant_exponent(g, 0.0, m);
    const ScalarField M = fractional_maximal(one, zero, default_ladder(g, m));
    for (double v : M.values()) EXPECT_LE(v, 1.0 + 1e-12);
    // Radii that keep the ball inside the square.
    const RadiusLadder inner{{0.1, 0.3, 0.5, 0.9}};
    EXPECT_NEAR(fractional_maximal_at(one, zero, inner, at_origin(g, m))[0], 1.0, 1e-12);
    const ScalarField z = fractional_maximal(sample_field(g, "constant:value=0"), zero, inner);
    for (double v : z.values()) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(fractional_maximal(one, zero, RadiusLadder{}), Error);
}

TEST(FractionalMaximal, OrderDomination) {
    const Grid g = make_grid(2, 48, cube_box(2, -3.0, 3.0));
    const Mask m = full_mask(g);
    const ScalarField f = sample_field(g, "noise:seed=4");
    const ExponentField lo = constant_exponent(g, 0.3, m), hi = constant_exponent(g, 0.9, m);
    const RadiusLadder large{{1.0, 1.5, 2.5, 4.0}}, small{{0.2, 0.4, 0.7, 1.0}};
    const ScalarField a = fractional_maximal(f, lo, large), b = fractional_maximal(f, hi, large);
    const ScalarField c = fractional_maximal(f, lo, small), d = fractional_maximal(f, hi, small);
    for (CellIndex i = 0; i < g.cell_count(); ++i) {
        EXPECT_LE(a[i], b[i] * (1 + 1e-14));
        EXPECT_GE(c[i] * (1 + 1e-14), d[i]);
    }
}

TEST(TailIntegral, Properties) {
    const Grid g = square(48);
    const Mask m = full_mask(g);
    const ScalarField f = sample_field(g, "noise:seed=2");
    const ExponentField alpha = sample_exponent(g, "linear:a0=0.2,c=1.1", m);
    const CellIndex x = g.index(CellCoords{10, 30, 0});
    EXPECT_EQ(tail_integral(f, x, 3.0, alpha), 0.0);
    EXPECT_EQ(tail_integral(sample_field(g, "constant:value=0"), x, 0.1, alpha), 0.0);

    std::vector<double> radii;
    for (double r = 1e-4; r < 3.0; r *= 1.2) radii.push_back(r);
    const auto prof = tail_profile(f, x, radii, alpha);
    for (std::size_t k = 1; k < prof.size(); ++k) EXPECT_LE(prof[k], prof[k - 1]);
    for (std::size_t k = 0; k < radii.size(); ++k) EXPECT_EQ(prof[k], tail_integral(f, x, radii[k], alpha));

    const double pot = riesz_potential(f, alpha, EvalSet(g, m, {x}))[0];
    const double self = self_cell_term(g, f[x], alpha[x]);
    EXPECT_NEAR(tail_integral(f, x, 1e-6, alpha), pot - self, 1e-12 * pot);
    EXPECT_NEAR(brute_potential(f, alpha, x) - self, pot - self, 1e-11 * pot);
    EXPECT_THROW(tail_integral(f, x, 0.0, alpha), Error);
}

TEST(HedbergCheck, ZeroFieldIsVacuous) {
    const Grid g = square(32);
    const Mask m = full_mask(g);
    const ExponentField one = constant_exponent(g, 1.0, m), half = constant_exponent(g, 0.5, m);
    const ScalarField zero = sample_field(g, "constant:value=0");
    const auto h = hedberg_check(zero, one, one, half, all_cells(g, m));
    EXPECT_EQ(h.calibrated_c, 0.0);
    EXPECT_FALSE(h.argmax.has_value());
    EXPECT_TRUE(h.unbounded.empty());
    const auto s = samko_check(zero, one, one, all_cells(g, m));
    EXPECT_EQ(s.calibrated_c, 0.0);
    EXPECT_TRUE(s.unbounded.empty());
}

TEST(HedbergCheck, RightSideExponents) {
    const Grid g = square(8);
    const Mask m = full_mask(g);
    const ExponentField one = constant_exponent(g, 1.0, m), zero = constant_exponent(g, 0.0, m);
    const ExponentField p = constant_exponent(g, 1.7, m);
    const CellIndex cells[2] = {0, 5};
    const double maxv[2] = {0.3, 7.0};
    // n = 2, p = 1, alpha = 1: delta = 1, and eps = delta gives power 1/2.
    const auto h = hedberg_right_side(one, one, one, cells, maxv);
    const auto s = samko_right_side(one, one, cells, maxv);
    const auto s0 = samko_right_side(zero, p, cells, maxv);
    for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(h[k], std::sqrt(maxv[k]), 1e-15);
        EXPECT_NEAR(s[k], std::sqrt(maxv[k]), 1e-15);
        EXPECT_NEAR(s0[k], maxv[k], 1e-15);
    }
}

TEST(HedbergCheck, Hypotheses) {
    const Grid g = square(16);
    const Mask m = full_mask(g);
    const ExponentField one = constant_exponent(g, 1.0, m);
    const ScalarField f = sample_field(g, "ball:radius=0.3");
    EXPECT_THROW(hedberg_check(f, one, one, constant_exponent(g, 1.5, m), all_cells(g, m)), Error);
    EXPECT_THROW(hedberg_check(f, one, constant_exponent(g, 2.0, m), one, all_cells(g, m)), Error);
    EXPECT_THROW(samko_check(f.scaled(100.0), one, one, all_cells(g, m)), Error);
}

TEST(HedbergCheck, CalibratedConstantStableUnderRefinement) {
    double hed[2], sam[2];
    for (int k = 0; k < 2; ++k) {
        const Grid g = square(k == 0 ? 64 : 128);
        const Mask m = full_mask(g);
        const ExponentField alpha = constant_exponent(g, 1.0, m), p = alpha;
        const ExponentField eps = constant_exponent(g, 0.5, m);
        // ||1_B||_1 = pi / 4 < 1.
        const ScalarField f = sample_field(g, "ball:radius=0.5");
        const EvalSet eval = stratified_eval_set(g, m, 16);
        hed[k] = hedberg_check(f, alpha, p, eps, eval).calibrated_c;
        sam[k] = samko_check(f, alpha, p, eval).calibrated_c;
        EXPECT_TRUE(std::isfinite(hed[k]) && hed[k] > 0.0);
    }
    EXPECT_LE(std::abs(hed[1] / hed[0] - 1.0), 0.25);
    EXPECT_LE(std::abs(sam[1] / sam[0] - 1.0), 0.25);
}

TEST(ExtendNearest, MatchesBruteForce) {
    const Grid g = square(30);
    const Mask m = full_mask(g);
    const EvalSet eval = stratified_eval_set(g, m, 7);
    std::vector<double> vals(eval.size());
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = static_cast<double>(k);
    const ScalarField ext = extend_nearest(g, m, eval, vals);
    for (CellIndex i = 0; i < g.cell_count(); ++i) {
        double best = 1e300;
        std::size_t pick = 0;
        for (std::size_t k = 0; k < eval.size(); ++k) {
            const double d = distance_sq(g.center(i), g.center(eval[k]), 2);
            if (d < best) best = d, pick = k;
        }
        EXPECT_EQ(ext[i], vals[pick]) << "cell " << i;
    }
    EXPECT_THROW(extend_nearest(g, m, eval, std::vector<double>(1)), Error);
}
