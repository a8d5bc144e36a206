#include <cmath>

#include <gtest/gtest.h>

#include "vriesz/fields.hpp"
#include "vriesz/vexp.hpp"

#include "oracles.hpp"

using namespace vriesz;

namespace {

Grid unit_grid(int res = 32) { return make_grid(2, res, cube_box(2, 0.0, 1.0)); }

ExponentField two_four(const Grid& g) { return sample_exponent(g, "step:at=0.5,left=2,right=4", full_mask(g)); }

using oracle::lambda_scan;

}  // namespace

TEST(Modular, Examples) {
    const Grid g = unit_grid();
    const ExponentField p2 = constant_exponent(g, 2.0, full_mask(g));
    EXPECT_EQ(modular(sample_field(g, "constant:value=0"), p2), 0.0);
    EXPECT_NEAR(modular(sample_field(g, "constant:value=1"), p2), 1.0, 1e-14);
    EXPECT_NEAR(modular(sample_field(g, "constant:value=1"), two_four(g)), 1.0, 1e-14);
    EXPECT_NEAR(modular(sample_field(g, "constant:value=2"), p2), 4.0, 1e-13);
    EXPECT_THROW(modular(sample_field(g, "constant:value=1"), constant_exponent(g, 0.5, full_mask(g))), Error);
}

TEST(Luxemburg, Examples) {
    const Grid g = unit_grid();
    const ExponentField p2 = constant_exponent(g, 2.0, full_mask(g));
    EXPECT_EQ(luxemburg_norm(sample_field(g, "constant:value=0"), p2).value, 0.0);
    EXPECT_NEAR(luxemburg_norm(sample_field(g, "constant:value=3"), p2).value, 3.0, 1e-12);
    EXPECT_NEAR(luxemburg_norm(sample_field(g, "constant:value=1"), two_four(g)).value, 1.0, 1e-12);
}

TEST(Luxemburg, HalfIndicatorWithTwoExponents) {
    const Grid g = unit_grid();
    const ScalarField f = sample_field(g, "step:at=0.5,left=1,right=0");
    const double v = luxemburg_norm(f, two_four(g)).value;
    EXPECT_NEAR(v, 1.0 / std::sqrt(2.0), 1e-9);
    EXPECT_NEAR(v, lambda_scan(f, two_four(g)), 1e-9);
}

TEST(Luxemburg, ConstantExponentMatchesModularRoot) {
    const Grid g = unit_grid(24);
    Rng rng(2024);
    for (int k = 0; k < 50; ++k) {
        const double p = rng.uniform(1.0, 6.0);
        const ScalarField f = sample_field(g, "noise:seed=" + std::to_string(k) + ",amp=" + std::to_string(rng.uniform(0.1, 5.0)));
        const ExponentField pe = constant_exponent(g, p, full_mask(g));
        const double expect = std::pow(modular(f, pe), 1.0 / p);
        EXPECT_NEAR(luxemburg_norm(f, pe).value, expect, 1e-10 * expect) << "p = " << p;
    }
}

TEST(Luxemburg, HomogeneityUnitBallAndMonotonicity) {
    const Grid g = unit_grid(24);
    const ExponentField p = sample_exponent(g, "linear:a0=1,a1=0.5,c=1.2", full_mask(g));
    const ScalarField f = sample_field(g, "noise:seed=11");
    const double base = luxemburg_norm(f, p).value;
    for (double c : {-3.0, -0.25, 0.01, 2.0, 1e3}) {
        const double v = luxemburg_norm(f.scaled(c), p).value;
        EXPECT_NEAR(v, std::abs(c) * base, 1e-9 * std::abs(c) * base);
    }
    EXPECT_NEAR(modular(f.scaled(1.0 / base), p), 1.0, 1e-8);
    const ScalarField smaller = map_field(f, [](double v, CellIndex) { return 0.7 * v; });
    EXPECT_LE(luxemburg_norm(smaller, p).value, base + 1e-12);
}

TEST(SharpExponent, Examples) {
    const Grid g = unit_grid(8);
    const Mask m = full_mask(g);
    const ExponentField p43 = constant_exponent(g, 4.0 / 3.0, m);
    const ExponentField one = constant_exponent(g, 1.0, m);
    const ExponentField zero = constant_exponent(g, 0.0, m);
    const ExponentField four = sharp_exponent(p43, one), two = sharp_exponent(one, one);
    for (double v : four.field().values()) EXPECT_NEAR(v, 4.0, 1e-12);
    for (double v : two.field().values()) EXPECT_NEAR(v, 2.0, 1e-15);
    const ExponentField p = sample_exponent(g, "linear:a0=1,c=1.5", m);
    const ExponentField id = sharp_exponent(p, zero);
    for (CellIndex i = 0; i < g.cell_count(); ++i) EXPECT_DOUBLE_EQ(id[i], p[i]);
    EXPECT_THROW(sharp_exponent(constant_exponent(g, 2.0, m), one), Error);
}

TEST(PoincareExponent, Examples) {
    const Grid g = unit_grid(8);
    const Mask m = full_mask(g);
    const ExponentField s32 = constant_exponent(g, 1.5, m), s1 = constant_exponent(g, 1.0, m);
    EXPECT_NEAR(poincare_target_exponent(s32, 1.0, 2).lo(), 4.0 / 3.0, 1e-15);
    EXPECT_NEAR(poincare_target_exponent(s1, 1.0, 2).hi(), 2.0, 1e-15);
    EXPECT_NEAR(poincare_target_exponent(s1, 1.2, 2).lo(), 3.0, 1e-12);
    EXPECT_THROW(poincare_target_exponent(constant_exponent(g, 2.0, m), 1.0, 2), Error);
    EXPECT_THROW(poincare_target_exponent(s1, 2.0, 2), Error);
}

TEST(Normalize, Examples) {
    const Grid g = unit_grid();
    const ExponentField p2 = constant_exponent(g, 2.0, full_mask(g));
    const ScalarField f = sample_field(g, "constant:value=3");
    const ScalarField one = normalize(f, p2, 1.0);
    for (double v : one.values()) EXPECT_NEAR(v, 1.0, 1e-12);
    const ScalarField noise = sample_field(g, "noise:seed=5");
    const double n = luxemburg_norm(noise, p2).value;
    const ScalarField same = normalize(noise, p2, n);
    for (CellIndex i = 0; i < g.cell_count(); ++i) EXPECT_NEAR(same[i], noise[i], 1e-12 * std::abs(noise[i]) + 1e-15);
    // |Omega| = 1 gives the target 1 / (2 (1 + 1)).
    const double target = 1.0 / (2.0 * (1.0 + 1.0));
    EXPECT_NEAR(luxemburg_norm(normalize(noise, p2, target), p2).value, 0.25, 1e-9 * 0.25);
    EXPECT_THROW(normalize(sample_field(g, "constant:value=0"), p2, 1.0), Error);
}
