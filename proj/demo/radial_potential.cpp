// Riesz potential of a disk indicator along the x axis, printed as CSV.
// At the origin the exact value is 2 pi r^alpha / alpha.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "vriesz/vriesz.hpp"

using namespace vriesz;

int main() {
    const Grid g = make_grid(2, 256, cube_box(2, -1.0, 1.0));
    const Mask m = full_mask(g);
    const ScalarField f = sample_field(g, "ball:radius=0.5");
    std::printf("alpha,x,potential\n");
    for (double a : {0.5, 1.0, 1.5}) {
        const ExponentField alpha = constant_exponent(g, a, m);
        std::vector<Point> pts;
        for (int k = 0; k <= 16; ++k) pts.push_back(Point{k / 16.0 * 0.95, 0.0, 0.0});
        const auto v = riesz_potential(f, alpha, eval_set_from_points(g, m, pts));
        for (std::size_t k = 0; k < pts.size(); ++k) std::printf("%g,%g,%.10g\n", a, pts[k][0], v[k]);
        std::fprintf(stderr, "alpha %g: I f(0) = %.6f, exact %.6f\n", a, v[0],
                     2.0 * std::numbers::pi * std::pow(0.5, a) / a);
    }
}
