// Variable-dimensional Hausdorff content of a few sets in the unit square,
// comparing the dyadic optimum with the greedy ball cover.

#include <cstdio>
#include <string>

#include "vriesz/vriesz.hpp"

using namespace vriesz;

int main() {
    const Grid g = make_grid(2, 64, cube_box(2, 0.0, 1.0));
    const Mask full = full_mask(g);
    Mask diagonal(g.cell_count(), 0), corner(g.cell_count(), 0);
    for (CellIndex i = 0; i < full.size(); ++i) {
        const auto c = g.coords(i);
        diagonal[i] = c[0] == c[1];
        corner[i] = c[0] < 16 && c[1] < 16;
    }
    const struct {
        const char* name;
        const Mask& mask;
    } sets[] = {{"square", full}, {"diagonal", diagonal}, {"corner", corner}};
    std::printf("set,beta,dyadic,greedy\n");
    for (const std::string beta_spec : {"constant:value=1", "constant:value=2", "linear:a0=1,c=1"}) {
        const ExponentField beta = sample_exponent(g, beta_spec, full);
        for (const auto& s : sets)
            std::printf("%s,\"%s\",%.10g,%.10g\n", s.name, beta_spec.c_str(), dyadic_content(s.mask, beta).value,
                        greedy_content(s.mask, beta).value);
    }
}
