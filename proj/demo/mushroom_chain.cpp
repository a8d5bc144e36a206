// Ball chain from the John centre of a three-cap mushroom domain into the
// smallest cap, printed as CSV of centres and radii.

#include <cstdio>

#include "vriesz/vriesz.hpp"

using namespace vriesz;

int main() {
    const DomainModel D = make_domain("mushroom:count=3", 512);
    const auto& cap = D.manifest.at("mushrooms")[2];
    const double r = cap.at("r"), offset = cap.at("offset");
    const BallChain ch = build_chain(D, Point{-2.0 * r, offset, 0.0});
    const ChainReport rep = chain_check(ch, D);
    std::printf("x,y,radius\n");
    for (const auto& b : ch.balls) std::printf("%.8g,%.8g,%.8g\n", b.center[0], b.center[1], b.radius);
    std::fprintf(stderr, "%zu balls, K = %.4g, N = %g, M = %.4g, %s\n", ch.balls.size(), rep.K, rep.N, rep.M,
                 rep.pass ? "certified" : "not certified");
    return rep.pass ? 0 : 1;
}
