#pragma once
/**
 * @file core.hpp
 * @brief Shared primitives: error type, points, ball constants, deterministic
 *        summation and a portable seeded random source.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vriesz {

/// Every precondition or hypothesis violation in the library throws this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Physical point; coordinates beyond the grid dimension are zero.
using Point = std::array<double, 3>;

inline double distance_sq(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

inline double distance(const Point& a, const Point& b, int dim) {
    return std::sqrt(distance_sq(a, b, dim));
}

/// Lebesgue measure of the unit ball in R^n.
inline double unit_ball_volume(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi / 3.0;
        default: return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
    }
}

/// Surface measure of the unit sphere S^{n-1}, i.e. n * omega_n.
inline double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

/// Pairwise (tree) summation. Leaves of 64 terms are summed left to right,
/// so the result depends only on the input order.
inline double pairwise_sum(std::span<const double> v) {
    constexpr std::size_t leaf = 64;
    if (v.size() <= leaf) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// splitmix64-seeded xoshiro256** generator. Doubles are built from the raw
/// bits so sequences are identical on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t z = seed;
        for (auto& s : state_) {
            z += 0x9e3779b97f4a7c15ULL;
            std::uint64_t x = z;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            s = x ^ (x >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> state_{};
};

/// FNV-1a, used for report input digests.
inline std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// |fine - coarse| / |coarse|; zero when both vanish, infinite when only the
/// reference vanishes.
inline double relative_change(double coarse, double fine) {
    if (coarse == 0.0) return fine == 0.0 ? 0.0 : INFINITY;
    return std::abs(fine - coarse) / std::abs(coarse);
}

}  // namespace vriesz
