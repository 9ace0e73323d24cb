#include "cfl/rng.hpp"

#include <bit>
#include <cmath>

namespace cfl {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                          std::uint64_t a, std::uint64_t b) {
    std::uint64_t state = root ^ fnv1a64(tag);
    std::uint64_t s = splitmix64(state);
    state ^= a * 0x9e3779b97f4a7c15ULL + 0x165667b19e3779f9ULL;
    s ^= splitmix64(state);
    state ^= b * 0xc2b2ae3d27d4eb4fULL + 0x27d4eb2f165667c5ULL;
    s ^= splitmix64(state);
    return s;
}

std::int64_t Stream::uniform_int(std::int64_t lo, std::int64_t hi) {
    // Rejection over the smallest covering power-of-two mask; unbiased and
    // wastes at most half the draws.
    std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == ~0ULL) return static_cast<std::int64_t>(eng_());
    std::uint64_t range = span + 1;
    std::uint64_t mask = ~0ULL >> std::countl_zero(range == 1 ? 1 : range - 1);
    if (range == 1) return lo;
    for (;;) {
        std::uint64_t v = eng_() & mask;
        if (v < range) return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + v);
    }
}

double Stream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; u is bounded away from zero so the log stays finite.
    double u = 0.0;
    do {
        u = u01();
    } while (u <= 0.0);
    double v = u01();
    double r = std::sqrt(-2.0 * std::log(u));
    double angle = 2.0 * M_PI * v;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

std::int64_t Stream::geometric_trials(double p_fail) {
    if (p_fail <= 0.0) return 1;
    // Inverse CDF of the geometric law on {1, 2, ...} with failure
    // probability p: N = 1 + floor(log(1-u) / log(p)).
    double u = u01();
    double n = std::floor(std::log1p(-u) / std::log(p_fail));
    if (n < 0.0) n = 0.0; // u == 0 edge
    return 1 + static_cast<std::int64_t>(n);
}

} // namespace cfl
