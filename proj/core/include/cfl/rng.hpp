#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace cfl {

// Deterministic random stream. The engine (std::mt19937_64) is bit-exact by
// the standard; the distributions are written out by hand because the
// standard library leaves distribution algorithms implementation-defined and
// we require identical draws on every platform.
//
// Every simulated entity owns its own stream, derived from the run seed plus
// a channel tag and up to two entity indices. Streams never share state, so
// consuming one cannot shift another — this is what keeps latency sampling
// aligned across runs that differ only in code parameters.
class Stream {
public:
    Stream() : eng_(0) {}
    explicit Stream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw64() { return eng_(); }

    // Uniform on [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform signed integer on [lo, hi], both inclusive, via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    // Standard normal, Box-Muller with one cached variate.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Exponential with the given mean (mean = 1/rate).
    double exponential(double mean) { return -mean * std::log1p(-u01()); }

    // Number of trials to the first success when each trial fails with
    // probability p; support {1, 2, ...}. Closed-form inverse CDF.
    std::int64_t geometric_trials(double p_fail);

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derives the seed for a named sub-stream. Tags are short strings such as
// "keys" or "lat.up"; a and b identify entities (device index, peer index).
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                          std::uint64_t a = 0, std::uint64_t b = 0);

inline Stream substream(std::uint64_t root, std::string_view tag,
                        std::uint64_t a = 0, std::uint64_t b = 0) {
    return Stream(derive_seed(root, tag, a, b));
}

// FNV-1a over a byte string; also used for config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace cfl
