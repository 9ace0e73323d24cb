#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cfl/errors.hpp"
#include "cfl/rng.hpp"

namespace cfl {

// Layout of a signed fixed-point number: k total bits, f fractional bits.
// A raw integer x in [-2^(k-1), 2^(k-1)-1] represents the value x * 2^(-f).
// Arithmetic wraps modulo 2^k (two's complement on k bits); that wraparound
// is what makes uniform additive keys a perfect one-time pad.
struct FixedSpec {
    int k = 48;
    int f = 24;

    bool operator==(const FixedSpec&) const = default;

    void validate() const {
        if (f < 1 || f >= k || k > 63)
            throw ConfigError("fixed_point: need 1 <= f < k <= 63, got k=" +
                              std::to_string(k) + " f=" + std::to_string(f));
    }
    std::int64_t raw_min() const { return -(std::int64_t(1) << (k - 1)); }
    std::int64_t raw_max() const { return (std::int64_t(1) << (k - 1)) - 1; }
    double ulp() const { return std::pow(2.0, -f); }
};

struct FxScalar {
    std::int64_t raw = 0;
    FixedSpec spec;
};

class FxMatrix {
public:
    FxMatrix() = default;
    FxMatrix(int rows, int cols, FixedSpec spec)
        : rows_(rows), cols_(cols), spec_(spec),
          raw_(static_cast<std::size_t>(rows) * cols, 0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const FixedSpec& spec() const { return spec_; }

    std::int64_t& at(int r, int c) { return raw_[static_cast<std::size_t>(r) * cols_ + c]; }
    std::int64_t at(int r, int c) const { return raw_[static_cast<std::size_t>(r) * cols_ + c]; }
    std::vector<std::int64_t>& raw() { return raw_; }
    const std::vector<std::int64_t>& raw() const { return raw_; }

    bool same_shape(const FxMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool operator==(const FxMatrix&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    FixedSpec spec_;
    std::vector<std::int64_t> raw_;
};

// Wraparound diagnostics. Arithmetic wrap is silent by design (pads rely on
// it), but wraps that happen while no PadScope is active are counted so the
// data path can assert it never overflows. Thread-local, zero overhead when
// unused.
struct WrapCount {
    static void reset();
    static std::uint64_t value();
};

// RAII guard marking a region whose wraps are intentional (padding, encoded
// shares, key stripping). Nestable.
class PadScope {
public:
    PadScope();
    ~PadScope();
    PadScope(const PadScope&) = delete;
    PadScope& operator=(const PadScope&) = delete;
};

// --- scalar operations ---

// Round-to-nearest, ties away from zero. Throws OverflowError when the
// rounded integer leaves the representable range: encoding is user-facing,
// so unlike arithmetic it never wraps.
FxScalar fx_encode(double x, FixedSpec spec);
double fx_decode(const FxScalar& a);

FxScalar fx_add(const FxScalar& a, const FxScalar& b);
FxScalar fx_sub(const FxScalar& a, const FxScalar& b);

// raw = floor(a.raw * b.raw * 2^(-f)) wrapped into k bits; floor is toward
// minus infinity, also for negative products. The 128-bit intermediate is
// exact for every k <= 63.
FxScalar fx_mul(const FxScalar& a, const FxScalar& b);

// Uniform over the full raw range; the key distribution of the one-time pad.
FxScalar fx_uniform(Stream& rng, FixedSpec spec);

// --- matrix operations (element-wise lifts and the modular matmul) ---

FxMatrix fx_mat_add(const FxMatrix& a, const FxMatrix& b);
FxMatrix fx_mat_sub(const FxMatrix& a, const FxMatrix& b);
FxMatrix fx_scalar_matmul(const FxScalar& c, const FxMatrix& m);

// Entry (i,j) = modular sum over t of fx_mul(A[i,t], B[t,j]). Each product
// is rescaled before accumulation so every intermediate stays inside the
// k-bit ring; modular addition being commutative makes the result
// independent of evaluation order.
FxMatrix fx_matmul(const FxMatrix& a, const FxMatrix& b);

FxMatrix fx_uniform_matrix(Stream& rng, int rows, int cols, FixedSpec spec);

// Dense real <-> fixed-point bridges.
FxMatrix encode_matrix(const Eigen::MatrixXd& m, FixedSpec spec);
Eigen::MatrixXd decode_matrix(const FxMatrix& m);

} // namespace cfl
