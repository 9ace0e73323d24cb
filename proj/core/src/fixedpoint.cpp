#include "cfl/fixedpoint.hpp"

#include <atomic>
#include <cmath>

namespace cfl {

namespace {

// The wrap counter is shared across threads (per-device work may run on a
// worker pool); the pad-scope depth is per thread because scopes are lexical.
std::atomic<std::uint64_t> g_wraps{0};
thread_local int t_pad_depth = 0;

// Reduce a double-width value into the signed k-bit ring. Cost of the
// branchless masked form: value mod 2^k, then shift into [-2^(k-1), 2^(k-1)).
inline std::int64_t wrap_k(__int128 v, int k) {
    const __int128 half = static_cast<__int128>(1) << (k - 1);
    if ((v < -half || v >= half) && t_pad_depth == 0)
        g_wraps.fetch_add(1, std::memory_order_relaxed);
    const std::uint64_t mask = (std::uint64_t(1) << k) - 1; // k <= 63
    std::uint64_t low = static_cast<std::uint64_t>(v) & mask;
    if (low >= (std::uint64_t(1) << (k - 1)))
        return static_cast<std::int64_t>(low) - static_cast<std::int64_t>(mask) - 1;
    return static_cast<std::int64_t>(low);
}

inline void check_spec(const FixedSpec& a, const FixedSpec& b) {
    if (!(a == b))
        throw SpecMismatchError("fixed-point layouts differ: (" + std::to_string(a.k) + "," +
                                std::to_string(a.f) + ") vs (" + std::to_string(b.k) + "," +
                                std::to_string(b.f) + ")");
}

inline std::int64_t mul_raw(std::int64_t a, std::int64_t b, const FixedSpec& s) {
    __int128 prod = static_cast<__int128>(a) * b;
    // Arithmetic shift floors toward minus infinity for negatives too.
    return wrap_k(prod >> s.f, s.k);
}

inline std::int64_t add_raw(std::int64_t a, std::int64_t b, const FixedSpec& s) {
    return wrap_k(static_cast<__int128>(a) + b, s.k);
}

} // namespace

void WrapCount::reset() { g_wraps.store(0, std::memory_order_relaxed); }
std::uint64_t WrapCount::value() { return g_wraps.load(std::memory_order_relaxed); }

PadScope::PadScope() { ++t_pad_depth; }
PadScope::~PadScope() { --t_pad_depth; }

FxScalar fx_encode(double x, FixedSpec spec) {
    spec.validate();
    double scaled = x * std::exp2(spec.f);
    double rounded = std::round(scaled); // round half away from zero
    if (!(rounded >= static_cast<double>(spec.raw_min()) &&
          rounded <= static_cast<double>(spec.raw_max())))
        throw OverflowError("value " + std::to_string(x) + " does not fit Q(" +
                            std::to_string(spec.k) + "," + std::to_string(spec.f) + ")");
    return FxScalar{static_cast<std::int64_t>(rounded), spec};
}

double fx_decode(const FxScalar& a) {
    return static_cast<double>(a.raw) * std::exp2(-a.spec.f);
}

FxScalar fx_add(const FxScalar& a, const FxScalar& b) {
    check_spec(a.spec, b.spec);
    return FxScalar{add_raw(a.raw, b.raw, a.spec), a.spec};
}

FxScalar fx_sub(const FxScalar& a, const FxScalar& b) {
    check_spec(a.spec, b.spec);
    return FxScalar{add_raw(a.raw, wrap_k(-static_cast<__int128>(b.raw), a.spec.k), a.spec), a.spec};
}

FxScalar fx_mul(const FxScalar& a, const FxScalar& b) {
    check_spec(a.spec, b.spec);
    return FxScalar{mul_raw(a.raw, b.raw, a.spec), a.spec};
}

FxScalar fx_uniform(Stream& rng, FixedSpec spec) {
    spec.validate();
    return FxScalar{rng.uniform_int(spec.raw_min(), spec.raw_max()), spec};
}

namespace {

inline void check_same_shape(const FxMatrix& a, const FxMatrix& b, const char* what) {
    if (!a.same_shape(b))
        throw DimensionError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    check_spec(a.spec(), b.spec());
}

} // namespace

FxMatrix fx_mat_add(const FxMatrix& a, const FxMatrix& b) {
    check_same_shape(a, b, "fx_mat_add");
    FxMatrix out(a.rows(), a.cols(), a.spec());
    for (std::size_t i = 0; i < a.raw().size(); ++i)
        out.raw()[i] = add_raw(a.raw()[i], b.raw()[i], a.spec());
    return out;
}

FxMatrix fx_mat_sub(const FxMatrix& a, const FxMatrix& b) {
    check_same_shape(a, b, "fx_mat_sub");
    FxMatrix out(a.rows(), a.cols(), a.spec());
    for (std::size_t i = 0; i < a.raw().size(); ++i) {
        std::int64_t neg = wrap_k(-static_cast<__int128>(b.raw()[i]), a.spec().k);
        out.raw()[i] = add_raw(a.raw()[i], neg, a.spec());
    }
    return out;
}

FxMatrix fx_scalar_matmul(const FxScalar& c, const FxMatrix& m) {
    check_spec(c.spec, m.spec());
    FxMatrix out(m.rows(), m.cols(), m.spec());
    for (std::size_t i = 0; i < m.raw().size(); ++i)
        out.raw()[i] = mul_raw(c.raw, m.raw()[i], m.spec());
    return out;
}

FxMatrix fx_matmul(const FxMatrix& a, const FxMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("fx_matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                             std::to_string(b.rows()));
    check_spec(a.spec(), b.spec());
    const FixedSpec s = a.spec();
    FxMatrix out(a.rows(), b.cols(), s);
    const int n = a.rows(), m = a.cols(), p = b.cols();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            std::int64_t acc = 0;
            for (int t = 0; t < m; ++t)
                acc = add_raw(acc, mul_raw(a.at(i, t), b.at(t, j), s), s);
            out.at(i, j) = acc;
        }
    }
    return out;
}

FxMatrix fx_uniform_matrix(Stream& rng, int rows, int cols, FixedSpec spec) {
    spec.validate();
    FxMatrix out(rows, cols, spec);
    for (auto& v : out.raw()) v = rng.uniform_int(spec.raw_min(), spec.raw_max());
    return out;
}

FxMatrix encode_matrix(const Eigen::MatrixXd& m, FixedSpec spec) {
    FxMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()), spec);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            out.at(i, j) = fx_encode(m(i, j), spec).raw;
    return out;
}

Eigen::MatrixXd decode_matrix(const FxMatrix& m) {
    Eigen::MatrixXd out(m.rows(), m.cols());
    const double scale = std::exp2(-m.spec().f);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            out(i, j) = static_cast<double>(m.at(i, j)) * scale;
    return out;
}

} // namespace cfl
