#include "cfl/privacy.hpp"

#include "cfl/errors.hpp"

namespace cfl {

DeviceKeys gen_keys(Stream& rng, int d, int c, FixedSpec spec) {
    spec.validate();
    if (d < 1 || c < 1) throw DimensionError("gen_keys: d and c must be positive");
    DeviceKeys keys;
    keys.delta = fx_uniform_matrix(rng, d, c, spec);
    // Sample the upper triangle (with diagonal) and mirror, so the free
    // entries are independent and the matrix is symmetric bit-exactly.
    keys.xi = FxMatrix(d, d, spec);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            std::int64_t v = fx_uniform(rng, spec).raw;
            keys.xi.at(i, j) = v;
            keys.xi.at(j, i) = v;
        }
    return keys;
}

PaddedShare pad_share(const FxMatrix& gram, const FxMatrix& grad1, const DeviceKeys& keys) {
    PadScope pad;
    return PaddedShare{fx_mat_add(grad1, keys.delta), fx_mat_add(gram, keys.xi)};
}

namespace {

template <class GetA, class GetB>
EncodedShare accumulate_coded(const std::vector<FxScalar>& b_row, std::size_t count,
                              GetA get_a, GetB get_b) {
    if (b_row.size() != count)
        throw DimensionError("encode: " + std::to_string(b_row.size()) + " coefficients for " +
                             std::to_string(count) + " shares");
    if (count == 0) throw DimensionError("encode: empty support");
    PadScope pad;
    EncodedShare out;
    out.c_mat = fx_scalar_matmul(b_row[0], get_a(0));
    out.cbar_mat = fx_scalar_matmul(b_row[0], get_b(0));
    for (std::size_t j = 1; j < count; ++j) {
        out.c_mat = fx_mat_add(out.c_mat, fx_scalar_matmul(b_row[j], get_a(j)));
        out.cbar_mat = fx_mat_add(out.cbar_mat, fx_scalar_matmul(b_row[j], get_b(j)));
    }
    return out;
}

} // namespace

EncodedShare encode_shares(const std::vector<FxScalar>& b_row,
                           const std::vector<const PaddedShare*>& shares) {
    return accumulate_coded(
        b_row, shares.size(), [&](std::size_t j) -> const FxMatrix& { return shares[j]->psi; },
        [&](std::size_t j) -> const FxMatrix& { return shares[j]->phi; });
}

EncodedShare encode_keys(const std::vector<FxScalar>& b_row,
                         const std::vector<const DeviceKeys*>& keys) {
    return accumulate_coded(
        b_row, keys.size(), [&](std::size_t j) -> const FxMatrix& { return keys[j]->delta; },
        [&](std::size_t j) -> const FxMatrix& { return keys[j]->xi; });
}

FxMatrix coded_gradient(const EncodedShare& share, const FxMatrix& eps) {
    PadScope pad;
    return fx_mat_add(share.c_mat, fx_matmul(share.cbar_mat, eps));
}

GradientMsg strip_keys(const GradientMsg& gmsg, const EncodedShare& key_share, const FxMatrix& eps) {
    PadScope pad;
    FxMatrix key_total = fx_mat_add(key_share.c_mat, fx_matmul(key_share.cbar_mat, eps));
    return GradientMsg{fx_mat_sub(gmsg.values, key_total), gmsg.device, gmsg.epoch};
}

GradientMsg strip_keys(const GradientMsg& gmsg, const std::vector<FxScalar>& b_row,
                       const std::vector<const DeviceKeys*>& keys_on_support,
                       const FxMatrix& eps) {
    return strip_keys(gmsg, encode_keys(b_row, keys_on_support), eps);
}

} // namespace cfl
