#pragma once

#include <vector>

#include "cfl/fixedpoint.hpp"
#include "cfl/rng.hpp"

namespace cfl {

// Per-device one-time-pad keys: delta pads the first-epoch gradient, the
// symmetric xi pads the Gram matrix. Both are uniform over the raw range.
struct DeviceKeys {
    FxMatrix delta; // d x c
    FxMatrix xi;    // d x d, xi == xi^T bit-exactly
};

struct PaddedShare {
    FxMatrix psi; // grad1 + delta
    FxMatrix phi; // gram + xi (symmetric)
};

// A device's coded view of the padded shares on its support: c_mat combines
// the padded gradients, cbar_mat the padded Grams.
struct EncodedShare {
    FxMatrix c_mat;    // d x c
    FxMatrix cbar_mat; // d x d
};

struct GradientMsg {
    FxMatrix values; // d x c
    int device = 0;
    int epoch = 0;
};

DeviceKeys gen_keys(Stream& rng, int d, int c, FixedSpec spec);

// psi = grad1 + delta, phi = gram + xi; exact modular addition, so
// subtracting the key returns the plaintext bit-for-bit.
PaddedShare pad_share(const FxMatrix& gram, const FxMatrix& grad1, const DeviceKeys& keys);

// c_mat = sum_j b_j * psi_j, cbar_mat = sum_j b_j * phi_j, accumulated in
// the given order with per-product rescaling.
EncodedShare encode_shares(const std::vector<FxScalar>& b_row,
                           const std::vector<const PaddedShare*>& shares);

// The key contribution hidden inside an encoded share: the same pipeline as
// encode_shares run on the bare keys (zero data). Computing it this way —
// rather than scaling (delta_j + xi_j * eps) per source — replays the
// device's exact sequence of rescaled products and modular sums, so every
// floor and every wraparound on the device side meets a partner here whose
// operand differs only by the (small) data. Stripping therefore leaves just
// per-product floor discrepancies, never a wrap-sized residue. The two key
// aggregates do not depend on the update matrix, so callers may compute them
// once per responder and reuse them across epochs.
EncodedShare encode_keys(const std::vector<FxScalar>& b_row,
                         const std::vector<const DeviceKeys*>& keys);

// Device-side coded gradient for one epoch: share.c_mat + share.cbar_mat * eps.
FxMatrix coded_gradient(const EncodedShare& share, const FxMatrix& eps);

// Removes the key contribution from a received coded gradient:
// P = gmsg - (key_share.c_mat + key_share.cbar_mat * eps), evaluated with
// the identical fixed-point rules the device used. The result approximates
// sum_j b_j G_j up to accumulated floor error.
GradientMsg strip_keys(const GradientMsg& gmsg, const EncodedShare& key_share,
                       const FxMatrix& eps);

// Convenience overload building the key aggregates on the fly.
GradientMsg strip_keys(const GradientMsg& gmsg, const std::vector<FxScalar>& b_row,
                       const std::vector<const DeviceKeys*>& keys_on_support,
                       const FxMatrix& eps);

} // namespace cfl
