#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfl/rng.hpp"

namespace cfl {

// A device's compute/link characteristics. Setup noise follows the shifted
// exponential model: computing rho MACs takes rho/tau plus an exponential
// with mean setup_frac * rho/tau (equivalently, rate eta = tau/(setup_frac*rho)).
struct DeviceProfile {
    double tau = 25e6;       // MAC operations per second
    double setup_frac = 0.5; // E[setup] as a fraction of the deterministic time
    double p_fail = 0.1;     // per-transmission failure probability
    std::string cls;         // class label for reports
};

struct LinkConfig {
    double down_bps = 10e6;
    double up_bps = 5e6;
    double header_frac = 0.1;
};

struct DeviceSpan {
    double down = 0.0;
    double comp = 0.0;
    double up = 0.0;
    double total() const { return down + comp + up; }
};

struct EpochTiming {
    std::vector<DeviceSpan> spans;
    std::vector<int> responders; // devices the epoch waited for, sorted
    double server_s = 0.0;
    double epoch_s = 0.0;
};

// Per-entity random streams for latency sampling. Each device owns one
// stream per channel, persisted across epochs, so two simulations sharing a
// seed draw identical timings regardless of any other parameter — the
// common-random-number backbone of scheme comparisons.
struct LatencyStreams {
    std::vector<Stream> down, comp, up;     // training epochs
    std::vector<Stream> share_comp, share_up; // sharing phase
    std::vector<std::vector<Stream>> relay;   // sharing relays, [from][to]

    LatencyStreams(std::uint64_t seed, int D);
};

// shift + Exp(mean_setup); mean_setup <= 0 means no noise term.
double shifted_exp(double shift_s, double mean_setup_s, Stream& rng);

// rho/tau plus exponential setup with mean setup_frac*rho/tau.
double compute_time(double rho, const DeviceProfile& profile, Stream& rng);

// Same formula with the setup rate given explicitly (mean 1/eta).
double compute_time_eta(double rho, double tau, double eta, Stream& rng);

// N * bits/rate where N counts transmissions to first success,
// N ~ geometric over {1,2,...} with failure probability p. Always consumes
// one draw so streams stay aligned across message sizes.
double link_time(double bits, double rate_bps, double p_fail, Stream& rng);

// Bits on the wire for a matrix message, header included. The rounding is
// nudged so exact integer products (entries*bits*(1+header) integral) do not
// creep up from floating-point dust.
std::int64_t message_bits(double entries, double bits_per_entry, double header_frac);

// --- MAC accounting (documented formulas; also listed in the README) ---

// Coded device epoch: cbar (d x d) times eps (d x c), plus adding c_mat.
inline double rho_coded_epoch(double d, double c) { return d * d * c + d * c; }
// Conventional mini-batch epoch: forward X_b*theta and backward X_b^T(.).
inline double rho_conventional_epoch(double n_batch, double d, double c) {
    return 2.0 * n_batch * d * c;
}
// Padding: first-epoch gradient gram*theta1 - xty (d^2 c + dc), plus the two
// key additions (dc + d^2).
inline double rho_pad(double d, double c) { return d * d * c + d * d + 2.0 * d * c; }
// Encoding: scale-and-accumulate alpha shares for both C and Cbar.
inline double rho_encode(double alpha, double d, double c) { return alpha * (d * c + d * d); }
// Server, coded epoch: per responder one cbar-key times eps product plus the
// two d x c additions, then the decode combination and the model update.
inline double rho_server_coded(double D, double alpha, double d, double c) {
    double r = D - alpha + 1;
    return r * (d * d * c + 2.0 * d * c) + r * d * c + r * r * D + 2.0 * d * c;
}
// Server, conventional epoch: sum D gradients and update.
inline double rho_server_conventional(double D, double d, double c) {
    return D * d * c + 2.0 * d * c;
}
// Server, one-time key aggregates for stripping (all D rows, both keys).
inline double rho_server_key_aggregates(double D, double alpha, double d, double c) {
    return D * alpha * (d * c + d * d);
}

// One coded training epoch: per device down(eps) + compute + up(coded
// gradient); the epoch ends when the wait_count-th device finishes (ties
// break toward the lower index) and the server has stripped/decoded/updated.
// Devices listed in `forced_stragglers` never finish (their draws are still
// consumed so streams stay aligned).
EpochTiming epoch_time_coded(const std::vector<DeviceProfile>& profiles, double rho_device,
                             std::int64_t bits_down, std::int64_t bits_up, const LinkConfig& link,
                             int wait_count, double server_rho, double server_rate,
                             LatencyStreams& streams,
                             const std::vector<int>& forced_stragglers = {});

// One conventional epoch: wait for every device (or, with drop_fraction > 0,
// for the fastest ceil((1-drop_fraction)*D) of them).
EpochTiming epoch_time_conventional(const std::vector<DeviceProfile>& profiles,
                                    const std::vector<double>& rho_per_device,
                                    std::int64_t bits_down, std::int64_t bits_up,
                                    const LinkConfig& link, double drop_fraction,
                                    double server_rho, double server_rate,
                                    LatencyStreams& streams);

struct SharingTiming {
    double phase_s = 0.0;
    std::vector<double> encode_done; // per device completion time
};

// The one-time sharing phase. Every device pads, uploads its padded share
// once, and the server relays a copy to each recipient on an independent
// downlink; a device encodes as soon as its own pad and all alpha-1 incoming
// shares are ready. With alpha = 1 nothing is exchanged and the phase is
// just the slowest pad. Key/seed delivery is free by assumption.
SharingTiming sharing_phase_time(const std::vector<DeviceProfile>& profiles,
                                 const std::vector<std::vector<int>>& supports, double d, double c,
                                 int k_bits, const LinkConfig& link, double server_rho,
                                 double server_rate, LatencyStreams& streams);

} // namespace cfl
