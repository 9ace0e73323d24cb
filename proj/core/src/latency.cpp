#include "cfl/latency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfl/errors.hpp"

namespace cfl {

LatencyStreams::LatencyStreams(std::uint64_t seed, int D) {
    down.reserve(D);
    comp.reserve(D);
    up.reserve(D);
    share_comp.reserve(D);
    share_up.reserve(D);
    relay.resize(D);
    for (int i = 0; i < D; ++i) {
        down.push_back(substream(seed, "lat.down", i));
        comp.push_back(substream(seed, "lat.comp", i));
        up.push_back(substream(seed, "lat.up", i));
        share_comp.push_back(substream(seed, "lat.share.comp", i));
        share_up.push_back(substream(seed, "lat.share.up", i));
        relay[i].reserve(D);
        for (int j = 0; j < D; ++j) relay[i].push_back(substream(seed, "lat.relay", i, j));
    }
}

double shifted_exp(double shift_s, double mean_setup_s, Stream& rng) {
    return shift_s + (mean_setup_s > 0.0 ? rng.exponential(mean_setup_s) : 0.0);
}

double compute_time(double rho, const DeviceProfile& profile, Stream& rng) {
    const double det = rho / profile.tau;
    return shifted_exp(det, profile.setup_frac * det, rng);
}

double compute_time_eta(double rho, double tau, double eta, Stream& rng) {
    return shifted_exp(rho / tau, 1.0 / eta, rng);
}

double link_time(double bits, double rate_bps, double p_fail, Stream& rng) {
    const auto n = rng.geometric_trials(p_fail);
    return static_cast<double>(n) * bits / rate_bps;
}

std::int64_t message_bits(double entries, double bits_per_entry, double header_frac) {
    const double raw = entries * bits_per_entry * (1.0 + header_frac);
    return static_cast<std::int64_t>(std::ceil(raw * (1.0 - 1e-12)));
}

namespace {

// Indices of the k smallest totals, ties toward the lower index.
std::vector<int> fastest(const std::vector<double>& totals, int k) {
    std::vector<int> order(totals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return totals[a] < totals[b]; });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

} // namespace

EpochTiming epoch_time_coded(const std::vector<DeviceProfile>& profiles, double rho_device,
                             std::int64_t bits_down, std::int64_t bits_up, const LinkConfig& link,
                             int wait_count, double server_rho, double server_rate,
                             LatencyStreams& streams, const std::vector<int>& forced_stragglers) {
    const int D = static_cast<int>(profiles.size());
    if (wait_count < 1 || wait_count > D) throw ConfigError("wait_count outside [1, D]");
    EpochTiming out;
    out.spans.resize(D);
    std::vector<double> totals(D);
    for (int i = 0; i < D; ++i) {
        auto& s = out.spans[i];
        s.down = link_time(static_cast<double>(bits_down), link.down_bps, profiles[i].p_fail,
                           streams.down[i]);
        s.comp = compute_time(rho_device, profiles[i], streams.comp[i]);
        s.up = link_time(static_cast<double>(bits_up), link.up_bps, profiles[i].p_fail,
                         streams.up[i]);
        totals[i] = s.total();
    }
    for (int idx : forced_stragglers)
        if (idx >= 0 && idx < D) totals[idx] = std::numeric_limits<double>::infinity();
    out.responders = fastest(totals, wait_count);
    double slowest_responder = 0.0;
    for (int idx : out.responders) slowest_responder = std::max(slowest_responder, totals[idx]);
    out.server_s = server_rho / server_rate;
    out.epoch_s = slowest_responder + out.server_s;
    return out;
}

EpochTiming epoch_time_conventional(const std::vector<DeviceProfile>& profiles,
                                    const std::vector<double>& rho_per_device,
                                    std::int64_t bits_down, std::int64_t bits_up,
                                    const LinkConfig& link, double drop_fraction,
                                    double server_rho, double server_rate,
                                    LatencyStreams& streams) {
    const int D = static_cast<int>(profiles.size());
    if (static_cast<int>(rho_per_device.size()) != D)
        throw DimensionError("epoch_time_conventional: rho list size != device count");
    EpochTiming out;
    out.spans.resize(D);
    std::vector<double> totals(D);
    for (int i = 0; i < D; ++i) {
        auto& s = out.spans[i];
        s.down = link_time(static_cast<double>(bits_down), link.down_bps, profiles[i].p_fail,
                           streams.down[i]);
        s.comp = compute_time(rho_per_device[i], profiles[i], streams.comp[i]);
        s.up = link_time(static_cast<double>(bits_up), link.up_bps, profiles[i].p_fail,
                         streams.up[i]);
        totals[i] = s.total();
    }
    int wait = D;
    if (drop_fraction > 0.0)
        wait = std::max(1, static_cast<int>(std::ceil((1.0 - drop_fraction) * D)));
    out.responders = fastest(totals, wait);
    double slowest_responder = 0.0;
    for (int idx : out.responders) slowest_responder = std::max(slowest_responder, totals[idx]);
    out.server_s = server_rho / server_rate;
    out.epoch_s = slowest_responder + out.server_s;
    return out;
}

SharingTiming sharing_phase_time(const std::vector<DeviceProfile>& profiles,
                                 const std::vector<std::vector<int>>& supports, double d, double c,
                                 int k_bits, const LinkConfig& link, double server_rho,
                                 double server_rate, LatencyStreams& streams) {
    const int D = static_cast<int>(profiles.size());
    const int alpha = static_cast<int>(supports.empty() ? 0 : supports[0].size());
    SharingTiming out;
    out.encode_done.assign(D, 0.0);

    std::vector<double> pad_done(D);
    for (int i = 0; i < D; ++i)
        pad_done[i] = compute_time(rho_pad(d, c), profiles[i], streams.share_comp[i]);

    if (alpha <= 1) {
        // Nothing leaves the devices; the phase is the slowest pad.
        out.encode_done = pad_done;
        out.phase_s = *std::max_element(pad_done.begin(), pad_done.end());
        return out;
    }

    // One upload per device (the padded gradient plus the symmetric half of
    // the padded Gram), then an independent relayed downlink per recipient.
    const std::int64_t share_bits =
        message_bits(d * c + d * (d + 1) / 2.0, k_bits, link.header_frac);
    std::vector<double> sent(D);
    for (int i = 0; i < D; ++i)
        sent[i] = pad_done[i] +
                  link_time(static_cast<double>(share_bits), link.up_bps, profiles[i].p_fail,
                            streams.share_up[i]);

    for (int j = 0; j < D; ++j) {
        double start = pad_done[j];
        for (int i : supports[j]) {
            if (i == j) continue;
            double arrival = sent[i] + link_time(static_cast<double>(share_bits), link.down_bps,
                                                 profiles[j].p_fail, streams.relay[i][j]);
            start = std::max(start, arrival);
        }
        out.encode_done[j] =
            start + compute_time(rho_encode(alpha, d, c), profiles[j], streams.share_comp[j]);
    }
    out.phase_s = *std::max_element(out.encode_done.begin(), out.encode_done.end()) +
                  server_rho / server_rate;
    return out;
}

} // namespace cfl
