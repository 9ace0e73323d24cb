// Microbenchmarks for the hot paths: fixed-point matrix products (the bulk
// of every simulated epoch), code construction/decoding, and the encode and
// latency-sampling steps. Shapes mirror the reference configuration
// (25 devices, 256 features, 10 classes).

#include <benchmark/benchmark.h>

#include "cfl/fixedpoint.hpp"
#include "cfl/gradcode.hpp"
#include "cfl/latency.hpp"
#include "cfl/privacy.hpp"
#include "cfl/protocol.hpp"

using namespace cfl;

namespace {

const FixedSpec kSpec{48, 24};

FxMatrix random_fx(int rows, int cols, double scale, Stream& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = scale * (2.0 * rng.u01() - 1.0);
    return encode_matrix(m, kSpec);
}

void BM_fx_matmul(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    Stream rng(11);
    FxMatrix a = random_fx(d, d, 1.0, rng);
    FxMatrix b = random_fx(d, 10, 0.25, rng);
    for (auto _ : state) benchmark::DoNotOptimize(fx_matmul(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d) * d * 10);
}
BENCHMARK(BM_fx_matmul)->Arg(64)->Arg(256);

void BM_build_code(benchmark::State& state) {
    for (auto _ : state) {
        Stream rng = substream(1, "code");
        benchmark::DoNotOptimize(build_code(25, 23, rng, kSpec));
    }
}
BENCHMARK(BM_build_code);

void BM_decode_cold(benchmark::State& state) {
    Stream rng = substream(1, "code");
    GradientCode code = build_code(25, 23, rng, kSpec);
    const std::vector<int> received{0, 7, 19};
    for (auto _ : state) {
        GradientCode fresh(code); // copy drops the memo: a genuine solve
        benchmark::DoNotOptimize(fresh.decode(received, 1e-3, BView::Quantized));
    }
}
BENCHMARK(BM_decode_cold);

void BM_decode_memoized(benchmark::State& state) {
    Stream rng = substream(1, "code");
    GradientCode code = build_code(25, 23, rng, kSpec);
    const std::vector<int> received{0, 7, 19};
    code.decode(received, 1e-3, BView::Quantized);
    for (auto _ : state) benchmark::DoNotOptimize(code.decode(received, 1e-3, BView::Quantized));
}
BENCHMARK(BM_decode_memoized);

void BM_encode_shares(benchmark::State& state) {
    const int d = 256, c = 10, alpha = 23;
    Stream rng(13);
    std::vector<PaddedShare> shares;
    std::vector<const PaddedShare*> ptrs;
    std::vector<FxScalar> b_row;
    for (int i = 0; i < alpha; ++i) {
        shares.push_back(PaddedShare{random_fx(d, c, 1.0, rng), random_fx(d, d, 1.0, rng)});
        b_row.push_back(fx_encode(2.0 * rng.u01() - 1.0, kSpec));
    }
    for (const auto& s : shares) ptrs.push_back(&s);
    for (auto _ : state) benchmark::DoNotOptimize(encode_shares(b_row, ptrs));
}
BENCHMARK(BM_encode_shares);

void BM_coded_gradient(benchmark::State& state) {
    const int d = 256, c = 10;
    Stream rng(17);
    EncodedShare share{random_fx(d, c, 1.0, rng), random_fx(d, d, 1.0, rng)};
    FxMatrix eps = random_fx(d, c, 0.25, rng);
    for (auto _ : state) benchmark::DoNotOptimize(coded_gradient(share, eps));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d) * d * c);
}
BENCHMARK(BM_coded_gradient);

void BM_epoch_time_coded(benchmark::State& state) {
    RunConfig cfg;
    auto profiles = cfg.expand_profiles();
    LatencyStreams streams(1, cfg.D);
    const std::int64_t bits = message_bits(2000.0 * 10.0, 48, 0.1);
    for (auto _ : state)
        benchmark::DoNotOptimize(epoch_time_coded(profiles, rho_coded_epoch(2000, 10), bits, bits,
                                                  cfg.link, 3, 1e6, cfg.server_mac_rate, streams));
}
BENCHMARK(BM_epoch_time_coded);

} // namespace

BENCHMARK_MAIN();
