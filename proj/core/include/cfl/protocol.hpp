#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfl/data.hpp"
#include "cfl/gradcode.hpp"
#include "cfl/latency.hpp"
#include "cfl/model.hpp"
#include "cfl/privacy.hpp"

namespace cfl {

enum class Scheme { Coded, Conventional, ConventionalDrop };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

// One row of the device-class table: `count` devices sharing a MAC rate,
// setup fraction and failure probability.
struct DeviceClassSpec {
    int count = 0;
    double mac_rate = 0.0;
    double setup_frac = 0.5;
    double p_fail = 0.1;
};

struct DataConfig {
    std::string source = "synthetic"; // synthetic | csv | idx
    long m = 5000;                    // training samples (synthetic)
    int classes = 10;
    int raw_dim = 20;
    double noise = 0.5;
    double test_fraction = 0.2;
    std::string csv_path;
    std::string idx_images;
    std::string idx_labels;
};

struct RunConfig {
    int D = 25;
    int alpha = 23;
    FixedSpec spec{48, 24};
    Hyper hyper{9e-6, 6.0, {{200, 0.8}, {350, 0.8}}, 0};
    int epochs = 500;
    Scheme scheme = Scheme::Coded;
    bool latency_only = false;
    std::uint64_t seed = 1;
    int workers = 1;

    std::vector<DeviceClassSpec> device_classes{
        {10, 25e6, 0.5, 0.1}, {5, 5e6, 0.5, 0.1}, {5, 2.5e6, 0.5, 0.1}, {5, 1.25e6, 0.5, 0.1}};
    double server_mac_rate = 8.24e12;
    LinkConfig link{10e6, 5e6, 0.1};
    int wire_bits_conventional = 32;

    DataConfig data;
    bool embed = true;
    EmbeddingSpec embedding{5.0, 256, 0};
    double headroom = 0.25;
    int batches_per_device = 5;
    double theta_init_stddev = 0.0; // 0 => all-zero initial model

    // Matrix shape driven through the latency model when no data is loaded.
    long latency_d = 2000;
    int latency_c = 10;

    double drop_fraction = 0.0; // conventional-drop only
    double decode_tol = 1e-3;
    std::vector<double> targets{0.95};
    std::string baseline_csv; // optional reference trajectory for speed-ups
    int eval_every = 1;

    // Test hooks: devices that never respond, and model-trajectory capture.
    std::vector<int> forced_stragglers;
    bool record_theta = false;

    void validate() const;
    std::vector<DeviceProfile> expand_profiles() const;
};

struct TrajectoryPoint {
    int epoch = 0;
    double time_s = 0.0; // cumulative, includes the sharing offset
    double train_acc = 0.0;
    double test_acc = 0.0;
    double loss = 0.0;
    int responders = 0;
    bool has_metrics = false;
};

struct SharingResult {
    std::vector<EncodedShare> shares;     // per device
    std::vector<DeviceKeys> keys;         // server-side registry
    std::vector<EncodedShare> key_shares; // per row: the coded key aggregates
    double phase_s = 0.0;
};

// The assembled train/test views fed to evaluation and references.
struct PreparedData {
    QuantizedDataset train;
    Eigen::MatrixXd train_X; // decoded quantized features, all devices stacked
    Eigen::MatrixXd train_Y;
    std::vector<int> train_labels;
    Eigen::MatrixXd test_X; // held-out, same embedding and scale
    Eigen::MatrixXd test_Y;
    std::vector<int> test_labels;
};

struct ExperimentResult {
    std::vector<TrajectoryPoint> trajectory;
    double sharing_offset_s = 0.0;
    double total_time_s = 0.0;
    double final_train_acc = 0.0;
    double final_test_acc = 0.0;
    std::vector<std::pair<double, double>> time_to_target; // (target, seconds; -1 = not reached)
    std::uint64_t config_hash = 0;
    std::string csv;
    std::string summary;
    std::vector<Eigen::MatrixXd> theta_log; // filled when cfg.record_theta
};

// Builds (or loads), embeds, splits and quantizes the dataset named by the
// config. Deterministic given cfg.seed.
PreparedData prepare_data(const RunConfig& cfg);

// Key generation, padding, sharing along the code supports, and encoding,
// with the phase clock from the latency model. Numeric results depend only
// on cfg.seed; the phase time additionally consumes the latency streams.
SharingResult run_sharing_phase(const RunConfig& cfg, const GradientCode& code,
                                const QuantizedDataset& data, LatencyStreams& streams);

// Full experiment for the configured scheme: per-epoch trajectory CSV plus a
// human-readable summary. Identical bytes for identical (config, seed) and
// any worker count.
ExperimentResult run_experiment(const RunConfig& cfg);

// Renders the trajectory CSV (header epoch,time_s,train_acc,test_acc,loss,
// responders; metric fields empty in latency-only runs).
std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj);

// First cumulative time at which train accuracy reached `target`; -1 if never.
double time_to_accuracy(const std::vector<TrajectoryPoint>& traj, double target);

// Parses a trajectory CSV back into points (for baseline comparisons).
std::vector<TrajectoryPoint> parse_trajectory_csv(const std::string& text);

} // namespace cfl
