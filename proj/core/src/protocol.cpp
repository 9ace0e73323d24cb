#include "cfl/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cfl/errors.hpp"
#include "cfl/parallel.hpp"
#include "cfl/runconfig.hpp"

namespace cfl {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Coded: return "coded";
        case Scheme::Conventional: return "conventional";
        case Scheme::ConventionalDrop: return "conventional-drop";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "coded") return Scheme::Coded;
    if (name == "conventional") return Scheme::Conventional;
    if (name == "conventional-drop") return Scheme::ConventionalDrop;
    throw ConfigError("scheme: unknown value '" + name +
                      "' (expected coded | conventional | conventional-drop)");
}

void RunConfig::validate() const {
    if (alpha < 1 || alpha > D) throw ConfigError("alpha: need 1 <= alpha <= D");
    if (epochs < 1) throw ConfigError("epochs: must be >= 1");
    spec.validate();
    if (hyper.mu <= 0.0) throw ConfigError("hyper.mu: must be positive");
    if (hyper.lambda < 0.0) throw ConfigError("hyper.lambda: must be >= 0");
    if (workers < 1) throw ConfigError("workers: must be >= 1");
    int total = 0;
    for (std::size_t i = 0; i < device_classes.size(); ++i) {
        const auto& dc = device_classes[i];
        const std::string at = "device_classes[" + std::to_string(i) + "]";
        if (dc.count < 0) throw ConfigError(at + ".count: must be >= 0");
        if (dc.mac_rate <= 0.0) throw ConfigError(at + ".mac_rate: must be positive");
        if (dc.setup_frac < 0.0) throw ConfigError(at + ".setup_frac: must be >= 0");
        if (dc.p_fail < 0.0 || dc.p_fail >= 1.0) throw ConfigError(at + ".p_fail: need 0 <= p < 1");
        total += dc.count;
    }
    if (total != D)
        throw ConfigError("device_classes: counts sum to " + std::to_string(total) + ", expected D=" +
                          std::to_string(D));
    if (server_mac_rate <= 0.0) throw ConfigError("server_mac_rate: must be positive");
    if (link.down_bps <= 0.0) throw ConfigError("link.down_bps: must be positive");
    if (link.up_bps <= 0.0) throw ConfigError("link.up_bps: must be positive");
    if (link.header_frac < 0.0) throw ConfigError("link.header_frac: must be >= 0");
    if (wire_bits_conventional < 1) throw ConfigError("wire_bits_conventional: must be >= 1");
    if (batches_per_device < 1) throw ConfigError("batches_per_device: must be >= 1");
    if (headroom <= 0.0 || headroom > 1.0) throw ConfigError("quantization.headroom: need 0 < h <= 1");
    if (latency_d < 1 || latency_c < 1) throw ConfigError("latency_dims: must be >= 1");
    if (drop_fraction < 0.0 || drop_fraction >= 1.0) throw ConfigError("drop_fraction: need 0 <= x < 1");
    if (eval_every < 1) throw ConfigError("eval_every: must be >= 1");
    if (decode_tol <= 0.0) throw ConfigError("decode_tol: must be positive");
    if (data.source != "synthetic" && data.source != "csv" && data.source != "idx")
        throw ConfigError("data.source: unknown value '" + data.source + "'");
    if (data.test_fraction < 0.0 || data.test_fraction >= 1.0)
        throw ConfigError("data.test_fraction: need 0 <= x < 1");
    for (int i : forced_stragglers)
        if (i < 0 || i >= D) throw ConfigError("forced_stragglers: device index out of range");
    if (static_cast<int>(forced_stragglers.size()) > D - 1)
        throw ConfigError("forced_stragglers: cannot silence every device");
}

std::vector<DeviceProfile> RunConfig::expand_profiles() const {
    std::vector<DeviceProfile> out;
    out.reserve(D);
    int cls = 0;
    for (const auto& dc : device_classes) {
        for (int i = 0; i < dc.count; ++i)
            out.push_back(DeviceProfile{dc.mac_rate, dc.setup_frac, dc.p_fail,
                                        "class" + std::to_string(cls)});
        ++cls;
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Eigen::MatrixXd model_view(const ModelState& state) {
    return decode_matrix(state.theta1) + decode_matrix(state.eps);
}

} // namespace

std::string trajectory_csv(const std::vector<TrajectoryPoint>& traj) {
    std::string out = "epoch,time_s,train_acc,test_acc,loss,responders\n";
    for (const auto& p : traj) {
        out += std::to_string(p.epoch);
        out += ',';
        out += fmt(p.time_s);
        out += ',';
        if (p.has_metrics) out += fmt(p.train_acc);
        out += ',';
        if (p.has_metrics) out += fmt(p.test_acc);
        out += ',';
        if (p.has_metrics) out += fmt(p.loss);
        out += ',';
        out += std::to_string(p.responders);
        out += '\n';
    }
    return out;
}

double time_to_accuracy(const std::vector<TrajectoryPoint>& traj, double target) {
    for (const auto& p : traj)
        if (p.has_metrics && p.train_acc >= target) return p.time_s;
    return -1.0;
}

std::vector<TrajectoryPoint> parse_trajectory_csv(const std::string& text) {
    std::vector<TrajectoryPoint> out;
    std::stringstream ss(text);
    std::string line;
    bool first = true;
    long lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("epoch,", 0) == 0) continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        while (cells.size() < 6) cells.emplace_back();
        try {
            TrajectoryPoint p;
            p.epoch = std::stoi(cells[0]);
            p.time_s = std::stod(cells[1]);
            p.has_metrics = !cells[2].empty();
            if (p.has_metrics) {
                p.train_acc = std::stod(cells[2]);
                p.test_acc = cells[3].empty() ? 0.0 : std::stod(cells[3]);
                p.loss = cells[4].empty() ? 0.0 : std::stod(cells[4]);
            }
            p.responders = cells[5].empty() ? 0 : std::stoi(cells[5]);
            out.push_back(p);
        } catch (const std::exception&) {
            throw FormatError("trajectory csv line " + std::to_string(lineno) + ": bad row '" + line +
                              "'");
        }
    }
    return out;
}

PreparedData prepare_data(const RunConfig& cfg) {
    LabeledDataset full;
    long train_n = 0;
    if (cfg.data.source == "synthetic") {
        const long test_n = static_cast<long>(std::llround(
            static_cast<double>(cfg.data.m) * cfg.data.test_fraction));
        Stream ds_rng = substream(cfg.seed, "data.synthetic");
        full = gen_synthetic(cfg.data.m + test_n, cfg.data.raw_dim, cfg.data.classes, cfg.data.noise,
                             ds_rng);
        train_n = cfg.data.m;
    } else {
        full = (cfg.data.source == "csv") ? load_csv(cfg.data.csv_path)
                                          : load_idx(cfg.data.idx_images, cfg.data.idx_labels);
        // Deterministic shuffle before the held-out split.
        std::vector<long> order(full.size());
        std::iota(order.begin(), order.end(), 0);
        Stream sh = substream(cfg.seed, "data.split");
        for (long i = full.size() - 1; i > 0; --i)
            std::swap(order[static_cast<std::size_t>(i)],
                      order[static_cast<std::size_t>(sh.uniform_int(0, i))]);
        LabeledDataset shuffled;
        shuffled.name = full.name;
        shuffled.features.resize(full.features.rows(), full.features.cols());
        shuffled.labels.resize(full.labels.size());
        for (long i = 0; i < full.size(); ++i) {
            shuffled.features.row(i) = full.features.row(order[static_cast<std::size_t>(i)]);
            shuffled.labels[static_cast<std::size_t>(i)] =
                full.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        }
        full = std::move(shuffled);
        const long test_n =
            static_cast<long>(std::llround(static_cast<double>(full.size()) * cfg.data.test_fraction));
        train_n = full.size() - test_n;
    }

    const int classes = (cfg.data.source == "synthetic") ? cfg.data.classes
                                                         : std::max(cfg.data.classes, full.num_classes());

    if (cfg.embed) {
        EmbeddingSpec espec = cfg.embedding;
        if (espec.seed == 0) espec.seed = derive_seed(cfg.seed, "embedding");
        full.features = rff_embed(full.features, espec);
    }

    LabeledDataset train_ds, test_ds;
    train_ds.name = full.name + "/train";
    test_ds.name = full.name + "/test";
    train_ds.features = full.features.topRows(train_n);
    train_ds.labels.assign(full.labels.begin(), full.labels.begin() + train_n);
    test_ds.features = full.features.bottomRows(full.size() - train_n);
    test_ds.labels.assign(full.labels.begin() + train_n, full.labels.end());

    PreparedData out;
    auto parts = sort_and_partition(train_ds, cfg.D);
    out.train = quantize_dataset(parts, classes, cfg.spec, cfg.headroom, cfg.workers);

    out.train_X.resize(out.train.m, out.train.d);
    out.train_Y.resize(out.train.m, out.train.c);
    out.train_labels.reserve(out.train.m);
    long row = 0;
    for (const auto& dev : out.train.devices) {
        out.train_X.middleRows(row, dev.n) = dev.X;
        out.train_Y.middleRows(row, dev.n) = dev.Y;
        out.train_labels.insert(out.train_labels.end(), dev.labels.begin(), dev.labels.end());
        row += dev.n;
    }

    out.test_X = out.train.scale * test_ds.features;
    out.test_Y = one_hot(test_ds.labels, classes, out.train.scale);
    out.test_labels = test_ds.labels;
    return out;
}

SharingResult run_sharing_phase(const RunConfig& cfg, const GradientCode& code,
                                const QuantizedDataset& data, LatencyStreams& streams) {
    const int D = cfg.D;
    const int d = data.d;
    const int c = data.c;

    SharingResult out;
    out.keys.resize(D);
    for (int i = 0; i < D; ++i) {
        Stream ks = substream(cfg.seed, "keys", static_cast<std::uint64_t>(i));
        out.keys[static_cast<std::size_t>(i)] = gen_keys(ks, d, c, cfg.spec);
    }

    FxMatrix theta1(d, c, cfg.spec);
    if (cfg.theta_init_stddev > 0.0) {
        Stream ts = substream(cfg.seed, "theta1");
        Eigen::MatrixXd t0(d, c);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < c; ++j) t0(i, j) = cfg.theta_init_stddev * ts.normal();
        theta1 = encode_matrix(t0, cfg.spec);
    }

    std::vector<PaddedShare> padded(D);
    parallel_for(D, cfg.workers, [&](int i) {
        const auto& dev = data.devices[static_cast<std::size_t>(i)];
        FxMatrix g1 = local_gradient_fx(dev.gram_fx, dev.xty_fx, theta1);
        padded[static_cast<std::size_t>(i)] =
            pad_share(dev.gram_fx, g1, out.keys[static_cast<std::size_t>(i)]);
    });

    out.shares.resize(D);
    out.key_shares.resize(D);
    parallel_for(D, cfg.workers, [&](int i) {
        const auto& sup = code.support(i);
        std::vector<FxScalar> b_row;
        std::vector<const PaddedShare*> share_ptrs;
        std::vector<const DeviceKeys*> key_ptrs;
        b_row.reserve(sup.size());
        for (int j : sup) {
            b_row.push_back(code.b_fx(i, j));
            share_ptrs.push_back(&padded[static_cast<std::size_t>(j)]);
            key_ptrs.push_back(&out.keys[static_cast<std::size_t>(j)]);
        }
        out.shares[static_cast<std::size_t>(i)] = encode_shares(b_row, share_ptrs);
        out.key_shares[static_cast<std::size_t>(i)] = encode_keys(b_row, key_ptrs);
    });

    std::vector<std::vector<int>> supports;
    supports.reserve(D);
    for (int i = 0; i < D; ++i) supports.push_back(code.support(i));
    auto profiles = cfg.expand_profiles();
    out.phase_s = sharing_phase_time(profiles, supports, d, c, cfg.spec.k, cfg.link,
                                     rho_server_key_aggregates(D, cfg.alpha, d, c),
                                     cfg.server_mac_rate, streams)
                      .phase_s;
    return out;
}

namespace {

struct BatchRange {
    long begin = 0;
    long count = 0;
};

// Contiguous near-equal batches; the first (n % B) batches take one extra row.
std::vector<BatchRange> batch_ranges(long n, int batches) {
    std::vector<BatchRange> out(batches);
    const long base = n / batches;
    const long rem = n % batches;
    long at = 0;
    for (int b = 0; b < batches; ++b) {
        out[static_cast<std::size_t>(b)].begin = at;
        out[static_cast<std::size_t>(b)].count = base + (b < rem ? 1 : 0);
        at += out[static_cast<std::size_t>(b)].count;
    }
    return out;
}

struct Metrics {
    double train_acc = 0.0;
    double test_acc = 0.0;
    double loss = 0.0;
};

Metrics eval_model(const Eigen::MatrixXd& theta, const PreparedData& data, double lambda) {
    Metrics m;
    EvalResult train = evaluate(theta, data.train_X, data.train_Y, data.train_labels, lambda);
    m.train_acc = train.accuracy;
    m.loss = train.loss;
    if (data.test_labels.empty()) {
        m.test_acc = 0.0;
    } else {
        m.test_acc = evaluate(theta, data.test_X, data.test_Y, data.test_labels, lambda).accuracy;
    }
    return m;
}

std::string render_summary(const RunConfig& cfg, const ExperimentResult& res) {
    std::string s;
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(res.config_hash));
    s += "config_hash: " + std::string(hash) + "\n";
    s += "scheme: " + scheme_name(cfg.scheme) + "\n";
    s += "D: " + std::to_string(cfg.D) + "  alpha: " + std::to_string(cfg.alpha) +
         "  epochs: " + std::to_string(cfg.epochs) + "  seed: " + std::to_string(cfg.seed) + "\n";
    s += "latency_only: " + std::string(cfg.latency_only ? "true" : "false") + "\n";
    s += "sharing_offset_s: " + fmt(res.sharing_offset_s) + "\n";
    s += "total_time_s: " + fmt(res.total_time_s) + "\n";
    if (!cfg.latency_only) {
        s += "final_train_acc: " + fmt(res.final_train_acc) + "\n";
        s += "final_test_acc: " + fmt(res.final_test_acc) + "\n";
    }
    std::vector<TrajectoryPoint> baseline;
    if (!cfg.baseline_csv.empty()) baseline = parse_trajectory_csv(cfg.baseline_csv);
    for (const auto& [target, secs] : res.time_to_target) {
        s += "target " + fmt(target) + ": ";
        s += (secs < 0.0) ? "DNF" : (fmt(secs) + " s");
        if (!baseline.empty()) {
            double base = time_to_accuracy(baseline, target);
            if (base >= 0.0 && secs > 0.0) s += "  speedup_vs_baseline: " + fmt(base / secs);
        }
        s += "\n";
    }
    return s;
}

ExperimentResult run_coded(const RunConfig& cfg, std::uint64_t config_hash) {
    ExperimentResult res;
    res.config_hash = config_hash;
    auto profiles = cfg.expand_profiles();
    LatencyStreams streams(cfg.seed, cfg.D);
    Stream code_rng = substream(cfg.seed, "code");
    GradientCode code = build_code(cfg.D, cfg.alpha, code_rng, cfg.spec);
    const int wait_count = code.min_responders();

    // Numeric state (unused in latency-only mode).
    PreparedData data;
    SharingResult sharing;
    ModelState state;
    Hyper hyper = cfg.hyper;
    long d = cfg.latency_d;
    int c = cfg.latency_c;

    if (cfg.latency_only) {
        std::vector<std::vector<int>> supports;
        for (int i = 0; i < cfg.D; ++i) supports.push_back(code.support(i));
        res.sharing_offset_s =
            sharing_phase_time(profiles, supports, static_cast<double>(d), c, cfg.spec.k, cfg.link,
                               rho_server_key_aggregates(cfg.D, cfg.alpha, static_cast<double>(d), c),
                               cfg.server_mac_rate, streams)
                .phase_s;
    } else {
        data = prepare_data(cfg);
        d = data.train.d;
        c = data.train.c;
        if (hyper.m == 0) hyper.m = data.train.m;
        sharing = run_sharing_phase(cfg, code, data.train, streams);
        res.sharing_offset_s = sharing.phase_s;
        state.theta1 = FxMatrix(static_cast<int>(d), c, cfg.spec);
        if (cfg.theta_init_stddev > 0.0) {
            Stream ts = substream(cfg.seed, "theta1");
            Eigen::MatrixXd t0(d, c);
            for (long i = 0; i < d; ++i)
                for (int j = 0; j < c; ++j) t0(i, j) = cfg.theta_init_stddev * ts.normal();
            state.theta1 = encode_matrix(t0, cfg.spec);
        }
        state.eps = FxMatrix(static_cast<int>(d), c, cfg.spec);
    }

    const std::int64_t bits_down =
        message_bits(static_cast<double>(d) * c, cfg.spec.k, cfg.link.header_frac);
    const std::int64_t bits_up = bits_down;
    const double rho_dev = rho_coded_epoch(static_cast<double>(d), c);
    const double rho_srv = rho_server_coded(cfg.D, cfg.alpha, static_cast<double>(d), c);

    double clock = res.sharing_offset_s;
    for (int e = 1; e <= cfg.epochs; ++e) {
        EpochTiming timing =
            epoch_time_coded(profiles, rho_dev, bits_down, bits_up, cfg.link, wait_count, rho_srv,
                             cfg.server_mac_rate, streams, cfg.forced_stragglers);
        clock += timing.epoch_s;

        TrajectoryPoint point;
        point.epoch = e;
        point.time_s = clock;
        point.responders = static_cast<int>(timing.responders.size());

        if (!cfg.latency_only) {
            // Devices compute on the coded shares; only the responders'
            // results reach the server this epoch.
            const auto& resp = timing.responders;
            std::vector<FxMatrix> stripped(resp.size());
            parallel_for(static_cast<int>(resp.size()), cfg.workers, [&](int s) {
                const int dev = resp[static_cast<std::size_t>(s)];
                FxMatrix gtilde =
                    coded_gradient(sharing.shares[static_cast<std::size_t>(dev)], state.eps);
                GradientMsg msg{std::move(gtilde), dev, e};
                stripped[static_cast<std::size_t>(s)] =
                    strip_keys(msg, sharing.key_shares[static_cast<std::size_t>(dev)], state.eps)
                        .values;
            });

            DecodeVector dv = code.decode(resp, cfg.decode_tol, BView::Quantized);
            Eigen::MatrixXd gsum = Eigen::MatrixXd::Zero(d, c);
            for (std::size_t s = 0; s < dv.rows_used.size(); ++s) {
                // rows_used is the sorted responder set itself here.
                gsum += dv.coefficients(static_cast<Eigen::Index>(s)) *
                        decode_matrix(stripped[static_cast<std::size_t>(s)]);
            }

            Eigen::MatrixXd theta = model_view(state);
            auto [theta_next, grad_norm] = aggregate_update(gsum, hyper, theta, e);
            (void)grad_norm;
            // Re-quantize the applied step and fold it into the update matrix.
            Eigen::MatrixXd step = theta - theta_next; // mu * grad
            state.eps = fx_mat_sub(state.eps, encode_matrix(step, cfg.spec));
            state.epoch = e + 1;

            if (e % cfg.eval_every == 0 || e == cfg.epochs) {
                Eigen::MatrixXd theta_eval = model_view(state);
                Metrics m = eval_model(theta_eval, data, hyper.lambda);
                point.train_acc = m.train_acc;
                point.test_acc = m.test_acc;
                point.loss = m.loss;
                point.has_metrics = true;
            }
            if (cfg.record_theta) res.theta_log.push_back(model_view(state));
        }
        res.trajectory.push_back(point);
    }

    res.total_time_s = clock;
    return res;
}

ExperimentResult run_conventional(const RunConfig& cfg, std::uint64_t config_hash) {
    ExperimentResult res;
    res.config_hash = config_hash;
    auto profiles = cfg.expand_profiles();
    LatencyStreams streams(cfg.seed, cfg.D);
    const double drop = (cfg.scheme == Scheme::ConventionalDrop) ? cfg.drop_fraction : 0.0;

    PreparedData data;
    Hyper hyper = cfg.hyper;
    long d = cfg.latency_d;
    int c = cfg.latency_c;
    std::vector<std::vector<BatchRange>> ranges(cfg.D);
    Eigen::MatrixXd theta;

    if (!cfg.latency_only) {
        data = prepare_data(cfg);
        d = data.train.d;
        c = data.train.c;
        if (hyper.m == 0) hyper.m = data.train.m;
        for (int i = 0; i < cfg.D; ++i)
            ranges[static_cast<std::size_t>(i)] =
                batch_ranges(data.train.devices[static_cast<std::size_t>(i)].n,
                             cfg.batches_per_device);
        theta = Eigen::MatrixXd::Zero(d, c);
        if (cfg.theta_init_stddev > 0.0) {
            Stream ts = substream(cfg.seed, "theta1");
            for (long i = 0; i < d; ++i)
                for (int j = 0; j < c; ++j) theta(i, j) = cfg.theta_init_stddev * ts.normal();
        }
    } else {
        // Mini-batch size for MAC accounting only.
        const long per_dev = cfg.data.m / cfg.D;
        for (int i = 0; i < cfg.D; ++i)
            ranges[static_cast<std::size_t>(i)] = batch_ranges(per_dev, cfg.batches_per_device);
    }

    const std::int64_t bits_down = message_bits(static_cast<double>(d) * c,
                                                cfg.wire_bits_conventional, cfg.link.header_frac);
    const std::int64_t bits_up = bits_down;
    const double rho_srv = rho_server_conventional(cfg.D, static_cast<double>(d), c);

    double clock = 0.0;
    for (int e = 1; e <= cfg.epochs; ++e) {
        const int b = (e - 1) % cfg.batches_per_device;
        std::vector<double> rho(cfg.D);
        for (int i = 0; i < cfg.D; ++i)
            rho[static_cast<std::size_t>(i)] = rho_conventional_epoch(
                static_cast<double>(ranges[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)]
                                        .count),
                static_cast<double>(d), c);
        EpochTiming timing = epoch_time_conventional(profiles, rho, bits_down, bits_up, cfg.link,
                                                     drop, rho_srv, cfg.server_mac_rate, streams);
        clock += timing.epoch_s;

        TrajectoryPoint point;
        point.epoch = e;
        point.time_s = clock;
        point.responders = static_cast<int>(timing.responders.size());

        if (!cfg.latency_only) {
            // Devices work in 32-bit floating point on their current batch.
            const Eigen::MatrixXf theta_f = theta.cast<float>();
            std::vector<Eigen::MatrixXd> grads(cfg.D);
            parallel_for(cfg.D, cfg.workers, [&](int i) {
                const auto& dev = data.train.devices[static_cast<std::size_t>(i)];
                const auto& r = ranges[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)];
                Eigen::MatrixXf Xb = dev.X.middleRows(r.begin, r.count).cast<float>();
                Eigen::MatrixXf Yb = dev.Y.middleRows(r.begin, r.count).cast<float>();
                Eigen::MatrixXf g = Xb.transpose() * (Xb * theta_f - Yb);
                grads[static_cast<std::size_t>(i)] = g.cast<double>();
            });

            Eigen::MatrixXd gsum = Eigen::MatrixXd::Zero(d, c);
            long m_eff = 0;
            for (int i : timing.responders) {
                gsum += grads[static_cast<std::size_t>(i)];
                m_eff += ranges[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)].count;
            }
            theta = aggregate_update(gsum, hyper, theta, e, m_eff).first;

            if (e % cfg.eval_every == 0 || e == cfg.epochs) {
                Metrics m = eval_model(theta, data, hyper.lambda);
                point.train_acc = m.train_acc;
                point.test_acc = m.test_acc;
                point.loss = m.loss;
                point.has_metrics = true;
            }
            if (cfg.record_theta) res.theta_log.push_back(theta);
        }
        res.trajectory.push_back(point);
    }

    res.total_time_s = clock;
    return res;
}

} // namespace

ExperimentResult run_experiment(const RunConfig& cfg) {
    cfg.validate();
    const std::uint64_t hash = config_hash(cfg);
    ExperimentResult res =
        (cfg.scheme == Scheme::Coded) ? run_coded(cfg, hash) : run_conventional(cfg, hash);

    for (auto it = res.trajectory.rbegin(); it != res.trajectory.rend(); ++it) {
        if (it->has_metrics) {
            res.final_train_acc = it->train_acc;
            res.final_test_acc = it->test_acc;
            break;
        }
    }
    for (double target : cfg.targets)
        res.time_to_target.emplace_back(target, time_to_accuracy(res.trajectory, target));

    res.csv = trajectory_csv(res.trajectory);
    res.summary = render_summary(cfg, res);
    return res;
}

} // namespace cfl
