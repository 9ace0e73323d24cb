#include "cfl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cfl/errors.hpp"
#include "cfl/parallel.hpp"

namespace cfl {

int LabeledDataset::num_classes() const {
    int c = 0;
    for (int l : labels) c = std::max(c, l + 1);
    return c;
}

LabeledDataset gen_synthetic(long m, int d, int classes, double noise, Stream& rng) {
    if (m < 1 || d < 1 || classes < 1) throw ConfigError("synthetic: m, d, classes must be >= 1");
    Eigen::MatrixXd truth(d, classes);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < classes; ++j) truth(i, j) = rng.normal();
    LabeledDataset ds;
    ds.name = "synthetic";
    ds.features.resize(m, d);
    ds.labels.resize(m);
    for (long r = 0; r < m; ++r) {
        for (int j = 0; j < d; ++j) ds.features(r, j) = rng.normal();
        Eigen::RowVectorXd score = ds.features.row(r) * truth;
        for (int j = 0; j < classes; ++j) score(j) += noise * rng.normal();
        int best = 0;
        for (int j = 1; j < classes; ++j)
            if (score(j) > score(best)) best = j;
        ds.labels[static_cast<std::size_t>(r)] = best;
    }
    return ds;
}

std::vector<LabeledDataset> sort_and_partition(const LabeledDataset& ds, int D) {
    if (D < 1) throw ConfigError("partition: D must be >= 1");
    const long m = ds.size();
    std::vector<long> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
        return ds.labels[static_cast<std::size_t>(a)] < ds.labels[static_cast<std::size_t>(b)];
    });
    const long per = m / D; // remainder dropped to keep blocks equal
    std::vector<LabeledDataset> parts(D);
    for (int i = 0; i < D; ++i) {
        auto& p = parts[i];
        p.name = ds.name + "/" + std::to_string(i);
        p.features.resize(per, ds.features.cols());
        p.labels.resize(per);
        for (long r = 0; r < per; ++r) {
            long src = order[static_cast<std::size_t>(i * per + r)];
            p.features.row(r) = ds.features.row(src);
            p.labels[static_cast<std::size_t>(r)] = ds.labels[static_cast<std::size_t>(src)];
        }
    }
    return parts;
}

Eigen::MatrixXd rff_embed(const Eigen::MatrixXd& X, const EmbeddingSpec& spec) {
    if (spec.gamma <= 0.0 || spec.n_features < 1) throw ConfigError("embedding: invalid gamma or n_features");
    const int d_raw = static_cast<int>(X.cols());
    Stream ws = substream(spec.seed, "rff.W");
    Stream bs = substream(spec.seed, "rff.b");
    Eigen::MatrixXd W(d_raw, spec.n_features);
    const double sd = std::sqrt(2.0 * spec.gamma);
    for (int i = 0; i < d_raw; ++i)
        for (int j = 0; j < spec.n_features; ++j) W(i, j) = sd * ws.normal();
    Eigen::RowVectorXd b(spec.n_features);
    for (int j = 0; j < spec.n_features; ++j) b(j) = 2.0 * M_PI * bs.u01();
    Eigen::MatrixXd Z = X * W;
    Z.rowwise() += b;
    const double amp = std::sqrt(2.0 / spec.n_features);
    return amp * Z.array().cos().matrix();
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int classes, double scale) {
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<long>(labels.size()), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes)
            throw DimensionError("one_hot: label " + std::to_string(labels[i]) + " outside [0, " +
                                 std::to_string(classes) + ")");
        Y(static_cast<long>(i), labels[i]) = scale;
    }
    return Y;
}

namespace {

FxMatrix fx_transpose(const FxMatrix& m) {
    FxMatrix out(m.cols(), m.rows(), m.spec());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out.at(j, i) = m.at(i, j);
    return out;
}

} // namespace

QuantizedDataset quantize_dataset(const std::vector<LabeledDataset>& parts, int classes,
                                  FixedSpec spec, double headroom, int workers) {
    spec.validate();
    if (parts.empty()) throw ConfigError("quantize: empty partition list");
    const int d = static_cast<int>(parts[0].features.cols());

    // Worst-case accumulation bound: |X|^T |X| dominates every partial sum of
    // the fixed-point Gram accumulation, so scaling against it guarantees the
    // modular adds never wrap on the data path.
    double M = 0.0;
    for (const auto& p : parts) {
        Eigen::MatrixXd absX = p.features.cwiseAbs();
        Eigen::MatrixXd absG = absX.transpose() * absX;
        Eigen::MatrixXd absY = one_hot(p.labels, classes, 1.0).cwiseAbs();
        Eigen::MatrixXd absXY = absX.transpose() * absY;
        M = std::max({M, absG.maxCoeff(), absXY.maxCoeff(), absX.maxCoeff()});
    }
    const double cap = headroom * std::exp2(spec.k - spec.f);
    const double scale = (M > 0.0) ? std::min(1.0, std::sqrt(cap / M)) : 1.0;

    QuantizedDataset out;
    out.scale = scale;
    out.d = d;
    out.c = classes;
    out.devices.resize(parts.size());

    parallel_for(static_cast<int>(parts.size()), workers, [&](int i) {
        const auto& p = parts[static_cast<std::size_t>(i)];
        LocalData& dev = out.devices[static_cast<std::size_t>(i)];
        Eigen::MatrixXd Xs = scale * p.features;
        Eigen::MatrixXd Ys = scale * one_hot(p.labels, classes, 1.0);
        FxMatrix X_fx, Y_fx;
        try {
            X_fx = encode_matrix(Xs, spec);
            Y_fx = encode_matrix(Ys, spec);
        } catch (const OverflowError& e) {
            throw OverflowError("quantize: device " + std::to_string(i) + ": " + e.what() +
                                " (max input magnitude " + std::to_string(M) + ")");
        }
        dev.X = decode_matrix(X_fx);
        dev.Y = decode_matrix(Y_fx);
        dev.labels = p.labels;
        dev.n = p.size();
        FxMatrix Xt = fx_transpose(X_fx);
        dev.gram_fx = fx_matmul(Xt, X_fx);
        dev.xty_fx = fx_matmul(Xt, Y_fx);
        dev.gram_real = decode_matrix(dev.gram_fx);
        dev.xty_real = decode_matrix(dev.xty_fx);
    });

    out.gram_total = Eigen::MatrixXd::Zero(d, d);
    out.xty_total = Eigen::MatrixXd::Zero(d, classes);
    for (const auto& dev : out.devices) {
        out.gram_total += dev.gram_real;
        out.xty_total += dev.xty_real;
        out.m += dev.n;
    }
    return out;
}

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path, std::size_t& offset) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4))
        throw FormatError(path + ": truncated at byte " + std::to_string(offset));
    offset += 4;
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

} // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError(images_path + ": cannot open");
    std::size_t off = 0;
    const std::uint32_t magic = read_be32(img, images_path, off);
    if (magic != 0x00000803)
        throw FormatError(images_path + ": bad magic at byte 0 (expected 0x803 image file)");
    const std::uint32_t n = read_be32(img, images_path, off);
    const std::uint32_t rows = read_be32(img, images_path, off);
    const std::uint32_t cols = read_be32(img, images_path, off);
    const std::size_t dim = static_cast<std::size_t>(rows) * cols;

    LabeledDataset ds;
    ds.name = images_path;
    ds.features.resize(n, static_cast<long>(dim));
    std::vector<unsigned char> row(dim);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(dim)))
            throw FormatError(images_path + ": truncated at byte " + std::to_string(off));
        off += dim;
        for (std::size_t j = 0; j < dim; ++j)
            ds.features(i, static_cast<long>(j)) = row[j] / 255.0;
    }

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError(labels_path + ": cannot open");
    std::size_t loff = 0;
    const std::uint32_t lmagic = read_be32(lab, labels_path, loff);
    if (lmagic != 0x00000801)
        throw FormatError(labels_path + ": bad magic at byte 0 (expected 0x801 label file)");
    const std::uint32_t ln = read_be32(lab, labels_path, loff);
    if (ln != n)
        throw FormatError(labels_path + ": " + std::to_string(ln) + " labels for " +
                          std::to_string(n) + " images");
    ds.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        char b = 0;
        if (!lab.read(&b, 1))
            throw FormatError(labels_path + ": truncated at byte " + std::to_string(loff));
        ++loff;
        ds.labels[i] = static_cast<unsigned char>(b);
    }
    return ds;
}

LabeledDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path + ": cannot open");
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (vals.size() < 2)
            throw FormatError(path + ":" + std::to_string(lineno) + ": need label plus features");
        if (!rows.empty() && vals.size() != rows.front().size() + 1)
            throw FormatError(path + ":" + std::to_string(lineno) + ": ragged row");
        labels.push_back(static_cast<int>(vals[0]));
        rows.emplace_back(vals.begin() + 1, vals.end());
    }
    if (rows.empty()) throw FormatError(path + ": no data rows");
    LabeledDataset ds;
    ds.name = path;
    ds.labels = std::move(labels);
    ds.features.resize(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            ds.features(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
    return ds;
}

void save_csv(const LabeledDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError(path + ": cannot open for writing");
    out.precision(17);
    for (long i = 0; i < ds.size(); ++i) {
        out << ds.labels[static_cast<std::size_t>(i)];
        for (long j = 0; j < ds.features.cols(); ++j) out << ',' << ds.features(i, j);
        out << '\n';
    }
}

} // namespace cfl
