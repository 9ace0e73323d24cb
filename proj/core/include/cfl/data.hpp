#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfl/fixedpoint.hpp"
#include "cfl/model.hpp"
#include "cfl/rng.hpp"

namespace cfl {

struct LabeledDataset {
    Eigen::MatrixXd features; // m x d_raw
    std::vector<int> labels;  // class indices
    std::string name;

    long size() const { return static_cast<long>(labels.size()); }
    int num_classes() const;
};

struct EmbeddingSpec {
    double gamma = 5.0;
    int n_features = 256;
    std::uint64_t seed = 0;
};

// Gaussian features, a hidden linear map, labels = argmax of noisy scores.
// Recoverable by linear regression, which is all the protocol needs.
LabeledDataset gen_synthetic(long m, int d, int classes, double noise, Stream& rng);

// Stable-sorts by label and splits into D equal contiguous blocks (the
// non-IID partition: each device sees few classes). A remainder of less than
// D samples is dropped so the blocks stay equal.
std::vector<LabeledDataset> sort_and_partition(const LabeledDataset& ds, int D);

// Random Fourier features for the RBF kernel: z(x) = sqrt(2/n) cos(xW + b)
// with W ~ N(0, 2*gamma) and b ~ U[0, 2pi), both drawn once from spec.seed —
// every device must embed with the same W, b.
Eigen::MatrixXd rff_embed(const Eigen::MatrixXd& X, const EmbeddingSpec& spec);

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int classes, double scale = 1.0);

// A full quantized training set: per-device fixed-point blocks plus the
// assembled real-view totals that the centralized reference trains on.
struct QuantizedDataset {
    std::vector<LocalData> devices;
    double scale = 1.0;            // feature/label multiplier applied pre-encode
    Eigen::MatrixXd gram_total;    // sum of decoded per-device Grams
    Eigen::MatrixXd xty_total;
    long m = 0;
    int d = 0;
    int c = 0;
};

// Scales features and one-hot labels by one global factor chosen so that
// even the worst-case absolute-value Gram/X^T Y entries stay within
// headroom * 2^(k-f) of the range (default headroom 0.25), then encodes and
// computes each device's Gram and X^T Y in fixed point. The real views are
// the decoded matrices. Throws OverflowError if some value still cannot be
// represented, listing the offending magnitude.
QuantizedDataset quantize_dataset(const std::vector<LabeledDataset>& parts, int classes,
                                  FixedSpec spec, double headroom = 0.25, int workers = 1);

// IDX (big-endian images + labels files) and label-first CSV ingestion.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);
LabeledDataset load_csv(const std::string& path);
void save_csv(const LabeledDataset& ds, const std::string& path);

} // namespace cfl
