#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cfl/fixedpoint.hpp"

namespace cfl {

// One device's share of the training set. The real views are the decoded
// quantized matrices, so the fixed-point pipeline and any real-arithmetic
// reference run on literally the same numbers.
struct LocalData {
    Eigen::MatrixXd X;         // n_i x d (decoded features)
    Eigen::MatrixXd Y;         // n_i x c (decoded one-hot labels)
    std::vector<int> labels;   // class indices, length n_i
    FxMatrix gram_fx;          // X^T X computed in fixed point
    FxMatrix xty_fx;           // X^T Y computed in fixed point
    Eigen::MatrixXd gram_real; // decoded gram_fx
    Eigen::MatrixXd xty_real;  // decoded xty_fx
    long n = 0;
};

// Learning-rate decay step: from `epoch` (1-based) onward the rate carries
// an extra `factor`.
struct MuStep {
    int epoch = 0;
    double factor = 1.0;
};

struct Hyper {
    double lambda = 9e-6;
    double mu = 6.0;
    std::vector<MuStep> mu_decay; // e.g. {200, 0.8}, {350, 0.8}
    long m = 0;                   // total training samples
};

// The model the server maintains: theta(e) = theta1 + eps(e). Only the
// update matrix eps travels, so shares coded against theta1 stay valid.
struct ModelState {
    FxMatrix theta1;
    FxMatrix eps;
    int epoch = 1;
};

double mu_at(const Hyper& hyper, int epoch);

// G = gram * theta - xty = n_i * (gradient of the local loss).
Eigen::MatrixXd local_gradient(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& xty,
                               const Eigen::MatrixXd& theta);
FxMatrix local_gradient_fx(const FxMatrix& gram, const FxMatrix& xty, const FxMatrix& theta);

// Gradient step on the global loss: grad = gsum/m + lambda*theta,
// theta' = theta - mu(epoch)*grad. `m_override` replaces hyper.m when the
// gradient sum covers a different sample count (mini-batches); pass 0 to use
// hyper.m. Returns the new theta and the Frobenius norm of the gradient.
std::pair<Eigen::MatrixXd, double> aggregate_update(const Eigen::MatrixXd& gsum,
                                                    const Hyper& hyper,
                                                    const Eigen::MatrixXd& theta, int epoch,
                                                    long m_override = 0);

// Full-batch gradient descent in real arithmetic on the assembled dataset;
// the reference trajectory for equivalence tests. Element e is the model
// after e epochs (element 0 is theta1).
std::vector<Eigen::MatrixXd> centralized_gd_oracle(const Eigen::MatrixXd& gram_total,
                                                   const Eigen::MatrixXd& xty_total,
                                                   const Hyper& hyper, int epochs,
                                                   const Eigen::MatrixXd& theta1);

struct EvalResult {
    double accuracy = 0.0;
    double loss = 0.0;
};

// Classification view of the regression model: predicted class is the argmax
// across output columns (ties break toward the lowest index); loss is the
// regularized mean squared error of the global objective.
EvalResult evaluate(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& X,
                    const Eigen::MatrixXd& Y, const std::vector<int>& labels, double lambda);

} // namespace cfl
