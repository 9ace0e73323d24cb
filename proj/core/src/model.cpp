#include "cfl/model.hpp"

#include "cfl/errors.hpp"

namespace cfl {

double mu_at(const Hyper& hyper, int epoch) {
    double mu = hyper.mu;
    for (const auto& step : hyper.mu_decay)
        if (epoch >= step.epoch) mu *= step.factor;
    return mu;
}

Eigen::MatrixXd local_gradient(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& xty,
                               const Eigen::MatrixXd& theta) {
    if (gram.cols() != theta.rows() || gram.rows() != xty.rows() || theta.cols() != xty.cols())
        throw DimensionError("local_gradient: inconsistent shapes");
    return gram * theta - xty;
}

FxMatrix local_gradient_fx(const FxMatrix& gram, const FxMatrix& xty, const FxMatrix& theta) {
    return fx_mat_sub(fx_matmul(gram, theta), xty);
}

std::pair<Eigen::MatrixXd, double> aggregate_update(const Eigen::MatrixXd& gsum,
                                                    const Hyper& hyper,
                                                    const Eigen::MatrixXd& theta, int epoch,
                                                    long m_override) {
    const long m = m_override > 0 ? m_override : hyper.m;
    Eigen::MatrixXd grad = gsum / static_cast<double>(m) + hyper.lambda * theta;
    return {theta - mu_at(hyper, epoch) * grad, grad.norm()};
}

std::vector<Eigen::MatrixXd> centralized_gd_oracle(const Eigen::MatrixXd& gram_total,
                                                   const Eigen::MatrixXd& xty_total,
                                                   const Hyper& hyper, int epochs,
                                                   const Eigen::MatrixXd& theta1) {
    std::vector<Eigen::MatrixXd> traj;
    traj.reserve(epochs + 1);
    traj.push_back(theta1);
    Eigen::MatrixXd theta = theta1;
    for (int e = 1; e <= epochs; ++e) {
        Eigen::MatrixXd gsum = local_gradient(gram_total, xty_total, theta);
        theta = aggregate_update(gsum, hyper, theta, e).first;
        traj.push_back(theta);
    }
    return traj;
}

EvalResult evaluate(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& X,
                    const Eigen::MatrixXd& Y, const std::vector<int>& labels, double lambda) {
    if (X.rows() != static_cast<Eigen::Index>(labels.size()))
        throw DimensionError("evaluate: label count does not match sample count");
    Eigen::MatrixXd scores = X * theta;
    long correct = 0;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        int best = 0;
        for (Eigen::Index j = 1; j < scores.cols(); ++j)
            if (scores(i, j) > scores(i, best)) best = static_cast<int>(j);
        if (best == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    EvalResult out;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(scores.rows());
    out.loss = (scores - Y).squaredNorm() / (2.0 * static_cast<double>(X.rows())) +
               0.5 * lambda * theta.squaredNorm();
    return out;
}

} // namespace cfl
