#include "ragtuner/tuner/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ragtuner/errors.hpp"

namespace ragtuner::tuner {

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double expected_improvement(double mu, double sigma, double best, double xi) {
    const double gain = mu - best - xi;
    if (sigma < 1e-12) return std::max(0.0, gain);
    const double z = gain / sigma;
    return std::max(0.0, gain * normal_cdf(z) + sigma * normal_pdf(z));
}

double se_kernel(std::span<const double> a, std::span<const double> b, double length_scale,
                 double signal_sd) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        sq += diff * diff;
    }
    return signal_sd * signal_sd * std::exp(-sq / (2.0 * length_scale * length_scale));
}

GpSurrogate GpSurrogate::fit(const std::vector<std::vector<double>>& inputs,
                             const std::vector<double>& targets, const GpConfig& config) {
    if (inputs.empty() || inputs.size() != targets.size()) {
        throw Error(ErrorCode::DegenerateInputs,
                    "need >= 1 observation and matching target count");
    }
    const auto n = static_cast<Eigen::Index>(inputs.size());
    const auto d = static_cast<Eigen::Index>(inputs.front().size());

    GpSurrogate gp;
    gp.jitter_ = config.jitter;
    gp.X_.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(inputs[i].size()) != d) {
            throw Error(ErrorCode::DegenerateInputs, "ragged input rows");
        }
        for (Eigen::Index j = 0; j < d; ++j) gp.X_(i, j) = inputs[i][j];
    }

    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = targets[i];
    gp.y_mean_ = y.mean();
    double var = (y.array() - gp.y_mean_).square().mean();
    gp.y_sd_ = std::max(std::sqrt(var), 1e-12);
    gp.z_ = (y.array() - gp.y_mean_) / gp.y_sd_;

    // Hyper-parameters by log marginal likelihood over the fixed grid;
    // ties keep the first (shortest length scale, smallest signal sd).
    double best_lml = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd sq_dist(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            sq_dist(i, j) = (gp.X_.row(i) - gp.X_.row(j)).squaredNorm();
        }
    }
    for (double ell : config.length_scale_grid) {
        for (double sf : config.signal_sd_grid) {
            Eigen::MatrixXd K =
                (sf * sf) * (-sq_dist / (2.0 * ell * ell)).array().exp().matrix();
            K.diagonal().array() += config.jitter;
            Eigen::LLT<Eigen::MatrixXd> llt(K);
            if (llt.info() != Eigen::Success) continue;
            Eigen::VectorXd alpha = llt.solve(gp.z_);
            double log_det = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(llt.matrixL()(i, i));
            double lml = -0.5 * gp.z_.dot(alpha) - log_det -
                         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
            if (lml > best_lml) {
                best_lml = lml;
                gp.length_scale_ = ell;
                gp.signal_sd_ = sf;
                gp.llt_ = std::move(llt);
                gp.alpha_ = std::move(alpha);
            }
        }
    }
    if (!std::isfinite(best_lml)) {
        throw Error(ErrorCode::DegenerateInputs, "no kernel in the grid produced a valid fit");
    }
    return gp;
}

Posterior GpSurrogate::predict(std::span<const double> x) const {
    const Eigen::Index n = X_.rows();
    Eigen::VectorXd k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double sq = 0.0;
        for (Eigen::Index j = 0; j < X_.cols(); ++j) {
            double diff = x[static_cast<std::size_t>(j)] - X_(i, j);
            sq += diff * diff;
        }
        k_star(i) = signal_sd_ * signal_sd_ *
                    std::exp(-sq / (2.0 * length_scale_ * length_scale_));
    }
    double mu_z = k_star.dot(alpha_);
    Eigen::VectorXd v = llt_.solve(k_star);
    double var_z = signal_sd_ * signal_sd_ - k_star.dot(v);
    var_z = std::max(var_z, 0.0);

    Posterior out;
    out.mean = y_mean_ + y_sd_ * mu_z;
    out.variance = y_sd_ * y_sd_ * var_z;
    out.sd = std::sqrt(out.variance);
    return out;
}

}  // namespace ragtuner::tuner
