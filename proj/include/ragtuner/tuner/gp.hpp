#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ragtuner::tuner {

double normal_pdf(double z);
double normal_cdf(double z);

/// Expected improvement in maximization form: E[max(0, f - best - xi)] under
/// f ~ N(mu, sigma^2). Degenerates to max(0, mu - best - xi) as sigma -> 0.
/// Always nonnegative.
double expected_improvement(double mu, double sigma, double best, double xi);

struct GpConfig {
    std::vector<double> length_scale_grid{0.1, 0.2, 0.5, 1.0, 2.0};
    std::vector<double> signal_sd_grid{0.5, 1.0, 2.0};
    double jitter = 1e-6;
};

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
    double sd = 0.0;
};

/// Gaussian-process surrogate over the unit cube: squared-exponential kernel
/// with a shared length scale, targets standardized internally, and
/// hyper-parameters picked by log-marginal-likelihood over a fixed grid.
/// Deterministic for fixed inputs.
class GpSurrogate {
public:
    static GpSurrogate fit(const std::vector<std::vector<double>>& inputs,
                           const std::vector<double>& targets, const GpConfig& config = {});

    /// Posterior in objective units.
    Posterior predict(std::span<const double> x) const;

    double length_scale() const { return length_scale_; }
    double signal_sd() const { return signal_sd_; }
    double jitter() const { return jitter_; }
    double target_mean() const { return y_mean_; }
    double target_sd() const { return y_sd_; }
    std::size_t size() const { return static_cast<std::size_t>(X_.rows()); }

private:
    Eigen::MatrixXd X_;      // n x d, unit cube
    Eigen::VectorXd z_;      // standardized targets
    Eigen::VectorXd alpha_;  // (K + jitter I)^{-1} z
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double length_scale_ = 1.0;
    double signal_sd_ = 1.0;
    double jitter_ = 1e-6;
    double y_mean_ = 0.0;
    double y_sd_ = 1.0;
};

/// Squared-exponential kernel value for one input pair.
double se_kernel(std::span<const double> a, std::span<const double> b, double length_scale,
                 double signal_sd);

}  // namespace ragtuner::tuner
