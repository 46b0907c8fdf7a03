#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qcdiff/errors.hpp"

namespace qcdiff {

// Exact GELU: x * Phi(x) with the Gaussian CDF.
inline double gelu(double x) { return 0.5 * x * std::erfc(-x / std::numbers::sqrt2); }

inline double gelu_prime(double x) {
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return 0.5 * std::erfc(-x / std::numbers::sqrt2) + x * phi;
}

// Sinusoidal features of a scalar time in [0, 1]: (sin, cos) pairs at
// doubling frequencies.
inline Eigen::VectorXd time_features(double t, int dim) {
    if (dim % 2 != 0) throw ValidationError("time feature dim must be even");
    Eigen::VectorXd f(dim);
    double freq = 1.0;
    for (int k = 0; k < dim / 2; ++k) {
        f(2 * k) = std::sin(2.0 * std::numbers::pi * freq * t);
        f(2 * k + 1) = std::cos(2.0 * std::numbers::pi * freq * t);
        freq *= 2.0;
    }
    return f;
}

// One-cycle learning rate: cosine ramp from peak/div_factor up to the peak
// over pct_start of training, then cosine anneal down to peak/final_div.
inline double one_cycle_lr(long step, long total_steps, double peak_lr, double pct_start = 0.3,
                           double div_factor = 25.0, double final_div = 1e4) {
    if (total_steps <= 1) return peak_lr;
    const double progress = std::min(1.0, static_cast<double>(step) / (total_steps - 1));
    const double lo_start = peak_lr / div_factor;
    const double lo_end = peak_lr / final_div;
    if (progress < pct_start) {
        const double p = progress / pct_start;
        return lo_start + (peak_lr - lo_start) * 0.5 * (1.0 - std::cos(std::numbers::pi * p));
    }
    const double p = (progress - pct_start) / (1.0 - pct_start);
    return lo_end + (peak_lr - lo_end) * 0.5 * (1.0 + std::cos(std::numbers::pi * p));
}

// Adam over a flat parameter vector; a zero gradient leaves the parameters
// unchanged (no weight decay).
class Adam {
  public:
    Adam(Eigen::Index size, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps), m_(Eigen::VectorXd::Zero(size)),
          v_(Eigen::VectorXd::Zero(size)) {}

    void update(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
        if (params.size() != m_.size() || grad.size() != m_.size())
            throw ValidationError("adam: size mismatch");
        ++step_;
        m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
        v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
        params -= (lr / bc1) * m_.cwiseQuotient(((v_ / bc2).cwiseSqrt().array() + eps_).matrix());
    }

    long step() const { return step_; }

  private:
    double beta1_, beta2_, eps_;
    long step_ = 0;
    Eigen::VectorXd m_, v_;
};

}  // namespace qcdiff
