#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcdiff/embedding.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/rng.hpp"
#include "qcdiff/schedule.hpp"

namespace qcdiff {

struct MeanStd {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Monte Carlo probe for token mixing under q(h_t | h_0^(i)). Noise draws are
// pre-projected onto the basis once, so evaluating a new alpha_bar with
// common random numbers only costs a softmax per sample; bisection over
// alpha_bar then sees a smooth monotone function.
class FlipProbe {
  public:
    FlipProbe(const TokenBasis& basis, int samples, Rng rng)
        : num_classes_(basis.num_classes), tau_(basis.default_temperature()) {
        if (samples < 1) throw ValidationError("flip probe needs samples >= 1");
        gram_ = basis.vectors * basis.vectors.transpose();
        eps_proj_.resize(samples, num_classes_);
        cls_.resize(samples);
        Eigen::VectorXd eps(basis.d_h);
        for (int s = 0; s < samples; ++s) {
            for (int k = 0; k < basis.d_h; ++k) eps(k) = rng.normal();
            eps_proj_.row(s) = (basis.vectors * eps).transpose();
            cls_[s] = s % num_classes_;  // uniform average over classes
        }
    }

    int samples() const { return static_cast<int>(cls_.size()); }

    // Softmax probability of the true class, per Monte Carlo sample.
    double p_not_flipped(int s, double alpha_bar) const {
        const double sa = std::sqrt(alpha_bar);
        const double sb = std::sqrt(std::max(0.0, 1.0 - alpha_bar));
        const int i = cls_[s];
        double mx = -std::numeric_limits<double>::infinity();
        logits_.resize(num_classes_);
        for (int j = 0; j < num_classes_; ++j) {
            logits_[j] = (sa * gram_(j, i) + sb * eps_proj_(s, j)) / tau_;
            mx = std::max(mx, logits_[j]);
        }
        double denom = 0.0;
        for (int j = 0; j < num_classes_; ++j) denom += std::exp(logits_[j] - mx);
        return std::exp(logits_[cls_[s]] - mx) / denom;
    }

    MeanStd p_flip(double alpha_bar) const {
        double sum = 0.0, sum2 = 0.0;
        const int m = samples();
        for (int s = 0; s < m; ++s) {
            const double f = 1.0 - p_not_flipped(s, alpha_bar);
            sum += f;
            sum2 += f * f;
        }
        const double mean = sum / m;
        const double var = std::max(0.0, sum2 / m - mean * mean);
        return {mean, std::sqrt(var / m)};
    }

    // Hard (argmax) decode, the Hamming view; temperature drops out.
    MeanStd hamming(double alpha_bar) const {
        const double sa = std::sqrt(alpha_bar);
        const double sb = std::sqrt(std::max(0.0, 1.0 - alpha_bar));
        const int m = samples();
        int flips = 0;
        for (int s = 0; s < m; ++s) {
            const int i = cls_[s];
            int best = 0;
            double best_v = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < num_classes_; ++j) {
                const double v = sa * gram_(j, i) + sb * eps_proj_(s, j);
                if (v > best_v) {
                    best_v = v;
                    best = j;
                }
            }
            flips += (best != i);
        }
        const double p = static_cast<double>(flips) / m;
        return {p, std::sqrt(std::max(0.0, p * (1.0 - p)) / m)};
    }

    // Hard-decode class frequencies for samples that started in class `from`.
    Eigen::VectorXd hard_decode_frequencies(double alpha_bar, int from) const {
        const double sa = std::sqrt(alpha_bar);
        const double sb = std::sqrt(std::max(0.0, 1.0 - alpha_bar));
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(num_classes_);
        int m_from = 0;
        for (int s = 0; s < samples(); ++s) {
            if (cls_[s] != from) continue;
            ++m_from;
            int best = 0;
            double best_v = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < num_classes_; ++j) {
                const double v = sa * gram_(j, from) + sb * eps_proj_(s, j);
                if (v > best_v) {
                    best_v = v;
                    best = j;
                }
            }
            counts(best) += 1.0;
        }
        if (m_from == 0) throw ValidationError("no samples for requested class");
        return counts / m_from;
    }

  private:
    int num_classes_;
    double tau_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd eps_proj_;
    std::vector<int> cls_;
    mutable std::vector<double> logits_;
};

// Probability that a token initially in class i decodes to any other class
// at time t, averaged uniformly over i.
inline MeanStd p_flip(double t, const TokenBasis& basis, const NoiseSchedule& schedule,
                      int samples, Rng rng) {
    FlipProbe probe(basis, samples, rng);
    return probe.p_flip(schedule.at(t));
}

struct CurvePoint {
    double t = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
};

inline std::vector<CurvePoint> hamming_curve(const TokenBasis& basis,
                                             const NoiseSchedule& schedule,
                                             const std::vector<double>& grid, int samples,
                                             Rng rng) {
    std::vector<CurvePoint> curve;
    curve.reserve(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
        FlipProbe probe(basis, samples, rng.derive("hamming", k));
        const MeanStd e = probe.hamming(schedule.at(grid[k]));
        curve.push_back({grid[k], e.mean, e.stderr_});
    }
    return curve;
}

// E[1 - cos((lambda - lambda_hat_t) pi)] with lambda uniform on [-1, 1).
inline std::vector<CurvePoint> circular_loss_curve(const ParamBasis& basis,
                                                   const NoiseSchedule& schedule,
                                                   const std::vector<double>& grid, int samples,
                                                   Rng rng) {
    std::vector<CurvePoint> curve;
    curve.reserve(grid.size());
    for (size_t k = 0; k < grid.size(); ++k) {
        Rng r = rng.derive("circular", k);
        const double ab = schedule.at(grid[k]);
        const double sa = std::sqrt(ab), sb = std::sqrt(std::max(0.0, 1.0 - ab));
        double sum = 0.0, sum2 = 0.0;
        Eigen::VectorXd eps(basis.d_w);
        for (int s = 0; s < samples; ++s) {
            const double lambda = r.uniform(-1.0, 1.0);
            for (int d = 0; d < basis.d_w; ++d) eps(d) = r.normal();
            const Eigen::VectorXd wt = sa * encode_param(lambda, basis) + sb * eps;
            const double loss = 1.0 - std::cos((lambda - decode_param(wt, basis)) * std::numbers::pi);
            sum += loss;
            sum2 += loss * loss;
        }
        const double mean = sum / samples;
        const double var = std::max(0.0, sum2 / samples - mean * mean);
        curve.push_back({grid[k], mean, std::sqrt(var / samples)});
    }
    return curve;
}

// Variance of the wrapped decode error lambda_hat - lambda at a fixed noise
// level; at high SNR it approaches 1 / (SNR_w pi^2 d_w).
inline double lambda_decode_error_variance(const ParamBasis& basis, double alpha_bar, int samples,
                                           Rng rng) {
    const double sa = std::sqrt(alpha_bar), sb = std::sqrt(std::max(0.0, 1.0 - alpha_bar));
    double sum2 = 0.0;
    Eigen::VectorXd eps(basis.d_w);
    for (int s = 0; s < samples; ++s) {
        const double lambda = rng.uniform(-1.0, 1.0);
        for (int d = 0; d < basis.d_w; ++d) eps(d) = rng.normal();
        const Eigen::VectorXd wt = sa * encode_param(lambda, basis) + sb * eps;
        double err = decode_param(wt, basis) - lambda;
        err = std::fmod(err + 3.0, 2.0) - 1.0;  // wrap to (-1, 1]
        sum2 += err * err;
    }
    return sum2 / samples;
}

inline void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << "t,value,stderr\n";
    out.precision(17);
    for (const auto& p : curve) out << p.t << "," << p.value << "," << p.stderr_ << "\n";
}

}  // namespace qcdiff
