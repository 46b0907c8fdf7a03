#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcdiff/embedding.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/rng.hpp"
#include "qcdiff/schedule.hpp"
#include "qcdiff/unitary.hpp"

namespace qcdiff {

// Paired noisy latents with independent diffusion times.
struct DualLatent {
    LatentGeometry geom;
    Eigen::VectorXd h;
    Eigen::VectorXd w;
    double t = 0.0;
    double t_tilde = 0.0;
};

// External conditioning: the flattened target unitary plus a gate-kind
// multi-hot, or the empty condition (a learned vector inside the denoiser).
struct Condition {
    std::vector<double> unitary_features;  // 2 * 4^n reals, (re, im) per entry
    std::vector<double> gate_mask;         // multi-hot over the 8 gate kinds
    bool empty = false;

    static Condition make_empty() {
        Condition c;
        c.empty = true;
        return c;
    }
    static Condition from_unitary(const Unitary& u, const std::vector<double>& mask) {
        Condition c;
        c.unitary_features.reserve(2 * u.dim() * u.dim());
        for (Eigen::Index r = 0; r < u.dim(); ++r)
            for (Eigen::Index col = 0; col < u.dim(); ++col) {
                c.unitary_features.push_back(u.matrix()(r, col).real());
                c.unitary_features.push_back(u.matrix()(r, col).imag());
            }
        c.gate_mask = mask;
        return c;
    }
    size_t feature_size() const { return unitary_features.size() + gate_mask.size(); }
};

struct Velocity {
    Eigen::VectorXd v_h;
    Eigen::VectorXd v_w;
};

// Denoiser contract: (h_t, w_t~, t, t~, c) -> (v_h, v_w), deterministic for
// fixed inputs and parameters. The batched entry point evaluates one column
// per chain at shared times and condition; the default forwards to the
// single-latent call.
class Denoiser {
  public:
    virtual ~Denoiser() = default;

    virtual Velocity velocity(const DualLatent& latent, const Condition& c) const = 0;

    virtual void velocity_batch(const LatentGeometry& geom, const Eigen::MatrixXd& h,
                                const Eigen::MatrixXd& w, double t, double t_tilde,
                                const Condition& c, Eigen::MatrixXd& v_h,
                                Eigen::MatrixXd& v_w) const {
        v_h.resize(h.rows(), h.cols());
        v_w.resize(w.rows(), w.cols());
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            DualLatent lat{geom, h.col(j), w.col(j), t, t_tilde};
            Velocity v = velocity(lat, c);
            v_h.col(j) = v.v_h;
            v_w.col(j) = v.v_w;
        }
    }
};

// z_t = sqrt(alpha_bar) x + sqrt(1 - alpha_bar) eps; the draw is returned
// alongside the latent because velocity targets need it.
struct ForwardSample {
    Eigen::VectorXd z;
    Eigen::VectorXd eps;
};

inline ForwardSample forward_sample(const Eigen::VectorXd& x0, const NoiseSchedule& schedule,
                                    double t, Rng& rng) {
    if (t < 0.0 || t > 1.0) throw ValidationError("diffusion time outside [0, 1]");
    const double ab = schedule.at(t);
    const double sa = std::sqrt(ab), sb = std::sqrt(std::max(0.0, 1.0 - ab));
    ForwardSample out;
    out.eps.resize(x0.size());
    for (Eigen::Index i = 0; i < x0.size(); ++i) out.eps(i) = rng.normal();
    out.z = sa * x0 + sb * out.eps;
    return out;
}

// v_t = sqrt(alpha_bar) eps - sqrt(1 - alpha_bar) x
inline Eigen::VectorXd velocity_target(const Eigen::VectorXd& x0, const Eigen::VectorXd& eps,
                                       const NoiseSchedule& schedule, double t) {
    const double ab = schedule.at(t);
    return std::sqrt(ab) * eps - std::sqrt(std::max(0.0, 1.0 - ab)) * x0;
}

// x = sqrt(alpha_bar) z_t - sqrt(1 - alpha_bar) v
inline Eigen::VectorXd x_from_v(const Eigen::VectorXd& z_t, const Eigen::VectorXd& v,
                                const NoiseSchedule& schedule, double t) {
    const double ab = schedule.at(t);
    return std::sqrt(ab) * z_t - std::sqrt(std::max(0.0, 1.0 - ab)) * v;
}

// Gaussian top-down posterior q(z_s | z_t, x) for 0 <= s < t. With the step
// coefficients alpha = alpha_bar_t / alpha_bar_s and beta = 1 - alpha:
//   mean = sqrt(alpha_bar_s) beta / (1 - alpha_bar_t) * x
//        + sqrt(alpha) (1 - alpha_bar_s) / (1 - alpha_bar_t) * z_t
//   var  = (1 - alpha_bar_s) / (1 - alpha_bar_t) * beta
// Degenerates to x exactly (zero variance) when alpha_bar_s = 1.
inline Eigen::VectorXd posterior_step(const Eigen::VectorXd& z_t, const Eigen::VectorXd& x_hat,
                                      const NoiseSchedule& schedule, double s, double t,
                                      Rng& rng) {
    if (!(0.0 <= s && s < t && t <= 1.0))
        throw ValidationError("posterior_step requires 0 <= s < t <= 1");
    const double ab_s = schedule.at(s);
    const double ab_t = schedule.at(t);
    const double one_minus_ab_t = 1.0 - ab_t;
    if (one_minus_ab_t <= 0.0) return x_hat;  // no noise at t: chain already clean
    const double alpha = ab_t / ab_s;
    const double beta = 1.0 - alpha;
    const double coef_x = std::sqrt(ab_s) * beta / one_minus_ab_t;
    const double coef_z = std::sqrt(alpha) * (1.0 - ab_s) / one_minus_ab_t;
    const double var = (1.0 - ab_s) / one_minus_ab_t * beta;
    const double sd = std::sqrt(std::max(0.0, var));
    Eigen::VectorXd z_s(z_t.size());
    for (Eigen::Index i = 0; i < z_s.size(); ++i)
        z_s(i) = coef_x * x_hat(i) + coef_z * z_t(i) + sd * rng.normal();
    return z_s;
}

// Returns the exact velocity target for a planted clean latent pair; used to
// validate the sampling chain independently of any trained model.
class OracleDenoiser : public Denoiser {
  public:
    OracleDenoiser(CircuitLatent planted, NoiseSchedule schedule_h, NoiseSchedule schedule_w)
        : planted_(std::move(planted)),
          schedule_h_(std::move(schedule_h)),
          schedule_w_(std::move(schedule_w)) {}

    const CircuitLatent& planted() const { return planted_; }

    Velocity velocity(const DualLatent& latent, const Condition&) const override {
        Velocity v;
        v.v_h = exact_velocity(latent.h, planted_.h0, schedule_h_.at(latent.t));
        v.v_w = exact_velocity(latent.w, planted_.w0, schedule_w_.at(latent.t_tilde));
        return v;
    }

  private:
    // v = (sqrt(alpha_bar) z - x) / sqrt(1 - alpha_bar); at alpha_bar -> 1
    // the chain is already at x and any consistent velocity is zero.
    static Eigen::VectorXd exact_velocity(const Eigen::VectorXd& z, const Eigen::VectorXd& x,
                                          double alpha_bar) {
        const double b = 1.0 - alpha_bar;
        if (b <= 1e-300) return Eigen::VectorXd::Zero(z.size());
        return (std::sqrt(alpha_bar) * z - x) / std::sqrt(b);
    }

    CircuitLatent planted_;
    NoiseSchedule schedule_h_;
    NoiseSchedule schedule_w_;
};

}  // namespace qcdiff
