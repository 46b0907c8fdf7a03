#pragma once

#include <Eigen/Dense>

#include "qcdiff/diffusion.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/rng.hpp"

namespace qcdiff {

// Two-axis classifier-free guidance: gamma_* extrapolates against the
// other-mode-dropped branch (evaluated on fresh noise at time 1), lambda_*
// against the empty condition phi.
struct GuidanceParams {
    double gamma_h = 0.3;
    double gamma_w = 0.1;
    double lambda_h = 1.0;
    double lambda_w = 0.35;
    // Whether the other-mode noise draws are refreshed on every step of a
    // chain or frozen at chain start.
    bool resample_eps_per_step = true;

    static GuidanceParams defaults() { return {}; }
    // gamma = lambda = 1 telescopes to the plain conditional branch.
    static GuidanceParams conditional_only() { return {1.0, 1.0, 1.0, 1.0, true}; }
};

// Batched guided velocities, one chain per column. eps_h / eps_w supply the
// fresh standard-normal other-mode latents. The gamma = lambda = 1 and
// gamma = lambda = 0 cases short-circuit to the corresponding branch so the
// algebraic identities hold bit-exactly.
inline void guided_velocity_batch(const Denoiser& den, const LatentGeometry& geom,
                                  const Eigen::MatrixXd& h, const Eigen::MatrixXd& w, double t,
                                  double t_tilde, const Condition& c, const GuidanceParams& g,
                                  const Eigen::MatrixXd& eps_h, const Eigen::MatrixXd& eps_w,
                                  Eigen::MatrixXd& out_vh, Eigen::MatrixXd& out_vw) {
    const Condition phi = Condition::make_empty();
    const bool need_cond = !c.empty && (g.lambda_h != 0.0 || g.lambda_w != 0.0);

    Eigen::MatrixXd cond_vh, cond_vw;          // v(h, w, t, t~, c)
    Eigen::MatrixXd unc_vh, unc_vw;            // v(h, w, t, t~, phi)
    Eigen::MatrixXd hdrop_vh, hdrop_vw;        // v(h, eps_w, t, 1, phi)
    Eigen::MatrixXd wdrop_vh, wdrop_vw;        // v(eps_h, w, 1, t~, phi)

    if (need_cond) den.velocity_batch(geom, h, w, t, t_tilde, c, cond_vh, cond_vw);

    const bool h_collapses = (g.gamma_h == 1.0 && g.lambda_h == 1.0 && need_cond);
    const bool w_collapses = (g.gamma_w == 1.0 && g.lambda_w == 1.0 && need_cond);

    const bool need_unc = !(h_collapses && w_collapses);
    if (need_unc) den.velocity_batch(geom, h, w, t, t_tilde, phi, unc_vh, unc_vw);

    if (h_collapses) {
        out_vh = cond_vh;
    } else if (g.gamma_h == 1.0 && (g.lambda_h == 0.0 || !need_cond)) {
        out_vh = unc_vh;
    } else {
        den.velocity_batch(geom, h, eps_w, t, 1.0, phi, hdrop_vh, hdrop_vw);
        out_vh = hdrop_vh;
        if (g.gamma_h != 0.0) out_vh += g.gamma_h * (unc_vh - hdrop_vh);
        if (need_cond && g.lambda_h != 0.0) out_vh += g.lambda_h * (cond_vh - unc_vh);
    }

    if (w_collapses) {
        out_vw = cond_vw;
    } else if (g.gamma_w == 1.0 && (g.lambda_w == 0.0 || !need_cond)) {
        out_vw = unc_vw;
    } else {
        den.velocity_batch(geom, eps_h, w, 1.0, t_tilde, phi, wdrop_vh, wdrop_vw);
        out_vw = wdrop_vw;
        if (g.gamma_w != 0.0) out_vw += g.gamma_w * (unc_vw - wdrop_vw);
        if (need_cond && g.lambda_w != 0.0) out_vw += g.lambda_w * (cond_vw - unc_vw);
    }
}

// Single-latent form; draws the other-mode noise from the supplied stream.
inline Velocity guided_velocity(const Denoiser& den, const DualLatent& lat, const Condition& c,
                                const GuidanceParams& g, Rng& rng) {
    Eigen::MatrixXd eps_h(lat.geom.h_size(), 1), eps_w(lat.geom.w_size(), 1);
    for (Eigen::Index i = 0; i < eps_h.rows(); ++i) eps_h(i, 0) = rng.normal();
    for (Eigen::Index i = 0; i < eps_w.rows(); ++i) eps_w(i, 0) = rng.normal();
    Eigen::MatrixXd vh, vw;
    guided_velocity_batch(den, lat.geom, lat.h, lat.w, lat.t, lat.t_tilde, c, g, eps_h, eps_w,
                          vh, vw);
    return {vh.col(0), vw.col(0)};
}

}  // namespace qcdiff
