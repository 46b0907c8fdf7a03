#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcdiff/circuit.hpp"
#include "qcdiff/diffusion.hpp"
#include "qcdiff/embedding.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/guidance.hpp"
#include "qcdiff/rng.hpp"
#include "qcdiff/schedule.hpp"

namespace qcdiff {

enum class SampleMode { Joint, Sequential, SingleWGivenH, UnconditionalH, UnconditionalW };

inline SampleMode sample_mode_from_name(const std::string& name) {
    if (name == "joint") return SampleMode::Joint;
    if (name == "sequential") return SampleMode::Sequential;
    if (name == "single_w_given_h") return SampleMode::SingleWGivenH;
    if (name == "unconditional_h") return SampleMode::UnconditionalH;
    if (name == "unconditional_w") return SampleMode::UnconditionalW;
    throw ValidationError("unknown sample mode: " + name);
}

// Everything the ancestral chains need besides the denoiser itself.
struct ModelContext {
    GateSet gate_set;
    TokenBasis token_basis;
    ParamBasis param_basis;
    LatentGeometry geom;
    NoiseSchedule schedule_h;
    NoiseSchedule schedule_w;
};

struct SamplerConfig {
    SampleMode mode = SampleMode::Joint;
    int steps = 100;
    GuidanceParams guidance;
    bool record_trajectory = false;
};

struct TrajectoryPoint {
    double t = 0.0;
    Eigen::VectorXd h;
    Eigen::VectorXd w;
};

struct SampleResult {
    TokenMatrix decoded;
    bool valid = false;
    Circuit circuit;
    std::string error;
    Eigen::VectorXd h0;
    Eigen::VectorXd w0;
    std::vector<TrajectoryPoint> trajectory;
};

namespace detail {

inline void fill_normal(Eigen::MatrixXd& m, std::vector<Rng>& chain_rngs) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = chain_rngs[j].normal();
}

// One ancestral sweep over a batch of chains for a single mode's latent.
// The other mode's input per step is provided by `other_input`, and the
// denoiser sees times (t, t_other) with the moving mode's time on the grid.
struct ChainState {
    Eigen::MatrixXd h;
    Eigen::MatrixXd w;
};

inline Eigen::MatrixXd posterior_step_batch(const Eigen::MatrixXd& z_t,
                                            const Eigen::MatrixXd& x_hat,
                                            const NoiseSchedule& schedule, double s, double t,
                                            std::vector<Rng>& chain_rngs) {
    const double ab_s = schedule.at(s);
    const double ab_t = schedule.at(t);
    const double one_minus_ab_t = 1.0 - ab_t;
    if (one_minus_ab_t <= 0.0) return x_hat;
    const double alpha = ab_t / ab_s;
    const double beta = 1.0 - alpha;
    const double coef_x = std::sqrt(ab_s) * beta / one_minus_ab_t;
    const double coef_z = std::sqrt(alpha) * (1.0 - ab_s) / one_minus_ab_t;
    const double sd = std::sqrt(std::max(0.0, (1.0 - ab_s) / one_minus_ab_t * beta));
    Eigen::MatrixXd z_s(z_t.rows(), z_t.cols());
    for (Eigen::Index j = 0; j < z_t.cols(); ++j)
        for (Eigen::Index i = 0; i < z_t.rows(); ++i)
            z_s(i, j) = coef_x * x_hat(i, j) + coef_z * z_t(i, j) + sd * chain_rngs[j].normal();
    return z_s;
}

}  // namespace detail

// Ancestral sampling on a uniform step grid (joint mode shares one grid for
// both times). Chains run as batch columns with per-chain derived rng
// streams, so each chain's draw sequence is independent of the batch size.
inline std::vector<SampleResult> sample(const Denoiser& den, const ModelContext& ctx,
                                        const SamplerConfig& cfg, const Condition& cond,
                                        int num_samples, Rng rng,
                                        const TokenMatrix* fixed_h0 = nullptr) {
    if (cfg.steps < 1) throw ValidationError("sampler needs steps >= 1");
    if (num_samples < 1) throw ValidationError("sampler needs at least one sample");
    if (cfg.mode == SampleMode::SingleWGivenH && fixed_h0 == nullptr)
        throw ValidationError("single_w_given_h requires a fixed token matrix");

    const LatentGeometry& geom = ctx.geom;
    const int m = num_samples;
    std::vector<Rng> chain_rngs;
    chain_rngs.reserve(m);
    for (int j = 0; j < m; ++j) chain_rngs.push_back(rng.derive("chain", j));

    const double tau = ctx.token_basis.default_temperature();
    std::vector<SampleResult> results(m);
    auto grid_t = [&](int k) { return 1.0 - static_cast<double>(k) / cfg.steps; };

    Eigen::MatrixXd h(geom.h_size(), m), w(geom.w_size(), m);
    Eigen::MatrixXd eps_h(geom.h_size(), m), eps_w(geom.w_size(), m);
    Eigen::MatrixXd vh, vw, xh, xw;

    auto record = [&](double t) {
        if (!cfg.record_trajectory) return;
        for (int j = 0; j < m; ++j)
            results[j].trajectory.push_back({t, h.col(j), w.col(j)});
    };

    const bool runs_h = cfg.mode == SampleMode::Joint || cfg.mode == SampleMode::Sequential ||
                        cfg.mode == SampleMode::UnconditionalH;
    const bool runs_w = cfg.mode != SampleMode::UnconditionalH;

    // Clean h-latent for the parameter-only stages.
    auto encode_fixed_h = [&](const TokenMatrix& tm) {
        CircuitLatent lat = encode_circuit(tm, ctx.gate_set, ctx.token_basis, ctx.param_basis);
        if (!(lat.geom == geom)) throw ValidationError("fixed token matrix geometry mismatch");
        return lat.h0;
    };

    detail::fill_normal(h, chain_rngs);
    detail::fill_normal(w, chain_rngs);
    if (!cfg.guidance.resample_eps_per_step) {
        detail::fill_normal(eps_h, chain_rngs);
        detail::fill_normal(eps_w, chain_rngs);
    }

    auto refresh_eps = [&]() {
        if (cfg.guidance.resample_eps_per_step) {
            detail::fill_normal(eps_h, chain_rngs);
            detail::fill_normal(eps_w, chain_rngs);
        }
    };

    const Condition phi = Condition::make_empty();

    if (cfg.mode == SampleMode::Joint) {
        record(1.0);
        for (int k = 0; k < cfg.steps; ++k) {
            const double t = grid_t(k), s = grid_t(k + 1);
            refresh_eps();
            guided_velocity_batch(den, geom, h, w, t, t, cond, cfg.guidance, eps_h, eps_w, vh, vw);
            xh = std::sqrt(ctx.schedule_h.at(t)) * h - std::sqrt(ctx.schedule_h.beta_bar(t)) * vh;
            xw = std::sqrt(ctx.schedule_w.at(t)) * w - std::sqrt(ctx.schedule_w.beta_bar(t)) * vw;
            h = detail::posterior_step_batch(h, xh, ctx.schedule_h, s, t, chain_rngs);
            w = detail::posterior_step_batch(w, xw, ctx.schedule_w, s, t, chain_rngs);
            record(s);
        }
    } else {
        // Marginal h chain: the w input is fully noisy at time 1 and doubles
        // as the guidance draw so the cross-mode term cancels exactly.
        if (runs_h) {
            const Condition& c_h = cfg.mode == SampleMode::UnconditionalH ? phi : cond;
            record(1.0);
            for (int k = 0; k < cfg.steps; ++k) {
                const double t = grid_t(k), s = grid_t(k + 1);
                refresh_eps();
                detail::fill_normal(w, chain_rngs);  // fresh w_1 each step
                guided_velocity_batch(den, geom, h, w, t, 1.0, c_h, cfg.guidance, eps_h, w, vh,
                                      vw);
                xh = std::sqrt(ctx.schedule_h.at(t)) * h -
                     std::sqrt(ctx.schedule_h.beta_bar(t)) * vh;
                h = detail::posterior_step_batch(h, xh, ctx.schedule_h, s, t, chain_rngs);
                record(s);
            }
        }
        if (runs_w) {
            Eigen::MatrixXd h_in(geom.h_size(), m);
            double t_h = 0.0;
            Condition c_w = cond;
            if (cfg.mode == SampleMode::Sequential) {
                // Re-encode the decoded tokens as the clean conditioning h0.
                for (int j = 0; j < m; ++j) {
                    TokenMatrix tm = decode_tokens(h.col(j), geom, ctx.token_basis, ctx.gate_set,
                                                   tau)
                                         .matrix;
                    h_in.col(j) = encode_fixed_h(tm);
                }
            } else if (cfg.mode == SampleMode::SingleWGivenH) {
                const Eigen::VectorXd fixed = encode_fixed_h(*fixed_h0);
                for (int j = 0; j < m; ++j) h_in.col(j) = fixed;
            } else {  // UnconditionalW: h fully noisy at time 1
                t_h = 1.0;
                c_w = phi;
            }
            detail::fill_normal(w, chain_rngs);
            for (int k = 0; k < cfg.steps; ++k) {
                const double t = grid_t(k), s = grid_t(k + 1);
                refresh_eps();
                if (cfg.mode == SampleMode::UnconditionalW) {
                    detail::fill_normal(h_in, chain_rngs);
                    guided_velocity_batch(den, geom, h_in, w, t_h, t, c_w, cfg.guidance, h_in, eps_w,
                                          vh, vw);
                } else {
                    guided_velocity_batch(den, geom, h_in, w, t_h, t, c_w, cfg.guidance, eps_h,
                                          eps_w, vh, vw);
                }
                xw = std::sqrt(ctx.schedule_w.at(t)) * w -
                     std::sqrt(ctx.schedule_w.beta_bar(t)) * vw;
                w = detail::posterior_step_batch(w, xw, ctx.schedule_w, s, t, chain_rngs);
            }
            if (cfg.mode == SampleMode::SingleWGivenH || cfg.mode == SampleMode::Sequential)
                h = h_in;
        }
    }

    for (int j = 0; j < m; ++j) {
        SampleResult& res = results[j];
        res.h0 = h.col(j);
        res.w0 = w.col(j);
        if (cfg.mode == SampleMode::UnconditionalW) {
            res.decoded = TokenMatrix(geom.num_qubits, geom.num_positions);
            res.valid = true;
            res.circuit = Circuit(geom.num_qubits, {});
            continue;
        }
        if (cfg.mode == SampleMode::SingleWGivenH) {
            res.decoded = *fixed_h0;
            for (int p = 0; p < geom.num_positions; ++p) res.decoded.params[p] = 0.0;
        } else {
            res.decoded =
                decode_tokens(res.h0, geom, ctx.token_basis, ctx.gate_set, tau).matrix;
        }
        if (runs_w) {
            for (int p = 0; p < geom.num_positions; ++p) {
                bool parameterized = false;
                for (int q = 0; q < geom.num_qubits; ++q) {
                    const std::int16_t tk = res.decoded.tok(q, p);
                    if (tk != 0 && tk != ctx.gate_set.padding_token() &&
                        traits(ctx.gate_set.kind_of(tk)).parameterized)
                        parameterized = true;
                }
                if (parameterized)
                    res.decoded.params[p] =
                        decode_param(res.w0.segment(geom.w_offset(p), geom.d_w), ctx.param_basis);
            }
        }
        try {
            res.circuit = detokenize(res.decoded, ctx.gate_set);
            res.valid = true;
        } catch (const ValidationError& e) {
            res.valid = false;
            res.error = e.what();
        }
    }
    return results;
}

}  // namespace qcdiff
