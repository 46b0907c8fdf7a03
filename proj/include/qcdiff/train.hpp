#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcdiff/denoiser_toy.hpp"
#include "qcdiff/diffusion.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/mlp.hpp"
#include "qcdiff/rng.hpp"
#include "qcdiff/schedule.hpp"

namespace qcdiff {

struct TrainItem {
    CircuitLatent latent;
    Condition cond;
};

struct TrainSchedules {
    NoiseSchedule schedule_h;
    NoiseSchedule schedule_w;
    HammingTarget target;  // drives the discrete loss weight
    int d_w = 3;

    double omega_h(double t) const { return weight_h(schedule_h, target, t); }
    double omega_w(double t) const { return weight_w(schedule_w, d_w, t); }
};

struct TrainConfig {
    int batch = 64;
    long steps = 20000;
    double peak_lr = 1e-3;
    double pct_start = 0.3;
    double cfg_drop_prob = 0.10;
    double no_shuffle_prob = 0.05;
    std::uint64_t seed = 0;
    std::string trace_path;       // loss trace CSV, optional
    std::string checkpoint_path;  // last-good checkpoint on divergence, optional
    int snapshot_every = 100;
};

struct TimeSamples {
    Eigen::VectorXd t;
    Eigen::VectorXd t_tilde;
    bool shuffled = true;  // false on the low-discrepancy no-shuffle event
};

// Low-discrepancy diffusion times: sample i draws both times from the
// stratified bin [(i-1)/m, i/m], then the t~ bins are shuffled across the
// batch, except with probability no_shuffle_prob where they stay aligned so
// t and t~ differ by at most 1/m.
inline TimeSamples sample_times(int m, Rng& rng, double no_shuffle_prob = 0.05) {
    if (m < 1) throw ValidationError("batch size must be >= 1");
    TimeSamples out;
    out.t.resize(m);
    out.t_tilde.resize(m);
    for (int i = 0; i < m; ++i) {
        out.t(i) = (i + rng.uniform()) / m;
        out.t_tilde(i) = (i + rng.uniform()) / m;
    }
    out.shuffled = !rng.bernoulli(no_shuffle_prob);
    if (out.shuffled) {
        std::vector<int> perm(m);
        for (int i = 0; i < m; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng.engine());
        Eigen::VectorXd shuffled(m);
        for (int i = 0; i < m; ++i) shuffled(i) = out.t_tilde(perm[i]);
        out.t_tilde = std::move(shuffled);
    }
    return out;
}

// Everything random about one batch, drawn up front; the loss is then a
// deterministic function of the parameters (what finite differences need).
struct LossPlan {
    std::vector<int> items;
    TimeSamples times;
    Eigen::MatrixXd eps_h;
    Eigen::MatrixXd eps_w;
    std::vector<std::uint8_t> dropped;
    int num_dropped = 0;
};

inline LossPlan make_loss_plan(int dataset_size, int batch, const LatentGeometry& geom,
                               double cfg_drop_prob, double no_shuffle_prob, Rng& rng) {
    if (dataset_size < 1) throw ValidationError("empty dataset");
    LossPlan plan;
    plan.items.resize(batch);
    for (int i = 0; i < batch; ++i)
        plan.items[i] = static_cast<int>(rng.index(static_cast<std::uint64_t>(dataset_size)));
    plan.times = sample_times(batch, rng, no_shuffle_prob);
    plan.eps_h.resize(geom.h_size(), batch);
    plan.eps_w.resize(geom.w_size(), batch);
    for (int j = 0; j < batch; ++j) {
        for (Eigen::Index i = 0; i < plan.eps_h.rows(); ++i) plan.eps_h(i, j) = rng.normal();
        for (Eigen::Index i = 0; i < plan.eps_w.rows(); ++i) plan.eps_w(i, j) = rng.normal();
    }
    plan.dropped.resize(batch);
    for (int j = 0; j < batch; ++j) {
        plan.dropped[j] = rng.bernoulli(cfg_drop_prob) ? 1 : 0;
        plan.num_dropped += plan.dropped[j];
    }
    return plan;
}

struct LossResult {
    double loss = 0.0;
    Eigen::VectorXd grads;
};

// Batch loss: mean over samples of
//   omega_h(t) |v_h - v_h_hat|^2 + omega_w(t~) |v_w - v_w_hat|^2
// with velocity targets from the independent forward draws.
inline LossResult loss_on_plan(const ToyDenoiser& den, const std::vector<TrainItem>& items,
                               const LossPlan& plan, const TrainSchedules& sch,
                               bool want_grads = true) {
    const int m = static_cast<int>(plan.items.size());
    const LatentGeometry& geom = den.config().geom;

    ToyDenoiser::Batch batch;
    batch.h.resize(geom.h_size(), m);
    batch.w.resize(geom.w_size(), m);
    batch.t = plan.times.t;
    batch.t_tilde = plan.times.t_tilde;
    batch.cond_raw.resize(den.config().cond_raw_dim, m);
    batch.use_phi.resize(m);

    Eigen::MatrixXd target_vh(geom.h_size(), m), target_vw(geom.w_size(), m);
    Eigen::VectorXd wh(m), ww(m);
    for (int j = 0; j < m; ++j) {
        const TrainItem& item = items[plan.items[j]];
        const double t = plan.times.t(j), tt = plan.times.t_tilde(j);
        const double ah = sch.schedule_h.at(t), aw = sch.schedule_w.at(tt);
        const double sah = std::sqrt(ah), sbh = std::sqrt(std::max(0.0, 1.0 - ah));
        const double saw = std::sqrt(aw), sbw = std::sqrt(std::max(0.0, 1.0 - aw));
        batch.h.col(j) = sah * item.latent.h0 + sbh * plan.eps_h.col(j);
        batch.w.col(j) = saw * item.latent.w0 + sbw * plan.eps_w.col(j);
        target_vh.col(j) = sah * plan.eps_h.col(j) - sbh * item.latent.h0;
        target_vw.col(j) = saw * plan.eps_w.col(j) - sbw * item.latent.w0;
        batch.use_phi[j] = plan.dropped[j] || item.cond.empty;
        batch.cond_raw.col(j) = den.condition_raw(item.cond);
        wh(j) = sch.omega_h(t);
        ww(j) = sch.omega_w(tt);
    }

    ToyDenoiser::Cache cache;
    Eigen::MatrixXd vh, vw;
    den.forward(batch, vh, vw, want_grads ? &cache : nullptr);

    LossResult out;
    Eigen::MatrixXd diff_h = vh - target_vh;
    Eigen::MatrixXd diff_w = vw - target_vw;
    for (int j = 0; j < m; ++j) {
        const double contrib =
            wh(j) * diff_h.col(j).squaredNorm() + ww(j) * diff_w.col(j).squaredNorm();
        if (!std::isfinite(contrib))
            throw NumericalError("non-finite loss at batch sample " + std::to_string(j) +
                                 " (dataset item " + std::to_string(plan.items[j]) + ")");
        out.loss += contrib;
    }
    out.loss /= m;

    if (want_grads) {
        for (int j = 0; j < m; ++j) {
            diff_h.col(j) *= 2.0 * wh(j) / m;
            diff_w.col(j) *= 2.0 * ww(j) / m;
        }
        out.grads = den.backward(batch, cache, diff_h, diff_w);
    }
    return out;
}

inline LossResult loss_batch(const ToyDenoiser& den, const std::vector<TrainItem>& items,
                             const LossPlan& plan, const TrainSchedules& sch) {
    return loss_on_plan(den, items, plan, sch);
}

// Same loss through the generic denoiser contract (no gradients); lets the
// oracle denoiser stand in to validate the target algebra.
inline double loss_eval_only(const Denoiser& den, const std::vector<TrainItem>& items,
                             const LossPlan& plan, const TrainSchedules& sch,
                             const LatentGeometry& geom) {
    double loss = 0.0;
    const int m = static_cast<int>(plan.items.size());
    for (int j = 0; j < m; ++j) {
        const TrainItem& item = items[plan.items[j]];
        const double t = plan.times.t(j), tt = plan.times.t_tilde(j);
        const double ah = sch.schedule_h.at(t), aw = sch.schedule_w.at(tt);
        DualLatent lat;
        lat.geom = geom;
        lat.h = std::sqrt(ah) * item.latent.h0 +
                std::sqrt(std::max(0.0, 1.0 - ah)) * plan.eps_h.col(j);
        lat.w = std::sqrt(aw) * item.latent.w0 +
                std::sqrt(std::max(0.0, 1.0 - aw)) * plan.eps_w.col(j);
        lat.t = t;
        lat.t_tilde = tt;
        const Condition cond = plan.dropped[j] ? Condition::make_empty() : item.cond;
        const Velocity v = den.velocity(lat, cond);
        const Eigen::VectorXd target_vh =
            std::sqrt(ah) * plan.eps_h.col(j) - std::sqrt(std::max(0.0, 1.0 - ah)) * item.latent.h0;
        const Eigen::VectorXd target_vw =
            std::sqrt(aw) * plan.eps_w.col(j) - std::sqrt(std::max(0.0, 1.0 - aw)) * item.latent.w0;
        loss += sch.omega_h(t) * (v.v_h - target_vh).squaredNorm() +
                sch.omega_w(tt) * (v.v_w - target_vw).squaredNorm();
    }
    return loss / m;
}

struct TraceRow {
    long step = 0;
    double loss = 0.0;
    double lr = 0.0;
    int cfg_drops = 0;
};

struct TrainResult {
    std::vector<TraceRow> trace;
    long steps_done = 0;
    long total_condition_draws = 0;
    long total_condition_drops = 0;
    bool diverged = false;
};

inline void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << "step,loss,lr,cfg_drops\n";
    out.precision(12);
    for (const auto& row : trace)
        out << row.step << "," << row.loss << "," << row.lr << "," << row.cfg_drops << "\n";
}

// Adam + one-cycle training. Deterministic for a fixed config seed. On a
// non-finite loss the last snapshot is restored (and written to
// checkpoint_path when set) and the run stops with diverged = true.
inline TrainResult train(ToyDenoiser& den, const std::vector<TrainItem>& items,
                         const TrainConfig& cfg, const TrainSchedules& sch,
                         const ToyModel* bundle_for_checkpoint = nullptr) {
    if (items.empty()) throw ValidationError("training needs a nonempty dataset");
    Rng master(cfg.seed);
    Adam adam(den.param_count());
    Eigen::VectorXd params = den.get_params();
    Eigen::VectorXd last_good = params;
    long last_good_step = 0;

    TrainResult result;
    result.trace.reserve(cfg.steps);
    for (long step = 0; step < cfg.steps; ++step) {
        Rng step_rng = master.derive("step", static_cast<std::uint64_t>(step));
        LossPlan plan = make_loss_plan(static_cast<int>(items.size()), cfg.batch,
                                       den.config().geom, cfg.cfg_drop_prob,
                                       cfg.no_shuffle_prob, step_rng);
        const double lr = one_cycle_lr(step, cfg.steps, cfg.peak_lr, cfg.pct_start);
        bool finite = true;
        LossResult lr_out;
        try {
            lr_out = loss_on_plan(den, items, plan, sch);
        } catch (const NumericalError&) {
            finite = false;
        }
        if (!finite || !lr_out.grads.allFinite()) {
            den.set_params(last_good);
            result.diverged = true;
            result.steps_done = step;
            if (!cfg.checkpoint_path.empty() && bundle_for_checkpoint != nullptr) {
                ToyModel snapshot = *bundle_for_checkpoint;
                snapshot.denoiser.set_params(last_good);
                save_toy_model(cfg.checkpoint_path, snapshot);
            }
            break;
        }
        adam.update(params, lr_out.grads, lr);
        den.set_params(params);
        result.trace.push_back({step, lr_out.loss, lr, plan.num_dropped});
        result.total_condition_draws += cfg.batch;
        result.total_condition_drops += plan.num_dropped;
        result.steps_done = step + 1;
        if ((step + 1) % cfg.snapshot_every == 0) {
            last_good = params;
            last_good_step = step + 1;
        }
    }
    (void)last_good_step;
    if (!cfg.trace_path.empty()) write_trace_csv(cfg.trace_path, result.trace);
    return result;
}

}  // namespace qcdiff
