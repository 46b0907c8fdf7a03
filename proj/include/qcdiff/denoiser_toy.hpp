#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qcdiff/diffusion.hpp"
#include "qcdiff/embedding.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/mlp.hpp"
#include "qcdiff/rng.hpp"
#include "qcdiff/sampler.hpp"
#include "qcdiff/schedule.hpp"

namespace qcdiff {

struct ToyDenoiserConfig {
    LatentGeometry geom;
    int cond_raw_dim = 0;       // flattened unitary entries + 8-way gate mask
    int cond_feature_dim = 32;
    int time_feature_dim = 8;   // per time axis
    std::vector<int> hidden = {256, 256, 256};

    int input_dim() const {
        return geom.h_size() + geom.w_size() + 2 * time_feature_dim + cond_feature_dim;
    }
    int output_dim() const { return geom.h_size() + geom.w_size(); }
};

// Small fully-connected denoiser: flattened latents plus sinusoidal time
// features and a projected condition (or the learned empty-condition vector
// phi) feed a GELU trunk whose output splits into the two mode velocities.
// Forward and backward passes are explicit batched matrix algebra.
class ToyDenoiser : public Denoiser {
  public:
    struct Batch {
        Eigen::MatrixXd h;                  // h_size x m
        Eigen::MatrixXd w;                  // w_size x m
        Eigen::VectorXd t;                  // per column
        Eigen::VectorXd t_tilde;
        Eigen::MatrixXd cond_raw;           // cond_raw_dim x m
        std::vector<std::uint8_t> use_phi;  // per column
        Eigen::Index cols() const { return h.cols(); }
    };

    struct Cache {
        Eigen::MatrixXd x;                   // assembled input
        std::vector<Eigen::MatrixXd> pre;    // pre-activations per trunk layer
        std::vector<Eigen::MatrixXd> act;    // activations fed to each layer
    };

    ToyDenoiser(ToyDenoiserConfig cfg, Rng rng) : cfg_(std::move(cfg)) {
        if (cfg_.cond_raw_dim < 1) throw ValidationError("condition dimension required");
        const int in = cfg_.input_dim(), out = cfg_.output_dim();
        std::vector<int> widths;
        widths.push_back(in);
        for (int h : cfg_.hidden) widths.push_back(h);
        widths.push_back(out);
        auto init = [&rng](Eigen::MatrixXd& m, double scale) {
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = scale * rng.normal();
        };
        w_cond_.resize(cfg_.cond_feature_dim, cfg_.cond_raw_dim);
        init(w_cond_, std::sqrt(1.0 / cfg_.cond_raw_dim));
        b_cond_ = Eigen::VectorXd::Zero(cfg_.cond_feature_dim);
        phi_.resize(cfg_.cond_feature_dim);
        for (Eigen::Index i = 0; i < phi_.size(); ++i) phi_(i) = 0.1 * rng.normal();
        for (size_t l = 0; l + 1 < widths.size(); ++l) {
            Eigen::MatrixXd w(widths[l + 1], widths[l]);
            const bool last = (l + 2 == widths.size());
            init(w, (last ? 0.1 : std::sqrt(2.0)) / std::sqrt(static_cast<double>(widths[l])));
            weights_.push_back(std::move(w));
            biases_.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
        }
    }

    const ToyDenoiserConfig& config() const { return cfg_; }

    Eigen::VectorXd condition_raw(const Condition& c) const {
        Eigen::VectorXd raw = Eigen::VectorXd::Zero(cfg_.cond_raw_dim);
        if (c.empty) return raw;
        if (static_cast<int>(c.feature_size()) != cfg_.cond_raw_dim)
            throw ValidationError("condition feature size mismatch: expected " +
                                  std::to_string(cfg_.cond_raw_dim) + ", got " +
                                  std::to_string(c.feature_size()));
        Eigen::Index k = 0;
        for (double v : c.unitary_features) raw(k++) = v;
        for (double v : c.gate_mask) raw(k++) = v;
        return raw;
    }

    void forward(const Batch& batch, Eigen::MatrixXd& v_h, Eigen::MatrixXd& v_w,
                 Cache* cache = nullptr) const {
        const Eigen::Index m = batch.cols();
        const int hs = cfg_.geom.h_size(), ws = cfg_.geom.w_size(), tf = cfg_.time_feature_dim;
        Eigen::MatrixXd x(cfg_.input_dim(), m);
        x.topRows(hs) = batch.h;
        x.middleRows(hs, ws) = batch.w;
        for (Eigen::Index j = 0; j < m; ++j) {
            x.col(j).segment(hs + ws, tf) = time_features(batch.t(j), tf);
            x.col(j).segment(hs + ws + tf, tf) = time_features(batch.t_tilde(j), tf);
        }
        Eigen::MatrixXd cond = w_cond_ * batch.cond_raw;
        cond.colwise() += b_cond_;
        for (Eigen::Index j = 0; j < m; ++j)
            if (batch.use_phi[j]) cond.col(j) = phi_;
        x.bottomRows(cfg_.cond_feature_dim) = cond;

        if (cache) {
            cache->pre.clear();
            cache->act.clear();
            cache->x = x;
        }
        Eigen::MatrixXd a = x;
        for (size_t l = 0; l < weights_.size(); ++l) {
            if (cache) cache->act.push_back(a);
            Eigen::MatrixXd z = weights_[l] * a;
            z.colwise() += biases_[l];
            if (l + 1 < weights_.size()) {
                if (cache) cache->pre.push_back(z);
                a = z.unaryExpr([](double v) { return gelu(v); });
            } else {
                a = std::move(z);
            }
        }
        v_h = a.topRows(hs);
        v_w = a.bottomRows(ws);
    }

    // Backpropagate dL/dv into a flat gradient matching get_params() layout.
    Eigen::VectorXd backward(const Batch& batch, const Cache& cache, const Eigen::MatrixXd& d_vh,
                             const Eigen::MatrixXd& d_vw) const {
        const int hs = cfg_.geom.h_size(), ws = cfg_.geom.w_size();
        Eigen::MatrixXd delta(hs + ws, batch.cols());
        delta.topRows(hs) = d_vh;
        delta.bottomRows(ws) = d_vw;

        std::vector<Eigen::MatrixXd> grad_w(weights_.size());
        std::vector<Eigen::VectorXd> grad_b(weights_.size());
        for (size_t li = weights_.size(); li-- > 0;) {
            grad_w[li] = delta * cache.act[li].transpose();
            grad_b[li] = delta.rowwise().sum();
            if (li > 0) {
                Eigen::MatrixXd da = weights_[li].transpose() * delta;
                delta = da.cwiseProduct(
                    cache.pre[li - 1].unaryExpr([](double v) { return gelu_prime(v); }));
            } else {
                delta = weights_[0].transpose() * delta;
            }
        }
        // delta now holds dL/dx; route its condition block to the projector
        // or to phi per column.
        Eigen::MatrixXd d_cond = delta.bottomRows(cfg_.cond_feature_dim);
        Eigen::MatrixXd grad_wc = Eigen::MatrixXd::Zero(w_cond_.rows(), w_cond_.cols());
        Eigen::VectorXd grad_bc = Eigen::VectorXd::Zero(b_cond_.size());
        Eigen::VectorXd grad_phi = Eigen::VectorXd::Zero(phi_.size());
        for (Eigen::Index j = 0; j < batch.cols(); ++j) {
            if (batch.use_phi[j]) {
                grad_phi += d_cond.col(j);
            } else {
                grad_wc += d_cond.col(j) * batch.cond_raw.col(j).transpose();
                grad_bc += d_cond.col(j);
            }
        }

        Eigen::VectorXd flat(param_count());
        Eigen::Index off = 0;
        auto put_m = [&](const Eigen::MatrixXd& m) {
            Eigen::Map<Eigen::VectorXd>(flat.data() + off, m.size()) =
                Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
            off += m.size();
        };
        auto put_v = [&](const Eigen::VectorXd& v) {
            flat.segment(off, v.size()) = v;
            off += v.size();
        };
        put_m(grad_wc);
        put_v(grad_bc);
        put_v(grad_phi);
        for (size_t l = 0; l < weights_.size(); ++l) {
            put_m(grad_w[l]);
            put_v(grad_b[l]);
        }
        return flat;
    }

    Eigen::Index param_count() const {
        Eigen::Index n = w_cond_.size() + b_cond_.size() + phi_.size();
        for (size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
        return n;
    }

    Eigen::VectorXd get_params() const {
        Eigen::VectorXd flat(param_count());
        Eigen::Index off = 0;
        auto put_m = [&](const Eigen::MatrixXd& m) {
            Eigen::Map<Eigen::VectorXd>(flat.data() + off, m.size()) =
                Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
            off += m.size();
        };
        auto put_v = [&](const Eigen::VectorXd& v) {
            flat.segment(off, v.size()) = v;
            off += v.size();
        };
        put_m(w_cond_);
        put_v(b_cond_);
        put_v(phi_);
        for (size_t l = 0; l < weights_.size(); ++l) {
            put_m(weights_[l]);
            put_v(biases_[l]);
        }
        return flat;
    }

    void set_params(const Eigen::VectorXd& flat) {
        if (flat.size() != param_count()) throw ValidationError("parameter vector size mismatch");
        Eigen::Index off = 0;
        auto take_m = [&](Eigen::MatrixXd& m) {
            Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(off, m.size());
            off += m.size();
        };
        auto take_v = [&](Eigen::VectorXd& v) {
            v = flat.segment(off, v.size());
            off += v.size();
        };
        take_m(w_cond_);
        take_v(b_cond_);
        take_v(phi_);
        for (size_t l = 0; l < weights_.size(); ++l) {
            take_m(weights_[l]);
            take_v(biases_[l]);
        }
    }

    Velocity velocity(const DualLatent& lat, const Condition& c) const override {
        Eigen::MatrixXd vh, vw;
        velocity_batch(lat.geom, lat.h, lat.w, lat.t, lat.t_tilde, c, vh, vw);
        return {vh.col(0), vw.col(0)};
    }

    void velocity_batch(const LatentGeometry& geom, const Eigen::MatrixXd& h,
                        const Eigen::MatrixXd& w, double t, double t_tilde, const Condition& c,
                        Eigen::MatrixXd& v_h, Eigen::MatrixXd& v_w) const override {
        if (!(geom == cfg_.geom)) throw ValidationError("latent geometry mismatch");
        const Eigen::Index m = h.cols();
        Batch batch;
        batch.h = h;
        batch.w = w;
        batch.t = Eigen::VectorXd::Constant(m, t);
        batch.t_tilde = Eigen::VectorXd::Constant(m, t_tilde);
        batch.cond_raw = condition_raw(c).replicate(1, m);
        batch.use_phi.assign(m, c.empty ? 1 : 0);
        forward(batch, v_h, v_w);
    }

  private:
    ToyDenoiserConfig cfg_;
    Eigen::MatrixXd w_cond_;
    Eigen::VectorXd b_cond_;
    Eigen::VectorXd phi_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

// Trained-model bundle: everything sampling and evaluation need.
struct ToyModel {
    GateSet gate_set;
    TokenBasis token_basis;
    ParamBasis param_basis;
    NoiseSchedule schedule_h;
    NoiseSchedule schedule_w;
    HammingTarget target;
    ToyDenoiser denoiser;

    ModelContext context() const {
        return {gate_set,  token_basis,        param_basis,
                denoiser.config().geom, schedule_h, schedule_w};
    }
};

// Checkpoint format: "QCKP" magic, u32 version, u64 JSON header length, the
// JSON header (architecture, bases, schedules), then the raw float64
// parameter blob.
inline void save_toy_model(const std::string& path, const ToyModel& model) {
    nlohmann::json j;
    j["format_version"] = 1;
    std::vector<std::string> kind_names;
    for (Gate g : model.gate_set.kinds()) kind_names.push_back(gate_name(g));
    j["gate_set"] = kind_names;
    const auto& cfg = model.denoiser.config();
    j["geometry"] = {{"num_qubits", cfg.geom.num_qubits},
                     {"num_positions", cfg.geom.num_positions},
                     {"d_h", cfg.geom.d_h},
                     {"d_w", cfg.geom.d_w}};
    j["cond_raw_dim"] = cfg.cond_raw_dim;
    j["cond_feature_dim"] = cfg.cond_feature_dim;
    j["time_feature_dim"] = cfg.time_feature_dim;
    j["hidden"] = cfg.hidden;
    j["target"] = {{"kind", model.target.name()}, {"num_classes", model.target.num_classes}};
    auto dump_schedule = [](const NoiseSchedule& s) {
        return nlohmann::json{{"T", s.T}, {"label", s.label}, {"alpha_bar", s.alpha_bar}};
    };
    j["schedule_h"] = dump_schedule(model.schedule_h);
    j["schedule_w"] = dump_schedule(model.schedule_w);
    std::vector<double> tb(model.token_basis.vectors.data(),
                           model.token_basis.vectors.data() + model.token_basis.vectors.size());
    j["token_basis"] = {{"d_h", model.token_basis.d_h},
                        {"num_classes", model.token_basis.num_classes},
                        {"vectors", tb}};
    j["param_basis"] = {{"d_w", model.param_basis.d_w},
                        {"v1", std::vector<double>(model.param_basis.v1.data(),
                                                   model.param_basis.v1.data() + model.param_basis.v1.size())},
                        {"v2", std::vector<double>(model.param_basis.v2.data(),
                                                   model.param_basis.v2.data() + model.param_basis.v2.size())}};
    const Eigen::VectorXd params = model.denoiser.get_params();
    j["param_count"] = params.size();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    const char magic[4] = {'Q', 'C', 'K', 'P'};
    out.write(magic, 4);
    const std::uint32_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::string header = j.dump();
    const std::uint64_t len = header.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(params.size() * sizeof(double)));
}

inline ToyModel load_toy_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t len = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in || std::string(magic, 4) != "QCKP") throw ValidationError("bad checkpoint magic");
    if (version != 1) throw ValidationError("unsupported checkpoint version");
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    nlohmann::json j = nlohmann::json::parse(header);

    std::vector<Gate> kinds;
    for (const auto& name : j.at("gate_set")) kinds.push_back(gate_from_name(name));
    GateSet gate_set(kinds);

    TokenBasis tb;
    tb.d_h = j.at("token_basis").at("d_h").get<int>();
    tb.num_classes = j.at("token_basis").at("num_classes").get<int>();
    auto tb_data = j.at("token_basis").at("vectors").get<std::vector<double>>();
    tb.vectors = Eigen::Map<Eigen::MatrixXd>(tb_data.data(), tb.num_classes, tb.d_h);

    ParamBasis pb;
    pb.d_w = j.at("param_basis").at("d_w").get<int>();
    auto v1 = j.at("param_basis").at("v1").get<std::vector<double>>();
    auto v2 = j.at("param_basis").at("v2").get<std::vector<double>>();
    pb.v1 = Eigen::Map<Eigen::VectorXd>(v1.data(), static_cast<Eigen::Index>(v1.size()));
    pb.v2 = Eigen::Map<Eigen::VectorXd>(v2.data(), static_cast<Eigen::Index>(v2.size()));

    auto load_schedule = [](const nlohmann::json& js) {
        NoiseSchedule s;
        s.T = js.at("T").get<int>();
        s.label = js.at("label").get<std::string>();
        s.alpha_bar = js.at("alpha_bar").get<std::vector<double>>();
        s.validate();
        return s;
    };

    ToyDenoiserConfig cfg;
    cfg.geom = {j.at("geometry").at("num_qubits").get<int>(),
                j.at("geometry").at("num_positions").get<int>(),
                j.at("geometry").at("d_h").get<int>(), j.at("geometry").at("d_w").get<int>()};
    cfg.cond_raw_dim = j.at("cond_raw_dim").get<int>();
    cfg.cond_feature_dim = j.at("cond_feature_dim").get<int>();
    cfg.time_feature_dim = j.at("time_feature_dim").get<int>();
    cfg.hidden = j.at("hidden").get<std::vector<int>>();

    ToyModel model{std::move(gate_set),
                   std::move(tb),
                   std::move(pb),
                   load_schedule(j.at("schedule_h")),
                   load_schedule(j.at("schedule_w")),
                   HammingTarget::from_name(j.at("target").at("kind").get<std::string>(),
                                            j.at("target").at("num_classes").get<int>()),
                   ToyDenoiser(cfg, Rng(0))};

    const Eigen::Index count = j.at("param_count").get<Eigen::Index>();
    if (count != model.denoiser.param_count()) throw ValidationError("checkpoint parameter count mismatch");
    Eigen::VectorXd params(count);
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw ValidationError("truncated checkpoint");
    model.denoiser.set_params(params);
    return model;
}

}  // namespace qcdiff
