#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qcdiff/dataset.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/sampler.hpp"
#include "qcdiff/simulator.hpp"
#include "qcdiff/stats.hpp"
#include "qcdiff/unitary.hpp"

namespace qcdiff {

struct EvalTarget {
    CMatrix unitary;
    std::vector<double> gate_mask;
};

struct EvalReport {
    std::vector<std::vector<double>> infidelities;  // per target, per sample
    std::vector<double> min_infidelity;             // per target
    long invalid_samples = 0;                       // undecodable draws, scored 1.0
    nlohmann::json config_echo;
};

inline std::vector<EvalTarget> eval_targets_from_dataset(const Dataset& test) {
    std::vector<EvalTarget> targets;
    targets.reserve(test.records.size());
    for (const auto& rec : test.records) targets.push_back({rec.unitary, rec.gate_mask});
    return targets;
}

// Best-of-k compilation benchmark: sample circuits per target, score each
// with the phase-invariant infidelity (undecodable samples count as 1).
inline EvalReport evaluate(const Denoiser& den, const ModelContext& ctx,
                           const std::vector<EvalTarget>& targets, int samples_per_target,
                           int steps, const GuidanceParams& guidance, Rng rng) {
    if (targets.empty()) throw ValidationError("evaluate: no targets");
    if (samples_per_target < 1) throw ValidationError("evaluate: samples_per_target >= 1");
    EvalReport report;
    report.config_echo = {{"samples_per_target", samples_per_target},
                          {"steps", steps},
                          {"targets", targets.size()},
                          {"guidance",
                           {{"gamma_h", guidance.gamma_h},
                            {"gamma_w", guidance.gamma_w},
                            {"lambda_h", guidance.lambda_h},
                            {"lambda_w", guidance.lambda_w}}}};

    SamplerConfig cfg;
    cfg.mode = SampleMode::Joint;
    cfg.steps = steps;
    cfg.guidance = guidance;

    for (size_t ti = 0; ti < targets.size(); ++ti) {
        const Unitary target(targets[ti].unitary);
        if (target.dim() != (Eigen::Index(1) << ctx.geom.num_qubits))
            throw ValidationError("target dimension does not match model geometry");
        const Condition cond = Condition::from_unitary(target, targets[ti].gate_mask);
        auto samples = sample(den, ctx, cfg, cond, samples_per_target, rng.derive("target", ti));
        std::vector<double> inf;
        inf.reserve(samples.size());
        for (const auto& s : samples) {
            if (!s.valid) {
                ++report.invalid_samples;
                inf.push_back(1.0);
                continue;
            }
            inf.push_back(infidelity(circuit_unitary(s.circuit), target));
        }
        double best = 1.0;
        for (double v : inf) best = std::min(best, v);
        report.infidelities.push_back(std::move(inf));
        report.min_infidelity.push_back(best);
    }
    return report;
}

inline void write_eval_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << "target,sample,infidelity\n";
    out.precision(12);
    for (size_t t = 0; t < report.infidelities.size(); ++t)
        for (size_t s = 0; s < report.infidelities[t].size(); ++s)
            out << t << "," << s << "," << report.infidelities[t][s] << "\n";
}

inline nlohmann::json eval_report_json(const EvalReport& report) {
    nlohmann::json j;
    j["config"] = report.config_echo;
    j["min_infidelity"] = report.min_infidelity;
    j["invalid_samples"] = report.invalid_samples;
    Histogram all(0.0, 1.0, 50), best(0.0, 1.0, 50);
    for (const auto& list : report.infidelities)
        for (double v : list) all.add(v);
    for (double v : report.min_infidelity) best.add(v);
    j["histogram_all"] = all.counts;
    j["histogram_min"] = best.counts;
    return j;
}

}  // namespace qcdiff
