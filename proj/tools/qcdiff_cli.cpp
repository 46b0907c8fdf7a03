// Command-line front door: dataset generation, splitting, schedule learning,
// training, sampling, evaluation, gate-pair encoding, corruption benchmarks
// and target construction. JSON results go to stdout, human summaries to
// stderr. Exit codes: 0 success, 2 validation failure, 3 numerical failure.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcdiff/config.hpp"
#include "qcdiff/corruption.hpp"
#include "qcdiff/dataset.hpp"
#include "qcdiff/denoiser_toy.hpp"
#include "qcdiff/evaluate.hpp"
#include "qcdiff/gpe.hpp"
#include "qcdiff/mixing.hpp"
#include "qcdiff/sampler.hpp"
#include "qcdiff/schedule_learn.hpp"
#include "qcdiff/stats.hpp"
#include "qcdiff/targets.hpp"
#include "qcdiff/train.hpp"

using namespace qcdiff;
using nlohmann::json;

namespace {

std::vector<Gate> parse_kinds(const std::string& csv) {
    if (csv == "all") return {kAllGates.begin(), kAllGates.end()};
    std::vector<Gate> kinds;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) kinds.push_back(gate_from_name(tok));
    if (kinds.empty()) throw ValidationError("empty gate kind list");
    return kinds;
}

GuidanceParams parse_guidance(const std::string& spec) {
    if (spec == "default") return GuidanceParams::defaults();
    if (spec == "none") return GuidanceParams::conditional_only();
    GuidanceParams g;
    std::stringstream ss(spec);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != 4)
        throw ValidationError("guidance must be 'default', 'none' or gamma_h,gamma_w,lambda_h,lambda_w");
    g.gamma_h = vals[0];
    g.gamma_w = vals[1];
    g.lambda_h = vals[2];
    g.lambda_w = vals[3];
    return g;
}

void emit(const json& result, const std::string& summary) {
    std::cout << result.dump(2) << std::endl;
    std::cerr << summary << std::endl;
}

// Config files are handled by an argv pre-pass: values fill in any option
// of the invoked subcommand that was not given explicitly on the command
// line. The option below only documents the flag; the pre-pass consumes it.
void attach_config(CLI::App* cmd) {
    static std::string ignored;
    cmd->add_option("--config", ignored, "versioned key-value config file (defaults for any flag)");
}

std::vector<std::string> apply_config_defaults(const CLI::App& app,
                                               const std::vector<std::string>& argv_in) {
    std::vector<std::string> args;
    std::string config_path;
    for (size_t i = 0; i < argv_in.size(); ++i) {
        const std::string& a = argv_in[i];
        if (a == "--config") {
            if (i + 1 >= argv_in.size()) throw ValidationError("--config needs a file argument");
            config_path = argv_in[++i];
        } else if (a.rfind("--config=", 0) == 0) {
            config_path = a.substr(9);
        } else {
            args.push_back(a);
        }
    }
    if (config_path.empty()) return args;
    const KeyValueConfig cfg = KeyValueConfig::load(config_path);
    if (args.empty() || args[0].rfind('-', 0) == 0) return args;  // let parse report usage
    const CLI::App* sub = app.get_subcommand_no_throw(args[0]);
    if (sub == nullptr) return args;
    for (const auto& [key, value] : cfg.values()) {
        if (key == "version") continue;
        const std::string flag = "--" + key;
        if (sub->get_option_no_throw(flag) == nullptr) continue;
        bool given = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (given) continue;
        args.push_back(flag);
        args.push_back(value);
    }
    return args;
}

struct TrainCliOptions {
    std::string data_path;
    std::string out_path = "model.qckp";
    std::string trace_path;
    std::string schedule_csv;
    std::string target_name = "linear";
    int d_h = 13, d_w = 3, T = 1000;
    long steps = 20000;
    int batch = 64;
    double peak_lr = 1e-3;
    double drop = 0.10;
    double no_shuffle = 0.05;
    int width = 256, depth = 3;
    int cond_feature = 32, time_feature = 8;
    int sched_samples = 8192, sched_grid = 64;
    double sched_tol = 0.02;
    std::uint64_t seed = 0;
};

ToyModel build_and_train(const TrainCliOptions& opt, json& result) {
    const Dataset data = read_dataset(opt.data_path);
    const GateSet set = data.config.gate_set();
    Rng master(opt.seed);

    TokenBasis tb = build_token_basis(set.num_classes(), opt.d_h, master.derive("token-basis"));
    ParamBasis pb = build_param_basis(opt.d_w, master.derive("param-basis"));
    const HammingTarget target = HammingTarget::from_name(opt.target_name, set.num_classes());

    NoiseSchedule sched_h;
    if (!opt.schedule_csv.empty()) {
        sched_h = read_schedule_csv(opt.schedule_csv);
        if (sched_h.T != opt.T) throw ValidationError("schedule csv has the wrong step count");
    } else {
        std::cerr << "learning discrete schedule (" << opt.target_name << ", N="
                  << set.num_classes() << ") ..." << std::endl;
        const LearnedSchedule learned =
            learn_discrete_schedule(tb, target, opt.T, opt.sched_samples, opt.sched_tol,
                                    master.derive("schedule"), opt.sched_grid);
        sched_h = learned.schedule;
        result["schedule_residual"] = learned.max_residual;
        result["schedule_mse"] = learned.mse_loss;
    }
    NoiseSchedule sched_w = fixed_schedule(FixedSchedule::CosineAlpha2, opt.T);

    ToyDenoiserConfig cfg;
    cfg.geom = {data.config.n, data.config.max_positions, opt.d_h, opt.d_w};
    cfg.cond_raw_dim = 2 * (1 << (2 * data.config.n)) + static_cast<int>(kAllGates.size());
    cfg.cond_feature_dim = opt.cond_feature;
    cfg.time_feature_dim = opt.time_feature;
    cfg.hidden.assign(opt.depth, opt.width);
    ToyDenoiser denoiser(cfg, master.derive("init"));

    std::vector<TrainItem> items;
    for (auto& [lat, cond] : dataset_latents(data, tb, pb))
        items.push_back({std::move(lat), std::move(cond)});

    TrainSchedules sch{sched_h, sched_w, target, opt.d_w};
    TrainConfig tc;
    tc.batch = opt.batch;
    tc.steps = opt.steps;
    tc.peak_lr = opt.peak_lr;
    tc.cfg_drop_prob = opt.drop;
    tc.no_shuffle_prob = opt.no_shuffle;
    tc.seed = master.derive("train").seed();
    tc.trace_path = opt.trace_path;
    tc.checkpoint_path = opt.out_path + ".lastgood";

    ToyModel model{set, std::move(tb), std::move(pb), std::move(sched_h), std::move(sched_w),
                   target, std::move(denoiser)};
    const TrainResult tr = train(model.denoiser, items, tc, sch, &model);
    if (tr.diverged) throw NumericalError("training diverged at step " + std::to_string(tr.steps_done));

    const auto window = [&](size_t from, size_t count) {
        double s = 0.0;
        size_t m = 0;
        for (size_t i = from; i < std::min(tr.trace.size(), from + count); ++i, ++m)
            s += tr.trace[i].loss;
        return m ? s / m : 0.0;
    };
    result["records"] = data.records.size();
    result["steps"] = tr.steps_done;
    result["initial_loss"] = window(0, 50);
    result["final_loss"] = window(tr.trace.size() > 50 ? tr.trace.size() - 50 : 0, 50);
    result["cfg_drop_rate"] =
        static_cast<double>(tr.total_condition_drops) / std::max(1L, tr.total_condition_draws);

    // loss-weight area diagnostic for the chosen schedule pairing
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(k / 100.0);
    const AreaBalance bal = area_balance(weight_curve_h(model.schedule_h, target, grid),
                                         weight_curve_w(model.schedule_w, opt.d_w, grid));
    result["weight_area_ratio"] = bal.ratio;
    result["weight_area_flagged"] = bal.flagged;
    return model;
}

int run(int argc, char** argv) {
    CLI::App app{"multimodal diffusion toolkit for quantum-circuit synthesis"};
    app.require_subcommand(1);

    // ---- gen-data ----
    auto* gen = app.add_subcommand("gen-data", "generate a random circuit-unitary dataset");
    DatasetConfig gcfg;
    std::string gen_kinds = "h,cx,rx";
    std::string gen_out = "data.qcds";
    bool gen_validate = false;
    std::uint64_t gen_seed = 0;
    gen->add_option("--out", gen_out, "output dataset file");
    gen->add_option("--n", gcfg.n, "qubit count");
    gen->add_option("--gates-min", gcfg.gates_min, "minimum gate count");
    gen->add_option("--gates-max", gcfg.gates_max, "maximum gate count");
    gen->add_option("--kinds", gen_kinds, "gate kinds, comma separated or 'all'");
    gen->add_option("--positions", gcfg.max_positions, "token matrix positions");
    gen->add_option("--count", gcfg.count, "unique ansaetze to draw");
    gen->add_option("--resample", gcfg.resample_k, "parameter redraws per parameterized ansatz");
    gen->add_flag("--validate", gen_validate, "re-simulate all records after writing");
    gen->add_option("--seed", gen_seed, "rng seed");
    attach_config(gen);
    gen->callback([&]() {
        gcfg.kinds = parse_kinds(gen_kinds);
        gcfg.seed = gen_seed;
        const Dataset data = generate_dataset(gcfg, Rng(gen_seed));
        if (gen_validate) validate_dataset(data);
        write_dataset(gen_out, data);
        json result{{"file", gen_out},
                    {"records", data.records.size()},
                    {"config", data.config.to_json()}};
        emit(result, "wrote " + std::to_string(data.records.size()) + " records to " + gen_out);
    });

    // ---- split ----
    auto* split = app.add_subcommand("split", "balanced ansatz-disjoint train/test split");
    std::string split_in, split_train = "train.qcds", split_test = "test.qcds";
    int split_quota = 32;
    std::uint64_t split_seed = 0;
    split->add_option("--in", split_in, "input dataset")->required();
    split->add_option("--train", split_train, "train output");
    split->add_option("--test", split_test, "test output");
    split->add_option("--quota", split_quota, "test ansaetze per gate count");
    split->add_option("--seed", split_seed, "rng seed");
    attach_config(split);
    split->callback([&]() {
        const Dataset data = read_dataset(split_in);
        const auto [train_set, test_set] = balanced_test_split(data, split_quota, Rng(split_seed));
        write_dataset(split_train, train_set);
        write_dataset(split_test, test_set);
        json result{{"train", split_train},
                    {"test", split_test},
                    {"train_records", train_set.records.size()},
                    {"test_records", test_set.records.size()},
                    {"quota", split_quota}};
        emit(result, "split " + std::to_string(data.records.size()) + " records into " +
                         std::to_string(train_set.records.size()) + " train / " +
                         std::to_string(test_set.records.size()) + " test");
    });

    // ---- learn-schedule ----
    auto* learn = app.add_subcommand("learn-schedule", "fit a discrete noise schedule to a hamming target");
    std::string learn_target = "linear", learn_out = "schedule.csv";
    int learn_classes = 12, learn_dim = 13, learn_T = 1000, learn_samples = 8192, learn_grid = 64;
    double learn_tol = 0.02;
    std::uint64_t learn_seed = 0;
    learn->add_option("--target", learn_target, "hamming target: linear, sin, sin2");
    learn->add_option("--classes", learn_classes, "token classes N");
    learn->add_option("--dim", learn_dim, "embedding dimension d_h");
    learn->add_option("--tol", learn_tol, "max residual tolerance");
    learn->add_option("--T", learn_T, "schedule steps");
    learn->add_option("--samples", learn_samples, "MC samples per grid point");
    learn->add_option("--grid", learn_grid, "fitting grid points");
    learn->add_option("--out", learn_out, "schedule csv output");
    std::string learn_curve;
    learn->add_option("--hamming-curve", learn_curve, "also write the achieved hamming curve csv");
    learn->add_option("--seed", learn_seed, "rng seed");
    attach_config(learn);
    learn->callback([&]() {
        const TokenBasis tb = build_token_basis(learn_classes, learn_dim, Rng(learn_seed).derive("basis"));
        const HammingTarget target = HammingTarget::from_name(learn_target, learn_classes);
        const LearnedSchedule learned = learn_discrete_schedule(
            tb, target, learn_T, learn_samples, learn_tol, Rng(learn_seed).derive("fit"), learn_grid);
        write_schedule_csv(learn_out, learned.schedule);
        if (!learn_curve.empty()) {
            std::vector<double> grid;
            for (int k = 0; k < learn_grid; ++k)
                grid.push_back(static_cast<double>(k) / (learn_grid - 1));
            write_curve_csv(learn_curve, hamming_curve(tb, learned.schedule, grid, learn_samples,
                                                       Rng(learn_seed).derive("curve")));
        }
        json result{{"file", learn_out},
                    {"target", learn_target},
                    {"classes", learn_classes},
                    {"dim", learn_dim},
                    {"max_residual", learned.max_residual},
                    {"mse", learned.mse_loss}};
        emit(result, "schedule fit: max residual " + std::to_string(learned.max_residual) +
                         " (tol " + std::to_string(learn_tol) + ") -> " + learn_out);
    });

    // ---- train ----
    auto* tr = app.add_subcommand("train", "train the toy denoiser on a dataset");
    TrainCliOptions topt;
    tr->add_option("--data", topt.data_path, "training dataset")->required();
    tr->add_option("--out", topt.out_path, "checkpoint output");
    tr->add_option("--trace", topt.trace_path, "loss trace csv");
    tr->add_option("--schedule-csv", topt.schedule_csv, "discrete schedule csv (skips learning)");
    tr->add_option("--target", topt.target_name, "hamming target for the discrete schedule");
    tr->add_option("--dh", topt.d_h, "token embedding dimension");
    tr->add_option("--dw", topt.d_w, "parameter embedding dimension");
    tr->add_option("--T", topt.T, "diffusion steps");
    tr->add_option("--steps", topt.steps, "training steps");
    tr->add_option("--batch", topt.batch, "batch size");
    tr->add_option("--lr", topt.peak_lr, "peak learning rate");
    tr->add_option("--drop", topt.drop, "CFG condition drop probability");
    tr->add_option("--width", topt.width, "hidden width");
    tr->add_option("--depth", topt.depth, "hidden layers");
    tr->add_option("--cond-dim", topt.cond_feature, "condition feature dimension");
    tr->add_option("--sched-samples", topt.sched_samples, "schedule MC samples");
    tr->add_option("--sched-tol", topt.sched_tol, "schedule residual tolerance");
    tr->add_option("--seed", topt.seed, "rng seed");
    attach_config(tr);
    tr->callback([&]() {
        json result;
        const ToyModel model = build_and_train(topt, result);
        save_toy_model(topt.out_path, model);
        result["checkpoint"] = topt.out_path;
        emit(result, "trained " + std::to_string(topt.steps) + " steps; final loss " +
                         std::to_string(result["final_loss"].get<double>()) + " -> " +
                         topt.out_path);
    });

    // ---- sample ----
    auto* smp = app.add_subcommand("sample", "sample circuits for a target unitary");
    std::string smp_ckpt, smp_unitary, smp_oracle, smp_mode = "joint", smp_guidance = "default";
    std::string smp_mask, smp_out = "samples.jsonl", smp_csv = "infidelity.csv";
    std::string smp_kinds = "h,cx,rx";
    int smp_n = 0, smp_samples = 64, smp_steps = 100, smp_positions = 16, smp_dh = 13, smp_dw = 3;
    std::uint64_t smp_seed = 0;
    smp->add_option("--checkpoint", smp_ckpt, "trained model checkpoint");
    smp->add_option("--unitary", smp_unitary, "target unitary file")->required();
    smp->add_option("--n", smp_n, "expected qubit count (validated)");
    smp->add_option("--samples", smp_samples, "circuits to sample");
    smp->add_option("--steps", smp_steps, "ancestral steps");
    smp->add_option("--mode", smp_mode, "joint, sequential, single_w_given_h, unconditional_h, unconditional_w");
    smp->add_option("--guidance", smp_guidance, "default, none or four comma-separated scales");
    smp->add_option("--mask", smp_mask, "gate-kind mask for the condition (default: checkpoint gate set)");
    smp->add_option("--out", smp_out, "sampled circuits jsonl");
    smp->add_option("--infidelity-csv", smp_csv, "per-sample infidelity csv");
    smp->add_option("--oracle-circuit", smp_oracle, "jsonl circuit; use the oracle denoiser instead of a checkpoint");
    smp->add_option("--kinds", smp_kinds, "gate kinds for the oracle context");
    smp->add_option("--positions", smp_positions, "positions for the oracle context");
    smp->add_option("--dh", smp_dh, "d_h for the oracle context");
    smp->add_option("--dw", smp_dw, "d_w for the oracle context");
    smp->add_option("--seed", smp_seed, "rng seed");
    attach_config(smp);
    smp->callback([&]() {
        const Unitary target = read_unitary_file(smp_unitary);
        if (smp_n > 0 && target.dim() != (Eigen::Index(1) << smp_n))
            throw ValidationError("target unitary does not match --n");

        std::optional<ToyModel> model;
        std::optional<OracleDenoiser> oracle;
        std::optional<ModelContext> ctx;
        if (!smp_oracle.empty()) {
            const auto circuits = read_circuits_jsonl_file(smp_oracle);
            if (circuits.empty()) throw ValidationError("oracle circuit file is empty");
            const GateSet set(parse_kinds(smp_kinds));
            TokenBasis tb = build_token_basis(set.num_classes(), smp_dh, Rng(smp_seed).derive("tb"));
            ParamBasis pb = build_param_basis(smp_dw, Rng(smp_seed).derive("pb"));
            ctx = ModelContext{set, tb, pb,
                               LatentGeometry{circuits[0].num_qubits, smp_positions, smp_dh, smp_dw},
                               fixed_schedule(FixedSchedule::CosineAlpha2, 1000),
                               fixed_schedule(FixedSchedule::CosineAlpha2, 1000)};
            oracle.emplace(encode_circuit(tokenize(circuits[0], smp_positions, set), set, tb, pb),
                           ctx->schedule_h, ctx->schedule_w);
        } else if (!smp_ckpt.empty()) {
            model = load_toy_model(smp_ckpt);
            ctx = model->context();
        } else {
            throw ValidationError("sample needs --checkpoint or --oracle-circuit");
        }
        if (target.dim() != (Eigen::Index(1) << ctx->geom.num_qubits))
            throw ValidationError("target unitary does not match the model geometry");

        std::vector<double> mask =
            smp_mask.empty() ? ctx->gate_set.multi_hot() : GateSet(parse_kinds(smp_mask)).multi_hot();
        const Condition cond = Condition::from_unitary(target, mask);

        SamplerConfig cfg;
        cfg.mode = sample_mode_from_name(smp_mode);
        cfg.steps = smp_steps;
        cfg.guidance = parse_guidance(smp_guidance);
        const Denoiser& den = oracle ? static_cast<const Denoiser&>(*oracle)
                                     : static_cast<const Denoiser&>(model->denoiser);
        const auto results = sample(den, *ctx, cfg, cond, smp_samples, Rng(smp_seed));

        std::ofstream jout(smp_out);
        if (!jout) throw ValidationError("cannot open " + smp_out);
        std::ofstream cout_csv(smp_csv);
        if (!cout_csv) throw ValidationError("cannot open " + smp_csv);
        cout_csv << "sample,valid,infidelity\n";
        int valid = 0;
        double best = 1.0;
        for (size_t i = 0; i < results.size(); ++i) {
            double inf = 1.0;
            if (results[i].valid) {
                ++valid;
                jout << circuit_to_json(results[i].circuit).dump() << "\n";
                inf = infidelity(circuit_unitary(results[i].circuit), target);
            } else {
                jout << json{{"invalid", results[i].error}}.dump() << "\n";
            }
            best = std::min(best, inf);
            cout_csv << i << "," << (results[i].valid ? 1 : 0) << "," << inf << "\n";
        }
        json result{{"samples", results.size()},
                    {"valid", valid},
                    {"best_infidelity", best},
                    {"mode", smp_mode},
                    {"circuits", smp_out},
                    {"infidelity_csv", smp_csv}};
        emit(result, "best-of-" + std::to_string(results.size()) + " infidelity " +
                         std::to_string(best));
    });

    // ---- eval ----
    auto* ev = app.add_subcommand("eval", "best-of-k benchmark over a test dataset");
    std::string ev_ckpt, ev_test, ev_json = "eval.json", ev_csv = "eval.csv", ev_guidance = "default";
    int ev_samples = 64, ev_steps = 100, ev_targets = 0;
    std::uint64_t ev_seed = 0;
    ev->add_option("--checkpoint", ev_ckpt, "trained model checkpoint")->required();
    ev->add_option("--test", ev_test, "test dataset")->required();
    ev->add_option("--samples", ev_samples, "circuits per target");
    ev->add_option("--steps", ev_steps, "ancestral steps");
    ev->add_option("--targets", ev_targets, "cap on evaluated targets (0 = all)");
    ev->add_option("--guidance", ev_guidance, "guidance spec");
    ev->add_option("--out", ev_json, "report json");
    ev->add_option("--csv", ev_csv, "per-sample csv");
    ev->add_option("--seed", ev_seed, "rng seed");
    attach_config(ev);
    ev->callback([&]() {
        const ToyModel model = load_toy_model(ev_ckpt);
        const Dataset test = read_dataset(ev_test);
        std::vector<EvalTarget> targets = eval_targets_from_dataset(test);
        if (ev_targets > 0 && static_cast<int>(targets.size()) > ev_targets)
            targets.resize(ev_targets);
        const EvalReport report = evaluate(model.denoiser, model.context(), targets, ev_samples,
                                           ev_steps, parse_guidance(ev_guidance), Rng(ev_seed));
        write_eval_csv(ev_csv, report);
        const json rj = eval_report_json(report);
        std::ofstream jout(ev_json);
        if (!jout) throw ValidationError("cannot open " + ev_json);
        jout << rj.dump(2) << "\n";
        int under = 0;
        for (double v : report.min_infidelity)
            if (v < 0.1) ++under;
        json result{{"targets", targets.size()},
                    {"min_infidelity_median", median(report.min_infidelity)},
                    {"targets_under_0.1", under},
                    {"invalid_samples", report.invalid_samples},
                    {"report", ev_json},
                    {"csv", ev_csv}};
        emit(result, std::to_string(under) + "/" + std::to_string(targets.size()) +
                         " targets reached infidelity < 0.1");
    });

    // ---- gpe ----
    auto* gpe_cmd = app.add_subcommand("gpe", "gate-pair encoding over a circuit corpus");
    std::string gpe_corpus, gpe_prefix = "report";
    long gpe_min_freq = 8;
    int gpe_max_iter = 250, gpe_top = 5;
    bool gpe_flat = false;
    gpe_cmd->add_option("--corpus", gpe_corpus, "circuits jsonl")->required();
    gpe_cmd->add_option("--min-freq", gpe_min_freq, "minimum pair frequency");
    gpe_cmd->add_option("--max-iter", gpe_max_iter, "maximum merge iterations");
    gpe_cmd->add_option("--top", gpe_top, "top structures per depth");
    gpe_cmd->add_flag("--flat", gpe_flat, "single frequency-sorted list instead of per-depth");
    gpe_cmd->add_option("--out-prefix", gpe_prefix, "writes <prefix>.json and <prefix>.txt");
    attach_config(gpe_cmd);
    gpe_cmd->callback([&]() {
        const auto corpus = read_circuits_jsonl_file(gpe_corpus);
        const GpeResult gr = run_gpe(corpus, gpe_min_freq, gpe_max_iter);
        const json report = report_structures(gr.vocab, corpus, gpe_top, !gpe_flat);
        std::ofstream jout(gpe_prefix + ".json");
        if (!jout) throw ValidationError("cannot open " + gpe_prefix + ".json");
        jout << report.dump(2) << "\n";
        std::ofstream tout(gpe_prefix + ".txt");
        if (!tout) throw ValidationError("cannot open " + gpe_prefix + ".txt");
        tout << report_text(report);
        json result{{"merges", gr.vocab.merges.size()},
                    {"json", gpe_prefix + ".json"},
                    {"text", gpe_prefix + ".txt"}};
        emit(result, "gpe found " + std::to_string(gr.vocab.merges.size()) + " merges");
    });

    // ---- corrupt ----
    auto* cor = app.add_subcommand("corrupt", "single-edit corruption infidelity benchmark");
    std::string cor_in, cor_prefix = "corrupt", cor_kinds = "all";
    std::string cor_amplitudes = "0.05,0.1,0.15";
    int cor_n = 3, cor_circuits = 10000, cor_gmin = 4, cor_gmax = 16, cor_bins = 50;
    std::uint64_t cor_seed = 0;
    cor->add_option("--in", cor_in, "corpus jsonl (default: random circuits)");
    cor->add_option("--n", cor_n, "qubits for random circuits");
    cor->add_option("--circuits", cor_circuits, "random circuit count");
    cor->add_option("--gates-min", cor_gmin, "random circuit min gates");
    cor->add_option("--gates-max", cor_gmax, "random circuit max gates");
    cor->add_option("--kinds", cor_kinds, "gate kinds");
    cor->add_option("--amplitudes", cor_amplitudes, "param_noise amplitudes");
    cor->add_option("--bins", cor_bins, "histogram bins");
    cor->add_option("--out-prefix", cor_prefix, "csv/json output prefix");
    cor->add_option("--seed", cor_seed, "rng seed");
    attach_config(cor);
    cor->callback([&]() {
        const GateSet set(parse_kinds(cor_kinds));
        Rng rng(cor_seed);
        std::vector<Circuit> corpus;
        if (!cor_in.empty()) {
            corpus = read_circuits_jsonl_file(cor_in);
        } else {
            corpus.reserve(cor_circuits);
            for (int i = 0; i < cor_circuits; ++i) {
                const int g = cor_gmin + static_cast<int>(rng.index(cor_gmax - cor_gmin + 1));
                std::vector<GateInstance> gates;
                for (int k = 0; k < g; ++k) gates.push_back(random_gate(cor_n, set, rng));
                corpus.emplace_back(cor_n, std::move(gates));
            }
        }
        std::vector<double> amplitudes;
        {
            std::stringstream ss(cor_amplitudes);
            std::string tok;
            while (std::getline(ss, tok, ',')) amplitudes.push_back(std::stod(tok));
        }
        json result;
        auto run_mode = [&](const std::string& name, CorruptionMode mode, double amp) {
            Histogram hist(0.0, 1.0, cor_bins);
            Rng mode_rng = rng.derive(name + std::to_string(amp));
            std::vector<double> values;
            values.reserve(corpus.size());
            for (const auto& c : corpus) {
                const Circuit corrupted = corrupt(c, mode, set, mode_rng, amp);
                const double inf =
                    infidelity(circuit_unitary(corrupted), circuit_unitary(c));
                hist.add(inf);
                values.push_back(inf);
            }
            const std::string tag =
                mode == CorruptionMode::ParamNoise ? name + "_" + std::to_string(amp) : name;
            write_histogram_csv(cor_prefix + "_" + tag + ".csv", hist);
            json entry{{"csv", cor_prefix + "_" + tag + ".csv"},
                       {"median", median(values)},
                       {"mean", mean(values)}};
            if (mode != CorruptionMode::ParamNoise) {
                entry["mode_in_0.3_0.5"] = has_local_mode(hist, 0.3, 0.5);
                entry["mode_in_0.7_0.9"] = has_local_mode(hist, 0.7, 0.9);
            }
            result[tag] = entry;
        };
        run_mode("replace", CorruptionMode::Replace, 0.0);
        run_mode("append", CorruptionMode::Append, 0.0);
        run_mode("drop", CorruptionMode::Drop, 0.0);
        for (double a : amplitudes) run_mode("param_noise", CorruptionMode::ParamNoise, a);
        emit(result, "corruption benchmark over " + std::to_string(corpus.size()) + " circuits");
    });

    // ---- hamiltonian ----
    auto* ham = app.add_subcommand("hamiltonian", "evolution-unitary target");
    std::string ham_model = "ising", ham_out = "hamiltonian.bin";
    TargetParams hp;
    ham->add_option("--model", ham_model, "ising or xxz");
    ham->add_option("--n", hp.n, "qubits");
    ham->add_option("--J", hp.coupling, "coupling");
    ham->add_option("--hfield", hp.h_field, "transverse field");
    ham->add_option("--delta", hp.delta, "xxz anisotropy");
    ham->add_option("--tau", hp.tau, "evolution time");
    ham->add_option("--out", ham_out, "unitary output file");
    attach_config(ham);
    ham->callback([&]() {
        const TargetKind kind = target_kind_from_name(ham_model);
        if (kind != TargetKind::Ising && kind != TargetKind::Xxz)
            throw ValidationError("--model must be ising or xxz");
        const Unitary u = make_target(kind, hp);
        write_unitary_file(ham_out, u);
        json result{{"file", ham_out}, {"model", ham_model}, {"n", hp.n}, {"tau", hp.tau}};
        emit(result, ham_model + " evolution target -> " + ham_out);
    });

    // ---- qft ----
    auto* qft = app.add_subcommand("qft", "quantum fourier transform target");
    int qft_n = 3;
    std::string qft_out = "qft.bin";
    qft->add_option("--n", qft_n, "qubits");
    qft->add_option("--out", qft_out, "unitary output file");
    attach_config(qft);
    qft->callback([&]() {
        const Unitary u = make_target(TargetKind::Qft, {qft_n, 0, 0, 0, 0, {}});
        write_unitary_file(qft_out, u);
        json result{{"file", qft_out}, {"n", qft_n}};
        emit(result, "qft(" + std::to_string(qft_n) + ") target -> " + qft_out);
    });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config_defaults(app, args);
        std::reverse(args.begin(), args.end());  // CLI11 consumes reversed argv
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // bad arguments are validation failures
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << std::endl;
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << std::endl;
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
}
