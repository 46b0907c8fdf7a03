#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qcdiff/circuit.hpp"
#include "qcdiff/circuit_io.hpp"
#include "qcdiff/corruption.hpp"
#include "qcdiff/diffusion.hpp"
#include "qcdiff/embedding.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/rng.hpp"
#include "qcdiff/simulator.hpp"
#include "qcdiff/unitary.hpp"

namespace qcdiff {

struct DatasetConfig {
    int n = 2;
    int gates_min = 2;
    int gates_max = 4;
    std::vector<Gate> kinds = {Gate::H, Gate::CX, Gate::Rx};
    int max_positions = 16;
    int count = 1000;      // unique ansaetze to draw
    int resample_k = 0;    // extra parameter redraws per parameterized ansatz
    std::uint64_t seed = 0;

    GateSet gate_set() const { return GateSet(kinds); }
    nlohmann::json to_json() const {
        std::vector<std::string> names;
        for (Gate g : kinds) names.push_back(gate_name(g));
        return {{"n", n},
                {"gates_min", gates_min},
                {"gates_max", gates_max},
                {"kinds", names},
                {"max_positions", max_positions},
                {"count", count},
                {"resample_k", resample_k},
                {"seed", seed}};
    }
    static DatasetConfig from_json(const nlohmann::json& j) {
        DatasetConfig c;
        c.n = j.at("n").get<int>();
        c.gates_min = j.at("gates_min").get<int>();
        c.gates_max = j.at("gates_max").get<int>();
        c.kinds.clear();
        for (const auto& name : j.at("kinds")) c.kinds.push_back(gate_from_name(name));
        c.max_positions = j.at("max_positions").get<int>();
        c.count = j.at("count").get<int>();
        c.resample_k = j.at("resample_k").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        return c;
    }
};

struct DatasetRecord {
    TokenMatrix matrix;
    CMatrix unitary;                // equals circuit_unitary within 1e-9
    std::vector<double> gate_mask;  // multi-hot of the sampled gate subset
    int num_qubits = 0;
    int gate_count = 0;
    std::uint64_t ansatz_hash = 0;
};

struct Dataset {
    DatasetConfig config;
    std::vector<DatasetRecord> records;
};

// Structural identity of an ansatz: the token matrix with parameters zeroed.
inline std::uint64_t structural_hash(const TokenMatrix& m) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(m.num_qubits));
    mix(static_cast<std::uint64_t>(m.num_positions));
    for (std::int16_t t : m.tokens) mix(static_cast<std::uint64_t>(static_cast<std::uint16_t>(t)));
    return h;
}

inline std::uint64_t structural_hash(const Circuit& c, int max_positions, const GateSet& set) {
    return structural_hash(tokenize(c, max_positions, set));
}

namespace detail {

// Uniform nonempty subset of the configured kinds that fits n qubits.
inline std::vector<Gate> sample_gate_subset(const DatasetConfig& cfg, Rng& rng) {
    for (;;) {
        std::vector<Gate> subset;
        for (Gate g : cfg.kinds)
            if (rng.bernoulli(0.5)) subset.push_back(g);
        if (subset.empty()) continue;
        bool fits = false;
        for (Gate g : subset)
            if (traits(g).arity <= cfg.n) fits = true;
        if (fits) return subset;
    }
}

inline Circuit sample_circuit(const DatasetConfig& cfg, const std::vector<Gate>& subset,
                              int gate_count, Rng& rng) {
    std::vector<Gate> usable;
    for (Gate g : subset)
        if (traits(g).arity <= cfg.n) usable.push_back(g);
    GateSet pool(usable);
    std::vector<GateInstance> gates;
    gates.reserve(gate_count);
    for (int k = 0; k < gate_count; ++k) gates.push_back(random_gate(cfg.n, pool, rng));
    return Circuit(cfg.n, std::move(gates));
}

inline std::vector<double> subset_mask(const std::vector<Gate>& subset) {
    std::vector<double> mask(kAllGates.size(), 0.0);
    for (Gate g : subset) mask[static_cast<int>(g)] = 1.0;
    return mask;
}

}  // namespace detail

// Random-circuit dataset: uniform gate-subset draw per circuit, uniform
// placement, uniform theta on each support; ansatz-level dedup, then each
// parameterized ansatz is duplicated resample_k times with fresh parameters.
inline Dataset generate_dataset(const DatasetConfig& cfg, Rng rng) {
    if (cfg.gates_min < 1 || cfg.gates_max < cfg.gates_min)
        throw ValidationError("bad gate count range");
    if (cfg.gates_max > cfg.max_positions)
        throw ValidationError("gates_max exceeds max_positions");
    if (cfg.count < 1) throw ValidationError("dataset count must be >= 1");

    Dataset out;
    out.config = cfg;
    const GateSet set = cfg.gate_set();
    std::set<std::uint64_t> seen;
    const long attempt_cap = 500L * cfg.count;
    long attempts = 0;
    while (static_cast<int>(seen.size()) < cfg.count) {
        if (++attempts > attempt_cap)
            throw ValidationError("could not draw " + std::to_string(cfg.count) +
                                  " unique ansaetze (space exhausted after " +
                                  std::to_string(attempts - 1) + " attempts)");
        const std::vector<Gate> subset = detail::sample_gate_subset(cfg, rng);
        const int gate_count =
            cfg.gates_min + static_cast<int>(rng.index(cfg.gates_max - cfg.gates_min + 1));
        Circuit c = detail::sample_circuit(cfg, subset, gate_count, rng);
        TokenMatrix m = tokenize(c, cfg.max_positions, set);
        const std::uint64_t h = structural_hash(m);
        if (!seen.insert(h).second) continue;

        bool parameterized = false;
        for (const auto& g : c.gates)
            if (traits(g.kind).parameterized) parameterized = true;

        auto emit = [&](const Circuit& circ) {
            DatasetRecord rec;
            rec.matrix = tokenize(circ, cfg.max_positions, set);
            rec.unitary = circuit_unitary(circ).matrix();
            rec.gate_mask = detail::subset_mask(subset);
            rec.num_qubits = cfg.n;
            rec.gate_count = static_cast<int>(circ.gates.size());
            rec.ansatz_hash = h;
            out.records.push_back(std::move(rec));
        };
        emit(c);
        if (parameterized) {
            for (int r = 0; r < cfg.resample_k; ++r) {
                Circuit redrawn = c;
                for (auto& g : redrawn.gates)
                    if (traits(g.kind).parameterized)
                        g.theta = rng.uniform(0.0, traits(g.kind).param_period);
                emit(redrawn);
            }
        }
    }
    return out;
}

// Ansatz-disjoint split taken before parameter resampling: the test side
// keeps exactly `quota` original records per gate count, the train side
// keeps every record (including resamples) of the remaining ansaetze.
inline std::pair<Dataset, Dataset> balanced_test_split(const Dataset& data, int quota, Rng rng) {
    if (quota < 1) throw ValidationError("quota must be >= 1");
    std::map<std::uint64_t, std::vector<size_t>> groups;  // hash -> record indices
    for (size_t i = 0; i < data.records.size(); ++i)
        groups[data.records[i].ansatz_hash].push_back(i);

    std::map<int, std::vector<std::uint64_t>> by_count;
    for (const auto& [hash, idxs] : groups)
        by_count[data.records[idxs.front()].gate_count].push_back(hash);

    std::set<std::uint64_t> test_hashes;
    for (auto& [count, hashes] : by_count) {
        if (static_cast<int>(hashes.size()) < quota)
            throw ValidationError("quota infeasible: gate count " + std::to_string(count) +
                                  " has only " + std::to_string(hashes.size()) + " ansaetze");
        for (int k = 0; k < quota; ++k) {
            const size_t pick = k + rng.index(hashes.size() - k);
            std::swap(hashes[k], hashes[pick]);
            test_hashes.insert(hashes[k]);
        }
    }

    Dataset train, test;
    train.config = data.config;
    test.config = data.config;
    for (const auto& [hash, idxs] : groups) {
        if (test_hashes.count(hash)) {
            test.records.push_back(data.records[idxs.front()]);  // pre-resample original
        } else {
            for (size_t i : idxs) train.records.push_back(data.records[i]);
        }
    }
    return {std::move(train), std::move(test)};
}

// Dataset file: "QCDS" magic, u32 version, u64 JSON header length, header
// (config echo incl. seed, record count), then per record the token-matrix
// block, the unitary block, the subset mask and the gate count.
inline void write_dataset(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    nlohmann::json header;
    header["format_version"] = 1;
    header["config"] = data.config.to_json();
    header["record_count"] = data.records.size();
    const std::string hs = header.dump();
    const char magic[4] = {'Q', 'C', 'D', 'S'};
    out.write(magic, 4);
    const std::uint32_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t len = hs.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& rec : data.records) {
        const std::uint32_t gc = static_cast<std::uint32_t>(rec.gate_count);
        out.write(reinterpret_cast<const char*>(&gc), sizeof(gc));
        write_token_matrix(out, rec.matrix);
        write_unitary(out, Unitary(rec.unitary));
        for (double v : rec.gate_mask) {
            const std::uint8_t b = v > 0.5 ? 1 : 0;
            out.write(reinterpret_cast<const char*>(&b), 1);
        }
    }
}

inline Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t len = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in || std::string(magic, 4) != "QCDS") throw ValidationError("bad dataset magic");
    if (version != 1) throw ValidationError("unsupported dataset version");
    std::string hs(len, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(len));
    nlohmann::json header = nlohmann::json::parse(hs);
    Dataset data;
    data.config = DatasetConfig::from_json(header.at("config"));
    const size_t count = header.at("record_count").get<size_t>();
    data.records.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        DatasetRecord rec;
        std::uint32_t gc = 0;
        in.read(reinterpret_cast<char*>(&gc), sizeof(gc));
        rec.gate_count = static_cast<int>(gc);
        rec.matrix = read_token_matrix(in, data.config.n, data.config.max_positions);
        rec.unitary = read_unitary(in).matrix();
        rec.gate_mask.resize(kAllGates.size());
        for (double& v : rec.gate_mask) {
            std::uint8_t b = 0;
            in.read(reinterpret_cast<char*>(&b), 1);
            v = b ? 1.0 : 0.0;
        }
        rec.num_qubits = data.config.n;
        rec.ansatz_hash = structural_hash(rec.matrix);
        data.records.push_back(std::move(rec));
    }
    if (!in) throw ValidationError("truncated dataset file");
    return data;
}

// Re-simulate each stored circuit and compare against the stored unitary.
inline void validate_dataset(const Dataset& data, double tol = 1e-9) {
    const GateSet set = data.config.gate_set();
    for (size_t i = 0; i < data.records.size(); ++i) {
        const auto& rec = data.records[i];
        const Circuit c = detokenize(rec.matrix, set);
        if (static_cast<int>(c.gates.size()) != rec.gate_count ||
            rec.gate_count < data.config.gates_min || rec.gate_count > data.config.gates_max)
            throw ValidationError("record " + std::to_string(i) + ": gate count out of range");
        const double defect = max_abs(circuit_unitary(c).matrix() - rec.unitary);
        if (defect > tol)
            throw NumericalError("record " + std::to_string(i) + ": stored unitary off by " +
                                 std::to_string(defect));
    }
}

// Latent/condition pairs ready for the training loop.
inline std::vector<std::pair<CircuitLatent, Condition>> dataset_latents(
    const Dataset& data, const TokenBasis& tb, const ParamBasis& pb) {
    const GateSet set = data.config.gate_set();
    std::vector<std::pair<CircuitLatent, Condition>> items;
    items.reserve(data.records.size());
    for (const auto& rec : data.records) {
        CircuitLatent lat = encode_circuit(rec.matrix, set, tb, pb);
        Condition cond = Condition::from_unitary(Unitary(rec.unitary), rec.gate_mask);
        items.emplace_back(std::move(lat), std::move(cond));
    }
    return items;
}

}  // namespace qcdiff
