#pragma once

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcdiff/circuit.hpp"
#include "qcdiff/errors.hpp"

namespace qcdiff {

// Circuit interchange is JSON-lines, one circuit per line:
//   {"n": 2, "gates": [{"kind": "cx", "controls": [0], "targets": [1]}, ...]}

inline nlohmann::json circuit_to_json(const Circuit& c) {
    nlohmann::json j;
    j["n"] = c.num_qubits;
    j["gates"] = nlohmann::json::array();
    for (const auto& g : c.gates) {
        nlohmann::json gj;
        gj["kind"] = gate_name(g.kind);
        if (!g.controls.empty()) gj["controls"] = g.controls;
        gj["targets"] = g.targets;
        if (traits(g.kind).parameterized) gj["theta"] = g.theta;
        j["gates"].push_back(gj);
    }
    return j;
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
    if (!j.contains("n") || !j.contains("gates")) throw ValidationError("circuit json: missing n or gates");
    int n = j.at("n").get<int>();
    std::vector<GateInstance> gates;
    for (const auto& gj : j.at("gates")) {
        Gate kind = gate_from_name(gj.at("kind").get<std::string>());
        std::vector<int> controls, targets;
        if (gj.contains("controls")) controls = gj.at("controls").get<std::vector<int>>();
        targets = gj.at("targets").get<std::vector<int>>();
        std::optional<double> theta;
        if (gj.contains("theta")) theta = gj.at("theta").get<double>();
        gates.push_back(GateInstance::make(kind, std::move(controls), std::move(targets), theta));
    }
    return Circuit(n, std::move(gates));
}

inline void write_circuits_jsonl(std::ostream& out, const std::vector<Circuit>& circuits) {
    for (const auto& c : circuits) out << circuit_to_json(c).dump() << '\n';
}

inline std::vector<Circuit> read_circuits_jsonl(std::istream& in) {
    std::vector<Circuit> circuits;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            circuits.push_back(circuit_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("jsonl line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return circuits;
}

inline std::vector<Circuit> read_circuits_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    return read_circuits_jsonl(in);
}

inline void write_circuits_jsonl_file(const std::string& path, const std::vector<Circuit>& cs) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    write_circuits_jsonl(out, cs);
}

// Binary token-matrix layout: little-endian i16 row-major n x t block
// followed by t float64 lambda values. Dimensions travel out of band.
inline void write_token_matrix(std::ostream& out, const TokenMatrix& m) {
    out.write(reinterpret_cast<const char*>(m.tokens.data()),
              static_cast<std::streamsize>(m.tokens.size() * sizeof(std::int16_t)));
    out.write(reinterpret_cast<const char*>(m.params.data()),
              static_cast<std::streamsize>(m.params.size() * sizeof(double)));
}

inline TokenMatrix read_token_matrix(std::istream& in, int num_qubits, int num_positions) {
    TokenMatrix m(num_qubits, num_positions);
    in.read(reinterpret_cast<char*>(m.tokens.data()),
            static_cast<std::streamsize>(m.tokens.size() * sizeof(std::int16_t)));
    in.read(reinterpret_cast<char*>(m.params.data()),
            static_cast<std::streamsize>(m.params.size() * sizeof(double)));
    if (!in) throw ValidationError("truncated token matrix block");
    return m;
}

}  // namespace qcdiff
