#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qcdiff/errors.hpp"

namespace qcdiff {

enum class Gate : int { H = 0, CX, CCX, Swap, Rx, Ry, Rz, Cp };

inline constexpr std::array<Gate, 8> kAllGates = {Gate::H,  Gate::CX, Gate::CCX, Gate::Swap,
                                                  Gate::Rx, Gate::Ry, Gate::Rz,  Gate::Cp};

struct GateTraits {
    const char* name;
    int arity;
    int num_controls;
    int num_targets;
    bool parameterized;
    double param_period;  // radians; 0 for discrete gates
    // Connection encoding: signed kinds mark controls with negative tokens.
    // swap has no controls and cp is symmetric between its two qubits, so
    // both encode every connection with the positive token and occupy a
    // single token class.
    bool signed_controls;
};

inline const GateTraits& traits(Gate g) {
    static constexpr double kTwoPi = 2.0 * std::numbers::pi;
    static constexpr double kFourPi = 4.0 * std::numbers::pi;
    static const std::array<GateTraits, 8> table = {{
        {"h", 1, 0, 1, false, 0.0, false},
        {"cx", 2, 1, 1, false, 0.0, true},
        {"ccx", 3, 2, 1, false, 0.0, true},
        {"swap", 2, 0, 2, false, 0.0, false},
        {"rx", 1, 0, 1, true, kFourPi, false},
        {"ry", 1, 0, 1, true, kFourPi, false},
        {"rz", 1, 0, 1, true, kFourPi, false},
        {"cp", 2, 1, 1, true, kTwoPi, false},
    }};
    return table[static_cast<int>(g)];
}

inline std::string gate_name(Gate g) { return traits(g).name; }

inline Gate gate_from_name(const std::string& name) {
    for (Gate g : kAllGates)
        if (name == traits(g).name) return g;
    throw ValidationError("unknown gate kind: " + name);
}

// lambda = (theta mod P) / (P/2) - 1, mapping one full period onto [-1, 1).
inline double normalize_param(Gate g, double theta) {
    const double period = traits(g).param_period;
    if (period <= 0.0) return 0.0;
    double m = std::fmod(theta, period);
    if (m < 0.0) m += period;
    return m / (period / 2.0) - 1.0;
}

inline double denormalize_param(Gate g, double lambda) {
    const double period = traits(g).param_period;
    if (period <= 0.0) return 0.0;
    double theta = (lambda + 1.0) * (period / 2.0);
    if (theta >= period) theta -= period;
    return theta;
}

// A placed gate in canonical form: ccx controls and swap targets sorted,
// cp oriented with the lower qubit as control (the gate is symmetric).
struct GateInstance {
    Gate kind = Gate::H;
    std::vector<int> controls;
    std::vector<int> targets;
    double theta = 0.0;  // in [0, period) for parameterized kinds, else 0

    static GateInstance make(Gate kind, std::vector<int> controls, std::vector<int> targets,
                             std::optional<double> theta = std::nullopt) {
        const GateTraits& tr = traits(kind);
        if (static_cast<int>(controls.size()) != tr.num_controls ||
            static_cast<int>(targets.size()) != tr.num_targets)
            throw ValidationError(std::string("gate ") + tr.name + ": wrong connection counts");
        std::vector<int> all = controls;
        all.insert(all.end(), targets.begin(), targets.end());
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end())
            throw ValidationError(std::string("gate ") + tr.name + ": duplicate qubit");
        for (int q : all)
            if (q < 0) throw ValidationError("negative qubit index");
        if (tr.parameterized != theta.has_value())
            throw ValidationError(std::string("gate ") + tr.name +
                                  (tr.parameterized ? ": missing theta" : ": unexpected theta"));

        GateInstance g;
        g.kind = kind;
        g.controls = std::move(controls);
        g.targets = std::move(targets);
        if (kind == Gate::CCX) std::sort(g.controls.begin(), g.controls.end());
        if (kind == Gate::Swap) std::sort(g.targets.begin(), g.targets.end());
        if (kind == Gate::Cp && g.controls[0] > g.targets[0]) std::swap(g.controls[0], g.targets[0]);
        if (theta) {
            double m = std::fmod(*theta, tr.param_period);
            if (m < 0.0) m += tr.param_period;
            g.theta = m;
        }
        return g;
    }

    std::vector<int> qubits() const {
        std::vector<int> all = controls;
        all.insert(all.end(), targets.begin(), targets.end());
        return all;
    }
    int max_qubit() const {
        int m = 0;
        for (int q : controls) m = std::max(m, q);
        for (int q : targets) m = std::max(m, q);
        return m;
    }
    bool operator==(const GateInstance& o) const {
        return kind == o.kind && controls == o.controls && targets == o.targets && theta == o.theta;
    }
};

struct Circuit {
    int num_qubits = 1;
    std::vector<GateInstance> gates;

    Circuit() = default;
    Circuit(int n, std::vector<GateInstance> gs) : num_qubits(n), gates(std::move(gs)) {
        if (n < 1) throw ValidationError("circuit needs at least one qubit");
        for (const auto& g : gates)
            if (g.max_qubit() >= n) throw ValidationError("gate qubit index out of range");
    }

    bool operator==(const Circuit& o) const {
        return num_qubits == o.num_qubits && gates == o.gates;
    }
};

// Signed integer-matrix form: rows = qubits, one column per gate position.
// Token 0 = empty cell; the gate set's largest id marks padding columns.
struct TokenMatrix {
    int num_qubits = 0;
    int num_positions = 0;
    std::vector<std::int16_t> tokens;  // row-major, num_qubits x num_positions
    std::vector<double> params;        // length num_positions, in [-1, 1]

    TokenMatrix() = default;
    TokenMatrix(int n, int t)
        : num_qubits(n),
          num_positions(t),
          tokens(static_cast<size_t>(n) * t, 0),
          params(t, 0.0) {}

    std::int16_t& tok(int q, int j) { return tokens[static_cast<size_t>(q) * num_positions + j]; }
    std::int16_t tok(int q, int j) const {
        return tokens[static_cast<size_t>(q) * num_positions + j];
    }
    bool operator==(const TokenMatrix& o) const {
        return num_qubits == o.num_qubits && num_positions == o.num_positions &&
               tokens == o.tokens && params == o.params;
    }
};

// An ordered gate-kind subset plus its token table. Token ids follow the
// declaration order, so the table is stable across runs for the same set.
class GateSet {
  public:
    explicit GateSet(std::vector<Gate> kinds) : kinds_(std::move(kinds)) {
        if (kinds_.empty()) throw ValidationError("empty gate set");
        for (size_t i = 0; i < kinds_.size(); ++i)
            for (size_t j = i + 1; j < kinds_.size(); ++j)
                if (kinds_[i] == kinds_[j]) throw ValidationError("duplicate gate kind in set");
        // class 0 = empty, then per kind target(+) and control(-) tokens,
        // padding last.
        classes_.push_back(0);
        for (size_t i = 0; i < kinds_.size(); ++i) {
            auto id = static_cast<std::int16_t>(i + 1);
            classes_.push_back(id);
            if (traits(kinds_[i]).signed_controls) classes_.push_back(static_cast<std::int16_t>(-id));
        }
        classes_.push_back(padding_token());
    }

    static GateSet full() { return GateSet({kAllGates.begin(), kAllGates.end()}); }

    const std::vector<Gate>& kinds() const { return kinds_; }
    bool contains(Gate g) const {
        return std::find(kinds_.begin(), kinds_.end(), g) != kinds_.end();
    }
    std::int16_t token_of(Gate g) const {
        for (size_t i = 0; i < kinds_.size(); ++i)
            if (kinds_[i] == g) return static_cast<std::int16_t>(i + 1);
        throw ValidationError("gate kind not in gate set: " + gate_name(g));
    }
    Gate kind_of(std::int16_t token) const {
        int id = std::abs(static_cast<int>(token));
        if (id < 1 || id > static_cast<int>(kinds_.size()))
            throw ValidationError("token id out of range: " + std::to_string(token));
        return kinds_[id - 1];
    }
    std::int16_t padding_token() const { return static_cast<std::int16_t>(kinds_.size() + 1); }

    // Connection-token classes: empty + padding + one per unsigned kind +
    // two per control-marked kind.
    int num_classes() const { return static_cast<int>(classes_.size()); }
    std::int16_t token_of_class(int cls) const {
        if (cls < 0 || cls >= num_classes()) throw ValidationError("class index out of range");
        return classes_[cls];
    }
    int class_of_token(std::int16_t token) const {
        for (size_t i = 0; i < classes_.size(); ++i)
            if (classes_[i] == token) return static_cast<int>(i);
        throw ValidationError("token not in table: " + std::to_string(token));
    }
    bool valid_token(std::int16_t token) const {
        return std::find(classes_.begin(), classes_.end(), token) != classes_.end();
    }

    // Multi-hot over the full 8-kind alphabet marking this set's kinds.
    std::vector<double> multi_hot() const {
        std::vector<double> v(kAllGates.size(), 0.0);
        for (Gate g : kinds_) v[static_cast<int>(g)] = 1.0;
        return v;
    }

  private:
    std::vector<Gate> kinds_;
    std::vector<std::int16_t> classes_;
};

inline TokenMatrix tokenize(const Circuit& c, int max_positions, const GateSet& set) {
    if (static_cast<int>(c.gates.size()) > max_positions)
        throw ValidationError("circuit has more gates than positions: " +
                              std::to_string(c.gates.size()) + " > " +
                              std::to_string(max_positions));
    TokenMatrix m(c.num_qubits, max_positions);
    for (size_t j = 0; j < c.gates.size(); ++j) {
        const GateInstance& g = c.gates[j];
        if (!set.contains(g.kind))
            throw ValidationError("gate kind not in gate set: " + gate_name(g.kind));
        if (g.max_qubit() >= c.num_qubits) throw ValidationError("qubit index out of range");
        const std::int16_t id = set.token_of(g.kind);
        const bool negate = traits(g.kind).signed_controls;
        for (int q : g.controls) m.tok(q, static_cast<int>(j)) = negate ? static_cast<std::int16_t>(-id) : id;
        for (int q : g.targets) m.tok(q, static_cast<int>(j)) = id;
        m.params[j] = normalize_param(g.kind, g.theta);
    }
    const std::int16_t pad = set.padding_token();
    for (int j = static_cast<int>(c.gates.size()); j < max_positions; ++j)
        for (int q = 0; q < c.num_qubits; ++q) m.tok(q, j) = pad;
    return m;
}

// Inverse of tokenize. All-padding and all-empty columns carry no gate;
// anything else must describe exactly one well-formed gate.
inline Circuit detokenize(const TokenMatrix& m, const GateSet& set) {
    std::vector<GateInstance> gates;
    const std::int16_t pad = set.padding_token();
    for (int j = 0; j < m.num_positions; ++j) {
        auto bad = [&](const std::string& why) {
            throw ValidationError("invalid column " + std::to_string(j) + ": " + why);
        };
        std::vector<int> neg_rows, pos_rows;
        int pad_rows = 0;
        for (int q = 0; q < m.num_qubits; ++q) {
            std::int16_t tk = m.tok(q, j);
            if (tk == 0) continue;
            if (tk == pad) {
                ++pad_rows;
                continue;
            }
            if (!set.valid_token(tk)) bad("unknown token " + std::to_string(tk));
            (tk < 0 ? neg_rows : pos_rows).push_back(q);
        }
        if (pad_rows > 0) {
            if (pad_rows != m.num_qubits) bad("partial padding");
            continue;
        }
        if (neg_rows.empty() && pos_rows.empty()) continue;  // empty column

        std::int16_t ref = 0;
        for (int q : neg_rows) {
            std::int16_t id = static_cast<std::int16_t>(-m.tok(q, j));
            if (ref == 0) ref = id;
            if (id != ref) bad("mixed gate kinds");
        }
        for (int q : pos_rows) {
            std::int16_t id = m.tok(q, j);
            if (ref == 0) ref = id;
            if (id != ref) bad("mixed gate kinds");
        }
        Gate kind = set.kind_of(ref);
        const GateTraits& tr = traits(kind);
        if (tr.signed_controls) {
            if (static_cast<int>(neg_rows.size()) != tr.num_controls ||
                static_cast<int>(pos_rows.size()) != tr.num_targets)
                bad(std::string("wrong connection multiplicity for ") + tr.name);
        } else {
            if (!neg_rows.empty()) bad(std::string("negative token for unsigned kind ") + tr.name);
            if (static_cast<int>(pos_rows.size()) != tr.arity)
                bad(std::string("wrong connection multiplicity for ") + tr.name);
        }

        std::vector<int> controls, targets;
        if (tr.signed_controls) {
            controls = neg_rows;
            targets = pos_rows;
        } else if (kind == Gate::Cp) {
            controls = {pos_rows[0]};
            targets = {pos_rows[1]};
        } else {
            targets = pos_rows;
        }
        std::optional<double> theta;
        if (tr.parameterized) theta = denormalize_param(kind, m.params[j]);
        gates.push_back(GateInstance::make(kind, controls, targets, theta));
    }
    return Circuit(m.num_qubits, std::move(gates));
}

}  // namespace qcdiff
