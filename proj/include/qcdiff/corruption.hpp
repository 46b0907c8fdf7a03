#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qcdiff/circuit.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/rng.hpp"

namespace qcdiff {

enum class CorruptionMode { Drop, Append, Replace, ParamNoise };

inline CorruptionMode corruption_mode_from_name(const std::string& name) {
    if (name == "drop") return CorruptionMode::Drop;
    if (name == "append") return CorruptionMode::Append;
    if (name == "replace") return CorruptionMode::Replace;
    if (name == "param_noise") return CorruptionMode::ParamNoise;
    throw ValidationError("unknown corruption mode: " + name);
}

// Uniform random gate: kind from the set, distinct qubits, theta uniform on
// the kind's support.
inline GateInstance random_gate(int num_qubits, const GateSet& set, Rng& rng) {
    for (;;) {
        Gate kind = set.kinds()[rng.index(set.kinds().size())];
        const GateTraits& tr = traits(kind);
        if (tr.arity > num_qubits) continue;  // e.g. ccx on n < 3
        std::vector<int> pool(num_qubits);
        for (int q = 0; q < num_qubits; ++q) pool[q] = q;
        for (int k = 0; k < tr.arity; ++k)
            std::swap(pool[k], pool[k + static_cast<int>(rng.index(num_qubits - k))]);
        std::vector<int> controls(pool.begin(), pool.begin() + tr.num_controls);
        std::vector<int> targets(pool.begin() + tr.num_controls, pool.begin() + tr.arity);
        std::optional<double> theta;
        if (tr.parameterized) theta = rng.uniform(0.0, tr.param_period);
        return GateInstance::make(kind, std::move(controls), std::move(targets), theta);
    }
}

// Wrap a noisy normalized parameter back into [-1, 1) (period 2).
inline double wrap_lambda(double lambda) {
    double m = std::fmod(lambda + 1.0, 2.0);
    if (m < 0.0) m += 2.0;
    return m - 1.0;
}

// Apply exactly one corruption and return the edited circuit.
//   drop:        remove one random gate
//   append:      add one random gate from the set at the end
//   replace:     overwrite one random gate with a random one
//   param_noise: lambda <- wrap(lambda + amplitude * N(0,1)) on every
//                parameterized gate; discrete gates untouched
inline Circuit corrupt(const Circuit& c, CorruptionMode mode, const GateSet& set, Rng& rng,
                       double amplitude = 0.0) {
    Circuit out = c;
    switch (mode) {
        case CorruptionMode::Drop: {
            if (c.gates.empty()) throw ValidationError("drop on empty circuit");
            out.gates.erase(out.gates.begin() + static_cast<long>(rng.index(c.gates.size())));
            break;
        }
        case CorruptionMode::Append: {
            out.gates.push_back(random_gate(c.num_qubits, set, rng));
            break;
        }
        case CorruptionMode::Replace: {
            if (c.gates.empty()) throw ValidationError("replace on empty circuit");
            out.gates[rng.index(c.gates.size())] = random_gate(c.num_qubits, set, rng);
            break;
        }
        case CorruptionMode::ParamNoise: {
            for (auto& g : out.gates) {
                if (!traits(g.kind).parameterized) continue;
                double lambda = normalize_param(g.kind, g.theta);
                lambda = wrap_lambda(lambda + amplitude * rng.normal());
                g.theta = denormalize_param(g.kind, lambda);
            }
            break;
        }
    }
    return out;
}

}  // namespace qcdiff
