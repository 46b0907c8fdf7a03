#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "qcdiff/circuit.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/hamiltonian.hpp"
#include "qcdiff/simulator.hpp"
#include "qcdiff/unitary.hpp"

namespace qcdiff {

// Standard QFT construction: per qubit a Hadamard followed by controlled
// phases cp(pi / 2^k) from the later qubits, then the reversing swaps.
inline Circuit qft_circuit(int n) {
    if (n < 1) throw ValidationError("qft needs n >= 1");
    std::vector<GateInstance> gates;
    for (int i = 0; i < n; ++i) {
        gates.push_back(GateInstance::make(Gate::H, {}, {i}));
        for (int j = i + 1; j < n; ++j)
            gates.push_back(GateInstance::make(Gate::Cp, {j}, {i},
                                               std::numbers::pi / (1 << (j - i))));
    }
    for (int i = 0; i < n / 2; ++i)
        gates.push_back(GateInstance::make(Gate::Swap, {}, {i, n - 1 - i}));
    return Circuit(n, std::move(gates));
}

// DFT matrix with omega = e^{2 pi i / 2^n}, the definitional cross-check for
// the circuit construction.
inline CMatrix dft_matrix(int n) {
    const Eigen::Index dim = Eigen::Index(1) << n;
    const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
    CMatrix m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) *
                                 static_cast<double>(c) / static_cast<double>(dim);
            m(r, c) = norm * Complex(std::cos(angle), std::sin(angle));
        }
    return m;
}

inline Unitary qft_unitary(int n) {
    Unitary u = circuit_unitary(qft_circuit(n));
    const double defect = max_abs(u.matrix() - dft_matrix(n));
    if (defect > 1e-10)
        throw NumericalError("qft construction disagrees with the DFT matrix: " +
                             std::to_string(defect));
    return u;
}

enum class TargetKind { Qft, Ising, Xxz, FromCircuit };

inline TargetKind target_kind_from_name(const std::string& name) {
    if (name == "qft") return TargetKind::Qft;
    if (name == "ising") return TargetKind::Ising;
    if (name == "xxz") return TargetKind::Xxz;
    if (name == "from_circuit") return TargetKind::FromCircuit;
    throw ValidationError("unknown target kind: " + name);
}

struct TargetParams {
    int n = 2;
    double coupling = 1.0;   // J
    double h_field = 0.2;    // transverse field
    double delta = 0.0;      // xxz anisotropy
    double tau = 0.25;       // evolution time
    Circuit circuit;         // for from_circuit
};

inline Unitary make_target(TargetKind kind, const TargetParams& p) {
    if (p.n > 5 && kind != TargetKind::FromCircuit)
        throw ValidationError("targets capped at n <= 5");
    switch (kind) {
        case TargetKind::Qft: return qft_unitary(p.n);
        case TargetKind::Ising:
            return hamiltonian_evolution(
                {SpinModel::Ising, p.n, p.coupling, p.h_field, 0.0, p.tau});
        case TargetKind::Xxz:
            return hamiltonian_evolution(
                {SpinModel::Xxz, p.n, p.coupling, p.h_field, p.delta, p.tau});
        case TargetKind::FromCircuit: return circuit_unitary(p.circuit);
    }
    throw ValidationError("unhandled target kind");
}

}  // namespace qcdiff
