#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qcdiff/circuit.hpp"
#include "qcdiff/errors.hpp"
#include "qcdiff/unitary.hpp"

namespace qcdiff {

// Basis convention: qubit 0 is the most significant bit of the basis index.
// Rotation convention: R_a(theta) = exp(-i theta A / 2) for A in {X, Y, Z};
// cp applies the phase e^{i theta} on |11>.

namespace detail {

// Local matrix of a gate on its own qubits, ordered controls-then-targets
// with the first listed qubit as the local MSB.
inline CMatrix local_gate_matrix(const GateInstance& g) {
    const Complex i01(0.0, 1.0);
    const double th = g.theta;
    switch (g.kind) {
        case Gate::H: {
            CMatrix m(2, 2);
            const double s = 1.0 / std::sqrt(2.0);
            m << s, s, s, -s;
            return m;
        }
        case Gate::Rx: {
            CMatrix m(2, 2);
            m << std::cos(th / 2), -i01 * std::sin(th / 2), -i01 * std::sin(th / 2),
                std::cos(th / 2);
            return m;
        }
        case Gate::Ry: {
            CMatrix m(2, 2);
            m << std::cos(th / 2), -std::sin(th / 2), std::sin(th / 2), std::cos(th / 2);
            return m;
        }
        case Gate::Rz: {
            CMatrix m = CMatrix::Zero(2, 2);
            m(0, 0) = std::exp(-i01 * (th / 2));
            m(1, 1) = std::exp(i01 * (th / 2));
            return m;
        }
        case Gate::CX: {
            CMatrix m = CMatrix::Identity(4, 4);
            m(2, 2) = 0;
            m(3, 3) = 0;
            m(2, 3) = 1;
            m(3, 2) = 1;
            return m;
        }
        case Gate::Cp: {
            CMatrix m = CMatrix::Identity(4, 4);
            m(3, 3) = std::exp(i01 * th);
            return m;
        }
        case Gate::Swap: {
            CMatrix m = CMatrix::Identity(4, 4);
            m(1, 1) = 0;
            m(2, 2) = 0;
            m(1, 2) = 1;
            m(2, 1) = 1;
            return m;
        }
        case Gate::CCX: {
            CMatrix m = CMatrix::Identity(8, 8);
            m(6, 6) = 0;
            m(7, 7) = 0;
            m(6, 7) = 1;
            m(7, 6) = 1;
            return m;
        }
    }
    throw ValidationError("unhandled gate kind");
}

}  // namespace detail

// Full 2^n x 2^n embedding: the gate on its qubits, identity elsewhere.
inline Unitary gate_unitary(const GateInstance& g, int num_qubits) {
    if (g.max_qubit() >= num_qubits) throw ValidationError("gate qubit index out of range");
    const CMatrix local = detail::local_gate_matrix(g);
    const std::vector<int> gq = g.qubits();
    const int arity = static_cast<int>(gq.size());
    const Eigen::Index dim = Eigen::Index(1) << num_qubits;
    CMatrix full = CMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        int local_in = 0;
        for (int b = 0; b < arity; ++b) {
            const int bit = static_cast<int>((col >> (num_qubits - 1 - gq[b])) & 1);
            local_in = (local_in << 1) | bit;
        }
        for (int local_out = 0; local_out < (1 << arity); ++local_out) {
            const Complex amp = local(local_out, local_in);
            if (amp == Complex(0, 0)) continue;
            Eigen::Index row = col;
            for (int b = 0; b < arity; ++b) {
                const Eigen::Index mask = Eigen::Index(1) << (num_qubits - 1 - gq[b]);
                const int bit = (local_out >> (arity - 1 - b)) & 1;
                row = bit ? (row | mask) : (row & ~mask);
            }
            full(row, col) = amp;
        }
    }
    return Unitary(std::move(full));
}

// Ordered product: gate 0 is applied first, i.e. rightmost in the product.
inline Unitary circuit_unitary(const Circuit& c) {
    const Eigen::Index dim = Eigen::Index(1) << c.num_qubits;
    CMatrix u = CMatrix::Identity(dim, dim);
    for (const auto& g : c.gates) u = gate_unitary(g, c.num_qubits).matrix() * u;
    return Unitary(std::move(u));
}

}  // namespace qcdiff
