#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "qcdiff/errors.hpp"
#include "qcdiff/unitary.hpp"

namespace qcdiff {

enum class SpinModel { Ising, Xxz };

// Non-periodic nearest-neighbor chain.
//   ising: H = -J sum Z_i Z_{i+1} - h sum X_i
//   xxz:   H = -J sum (X_i X_{i+1} + Y_i Y_{i+1} + delta Z_i Z_{i+1}) - h sum X_i
struct HamiltonianSpec {
    SpinModel model = SpinModel::Ising;
    int n = 1;
    double coupling = 1.0;   // J
    double h_field = 0.0;    // transverse field h
    double delta = 0.0;      // anisotropy, xxz only
    double tau = 0.0;        // evolution time
};

namespace detail {

inline CMatrix pauli(char which) {
    CMatrix m(2, 2);
    const Complex i01(0.0, 1.0);
    switch (which) {
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, -i01, i01, 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw ValidationError("unknown pauli");
    }
    return m;
}

// P_a on qubit i times P_b on qubit j (j may be -1 for a single operator),
// qubit 0 = MSB.
inline CMatrix pauli_term(int n, int i, char a, int j, char b) {
    CMatrix term = CMatrix::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
        CMatrix factor = CMatrix::Identity(2, 2);
        if (q == i) factor = pauli(a);
        if (q == j) factor = pauli(b);
        CMatrix next(term.rows() * 2, term.cols() * 2);
        next.setZero();
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
                if (factor(r, c) != Complex(0, 0))
                    next.block(r * term.rows(), c * term.cols(), term.rows(), term.cols()) =
                        factor(r, c) * term;
        term = std::move(next);
    }
    return term;
}

}  // namespace detail

inline CMatrix build_hamiltonian(const HamiltonianSpec& spec) {
    if (spec.n < 1) throw ValidationError("hamiltonian needs n >= 1");
    const int n = spec.n;
    const Eigen::Index dim = Eigen::Index(1) << n;
    CMatrix h = CMatrix::Zero(dim, dim);
    for (int i = 0; i + 1 < n; ++i) {
        if (spec.model == SpinModel::Ising) {
            h -= spec.coupling * detail::pauli_term(n, i, 'Z', i + 1, 'Z');
        } else {
            h -= spec.coupling * (detail::pauli_term(n, i, 'X', i + 1, 'X') +
                                  detail::pauli_term(n, i, 'Y', i + 1, 'Y') +
                                  spec.delta * detail::pauli_term(n, i, 'Z', i + 1, 'Z'));
        }
    }
    for (int i = 0; i < n; ++i) h -= spec.h_field * detail::pauli_term(n, i, 'X', -1, 'X');
    return h;
}

// U(tau) = exp(-i tau H) by Hermitian eigendecomposition. Dense; capped at
// n <= 6.
inline Unitary hamiltonian_evolution(const HamiltonianSpec& spec) {
    if (spec.n > 6) throw ValidationError("hamiltonian evolution capped at n <= 6");
    const CMatrix h = build_hamiltonian(spec);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const Complex i01(0.0, 1.0);
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < phases.size(); ++k)
        phases(k) = std::exp(-i01 * spec.tau * es.eigenvalues()(k));
    CMatrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return Unitary(std::move(u));
}

}  // namespace qcdiff
