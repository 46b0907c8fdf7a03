#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qcdiff/corruption.hpp"
#include "qcdiff/hamiltonian.hpp"
#include "qcdiff/simulator.hpp"
#include "qcdiff/unitary.hpp"
#include "test_support.hpp"

using namespace qcdiff;

namespace {
const double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);
}

TEST_CASE("elementary gate matrices") {
    CHECK(max_abs(gate_unitary(GateInstance::make(Gate::Rz, {}, {0}, 0.0), 1).matrix() -
                  CMatrix::Identity(2, 2)) < 1e-15);

    CMatrix h_ref(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    h_ref << s, s, s, -s;
    CHECK(max_abs(gate_unitary(GateInstance::make(Gate::H, {}, {0}), 1).matrix() - h_ref) < 1e-15);

    const auto cx = GateInstance::make(Gate::CX, {0}, {1});
    const CMatrix twice = gate_unitary(cx, 2).matrix() * gate_unitary(cx, 2).matrix();
    CHECK(max_abs(twice - CMatrix::Identity(4, 4)) < 1e-15);
}

TEST_CASE("circuit unitary basics") {
    CHECK(max_abs(circuit_unitary(Circuit(2, {})).matrix() - CMatrix::Identity(4, 4)) == 0.0);

    const Circuit rz(1, {GateInstance::make(Gate::Rz, {}, {0}, kPi / 2)});
    CMatrix expected = CMatrix::Zero(2, 2);
    expected(0, 0) = std::exp(-kI * (kPi / 4));
    expected(1, 1) = std::exp(kI * (kPi / 4));
    CHECK(max_abs(circuit_unitary(rz).matrix() - expected) < 1e-15);
}

TEST_CASE("circuit unitary matches the statevector oracle") {
    GateSet set = GateSet::full();
    Rng rng(101);
    for (int it = 0; it < 25; ++it) {
        const Circuit c = testing::random_circuit(3, 8, set, rng);
        CHECK(max_abs(circuit_unitary(c).matrix() - testing::oracle_circuit_unitary(c)) < 1e-10);
    }
}

TEST_CASE("unitarity preserved on random 16-gate circuits") {
    GateSet set = GateSet::full();
    Rng rng(103);
    for (int it = 0; it < 10; ++it) {
        const Circuit c = testing::random_circuit(4, 16, set, rng);
        const CMatrix u = circuit_unitary(c).matrix();
        CHECK(max_abs(u * u.adjoint() - CMatrix::Identity(16, 16)) < 1e-10);
    }
}

TEST_CASE("infidelity of a unitary with itself is zero") {
    Rng rng(107);
    const Unitary u = random_unitary(4, rng);
    CHECK(infidelity(u, u) == 0.0);
}

TEST_CASE("infidelity of identity vs pauli x and rz") {
    CMatrix xm(2, 2);
    xm << 0, 1, 1, 0;
    CHECK(infidelity(Unitary::identity(2), Unitary(xm)) == 1.0);

    const Circuit rz(1, {GateInstance::make(Gate::Rz, {}, {0}, kPi / 2)});
    CHECK(std::abs(infidelity(Unitary::identity(2), circuit_unitary(rz)) - 0.5) < 1e-12);
}

TEST_CASE("infidelity is global-phase invariant and symmetric") {
    Rng rng(109);
    for (int it = 0; it < 50; ++it) {
        const Unitary u = random_unitary(8, rng);
        const double phase = rng.uniform(0.0, 2 * kPi);
        const Unitary v(std::exp(kI * phase) * u.matrix());
        CHECK(infidelity(u, v) <= 1e-12);
        const Unitary w = random_unitary(8, rng);
        CHECK(std::abs(infidelity(u, w) - infidelity(w, u)) <= 1e-12);
    }
}

TEST_CASE("infidelity dimension mismatch") {
    CHECK_THROWS_AS(infidelity(Unitary::identity(2), Unitary::identity(4)), ValidationError);
}

TEST_CASE("hamiltonian: 1-qubit ising at h=1, tau=pi/2 is X up to phase") {
    const Unitary u = hamiltonian_evolution({SpinModel::Ising, 1, 3.7, 1.0, 0.0, kPi / 2});
    CMatrix xm(2, 2);
    xm << 0, 1, 1, 0;
    CHECK(infidelity(u, Unitary(xm)) <= 1e-10);
}

TEST_CASE("hamiltonian: tau = 0 is the identity") {
    for (SpinModel m : {SpinModel::Ising, SpinModel::Xxz}) {
        const Unitary u = hamiltonian_evolution({m, 3, 0.8, 0.2, 0.5, 0.0});
        CHECK(max_abs(u.matrix() - CMatrix::Identity(8, 8)) < 1e-12);
    }
}

TEST_CASE("hamiltonian: separable ising matches series exponential") {
    const HamiltonianSpec spec{SpinModel::Ising, 2, 0.0, 0.7, 0.0, 0.25};
    const CMatrix h = build_hamiltonian(spec);
    const CMatrix ref = testing::oracle_expm(-kI * spec.tau * h);
    CHECK(max_abs(hamiltonian_evolution(spec).matrix() - ref) < 1e-12);
}

TEST_CASE("hamiltonian: xxz matches series exponential") {
    const HamiltonianSpec spec{SpinModel::Xxz, 3, 0.9, 0.2, 0.6, 0.4};
    const CMatrix ref = testing::oracle_expm(-kI * spec.tau * build_hamiltonian(spec));
    CHECK(max_abs(hamiltonian_evolution(spec).matrix() - ref) < 1e-11);
}

TEST_CASE("hamiltonian: evolution composes in tau") {
    const HamiltonianSpec base{SpinModel::Xxz, 3, 0.9, 0.2, 0.6, 0.0};
    auto at = [&](double tau) {
        HamiltonianSpec s = base;
        s.tau = tau;
        return hamiltonian_evolution(s).matrix();
    };
    CHECK(max_abs(at(0.7) - at(0.3) * at(0.4)) < 1e-9);
}

TEST_CASE("corrupt: param_noise with zero amplitude is the identity edit") {
    GateSet set = GateSet::full();
    Rng rng(113);
    const Circuit c = testing::random_circuit(3, 6, set, rng);
    Rng crng(1);
    const Circuit out = corrupt(c, CorruptionMode::ParamNoise, set, crng, 0.0);
    REQUIRE(out.gates.size() == c.gates.size());
    for (size_t i = 0; i < c.gates.size(); ++i)
        CHECK(std::abs(out.gates[i].theta - c.gates[i].theta) < 1e-12);
    CHECK(infidelity(circuit_unitary(out), circuit_unitary(c)) <= 1e-12);
}

TEST_CASE("corrupt: drop on a 1-gate circuit empties it") {
    GateSet set({Gate::H});
    Circuit c(1, {GateInstance::make(Gate::H, {}, {0})});
    Rng rng(5);
    CHECK(corrupt(c, CorruptionMode::Drop, set, rng).gates.empty());
    Circuit empty(1, {});
    CHECK_THROWS_AS(corrupt(empty, CorruptionMode::Drop, set, rng), ValidationError);
    CHECK_THROWS_AS(corrupt(empty, CorruptionMode::Replace, set, rng), ValidationError);
}

TEST_CASE("corrupt: modes change exactly one gate") {
    GateSet set = GateSet::full();
    Rng rng(127);
    const Circuit c = testing::random_circuit(3, 6, set, rng);
    Rng r1(2), r2(3);
    CHECK(corrupt(c, CorruptionMode::Drop, set, r1).gates.size() == 5);
    CHECK(corrupt(c, CorruptionMode::Append, set, r2).gates.size() == 7);
    Rng r3(4);
    const Circuit rep = corrupt(c, CorruptionMode::Replace, set, r3);
    CHECK(rep.gates.size() == c.gates.size());
}

TEST_CASE("unitary file round trip") {
    Rng rng(131);
    const Unitary u = random_unitary(8, rng);
    std::stringstream buf;
    write_unitary(buf, u);
    const Unitary back = read_unitary(buf);
    CHECK(max_abs(back.matrix() - u.matrix()) == 0.0);
}
