#include <doctest.h>

#include <cmath>

#include "jc/experiments.hpp"
#include "jc/recovery.hpp"

using namespace jc;

TEST_CASE("synthesized recovery inverts a jump on the four-qubit pairing code") {
    const DecayModel model = DecayModel::uniform(4, 1.0);
    const JumpCode code = pairing_code(4, 0.6);
    for (int alpha = 1; alpha <= 4; ++alpha) {
        const RecoveryOp rec = synthesize_recovery(code, alpha, model);
        CHECK(verify_recovery(rec, code, model) < 1e-10);
        CHECK(unitarity_defect(rec) < 1e-10);
        CHECK(rec.alpha == alpha);
    }
}

TEST_CASE("recovery for a one-dimensional code is the expected swap") {
    SeedFamily seed;
    seed.n_points = 2;
    seed.w = 2;
    seed.d = 1;
    seed.families = {{0b11}};
    const JumpCode code = encode(seed);
    const DecayModel model = DecayModel::uniform(2, 1.0);
    const RecoveryOp rec = synthesize_recovery(code, 1, model);
    // jump at position 1 maps |11> to |01>; U swaps them back
    const Eigen::MatrixXcd u = rec.unitary.dense();
    CHECK(std::abs(u(0b11, 0b01) - cplx(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(u(0b01, 0b11) - cplx(1.0, 0.0)) < 1e-12);
    CHECK(verify_recovery(rec, code, model) < 1e-12);
}

TEST_CASE("identity as recovery leaves the full jump residual") {
    const DecayModel model = DecayModel::uniform(4, 1.0);
    const JumpCode code = pairing_code(4);
    RecoveryOp identity_rec;
    identity_rec.alpha = 2;
    identity_rec.unitary = SparseOperator::identity(4);
    const double res = verify_recovery(identity_rec, code, model);
    // the jumped state is orthogonal to the code space
    CHECK(res == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    CHECK(res > 0.5);
}

TEST_CASE("recovery for the wrong position fails loudly") {
    const DecayModel model = DecayModel::uniform(4, 1.0);
    const JumpCode code = pairing_code(4);
    const RecoveryOp rec1 = synthesize_recovery(code, 1, model);
    const SparseOperator l2 = lindblad_op(model, 2);
    // apply U_1 after a jump at position 2
    double residual = 0.0;
    for (const auto& c : code.codewords) {
        Eigen::VectorXcd v = l2.matrix() * c.amps;
        v /= std::sqrt(0.5); // lambda({2}) = kappa/2
        v = rec1.unitary.matrix() * v;
        residual = std::max(residual, (v - c.amps).norm());
    }
    CHECK(residual >= 1.0);
}

TEST_CASE("recovery rejects codes that are not one-jump correcting at the position") {
    // two bare basis-state codewords that collide after a jump at position 1
    JumpCode broken;
    broken.n_qubits = 3;
    broken.weight = 2;
    broken.order = 1;
    broken.dimension = 2;
    broken.codewords = {StateVector::basis(3, 0b110), StateVector::basis(3, 0b101)};
    const DecayModel model = DecayModel::uniform(3, 1.0);
    // L_2 maps 110 -> 100 and annihilates 101: lambda depends on the codeword
    CHECK_THROWS_AS(synthesize_recovery(broken, 2, model), condition_violation);
}

TEST_CASE("recovery maps the jumped image exactly onto the code weight class") {
    const DecayModel model = DecayModel::uniform(6, 1.0);
    const JumpCode code = pairing_code(6, 0.25);
    const RecoveryOp rec = synthesize_recovery(code, 3, model);
    const SparseOperator l3 = lindblad_op(model, 3);
    for (const auto& c : code.codewords) {
        Eigen::VectorXcd v = rec.unitary.matrix() * (l3.matrix() * c.amps);
        for (Eigen::Index x = 0; x < v.size(); ++x)
            if (std::abs(v[x]) > 1e-12)
                CHECK(std::popcount(static_cast<std::uint32_t>(x)) == code.weight);
    }
}

TEST_CASE("three interleaved jumps and recoveries restore the eight-qubit code") {
    const DecayModel model = DecayModel::uniform(8, 1.0);
    const JumpCode code = encode(construct_833());
    const RecoveryTable table = build_recovery_table(code, model);
    for (int i = 0; i < code.dimension; ++i) {
        Eigen::VectorXcd v = code.codewords[static_cast<std::size_t>(i)].amps;
        for (int alpha : {2, 5, 7}) {
            v = lindblad_op(model, alpha).matrix() * v;
            v /= v.norm();
            v = table[static_cast<std::size_t>(alpha - 1)] * v;
        }
        const double overlap =
            std::abs(code.codewords[static_cast<std::size_t>(i)].amps.dot(v));
        CHECK(overlap == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("recovery table covers every position of the six-qubit code") {
    const DecayModel model = DecayModel::uniform(6, 1.0);
    const JumpCode code = pairing_code(6);
    const RecoveryTable table = build_recovery_table(code, model);
    REQUIRE(table.size() == 6);
    for (const auto& u : table) {
        REQUIRE(u.rows() == 64);
        CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(64, 64)).cwiseAbs().maxCoeff() <
              1e-10);
    }
}

TEST_CASE("recovery directions are independent of the rate magnitude") {
    const JumpCode code = pairing_code(4);
    const RecoveryOp a = synthesize_recovery(code, 1, DecayModel::uniform(4, 1.0));
    const RecoveryOp b = synthesize_recovery(code, 1, DecayModel::uniform(4, 2.7));
    CHECK((a.unitary.dense() - b.unitary.dense()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("perfect-recovery trajectories return to the initial state at every event") {
    const DecayModel model = DecayModel::uniform(4, 1.0);
    const JumpCode code = pairing_code(4, 0.0);
    const RecoveryTable table = build_recovery_table(code, model);
    const StateVector psi0 = uniform_code_state(code);
    const SparseOperator h0(4);
    PerfectRecoveryHandler handler(&table);

    long total_events = 0;
    for (int k = 0; k < 100; ++k) {
        RngStream rng(99, static_cast<std::uint64_t>(k));
        auto h = handler.clone();
        const TrajectoryRecord rec =
            sample_trajectory(psi0, h0, model, 3.0, *h, rng);
        total_events += static_cast<long>(rec.events.size());
        for (const auto& ev : rec.events) {
            CHECK(ev.reported == ev.alpha);
            REQUIRE(ev.recovered_at.has_value());
            CHECK(*ev.recovered_at == ev.t);
        }
        // H = 0 on the decoherence-free class: the trajectory never moves
        CHECK(fidelity(rec.final_state, psi0) == doctest::Approx(1.0).epsilon(1e-9));
        // phase-aligned comparison
        const cplx g = psi0.amps.dot(rec.final_state.amps);
        CHECK((rec.final_state.amps * std::conj(g / std::abs(g)) - psi0.amps)
                  .cwiseAbs()
                  .maxCoeff() < 1e-8);
    }
    CHECK(total_events > 100); // the decay really fired
}
