#include "doctest.h"

#include "qbell/errors.hpp"
#include "qbell/qstate.hpp"
#include "qbell/stabiliser.hpp"

using namespace qbell;

TEST_CASE("generator gates are unitary and clifford") {
    for (int d : {2, 3, 4, 5, 6}) {
        for (const Matrix& U : {fourier_gate(d), phase_gate(d), sum_gate(d), weyl_gate(d, 1, 1)}) {
            CHECK(is_unitary(U));
            CHECK(is_clifford_gate(d, U));
        }
        CHECK(is_clifford_gate(d, multiplier_gate(d, d - 1)));
        CHECK_FALSE(is_clifford_gate(d, cubic_phase_gate(d)));
    }
}

TEST_CASE("B_R and its inverse cancel") {
    const PhaseContext ctx(3, 1);
    const RMatrix R = build_R(ctx, 4);
    const DenseState psi = haar_random(ctx, 4).tensor_power(4);
    const DenseState back = apply_BR_inverse(apply_BR(psi, R), R);
    CHECK(fidelity(back, psi) == doctest::Approx(1.0).epsilon(1e-12));
    const Matrix B = dense_BR(R, 1);
    CHECK(is_unitary(B));
}

TEST_CASE("bell outcome table is normalised and matches projections") {
    const PhaseContext ctx(3, 1);
    const DenseState two = haar_random(ctx, 8).tensor(haar_random(ctx, 9));
    const std::vector<double> probs = bell_outcome_table(two, 0, 1);
    double total = 0.0;
    for (double p : probs) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    const ZVec x{1, 2};
    CHECK(bell_project(two, 0, 1, x).probability == doctest::Approx(probs[point_index(x, 3)]).epsilon(1e-12));
}

TEST_CASE("state json round trip is exact") {
    const DenseState s = haar_random(PhaseContext(4, 2), 21);
    const DenseState back = state_from_json(nlohmann::json::parse(state_to_json(s).dump()));
    CHECK(back.amplitudes() == s.amplitudes());
}

TEST_CASE("malformed state json names the field") {
    try {
        state_from_json(nlohmann::json{{"d", 2}, {"n", 1}});
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
        CHECK(std::string(e.what()).find("amplitudes") != std::string::npos);
    }
    CHECK_THROWS_AS(state_from_json(nlohmann::json{{"d", 2}, {"n", 1}, {"amplitudes", {{1, 0}}}}), Error);
}

TEST_CASE("doped circuits") {
    const PhaseContext ctx(2, 3);
    Rng rng(31);
    for (int t = 0; t <= 2; ++t) {
        const auto [circuit, psi] = doped_clifford(ctx, t, rng);
        CHECK(circuit.doping_count == t);
        int flagged = 0;
        for (const Gate& g : circuit.gates) flagged += !is_clifford_gate(2, gate_matrix(2, g));
        CHECK(flagged == t);
        CHECK(stabiliser_size(psi) >= (1u << std::max(0, 3 - 2 * t)));
        CHECK(fidelity(run_circuit(circuit), psi) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("clifford circuits preserve stabiliser size") {
    const PhaseContext ctx(3, 2);
    Rng rng(41);
    for (int i = 0; i < 10; ++i) {
        const DenseState psi = haar_random(ctx, rng);
        const Circuit c = random_clifford_circuit(ctx, 20, rng);
        CHECK(stabiliser_size(run_circuit(c, psi)) == stabiliser_size(psi));
    }
}

TEST_CASE("seeded haar states are reproducible and normalised") {
    const PhaseContext ctx(5, 1);
    const DenseState a = haar_random(ctx, 99), b = haar_random(ctx, 99);
    CHECK(a.amplitudes() == b.amplitudes());
    CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-12));
}
