#pragma once

#include <cstdint>

#include "qbell/qstate.hpp"
#include "qbell/stabiliser.hpp"

namespace qbell {

// Single-qudit non-stabiliser state: cos(pi/8)|0> + sin(pi/8)|1> for d = 2,
// the cubic phase gate applied to |+> otherwise.
DenseState magic_state(int d);
DenseState magic_product(const PhaseContext& ctx);

// t qudits in a random stabiliser state, the rest magic; stabiliser size >= d^t.
DenseState size_fixture(const PhaseContext& ctx, int t, Rng& rng);

// Lowest-fidelity state among `draws` Haar samples.
DenseState far_state(const PhaseContext& ctx, std::uint64_t seed, int draws = 2000);

struct FidelityFixture {
    DenseState state;
    double fidelity = 0.0;  // brute-force stabiliser fidelity of state
};

// Walks from the nearest stabiliser state of `far` towards `far` and bisects
// the angle until the stabiliser fidelity is within tol of target.
FidelityFixture fidelity_fixture(const DenseState& far, double target, double tol = 1e-6);

}  // namespace qbell
