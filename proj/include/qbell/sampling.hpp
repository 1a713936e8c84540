#pragma once

#include <vector>

#include "qbell/phase_space.hpp"
#include "qbell/qstate.hpp"
#include "qbell/rng.hpp"
#include "qbell/stabiliser.hpp"
#include "qbell/zmod.hpp"

namespace qbell {

// One label per Bell pair; a round on k-copy B_R uses 2k copies.
struct SkewedSample {
    std::vector<ZVec> labels;
};

SkewedSample subtract_samples(const SkewedSample& a, const SkewedSample& b, int d);

// Bell sampling on psi^{(x)2k} after B_R^dagger on the even copies, with
// pairs (2i-1, 2i). The even block is kept as one d^{kn} vector and each
// pair is contracted against W_x^dagger psi, so the 2k-copy state is never built.
class SkewedSampler {
public:
    SkewedSampler(const DenseState& psi, const RMatrix& R);

    const PhaseContext& ctx() const { return ctx_; }
    int k() const { return R_.k; }
    // True when R is the identity mod d, so the pairs are independent.
    bool independent_pairs() const { return independent_; }

    SkewedSample round(Rng& rng) const;
    // Two fresh rounds, labels subtracted column by column (4k copies).
    SkewedSample difference(Rng& rng) const;

    // Exact joint law of one round over (Z_d^{2n})^k by enumerating every branch.
    std::vector<double> joint_distribution(std::size_t limit = 2000000) const;

private:
    // Outcome probabilities and unnormalised collapsed blocks for the next pair.
    Matrix contract(const Eigen::Ref<const Eigen::VectorXcd>& block) const;

    PhaseContext ctx_;
    RMatrix R_;
    bool independent_ = false;
    Matrix phi_;                  // row x holds d^{-n/2} (W_x^dagger psi)^T
    Eigen::VectorXcd block_;      // B_R^dagger psi^{(x)k}
    std::vector<double> pair_probs_;
};

// Probabilities below this are treated as exact zeros when sampling.
constexpr double kProbabilityFloor = 1e-13;

// Closed-form skewed difference distribution; n = 1, k = 4. d <= 4 unless allow_large.
PhaseTable b_exact(const DenseState& psi, const RMatrix& R, bool allow_large = false);
// The same law from two independent rounds of the simulator's exact branch table.
PhaseTable b_from_branches(const DenseState& psi, const RMatrix& R);

struct Witness {
    std::vector<ZVec> labels;  // y_i with B_R|S>^{(x)k} = phase (x)W_{y_i} |S*>^{(x)k}
    cplx phase = 1.0;
    double fidelity = 0.0;
};

Witness conjugate_witness(const StabiliserGroup& S, const RMatrix& R);

}  // namespace qbell
