#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qbell/phase_space.hpp"
#include "qbell/rng.hpp"
#include "qbell/state.hpp"
#include "qbell/zmod.hpp"

namespace qbell {

using Matrix = Eigen::MatrixXcd;

// Largest operator dimension dense_weyl and friends will materialise.
constexpr std::size_t kDenseOperatorCap = 4096;

DenseState apply_weyl(const DenseState& s, int reg, const WeylLabel& x);
Matrix dense_weyl(const WeylLabel& x);
cplx expectation_weyl(const DenseState& s, const WeylLabel& x);

cplx inner(const DenseState& a, const DenseState& b);  // <a|b>
double fidelity(const DenseState& a, const DenseState& b);

// |Q> -> |QR mod d> on the listed registers, each holding n qudits; column j
// of Q is register regs[j]. R must be invertible mod d.
DenseState apply_BR(const DenseState& s, const std::vector<std::vector<int>>& R_mod_d, const std::vector<int>& regs);
DenseState apply_BR(const DenseState& s, const RMatrix& R);          // registers 0..k-1
DenseState apply_BR_inverse(const DenseState& s, const RMatrix& R);  // B_R^dagger
Matrix dense_BR(const RMatrix& R, int n);

DenseState haar_random(const PhaseContext& ctx, Rng& rng);
DenseState haar_random(const PhaseContext& ctx, std::uint64_t seed);
Matrix haar_unitary(int dim, Rng& rng);

// Gate on the listed qudits; local index of the targets is sum_j t_j d^j.
DenseState apply_gate(const DenseState& s, const Matrix& U, const std::vector<int>& targets);

Matrix fourier_gate(int d);
Matrix phase_gate(int d);
Matrix multiplier_gate(int d, int a);
Matrix sum_gate(int d);  // |q, r> -> |q, q + r>, q on the first target
Matrix weyl_gate(int d, int v, int w);
Matrix cubic_phase_gate(int d);  // diag(exp(i pi q^3 / (d D)))

bool is_unitary(const Matrix& U, double tol = 1e-8);
// U W U^dagger is a D-th root of unity times a Weyl operator for every X_i, Z_i.
bool is_clifford_gate(int d, const Matrix& U, double tol = 1e-8);

struct Gate {
    std::string kind;  // F, S, M, SUM, W, CUBIC, U
    std::vector<int> targets;
    std::vector<double> params;
};

struct Circuit {
    int d = 2;
    int n = 1;
    std::vector<Gate> gates;
    int doping_count = 0;

    nlohmann::json to_json() const;
    static Circuit from_json(const nlohmann::json& j);
};

Matrix gate_matrix(int d, const Gate& g);
DenseState run_circuit(const Circuit& c);
DenseState run_circuit(const Circuit& c, DenseState start);

Circuit random_clifford_circuit(const PhaseContext& ctx, int gates, Rng& rng);

enum class DopingGate { HaarRejected, Cubic };
std::pair<Circuit, DenseState> doped_clifford(const PhaseContext& ctx, int t, Rng& rng,
                                              DopingGate kind = DopingGate::HaarRejected);

// Probability of each Bell outcome x on registers (a, b), indexed by point_index.
std::vector<double> bell_outcome_table(const DenseState& s, int a, int b);

struct BellBranch {
    double probability = 0.0;
    DenseState remainder;  // remaining registers in order, normalised when probability > 0
    bool has_remainder = false;
};

BellBranch bell_project(const DenseState& s, int a, int b, const ZVec& x);
std::pair<ZVec, BellBranch> bell_sample_pair(const DenseState& s, int a, int b, Rng& rng);

// Inverse-CDF draw; entries below zero are treated as zero.
std::size_t sample_index(const std::vector<double>& probs, Rng& rng);

nlohmann::json state_to_json(const DenseState& s);
DenseState state_from_json(const nlohmann::json& j);

}  // namespace qbell
