#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qbell/sampling.hpp"
#include "qbell/stabiliser.hpp"

namespace qbell {

// Shared: one baseline round is subtracted from every later round, as the
// algorithm boxes print it. Fresh: every difference uses two new rounds.
enum class BaselineMode { Shared, Fresh };

const char* mode_name(BaselineMode m);
BaselineMode parse_mode(const std::string& s);

struct SamplingOptions {
    BaselineMode mode = BaselineMode::Shared;
    int k = 4;                   // copies B_R acts on; 1 and 2 only where the reduction applies
    bool qubit_template = false; // d = 2: use the four-square template instead of the identity
    bool transcript = false;     // keep every sample in the verdict
};

RMatrix sampling_matrix(const PhaseContext& ctx, const SamplingOptions& opt);

// Draws differences according to the baseline mode and keeps the copy count.
class DifferenceStream {
public:
    DifferenceStream(const SkewedSampler& sampler, BaselineMode mode, Rng& rng);
    SkewedSample next();
    std::uint64_t copies() const { return copies_; }

private:
    const SkewedSampler& sampler_;
    BaselineMode mode_;
    Rng& rng_;
    std::optional<SkewedSample> baseline_;
    std::uint64_t copies_ = 0;
};

struct TesterVerdict {
    bool accept = false;
    std::uint64_t samples_used = 0;  // copies of the input state consumed
    std::uint64_t rounds = 0;        // m as defined by the algorithm
    double statistic = 0.0;
    double threshold = 0.0;
    BaselineMode mode = BaselineMode::Shared;
    bool out_of_range = false;       // parameters outside the theorem hypothesis
    nlohmann::json details = nlohmann::json::object();
    nlohmann::json transcript;       // null unless requested

    nlohmann::json to_json() const;
};

// ---------------------------------------------------------------- learning

struct LearnResult {
    Submodule span;                          // span of the sampled differences
    std::vector<PhasedLabel> generators;     // independent generators with measured phases
    std::optional<StabiliserGroup> group;    // set when the span is Lagrangian and the phases are consistent
    std::uint64_t rounds = 0;
    std::uint64_t copies_used = 0;
    std::uint64_t copies_budget = 0;
    nlohmann::json transcript;

    nlohmann::json to_json() const;
};

// Outcome of measuring W_x on psi: returns s with eigenvalue omega^{-s}, or
// nullopt when the sampled eigenvalue is not a d-th root of unity.
std::optional<int> measure_weyl_phase(const DenseState& psi, const ZVec& x, Rng& rng);

LearnResult learn_stabiliser(const DenseState& psi, const SamplingOptions& opt, Rng& rng);

struct HiddenGroupResult {
    Submodule module;  // complement of the sampled span
    std::uint64_t rounds = 0;
    std::uint64_t copies_used = 0;
    nlohmann::json transcript;
    nlohmann::json to_json() const;
};

std::uint64_t hidden_group_rounds(const PhaseContext& ctx, double eps, double delta);
// separate_columns picks the largest of the four per-column spans.
HiddenGroupResult hidden_group(const DenseState& psi, double eps, double delta, const SamplingOptions& opt, Rng& rng,
                               bool separate_columns = false);

double size_test_eps_bound(const PhaseContext& ctx);
std::uint64_t size_test_rounds(const PhaseContext& ctx, double eps, double delta);
// Throws ParamOutOfRange when eps exceeds the bound unless allow_out_of_range.
TesterVerdict test_size(const DenseState& psi, int t, double eps, double delta, const SamplingOptions& opt, Rng& rng,
                        bool allow_out_of_range = false);

// accept = "doped", reject = "Haar".
TesterVerdict doped_vs_haar(const DenseState& psi, const SamplingOptions& opt, Rng& rng);

// ---------------------------------------------------------------- estimators

double C_dr(int d, int r);
double G_r_exact(const DenseState& psi, int r);
double G_r_from_table(const PhaseContext& ctx, const PhaseTable& p, int r);
int povm_measure(double G, Rng& rng);
int povm_measure(const DenseState& psi, int r, Rng& rng);

// d^{2kn} sum_X prod_i p(X_i)^2 p((XR)_i); the sum has d^{2nk} terms.
double A_exact(const DenseState& psi, const RMatrix& R);

// Law of the outcome cos(2 pi k / d) of the symmetrised transversal Weyl
// observable; q[k] for k in [0, d). p is the characteristic distribution.
std::vector<double> observable_distribution(const PhaseContext& ctx, const PhaseTable& p, const std::vector<ZVec>& labels);
// Same law from a dense eigendecomposition; limited to d^{2n * labels} <= 4096.
std::vector<double> observable_distribution_dense(const DenseState& psi, const std::vector<ZVec>& labels);
double observable_measure(const PhaseContext& ctx, const PhaseTable& p, const std::vector<ZVec>& labels, Rng& rng);

std::uint64_t povm_test_rounds(int d, int r, double eps, double delta);
TesterVerdict stab_test_povm(const DenseState& psi, double eps, double delta, int r, Rng& rng, bool transcript = false);

std::uint64_t bell_test_rounds(int d, double eps, double delta);
TesterVerdict stab_test_bell(const DenseState& psi, double eps, double delta, const SamplingOptions& opt, Rng& rng);

double gamma_r(int d, int r, double eps1, double eps2);
double alpha_bell(int d, double eps1, double eps2);
std::uint64_t tolerant_povm_rounds(double gamma, double delta);
std::uint64_t tolerant_bell_rounds(double alpha, double delta);
TesterVerdict tolerant_povm(const DenseState& psi, double eps1, double eps2, double delta, int r, Rng& rng,
                            bool transcript = false);
TesterVerdict tolerant_bell(const DenseState& psi, double eps1, double eps2, double delta, const SamplingOptions& opt,
                            Rng& rng);

// ---------------------------------------------------------------- range comparison

struct RangeRow {
    double eps1, eps2, gamma, alpha;
    std::optional<std::uint64_t> copies_povm, copies_bell;
};

struct RangeTable {
    int d = 3, r = 2, grid = 100;
    double delta = 0.01;
    std::vector<RangeRow> rows;     // (grid + 1)^2 points, eps2 major
    std::vector<RangeRow> curve;    // eps2 = curve_eps2, grid + 1 points on [0, curve_eps1_max]
    double curve_eps2 = 0.9;
    double curve_eps1_max = 0.0;    // largest eps1 where gamma or alpha is positive at curve_eps2

    // Largest grid eps1 with gamma > 0 on the eps2 = 1 row.
    double grid_boundary_povm() const;
    std::string to_csv() const;
};

double povm_boundary_eps1(int d, int r);  // gamma_r = 0 at eps2 = 1
RangeTable range_tables(int d, int r, int grid, double delta = 0.01, double curve_eps2 = 0.9);

}  // namespace qbell
