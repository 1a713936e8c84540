#pragma once

#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qbell/phase_space.hpp"
#include "qbell/qstate.hpp"
#include "qbell/rng.hpp"
#include "qbell/zmod.hpp"

namespace qbell {

// Generator (x, s) stands for omega^s W_x, which fixes the state.
struct PhasedLabel {
    ZVec x;
    int s = 0;
    bool operator==(const PhasedLabel&) const = default;
};

// Commuting phased Weyl labels. Lagrangian when module.size() == d^n, partial otherwise.
class StabiliserGroup {
public:
    // Throws InvalidGroup unless the generators commute and never produce a
    // nontrivial multiple of the identity.
    StabiliserGroup(const PhaseContext& ctx, std::vector<PhasedLabel> generators, bool require_lagrangian = true);

    const PhaseContext& ctx() const { return ctx_; }
    const std::vector<PhasedLabel>& generators() const { return gens_; }
    const Submodule& module() const { return module_; }
    bool is_lagrangian() const;

    // Every element with its phase, sorted by point index.
    const std::vector<PhasedLabel>& elements() const { return elements_; }
    // Phase of the element at x; nullopt when x is not in the module.
    std::optional<int> phase_at(const ZVec& x) const;

    // The same module with s shifted by the character [z, .].
    StabiliserGroup shifted(const ZVec& z) const;

    nlohmann::json to_json() const;
    static StabiliserGroup from_json(const nlohmann::json& j);

private:
    PhaseContext ctx_;
    std::vector<PhasedLabel> gens_;
    Submodule module_;
    std::vector<PhasedLabel> elements_;
    std::map<std::size_t, int> phase_;
};

// One consistent phase per independent generator of an isotropic module.
std::vector<PhasedLabel> base_phases(const PhaseContext& ctx, const Submodule& isotropic);

StabiliserGroup random_stabiliser_group(const PhaseContext& ctx, Rng& rng);
Submodule random_lagrangian(const PhaseContext& ctx, Rng& rng);

DenseState stabiliser_state(const StabiliserGroup& g);
// Closed-form amplitude expansion over generator coefficients; used to cross-check.
DenseState stabiliser_state_closed_form(const StabiliserGroup& g);
Matrix stabiliser_projector(const StabiliserGroup& g);

struct UnsignedGroup {
    Submodule module;
    std::map<std::size_t, int> phases;  // point index -> s with omega^s W_x psi = psi
};

UnsignedGroup unsigned_group(const DenseState& psi, double tol = 1e-8);
std::uint64_t stabiliser_size(const DenseState& psi, double tol = 1e-8);

// All isotropic submodules of Z_d^{2n}, ordered by size then fingerprint.
std::vector<Submodule> enumerate_isotropic(const PhaseContext& ctx);
std::vector<Submodule> enumerate_lagrangians(const PhaseContext& ctx);
// Every stabiliser group on the context, one per state.
std::vector<StabiliserGroup> enumerate_stabiliser_groups(const PhaseContext& ctx);
void enumerate_stabiliser_states(const PhaseContext& ctx,
                                 const std::function<void(const StabiliserGroup&, const DenseState&)>& visit);

struct FidelityResult {
    double value = 0.0;
    std::optional<StabiliserGroup> argmax;
};

FidelityResult stabiliser_fidelity(const DenseState& psi);
double k_sized_fidelity(const DenseState& psi, std::uint64_t K);

struct PartialProjection {
    double overlap = 0.0;  // <psi|Pi_C|psi>
    ZVec shift;            // b picking the coset
    DenseState state;      // Pi_C psi normalised
};
// Best coset projector of an isotropic module applied to psi.
PartialProjection best_partial_projection(const DenseState& psi, const Submodule& isotropic);

bool is_symplectic(const PhaseContext& ctx, const std::vector<std::vector<int>>& gamma);

}  // namespace qbell
