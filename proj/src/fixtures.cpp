#include "qbell/fixtures.hpp"

#include <cmath>
#include <optional>

#include "qbell/errors.hpp"

namespace qbell {

DenseState magic_state(int d) {
    constexpr double kPi = 3.14159265358979323846;
    if (d == 2) return DenseState(2, {1}, {std::cos(kPi / 8), std::sin(kPi / 8)});
    std::vector<cplx> amp(static_cast<std::size_t>(d), 1.0 / std::sqrt(static_cast<double>(d)));
    const DenseState plus(d, {1}, amp);
    return apply_gate(plus, cubic_phase_gate(d), {0});
}

DenseState magic_product(const PhaseContext& ctx) {
    const DenseState m = magic_state(ctx.d());
    DenseState out = m;
    for (int i = 1; i < ctx.n(); ++i) out = out.tensor(m);
    return DenseState(ctx.d(), {ctx.n()}, out.amplitudes());
}

DenseState size_fixture(const PhaseContext& ctx, int t, Rng& rng) {
    require(t >= 0 && t <= ctx.n(), ErrorCode::InvalidArgument, "t must lie in [0, n]");
    std::optional<DenseState> out;
    auto append = [&](const DenseState& s) { out = out ? out->tensor(s) : s; };
    if (t > 0) append(stabiliser_state(random_stabiliser_group(PhaseContext(ctx.d(), t), rng)));
    const DenseState m = magic_state(ctx.d());
    for (int i = t; i < ctx.n(); ++i) append(m);
    return DenseState(ctx.d(), {ctx.n()}, out->amplitudes());
}

DenseState far_state(const PhaseContext& ctx, std::uint64_t seed, int draws) {
    Rng rng(seed, 0xfa7);
    DenseState best;
    double best_f = 2.0;
    for (int i = 0; i < draws; ++i) {
        DenseState s = haar_random(ctx, rng);
        const double f = stabiliser_fidelity(s).value;
        if (f < best_f) {
            best_f = f;
            best = std::move(s);
        }
    }
    return best;
}

FidelityFixture fidelity_fixture(const DenseState& far, double target, double tol) {
    const FidelityResult fr = stabiliser_fidelity(far);
    require(target >= fr.value - tol && target <= 1.0, ErrorCode::ParamOutOfRange,
            "target fidelity " + std::to_string(target) + " is outside [" + std::to_string(fr.value) + ", 1]");
    const DenseState S = stabiliser_state(*fr.argmax);

    // far = cos(theta_max) S + sin(theta_max) perp after fixing the phase of <S|far>.
    const cplx c = inner(S, far);
    const double cabs = std::abs(c);
    std::vector<cplx> perp(far.size());
    for (std::size_t i = 0; i < far.size(); ++i) perp[i] = far[i] * (std::conj(c) / cabs) - cabs * S[i];
    DenseState P(far.d(), far.registers(), perp);
    P.normalise();
    const double theta_max = std::acos(std::min(1.0, cabs));

    auto at = [&](double theta) {
        std::vector<cplx> amp(far.size());
        for (std::size_t i = 0; i < far.size(); ++i) amp[i] = std::cos(theta) * S[i] + std::sin(theta) * P[i];
        DenseState s(far.d(), far.registers(), amp);
        s.normalise();
        return s;
    };

    double lo = 0.0, hi = theta_max;
    FidelityFixture out{at(hi), fr.value};
    if (std::abs(out.fidelity - target) <= tol) return out;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        DenseState s = at(mid);
        const double f = stabiliser_fidelity(s).value;
        out = {std::move(s), f};
        if (std::abs(f - target) <= tol * 0.5) break;
        if (f > target) lo = mid;
        else hi = mid;
    }
    require(std::abs(out.fidelity - target) <= tol, ErrorCode::Internal,
            "bisection reached fidelity " + std::to_string(out.fidelity) + " for target " + std::to_string(target));
    return out;
}

}  // namespace qbell
