#include "doctest.h"

#include <cmath>

#include "qbell/errors.hpp"
#include "qbell/stabiliser.hpp"

using namespace qbell;

namespace {

// Count for prime d: d^n prod_{i=1}^{n} (d^i + 1).
long prime_count(int d, int n) {
    long c = static_cast<long>(std::pow(d, n));
    for (int i = 1; i <= n; ++i) c *= static_cast<long>(std::pow(d, i)) + 1;
    return c;
}

}  // namespace

TEST_CASE("stabiliser state counts for prime d") {
    for (auto [d, n] : std::vector<std::pair<int, int>>{{2, 1}, {3, 1}, {5, 1}, {2, 2}, {3, 2}}) {
        long count = 0;
        enumerate_stabiliser_states(PhaseContext(d, n), [&](const StabiliserGroup&, const DenseState&) { ++count; });
        CHECK(count == prime_count(d, n));
    }
}

TEST_CASE("every group element fixes its state with the stored phase") {
    for (auto [d, n] : std::vector<std::pair<int, int>>{{2, 2}, {4, 1}, {6, 1}}) {
        const PhaseContext ctx(d, n);
        double worst = 0.0, closed = 0.0;
        for (const StabiliserGroup& g : enumerate_stabiliser_groups(ctx)) {
            const DenseState s = stabiliser_state(g);
            closed = std::max(closed, 1.0 - fidelity(s, stabiliser_state_closed_form(g)));
            for (const PhasedLabel& e : g.elements())
                worst = std::max(worst, std::abs(expectation_weyl(s, WeylLabel(ctx, e.x)) * ctx.omega_pow(e.s) - 1.0));
        }
        CHECK(worst < 1e-10);
        CHECK(closed < 1e-10);
    }
}

TEST_CASE("projector has rank one on the state") {
    const PhaseContext ctx(3, 1);
    Rng rng(2);
    const StabiliserGroup g = random_stabiliser_group(ctx, rng);
    const Matrix P = stabiliser_projector(g);
    CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(P.trace() - 1.0) < 1e-12);
}

TEST_CASE("unsigned group and size of stabiliser and magic states") {
    const PhaseContext ctx(3, 2);
    Rng rng(7);
    const StabiliserGroup g = random_stabiliser_group(ctx, rng);
    const DenseState s = stabiliser_state(g);
    CHECK(unsigned_group(s).module == g.module());
    CHECK(stabiliser_size(s) == 9);
    CHECK(stabiliser_size(haar_random(ctx, rng)) == 1);
}

TEST_CASE("fidelity is one on stabiliser states and bounded below by the mass on the argmax group") {
    const PhaseContext ctx(2, 2);
    Rng rng(9);
    const DenseState s = stabiliser_state(random_stabiliser_group(ctx, rng));
    CHECK(stabiliser_fidelity(s).value == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 10; ++i) {
        const DenseState h = haar_random(ctx, rng);
        const FidelityResult f = stabiliser_fidelity(h);
        REQUIRE(f.argmax);
        const PhaseTable p = p_table(ctx, h);
        CHECK(f.value > 0.0);
        CHECK(f.value < 1.0);
        CHECK(mass_on(f.argmax->module(), p) <= f.value + 1e-9);
    }
}

TEST_CASE("group json round trip keeps the canonical basis") {
    const PhaseContext ctx(6, 1);
    Rng rng(11);
    const StabiliserGroup g = random_stabiliser_group(ctx, rng);
    const StabiliserGroup back = StabiliserGroup::from_json(nlohmann::json::parse(g.to_json().dump()));
    CHECK(back.module() == g.module());
    CHECK(back.module().basis() == g.module().basis());
    CHECK(fidelity(stabiliser_state(back), stabiliser_state(g)) == doctest::Approx(1.0));
}

TEST_CASE("non-commuting generators are rejected") {
    const PhaseContext ctx(3, 1);
    CHECK_THROWS_AS(StabiliserGroup(ctx, {{{1, 0}, 0}, {{0, 1}, 0}}), Error);
}

TEST_CASE("shifted groups give orthogonal states") {
    const PhaseContext ctx(5, 1);
    Rng rng(13);
    const StabiliserGroup g = random_stabiliser_group(ctx, rng);
    const StabiliserGroup h = g.shifted({1, 0});
    if (h.module() == g.module() && h.generators() != g.generators())
        CHECK(fidelity(stabiliser_state(g), stabiliser_state(h)) < 1e-12);
}
