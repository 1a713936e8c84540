#include "doctest.h"

#include "qbell/errors.hpp"
#include "qbell/qstate.hpp"

using namespace qbell;

TEST_CASE("weyl label algebra matches dense matrices") {
    for (int d : {2, 3, 4, 5, 6}) {
        const PhaseContext ctx(d, 1);
        Rng rng(static_cast<std::uint64_t>(d));
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const WeylLabel a(ctx, {rng.below(d), rng.below(d)}, rng.below(ctx.D()));
            const WeylLabel b(ctx, {rng.below(d), rng.below(d)}, rng.below(ctx.D()));
            worst = std::max(worst, (dense_weyl(a.compose(b)) - dense_weyl(a) * dense_weyl(b)).cwiseAbs().maxCoeff());
            worst = std::max(worst, (dense_weyl(a.adjoint()) - dense_weyl(a).adjoint()).cwiseAbs().maxCoeff());
            worst = std::max(worst, (dense_weyl(a.power(3)) - dense_weyl(a) * dense_weyl(a) * dense_weyl(a)).cwiseAbs().maxCoeff());
        }
        CHECK(worst < 1e-12);
        // W_x^d is the identity up to the phase carried by tau.
        const WeylLabel x(ctx, {1, 1});
        CHECK((dense_weyl(x.power(d)) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("characteristic distribution is a probability law with p(0) = d^-n") {
    for (auto [d, n] : std::vector<std::pair<int, int>>{{2, 2}, {3, 1}, {4, 1}, {6, 1}}) {
        const PhaseContext ctx(d, n);
        const PhaseTable p = p_table(ctx, haar_random(ctx, 17));
        CHECK(std::abs(p.sum().real() - 1.0) < 1e-12);
        CHECK(p[0].real() == doctest::Approx(1.0 / static_cast<double>(ctx.dim())).epsilon(1e-12));
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i].real() >= -1e-15);
        CHECK_NOTHROW(p.check_probability());
    }
}

TEST_CASE("parseval and convolution identity") {
    const PhaseContext ctx(3, 1);
    const PhaseTable p = p_table(ctx, haar_random(ctx, 3));
    const PhaseTable ph = symplectic_fourier(ctx, p);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        lhs += std::norm(ph[i]);
        rhs += std::norm(p[i]);
    }
    CHECK(lhs == doctest::Approx(rhs / static_cast<double>(ctx.num_points())).epsilon(1e-12));

    PhaseTable delta(ctx, 1, true);
    delta[0] = static_cast<double>(ctx.num_points());  // convolution carries a 1/d^{2n}
    const PhaseTable c = convolve(ctx, p, delta);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(c[i] - p[i]) < 1e-12);
    CHECK(mass_on(Submodule::full(3, 2), p) == doctest::Approx(1.0));
}

TEST_CASE("phase table json layout") {
    const PhaseContext ctx(2, 1);
    const nlohmann::json j = p_table(ctx, DenseState::zero(2, 1)).to_json();
    CHECK(j["d"] == 2);
    CHECK(j["n"] == 1);
    CHECK(j["arity"] == 1);
    CHECK(j["values"].size() == 4);
}

TEST_CASE("table caps") {
    CHECK_THROWS_AS(require_table_caps(PhaseContext(7, 4)), Error);
    CHECK_NOTHROW(require_table_caps(PhaseContext(2, 3)));
}
