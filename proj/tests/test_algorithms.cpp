#include "doctest.h"

#include <cmath>
#include <functional>

#include "qbell/algorithms.hpp"
#include "qbell/errors.hpp"
#include "qbell/fixtures.hpp"

using namespace qbell;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("range quantities at hand-computed points") {
    CHECK(gamma_r(3, 2, 0.0, 1.0) == doctest::Approx(1.0 / 36.0).epsilon(1e-14));
    CHECK(alpha_bell(2, 0.0, 1.0) == doctest::Approx(1.0 - std::pow(1.0 - (1.0 / 8.0) * (1.0 - 1.0 / 32.0), 4)).epsilon(1e-14));
    CHECK(C_dr(2, 3) == doctest::Approx(0.5 * (1.0 - std::pow(15.0 / 16.0, 2))));
    for (auto [d, r] : std::vector<std::pair<int, int>>{{3, 2}, {4, 3}, {6, 5}})
        CHECK(gamma_r(d, r, povm_boundary_eps1(d, r), 1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("round counts") {
    CHECK(povm_test_rounds(2, 3, 0.1, 0.5) == static_cast<std::uint64_t>(std::ceil(std::log(2.0) / (C_dr(2, 3) * 0.1))));
    CHECK(bell_test_rounds(3, 0.1, 0.1) ==
          static_cast<std::uint64_t>(std::ceil((2.0 + 1.0 / (4.0 * C_dr(3, 3) * 0.1)) * std::log(10.0))));
    CHECK(tolerant_povm_rounds(0.1, 0.05) == static_cast<std::uint64_t>(std::ceil(800.0 * std::log(40.0))));
    CHECK(tolerant_bell_rounds(0.2, 0.05) == static_cast<std::uint64_t>(std::ceil(200.0 * std::log(40.0))));
    const PhaseContext ctx(6, 2);
    CHECK(size_test_rounds(ctx, 0.01, 0.1) ==
          static_cast<std::uint64_t>(std::ceil((2.0 / 0.03) * (std::log(10.0) + 8.0 * 2 * 2))));
    CHECK(hidden_group_rounds(PhaseContext(2, 1), 0.5, 0.1) ==
          static_cast<std::uint64_t>(std::ceil((2 * std::log(10.0) + 16.0) / (1.0 - std::pow(1.0 - 0.75 * 0.5, 4)))));
}

TEST_CASE("parameter errors") {
    const DenseState psi = magic_state(3);
    Rng rng(1);
    CHECK(code_of([&] { G_r_exact(psi, 3); }) == ErrorCode::ParamOutOfRange);
    REQUIRE(gamma_r(3, 2, 0.2, 0.25) <= 0.0);
    REQUIRE(alpha_bell(3, 0.2, 0.25) <= 0.0);
    CHECK(code_of([&] { tolerant_povm(psi, 0.2, 0.25, 0.1, 2, rng); }) == ErrorCode::GammaNonPositive);
    CHECK(code_of([&] { tolerant_bell(psi, 0.2, 0.25, 0.1, SamplingOptions{}, rng); }) == ErrorCode::AlphaNonPositive);
    CHECK(code_of([&] { test_size(psi, 1, 0.5, 0.1, SamplingOptions{}, rng); }) == ErrorCode::ParamOutOfRange);
    CHECK(test_size(psi, 1, 0.5, 0.1, SamplingOptions{}, rng, true).out_of_range);
    CHECK(code_of([&] { parse_mode("sometimes"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { povm_test_rounds(2, 3, 0.0, 0.1); }) == ErrorCode::ParamOutOfRange);
}

TEST_CASE("A is one on stabiliser states and bounded by G3^4 on the qubit magic state") {
    const PhaseContext ctx(3, 1);
    Rng rng(5);
    CHECK(A_exact(stabiliser_state(random_stabiliser_group(ctx, rng)), build_R(ctx, 4)) ==
          doctest::Approx(1.0).epsilon(1e-9));
    const double a = A_exact(magic_state(2), build_R(PhaseContext(2, 1), 4));
    CHECK(a <= std::pow(0.625, 4) + 1e-12);
}

TEST_CASE("observable law: character sum agrees with dense diagonalisation") {
    for (int d : {2}) {  // d = 3 already needs 3^8 dense dimensions
        const PhaseContext ctx(d, 1);
        Rng rng(static_cast<std::uint64_t>(50 + d));
        const DenseState psi = haar_random(ctx, rng);
        const PhaseTable p = p_table(ctx, psi);
        for (int t = 0; t < 10; ++t) {
            std::vector<ZVec> X(4);
            for (auto& x : X) x = {rng.below(d), rng.below(d)};
            const std::vector<double> q = observable_distribution(ctx, p, X);
            const std::vector<double> dense = observable_distribution_dense(psi, X);
            std::vector<double> folded(static_cast<std::size_t>(d), 0.0);
            for (int k = 0; k < d; ++k) folded[static_cast<std::size_t>(std::min(k, d - k))] += q[static_cast<std::size_t>(k)];
            for (int k = 0; k < d; ++k) CHECK(std::abs(folded[k] - dense[k]) < 1e-8);
            double total = 0.0;
            for (double v : q) {
                CHECK(v >= -1e-10);
                total += v;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("observable outcomes on trivial and stabiliser labels") {
    const PhaseContext ctx(3, 1);
    Rng rng(6);
    const StabiliserGroup S = random_stabiliser_group(ctx, rng);
    const DenseState psi = stabiliser_state(S);
    const PhaseTable p = p_table(ctx, psi);
    const ZVec g = S.module().basis().front();
    for (int t = 0; t < 20; ++t) {
        std::vector<ZVec> X(4);
        for (auto& x : X) x = vec_scale(g, rng.below(3), 3);
        CHECK(observable_measure(ctx, p, X, rng) == doctest::Approx(1.0));
    }
    const PhaseTable ph = p_table(ctx, haar_random(ctx, rng));
    CHECK(observable_measure(ctx, ph, std::vector<ZVec>(4, ZVec{0, 0}), rng) == doctest::Approx(1.0));
}

TEST_CASE("observable mean over difference samples estimates A") {
    const PhaseContext ctx(2, 1);
    const DenseState psi = magic_state(2);
    const RMatrix R = build_R(ctx, 4);
    const SkewedSampler sampler(psi, R);
    const PhaseTable p = p_table(ctx, psi);
    Rng rng(8);
    const int shots = 4000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < shots; ++i) {
        const double z = observable_measure(ctx, p, sampler.difference(rng).labels, rng);
        s += z;
        s2 += z * z;
    }
    const double mean = s / shots, sigma = std::sqrt((s2 / shots - mean * mean) / shots);
    CHECK(std::abs(mean - A_exact(psi, R)) <= 4 * sigma);
}

TEST_CASE("POVM outcome frequency matches G_r") {
    const DenseState psi = magic_state(2);
    const double G = G_r_exact(psi, 3);
    Rng rng(9);
    const int shots = 10000;
    int plus = 0;
    for (int i = 0; i < shots; ++i) plus += povm_measure(psi, 3, rng) == 1;
    const double p = 0.5 * (1.0 + G);
    CHECK(std::abs(plus / static_cast<double>(shots) - p) <= 4 * std::sqrt(p * (1 - p) / shots));
}

TEST_CASE("learning a stabiliser state and its copy budget") {
    const PhaseContext ctx(3, 2);
    Rng rng(10);
    const DenseState psi = stabiliser_state(random_stabiliser_group(ctx, rng));
    const LearnResult res = learn_stabiliser(psi, SamplingOptions{}, rng);
    REQUIRE(res.group);
    CHECK(fidelity(stabiliser_state(*res.group), psi) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.copies_used <= res.copies_budget);
    CHECK(res.rounds == 2);  // ceil(3n / k) with n = 2, k = 4
}

TEST_CASE("hidden group recovers the unsigned stabiliser group") {
    const PhaseContext ctx(2, 2);
    Rng rng(11);
    const DenseState psi = stabiliser_state(random_stabiliser_group(ctx, rng));
    const HiddenGroupResult res = hidden_group(psi, 0.2, 0.1, SamplingOptions{}, rng);
    CHECK(res.module == unsigned_group(psi).module);
}

TEST_CASE("copy accounting by baseline mode") {
    const PhaseContext ctx(2, 3);
    Rng rng(12);
    const DenseState psi = stabiliser_state(random_stabiliser_group(ctx, rng));
    SamplingOptions shared, fresh;
    fresh.mode = BaselineMode::Fresh;
    const TesterVerdict a = doped_vs_haar(psi, shared, rng), b = doped_vs_haar(psi, fresh, rng);
    CHECK(a.accept);
    CHECK(a.rounds == 3);
    CHECK(a.samples_used == 8 * (a.rounds + 1));
    CHECK(b.samples_used == 16 * b.rounds);
}

TEST_CASE("tester copy counts follow their formulas") {
    const DenseState psi = magic_state(3);
    Rng rng(13);
    const TesterVerdict p = stab_test_povm(psi, 0.05, 0.2, 2, rng);
    CHECK(p.samples_used == 2 * 2 * povm_test_rounds(3, 2, 0.05, 0.2));
    const TesterVerdict b = stab_test_bell(psi, 0.05, 0.2, SamplingOptions{}, rng);
    CHECK(b.samples_used == 16 * bell_test_rounds(3, 0.05, 0.2) + 8);
}

TEST_CASE("stabiliser inputs always pass the testers") {
    const PhaseContext ctx(3, 1);
    Rng rng(14);
    for (int i = 0; i < 20; ++i) {
        const DenseState s = stabiliser_state(random_stabiliser_group(ctx, rng));
        CHECK(stab_test_povm(s, 0.1, 0.1, 2, rng).accept);
        CHECK(stab_test_bell(s, 0.1, 0.1, SamplingOptions{}, rng).accept);
        CHECK(test_size(s, 1, size_test_eps_bound(ctx), 0.1, SamplingOptions{}, rng).accept);
    }
}

TEST_CASE("range tables are monotone in eps2 and serialise to csv") {
    const RangeTable t = range_tables(3, 2, 20);
    for (int i = 0; i <= 20; ++i)
        for (int j = 1; j <= 20; ++j) {
            const RangeRow& lo = t.rows[static_cast<std::size_t>((j - 1) * 21 + i)];
            const RangeRow& hi = t.rows[static_cast<std::size_t>(j * 21 + i)];
            CHECK(hi.gamma >= lo.gamma);
            CHECK(hi.alpha >= lo.alpha);
        }
    CHECK(t.to_csv().rfind("kind,eps1,eps2,gamma,alpha,copies_povm,copies_bell\n", 0) == 0);
    CHECK(t.curve.size() == 21);
    CHECK(t.curve_eps1_max > 0.0);
}

TEST_CASE("fidelity fixtures hit their targets") {
    const PhaseContext ctx(2, 1);
    const DenseState far = far_state(ctx, 3);
    for (double target : {0.8, 0.9, 0.999}) {
        const FidelityFixture f = fidelity_fixture(far, target);
        CHECK(std::abs(f.fidelity - target) <= 1e-6);
        CHECK(stabiliser_fidelity(f.state).value == doctest::Approx(f.fidelity).epsilon(1e-12));
    }
    CHECK(code_of([&] { fidelity_fixture(far, 0.5); }) == ErrorCode::ParamOutOfRange);
}
