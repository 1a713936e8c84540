#include "qbell/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qbell/errors.hpp"

namespace qbell {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_unit_interval(double x, const char* name, bool closed_low = false) {
    const bool ok = closed_low ? (x >= 0.0 && x < 1.0) : (x > 0.0 && x < 1.0);
    require(ok, ErrorCode::ParamOutOfRange, std::string(name) + " must lie in " + (closed_low ? "[0, 1)" : "(0, 1)"));
}

std::uint64_t ceil_u64(double x) {
    require(std::isfinite(x) && x >= 0.0 && x < 1e18, ErrorCode::ParamOutOfRange,
            "round count " + std::to_string(x) + " is not representable");
    return static_cast<std::uint64_t>(std::ceil(x));
}

BigInt big_pow(int base, int e) {
    BigInt r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

nlohmann::json labels_json(const std::vector<ZVec>& labels) {
    nlohmann::json j = nlohmann::json::array();
    for (const ZVec& x : labels) j.push_back(x);
    return j;
}

nlohmann::json submodule_json(const Submodule& s) {
    return {{"size", s.size().get_str()}, {"basis", s.basis()}};
}

ZVec column_combination(const std::vector<ZVec>& cols, const std::vector<int>& coeffs, int d) {
    ZVec out(cols.front().size(), 0);
    for (std::size_t l = 0; l < cols.size(); ++l) {
        if (coeffs[l] == 0) continue;
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = (out[c] + cols[l][c] * coeffs[l]) % d;
    }
    return out;
}

// (XR)_i for every column i.
std::vector<ZVec> times_R(const std::vector<ZVec>& X, const std::vector<std::vector<int>>& Rm, int d) {
    const std::size_t k = X.size();
    std::vector<ZVec> out;
    out.reserve(k);
    std::vector<int> col(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t l = 0; l < k; ++l) col[l] = Rm[l][i];
        out.push_back(column_combination(X, col, d));
    }
    return out;
}

std::vector<ZVec> all_points(const PhaseContext& ctx) {
    std::vector<ZVec> pts(ctx.num_points());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = point_from_index(i, ctx.d(), 2 * ctx.n());
    return pts;
}

// Lemma check for the size tester: a sampled span heavy enough under b_psi
// must have an isotropic complement.
nlohmann::json isotropy_audit(const DenseState& psi, const RMatrix& R, const Submodule& span) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    nlohmann::json out = {{"checked", false}};
    if (R.k != 4 || ctx.n() > 3 || ctx.d() > 6) return out;
    const Submodule comp = symplectic_complement(span);
    const std::uint64_t csize = comp.size_u64();
    if (csize > 32) return out;

    const PhaseTable p = p_table(ctx, psi);
    const auto Rm = R.mod_d();
    const std::vector<ZVec> elems = comp.elements();
    const std::size_t total = static_cast<std::size_t>(csize * csize * csize * csize);
    double sum = 0.0;
    std::vector<ZVec> X(4);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        double w = 1.0;
        for (int l = 0; l < 4; ++l, rem /= csize) {
            X[l] = elems[rem % csize];
            w *= p.real_at(X[l]);
        }
        if (w == 0.0) continue;
        for (const ZVec& y : times_R(X, Rm, ctx.d())) w *= p.real_at(y);
        sum += w;
    }
    const double ssize = static_cast<double>(span.size_u64());
    const double mass = std::pow(ssize, 4) * sum;
    const int p1 = ctx.smallest_prime();
    const double d2 = static_cast<double>(ctx.d()) * ctx.d();
    const double thr = std::pow(1.0 - (1.0 / (2 * d2)) * (1.0 - 1.0 / p1) * (1.0 - 1.0 / (8 * d2)), 4);
    const bool iso = is_isotropic(comp);
    out = {{"checked", true}, {"mass", mass}, {"threshold", thr}, {"complement_isotropic", iso}};
    require(!(mass > thr + 1e-12) || iso, ErrorCode::Internal,
            "heavy sampled span with a non-isotropic complement");
    return out;
}

std::uint64_t copies_per_round(const SamplingOptions& opt) { return 2ull * static_cast<std::uint64_t>(opt.k); }

}  // namespace

const char* mode_name(BaselineMode m) { return m == BaselineMode::Shared ? "shared" : "fresh"; }

BaselineMode parse_mode(const std::string& s) {
    if (s == "shared") return BaselineMode::Shared;
    if (s == "fresh") return BaselineMode::Fresh;
    fail(ErrorCode::InvalidArgument, "unknown baseline mode '" + s + "'");
}

RMatrix sampling_matrix(const PhaseContext& ctx, const SamplingOptions& opt) {
    return build_R(ctx, opt.k, opt.qubit_template);
}

DifferenceStream::DifferenceStream(const SkewedSampler& sampler, BaselineMode mode, Rng& rng)
    : sampler_(sampler), mode_(mode), rng_(rng) {}

SkewedSample DifferenceStream::next() {
    const std::uint64_t per_round = 2ull * static_cast<std::uint64_t>(sampler_.k());
    if (mode_ == BaselineMode::Fresh) {
        copies_ += 2 * per_round;
        return sampler_.difference(rng_);
    }
    if (!baseline_) {
        baseline_ = sampler_.round(rng_);
        copies_ += per_round;
    }
    copies_ += per_round;
    return subtract_samples(sampler_.round(rng_), *baseline_, sampler_.ctx().d());
}

nlohmann::json TesterVerdict::to_json() const {
    nlohmann::json j = {{"decision", accept ? "accept" : "reject"},
                        {"samples_used", samples_used},
                        {"rounds", rounds},
                        {"statistic", statistic},
                        {"threshold", threshold},
                        {"mode", mode_name(mode)},
                        {"out_of_range", out_of_range}};
    if (!details.empty()) j["details"] = details;
    if (!transcript.is_null()) j["transcript"] = transcript;
    return j;
}

// ---------------------------------------------------------------- learning

nlohmann::json LearnResult::to_json() const {
    nlohmann::json gens = nlohmann::json::array();
    for (const PhasedLabel& g : generators) gens.push_back({{"x", g.x}, {"s", g.s}});
    nlohmann::json j = {{"span", submodule_json(span)},
                        {"generators", gens},
                        {"rounds", rounds},
                        {"copies_used", copies_used},
                        {"copies_budget", copies_budget},
                        {"group", group ? group->to_json() : nlohmann::json()}};
    if (!transcript.is_null()) j["transcript"] = transcript;
    return j;
}

std::optional<int> measure_weyl_phase(const DenseState& psi, const ZVec& x, Rng& rng) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    const int d = ctx.d();
    const WeylLabel W(ctx, x);
    int order = 1;
    while (vec_scale(x, order, d) != ZVec(x.size(), 0)) ++order;

    // W^order = c I; the eigenvalues are the order-th roots of c.
    const WeylLabel top = W.power(order);
    const double base = std::arg(ctx.tau_pow(top.tau_exponent()));
    std::vector<cplx> moments(static_cast<std::size_t>(order));
    for (int j = 0; j < order; ++j) moments[static_cast<std::size_t>(j)] = expectation_weyl(psi, W.power(j));
    std::vector<double> probs(static_cast<std::size_t>(order));
    std::vector<cplx> eig(static_cast<std::size_t>(order));
    for (int k = 0; k < order; ++k) {
        const cplx lam = std::polar(1.0, (base + 2.0 * kPi * k) / order);
        cplx acc = 0.0;
        for (int j = 0; j < order; ++j) acc += std::pow(std::conj(lam), j) * moments[static_cast<std::size_t>(j)];
        eig[static_cast<std::size_t>(k)] = lam;
        const double q = acc.real() / order;
        probs[static_cast<std::size_t>(k)] = q < kProbabilityFloor ? 0.0 : q;
    }
    const cplx lam = eig[sample_index(probs, rng)];
    // lam = omega^{-s}
    const double turns = -std::arg(lam) * d / (2.0 * kPi);
    const long long s = std::llround(turns);
    if (std::abs(turns - static_cast<double>(s)) > 1e-6) return std::nullopt;
    return ctx.mod_d(s);
}

LearnResult learn_stabiliser(const DenseState& psi, const SamplingOptions& opt, Rng& rng) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    const int n = ctx.n();
    const SkewedSampler sampler(psi, sampling_matrix(ctx, opt));
    LearnResult res;
    const std::size_t wanted = static_cast<std::size_t>(3 * n);
    res.rounds = (wanted + static_cast<std::size_t>(opt.k) - 1) / static_cast<std::size_t>(opt.k);
    res.copies_budget = 8 * ((static_cast<std::uint64_t>(3 * n) + 3) / 4) + 2ull * n + 8;

    DifferenceStream stream(sampler, opt.mode, rng);
    std::vector<ZVec> samples;
    nlohmann::json tr = nlohmann::json::array();
    for (std::uint64_t i = 0; i < res.rounds; ++i) {
        const SkewedSample s = stream.next();
        if (opt.transcript) tr.push_back(labels_json(s.labels));
        for (const ZVec& x : s.labels)
            if (samples.size() < wanted) samples.push_back(x);
    }
    res.copies_used = stream.copies();
    res.span = Submodule::canonicalize(ctx.d(), 2 * n, samples);

    for (const auto& [x, order] : res.span.independent_generators()) {
        (void)order;
        const std::optional<int> s = measure_weyl_phase(psi, x, rng);
        ++res.copies_used;
        if (!s) {
            res.generators.clear();
            break;
        }
        res.generators.push_back({x, *s});
    }
    if (opt.transcript) res.transcript = tr;
    if (!res.generators.empty() && res.span.size() == big_pow(ctx.d(), n)) {
        try {
            res.group.emplace(ctx, res.generators, true);
        } catch (const Error&) {
            res.group.reset();
        }
    }
    return res;
}

nlohmann::json HiddenGroupResult::to_json() const {
    nlohmann::json j = {{"module", submodule_json(module)}, {"rounds", rounds}, {"copies_used", copies_used}};
    if (!transcript.is_null()) j["transcript"] = transcript;
    return j;
}

std::uint64_t hidden_group_rounds(const PhaseContext& ctx, double eps, double delta) {
    require_unit_interval(eps, "eps");
    require_unit_interval(delta, "delta");
    const double p1 = ctx.smallest_prime();
    const double num = 2.0 * std::log(1.0 / delta) + 16.0 * ctx.n() * ctx.exponent_sum();
    const double den = 1.0 - std::pow(1.0 - eps * (2.0 - eps) * (1.0 - 1.0 / p1), 4);
    return ceil_u64(num / den);
}

HiddenGroupResult hidden_group(const DenseState& psi, double eps, double delta, const SamplingOptions& opt, Rng& rng,
                               bool separate_columns) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    HiddenGroupResult res;
    res.rounds = hidden_group_rounds(ctx, eps, delta);
    const SkewedSampler sampler(psi, sampling_matrix(ctx, opt));
    DifferenceStream stream(sampler, opt.mode, rng);
    std::vector<std::vector<ZVec>> columns(static_cast<std::size_t>(opt.k));
    nlohmann::json tr = nlohmann::json::array();
    for (std::uint64_t i = 0; i < res.rounds; ++i) {
        const SkewedSample s = stream.next();
        if (opt.transcript) tr.push_back(labels_json(s.labels));
        for (std::size_t c = 0; c < s.labels.size(); ++c) columns[c].push_back(s.labels[c]);
    }
    res.copies_used = stream.copies();
    Submodule span;
    if (separate_columns) {
        for (const auto& col : columns) {
            Submodule c = Submodule::canonicalize(ctx.d(), 2 * ctx.n(), col);
            if (span.ambient_rank() == 0 || c.size() > span.size()) span = std::move(c);
        }
    } else {
        std::vector<ZVec> all;
        for (const auto& col : columns) all.insert(all.end(), col.begin(), col.end());
        span = Submodule::canonicalize(ctx.d(), 2 * ctx.n(), all);
    }
    res.module = symplectic_complement(span);
    if (opt.transcript) res.transcript = tr;
    return res;
}

double size_test_eps_bound(const PhaseContext& ctx) {
    const double d2 = static_cast<double>(ctx.d()) * ctx.d();
    return (1.0 / (6.0 * d2)) * (1.0 - 1.0 / ctx.smallest_prime()) * (1.0 - 1.0 / (8.0 * d2));
}

std::uint64_t size_test_rounds(const PhaseContext& ctx, double eps, double delta) {
    require_unit_interval(eps, "eps");
    require_unit_interval(delta, "delta");
    return ceil_u64((2.0 / (3.0 * eps)) * (std::log(1.0 / delta) + 8.0 * ctx.n() * ctx.exponent_sum()));
}

TesterVerdict test_size(const DenseState& psi, int t, double eps, double delta, const SamplingOptions& opt, Rng& rng,
                        bool allow_out_of_range) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    require(t >= 0 && t <= ctx.n(), ErrorCode::ParamOutOfRange, "size exponent t must lie in [0, n]");
    TesterVerdict v;
    v.mode = opt.mode;
    v.out_of_range = eps > size_test_eps_bound(ctx);
    require(!v.out_of_range || allow_out_of_range, ErrorCode::ParamOutOfRange,
            "eps " + std::to_string(eps) + " exceeds the size-test bound " + std::to_string(size_test_eps_bound(ctx)));
    v.rounds = size_test_rounds(ctx, eps, delta);

    const RMatrix R = sampling_matrix(ctx, opt);
    const SkewedSampler sampler(psi, R);
    DifferenceStream stream(sampler, opt.mode, rng);
    std::vector<ZVec> all;
    nlohmann::json tr = nlohmann::json::array();
    for (std::uint64_t i = 0; i < v.rounds; ++i) {
        const SkewedSample s = stream.next();
        if (opt.transcript) tr.push_back(labels_json(s.labels));
        all.insert(all.end(), s.labels.begin(), s.labels.end());
    }
    v.samples_used = stream.copies();
    const Submodule span = Submodule::canonicalize(ctx.d(), 2 * ctx.n(), all);
    const BigInt limit = big_pow(ctx.d(), 2 * ctx.n() - t);
    v.accept = span.size() <= limit;
    v.statistic = span.size().get_d();
    v.threshold = limit.get_d();
    v.details = {{"t", t}, {"eps_bound", size_test_eps_bound(ctx)}, {"span", submodule_json(span)},
                 {"isotropy_audit", isotropy_audit(psi, R, span)}};
    if (opt.transcript) v.transcript = tr;
    return v;
}

TesterVerdict doped_vs_haar(const DenseState& psi, const SamplingOptions& opt, Rng& rng) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    TesterVerdict v;
    v.mode = opt.mode;
    v.rounds = static_cast<std::uint64_t>((3 * ctx.n() + opt.k - 1) / opt.k);
    const SkewedSampler sampler(psi, sampling_matrix(ctx, opt));
    DifferenceStream stream(sampler, opt.mode, rng);
    std::vector<ZVec> all;
    nlohmann::json tr = nlohmann::json::array();
    for (std::uint64_t i = 0; i < v.rounds; ++i) {
        const SkewedSample s = stream.next();
        if (opt.transcript) tr.push_back(labels_json(s.labels));
        all.insert(all.end(), s.labels.begin(), s.labels.end());
    }
    v.samples_used = stream.copies();
    const Submodule span = Submodule::canonicalize(ctx.d(), 2 * ctx.n(), all);
    const BigInt full = big_pow(ctx.d(), 2 * ctx.n());
    v.accept = span.size() != full;
    v.statistic = span.size().get_d();
    v.threshold = full.get_d();
    v.details = {{"verdict", v.accept ? "doped" : "haar"}, {"span", submodule_json(span)}};
    if (opt.transcript) v.transcript = tr;
    return v;
}

// ---------------------------------------------------------------- estimators

double C_dr(int d, int r) {
    const double d2 = static_cast<double>(d) * d;
    return 0.5 * (1.0 - std::pow(1.0 - 1.0 / (4.0 * d2), r - 1));
}

double G_r_from_table(const PhaseContext& ctx, const PhaseTable& p, int r) {
    require(r >= 2, ErrorCode::ParamOutOfRange, "r must be at least 2");
    require(std::gcd(ctx.d(), r) == 1, ErrorCode::ParamOutOfRange,
            "r = " + std::to_string(r) + " shares a factor with d = " + std::to_string(ctx.d()));
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::pow(std::max(p[i].real(), 0.0), r);
    return std::pow(static_cast<double>(ctx.dim()), r - 1) * acc;
}

double G_r_exact(const DenseState& psi, int r) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    return G_r_from_table(ctx, p_table(ctx, psi), r);
}

int povm_measure(double G, Rng& rng) { return rng.bernoulli(0.5 * (1.0 + G)) ? 1 : -1; }

int povm_measure(const DenseState& psi, int r, Rng& rng) { return povm_measure(G_r_exact(psi, r), rng); }

double A_exact(const DenseState& psi, const RMatrix& R) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    require(R.d == ctx.d(), ErrorCode::ContextMismatch, "R built for a different d");
    const std::size_t P = ctx.num_points();
    std::size_t total = 1;
    for (int i = 0; i < R.k; ++i) {
        require(total <= 2000000 / P, ErrorCode::CapExceeded, "A sum over d^{2nk} terms exceeds 2e6");
        total *= P;
    }
    const PhaseTable p = p_table(ctx, psi);
    const auto Rm = R.mod_d();
    const std::vector<ZVec> pts = all_points(ctx);
    double acc = 0.0;
    std::vector<ZVec> X(static_cast<std::size_t>(R.k));
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        double w = 1.0;
        for (int l = 0; l < R.k; ++l, rem /= P) {
            X[static_cast<std::size_t>(l)] = pts[rem % P];
            const double pl = p[rem % P].real();
            w *= pl * pl;
        }
        if (w == 0.0) continue;
        for (const ZVec& y : times_R(X, Rm, ctx.d())) w *= p.real_at(y);
        acc += w;
    }
    return std::pow(static_cast<double>(ctx.dim()), 2 * R.k) * acc;
}

std::vector<double> observable_distribution(const PhaseContext& ctx, const PhaseTable& p, const std::vector<ZVec>& labels) {
    const int d = ctx.d();
    const double dn = static_cast<double>(ctx.dim());
    // prod_i |<W_{j X_i}>|^2 for each power j.
    std::vector<double> prod(static_cast<std::size_t>(d), 1.0);
    for (int j = 0; j < d; ++j)
        for (const ZVec& x : labels) prod[static_cast<std::size_t>(j)] *= dn * std::max(p.real_at(vec_scale(x, j, d)), 0.0);
    std::vector<double> q(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        cplx acc = 0.0;
        for (int j = 0; j < d; ++j) acc += ctx.omega_pow(-static_cast<long long>(k) * j) * prod[static_cast<std::size_t>(j)];
        const double v = acc.real() / d;
        require(v >= -1e-10, ErrorCode::Internal, "negative observable weight " + std::to_string(v));
        q[static_cast<std::size_t>(k)] = std::max(v, 0.0);
    }
    return q;
}

std::vector<double> observable_distribution_dense(const DenseState& psi, const std::vector<ZVec>& labels) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    const int d = ctx.d();
    std::size_t dim = 1;
    for (std::size_t i = 0; i < 2 * labels.size(); ++i) dim *= ctx.dim();
    require(dim <= kDenseOperatorCap, ErrorCode::CapExceeded, "dense observable exceeds 4096 dimensions");

    // Register 0 sits in the lowest digits, so the Kronecker product runs last to first.
    Matrix O = Matrix::Identity(1, 1);
    for (const ZVec& x : labels) {
        const Matrix W = dense_weyl(WeylLabel(ctx, x));
        for (const Matrix& f : {W, Matrix(W.adjoint())}) {
            Matrix t(f.rows() * O.rows(), f.cols() * O.cols());
            for (Eigen::Index a = 0; a < f.rows(); ++a)
                for (Eigen::Index b = 0; b < f.cols(); ++b) t.block(a * O.rows(), b * O.cols(), O.rows(), O.cols()) = f(a, b) * O;
            O = std::move(t);
        }
    }
    const Matrix H = 0.5 * (O + O.adjoint());
    const Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const DenseState big = psi.tensor_power(static_cast<int>(2 * labels.size()));
    const Eigen::Map<const Eigen::VectorXcd> v(big.amplitudes().data(), static_cast<Eigen::Index>(big.size()));
    const Eigen::VectorXcd coeffs = es.eigenvectors().adjoint() * v;

    // Fold onto k in [0, d/2]: cos(2 pi k / d) cannot tell k from d - k.
    std::vector<double> q(static_cast<std::size_t>(d), 0.0);
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        const double lam = es.eigenvalues()(i);
        int best = 0;
        for (int k = 1; k <= d / 2; ++k)
            if (std::abs(std::cos(2 * kPi * k / d) - lam) < std::abs(std::cos(2 * kPi * best / d) - lam)) best = k;
        require(std::abs(std::cos(2 * kPi * best / d) - lam) < 1e-8, ErrorCode::Internal,
                "observable eigenvalue " + std::to_string(lam) + " is not cos(2 pi k / d)");
        q[static_cast<std::size_t>(best)] += std::norm(coeffs(i));
    }
    return q;
}

double observable_measure(const PhaseContext& ctx, const PhaseTable& p, const std::vector<ZVec>& labels, Rng& rng) {
    const std::vector<double> q = observable_distribution(ctx, p, labels);
    const std::size_t k = sample_index(q, rng);
    return k == 0 ? 1.0 : std::cos(2.0 * kPi * static_cast<double>(k) / ctx.d());
}

std::uint64_t povm_test_rounds(int d, int r, double eps, double delta) {
    require_unit_interval(eps, "eps");
    require_unit_interval(delta, "delta");
    return ceil_u64(std::log(1.0 / delta) / (C_dr(d, r) * eps));
}

namespace {

// m POVM outcomes; the count of +1 outcomes is binomial unless a transcript is kept.
std::uint64_t draw_povm(double G, std::uint64_t m, Rng& rng, nlohmann::json* transcript) {
    const double P = std::clamp(0.5 * (1.0 + G), 0.0, 1.0);
    if (!transcript) {
        std::mt19937_64 eng(rng.next_u64());
        std::binomial_distribution<std::uint64_t> bin(m, P);
        return bin(eng);
    }
    std::uint64_t plus = 0;
    *transcript = nlohmann::json::array();
    for (std::uint64_t i = 0; i < m; ++i) {
        const int z = povm_measure(G, rng);
        transcript->push_back(z);
        if (z == 1) ++plus;
    }
    return plus;
}

}  // namespace

TesterVerdict stab_test_povm(const DenseState& psi, double eps, double delta, int r, Rng& rng, bool transcript) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    TesterVerdict v;
    const double G = G_r_exact(psi, r);
    v.rounds = povm_test_rounds(ctx.d(), r, eps, delta);
    v.samples_used = 2ull * static_cast<std::uint64_t>(r) * v.rounds;
    const std::uint64_t plus = draw_povm(G, v.rounds, rng, transcript ? &v.transcript : nullptr);
    v.accept = plus == v.rounds;
    v.statistic = static_cast<double>(plus) / static_cast<double>(v.rounds);
    v.threshold = 1.0;
    v.details = {{"r", r}, {"C_dr", C_dr(ctx.d(), r)}, {"G_r", G}};
    return v;
}

std::uint64_t bell_test_rounds(int d, double eps, double delta) {
    require_unit_interval(eps, "eps");
    require_unit_interval(delta, "delta");
    return ceil_u64((2.0 + 1.0 / (4.0 * C_dr(d, 3) * eps)) * std::log(1.0 / delta));
}

namespace {

struct ObservableRun {
    double mean = 0.0;
    bool all_one = true;
    std::uint64_t copies = 0;
};

ObservableRun run_observable(const DenseState& psi, std::uint64_t m, const SamplingOptions& opt, Rng& rng,
                             nlohmann::json& transcript) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    const PhaseTable p = p_table(ctx, psi);
    const SkewedSampler sampler(psi, sampling_matrix(ctx, opt));
    DifferenceStream stream(sampler, opt.mode, rng);
    ObservableRun run;
    double sum = 0.0;
    if (opt.transcript) transcript = nlohmann::json::array();
    for (std::uint64_t i = 0; i < m; ++i) {
        const SkewedSample s = stream.next();
        const double z = observable_measure(ctx, p, s.labels, rng);
        if (opt.transcript) transcript.push_back({{"labels", labels_json(s.labels)}, {"z", z}});
        sum += z;
        if (z != 1.0) run.all_one = false;
    }
    run.mean = m ? sum / static_cast<double>(m) : 1.0;
    run.copies = stream.copies() + m * copies_per_round(opt);
    return run;
}

}  // namespace

TesterVerdict stab_test_bell(const DenseState& psi, double eps, double delta, const SamplingOptions& opt, Rng& rng) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    TesterVerdict v;
    v.mode = opt.mode;
    v.rounds = bell_test_rounds(ctx.d(), eps, delta);
    const ObservableRun run = run_observable(psi, v.rounds, opt, rng, v.transcript);
    v.samples_used = run.copies;
    v.accept = run.all_one;
    v.statistic = run.mean;
    v.threshold = 1.0;
    v.details = {{"C_d3", C_dr(ctx.d(), 3)}};
    return v;
}

double gamma_r(int d, int r, double eps1, double eps2) {
    return std::pow(1.0 - eps1, 2 * r) - 1.0 + 2.0 * C_dr(d, r) * eps2;
}

double alpha_bell(int d, double eps1, double eps2) {
    const double d2 = static_cast<double>(d) * d;
    return std::pow(1.0 - eps1, 16) * std::pow(1.0 - 2.0 * eps1, 4) -
           std::pow(1.0 - (eps2 / (2.0 * d2)) * (1.0 - 1.0 / (8.0 * d2)), 4);
}

std::uint64_t tolerant_povm_rounds(double gamma, double delta) {
    require(gamma > 0.0, ErrorCode::GammaNonPositive, "gamma_r = " + std::to_string(gamma) + " is not positive");
    require_unit_interval(delta, "delta");
    return ceil_u64(8.0 / (gamma * gamma) * std::log(2.0 / delta));
}

std::uint64_t tolerant_bell_rounds(double alpha, double delta) {
    require(alpha > 0.0, ErrorCode::AlphaNonPositive, "alpha = " + std::to_string(alpha) + " is not positive");
    require_unit_interval(delta, "delta");
    return ceil_u64(8.0 / (alpha * alpha) * std::log(2.0 / delta));
}

namespace {

void check_tolerant(double eps1, double eps2) {
    require(eps1 >= 0.0 && eps2 > eps1 && eps2 < 1.0, ErrorCode::ParamOutOfRange, "need 0 <= eps1 < eps2 < 1");
}

}  // namespace

TesterVerdict tolerant_povm(const DenseState& psi, double eps1, double eps2, double delta, int r, Rng& rng,
                            bool transcript) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    check_tolerant(eps1, eps2);
    require(std::gcd(ctx.d(), r) == 1 && r >= 2, ErrorCode::ParamOutOfRange, "r must be >= 2 and coprime to d");
    const double gamma = gamma_r(ctx.d(), r, eps1, eps2);
    TesterVerdict v;
    v.rounds = tolerant_povm_rounds(gamma, delta);
    v.samples_used = 2ull * static_cast<std::uint64_t>(r) * v.rounds;
    const double G = G_r_exact(psi, r);
    const std::uint64_t plus = draw_povm(G, v.rounds, rng, transcript ? &v.transcript : nullptr);
    v.statistic = (2.0 * static_cast<double>(plus) - static_cast<double>(v.rounds)) / static_cast<double>(v.rounds);
    v.threshold = std::pow(1.0 - eps1, 2 * r) - gamma / 2.0;
    v.accept = v.statistic > v.threshold;
    v.details = {{"r", r}, {"gamma", gamma}, {"G_r", G}};
    return v;
}

TesterVerdict tolerant_bell(const DenseState& psi, double eps1, double eps2, double delta, const SamplingOptions& opt,
                            Rng& rng) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    check_tolerant(eps1, eps2);
    const double alpha = alpha_bell(ctx.d(), eps1, eps2);
    TesterVerdict v;
    v.mode = opt.mode;
    v.rounds = tolerant_bell_rounds(alpha, delta);
    const ObservableRun run = run_observable(psi, v.rounds, opt, rng, v.transcript);
    v.samples_used = run.copies;
    v.statistic = run.mean;
    v.threshold = std::pow(1.0 - eps1, 16) * std::pow(1.0 - 2.0 * eps1, 4) - alpha / 2.0;
    v.accept = v.statistic > v.threshold;
    v.details = {{"alpha", alpha}};
    return v;
}

// ---------------------------------------------------------------- range comparison

double povm_boundary_eps1(int d, int r) {
    const double d2 = static_cast<double>(d) * d;
    return 1.0 - std::pow(1.0 - 1.0 / (4.0 * d2), static_cast<double>(r - 1) / (2.0 * r));
}

namespace {

RangeRow range_row(int d, int r, double e1, double e2, double delta) {
    RangeRow row{e1, e2, gamma_r(d, r, e1, e2), alpha_bell(d, e1, e2), std::nullopt, std::nullopt};
    // Next to a zero crossing the counts overflow; those points stay blank.
    auto guarded = [](auto f) -> std::optional<std::uint64_t> {
        try {
            return f();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ParamOutOfRange) throw;
            return std::nullopt;
        }
    };
    if (row.gamma > 0.0)
        row.copies_povm = guarded([&] { return 2ull * static_cast<std::uint64_t>(r) * tolerant_povm_rounds(row.gamma, delta); });
    if (row.alpha > 0.0) row.copies_bell = guarded([&] { return 16 * tolerant_bell_rounds(row.alpha, delta) + 8; });
    return row;
}

}  // namespace

RangeTable range_tables(int d, int r, int grid, double delta, double curve_eps2) {
    require(d >= 2, ErrorCode::InvalidArgument, "d must be at least 2");
    require(r >= 2 && std::gcd(d, r) == 1, ErrorCode::ParamOutOfRange, "r must be >= 2 and coprime to d");
    require(grid >= 2 && grid <= 500, ErrorCode::InvalidArgument, "grid must lie in [2, 500]");
    RangeTable t;
    t.d = d;
    t.r = r;
    t.grid = grid;
    t.delta = delta;
    t.curve_eps2 = curve_eps2;
    for (int j = 0; j <= grid; ++j)
        for (int i = 0; i <= grid; ++i)
            t.rows.push_back(range_row(d, r, static_cast<double>(i) / grid, static_cast<double>(j) / grid, delta));
    // The positive regions are thin in eps1, so the curve spans only the part
    // where at least one tester is defined.
    auto zero = [](const std::function<double(double)>& f) {
        if (f(0.0) <= 0.0) return 0.0;
        double lo = 0.0, hi = 1.0;
        if (f(hi) > 0.0) return hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) > 0.0 ? lo : hi) = mid;
        }
        return lo;
    };
    t.curve_eps1_max = std::max(zero([&](double e1) { return gamma_r(d, r, e1, curve_eps2); }),
                                zero([&](double e1) { return alpha_bell(d, e1, curve_eps2); }));
    const double span = t.curve_eps1_max > 0.0 ? t.curve_eps1_max : 1.0;
    for (int i = 0; i <= grid; ++i) t.curve.push_back(range_row(d, r, span * i / grid, curve_eps2, delta));
    return t;
}

double RangeTable::grid_boundary_povm() const {
    double best = -1.0;
    for (const RangeRow& row : rows)
        if (row.eps2 == 1.0 && row.gamma > 0.0) best = std::max(best, row.eps1);
    return best;
}

std::string RangeTable::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "kind,eps1,eps2,gamma,alpha,copies_povm,copies_bell\n";
    auto emit = [&](const char* kind, const RangeRow& row) {
        os << kind << ',' << row.eps1 << ',' << row.eps2 << ',' << row.gamma << ',' << row.alpha << ',';
        if (row.copies_povm) os << *row.copies_povm;
        os << ',';
        if (row.copies_bell) os << *row.copies_bell;
        os << '\n';
    };
    for (const RangeRow& row : rows) emit("grid", row);
    for (const RangeRow& row : curve) emit("curve", row);
    return os.str();
}

}  // namespace qbell
