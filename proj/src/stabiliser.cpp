#include "qbell/stabiliser.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <numbers>
#include <set>

#include "qbell/errors.hpp"

namespace qbell {

namespace {

int phase_class(const PhaseContext& ctx, cplx z) {
    const double k = std::arg(z) * ctx.d() / (2.0 * std::numbers::pi);
    return ctx.mod_d(std::lround(k));
}

std::vector<ZVec> all_points(const PhaseContext& ctx) {
    std::vector<ZVec> pts(ctx.num_points());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = point_from_index(i, ctx.d(), 2 * ctx.n());
    return pts;
}

}  // namespace

// ---------------------------------------------------------------- group

StabiliserGroup::StabiliserGroup(const PhaseContext& ctx, std::vector<PhasedLabel> generators, bool require_lagrangian)
    : ctx_(ctx), gens_(std::move(generators)) {
    const int d = ctx.d();
    std::vector<ZVec> xs;
    for (PhasedLabel& g : gens_) {
        require(static_cast<int>(g.x.size()) == 2 * ctx.n(), ErrorCode::InvalidGroup, "generator has the wrong length");
        for (int& c : g.x) c = ctx.mod_d(c);
        g.s = ctx.mod_d(g.s);
        xs.push_back(g.x);
    }
    for (std::size_t i = 0; i < gens_.size(); ++i)
        for (std::size_t j = i + 1; j < gens_.size(); ++j)
            require(symplectic_product(gens_[i].x, gens_[j].x, d) == 0, ErrorCode::InvalidGroup, "generators do not commute");

    std::vector<WeylLabel> gl;
    for (const PhasedLabel& g : gens_) gl.emplace_back(ctx, g.x, ctx.tau_from_omega(g.s));
    std::map<std::size_t, int> tau;
    std::deque<WeylLabel> queue;
    WeylLabel id = WeylLabel::identity(ctx);
    tau[0] = 0;
    queue.push_back(id);
    while (!queue.empty()) {
        WeylLabel e = queue.front();
        queue.pop_front();
        for (const WeylLabel& g : gl) {
            WeylLabel p = e.compose(g);
            const std::size_t idx = point_index(p.x(), d);
            auto it = tau.find(idx);
            if (it == tau.end()) {
                tau[idx] = p.tau_exponent();
                queue.push_back(p);
            } else {
                require(it->second == p.tau_exponent(), ErrorCode::InvalidGroup, "generators produce a nontrivial phase times the identity");
            }
        }
    }
    for (const auto& [idx, e] : tau) {
        require(ctx.D() == d || e % 2 == 0, ErrorCode::InvalidGroup, "group element carries an odd power of tau");
        const int s = ctx.omega_from_tau(e);
        phase_[idx] = s;
        elements_.push_back({point_from_index(idx, d, 2 * ctx.n()), s});
    }
    module_ = Submodule::canonicalize(d, 2 * ctx.n(), xs);
    require(module_.size() == static_cast<unsigned long>(elements_.size()), ErrorCode::Internal, "group closure disagrees with module size");
    if (require_lagrangian) require(is_lagrangian(), ErrorCode::InvalidGroup, "group is not maximal");
}

bool StabiliserGroup::is_lagrangian() const { return module_.size_u64() == ctx_.dim(); }

std::optional<int> StabiliserGroup::phase_at(const ZVec& x) const {
    auto it = phase_.find(point_index(x, ctx_.d()));
    if (it == phase_.end()) return std::nullopt;
    return it->second;
}

StabiliserGroup StabiliserGroup::shifted(const ZVec& z) const {
    std::vector<PhasedLabel> g = gens_;
    for (PhasedLabel& p : g) p.s = ctx_.mod_d(p.s + symplectic_product(z, p.x, ctx_.d()));
    return StabiliserGroup(ctx_, std::move(g), is_lagrangian());
}

nlohmann::json StabiliserGroup::to_json() const {
    nlohmann::json gs = nlohmann::json::array();
    const int n = ctx_.n();
    for (const PhasedLabel& g : gens_)
        gs.push_back({{"v", ZVec(g.x.begin(), g.x.begin() + n)}, {"w", ZVec(g.x.begin() + n, g.x.end())}, {"s", g.s}});
    return {{"d", ctx_.d()}, {"n", n}, {"generators", std::move(gs)}};
}

StabiliserGroup StabiliserGroup::from_json(const nlohmann::json& j) {
    for (const char* f : {"d", "n", "generators"})
        require(j.contains(f), ErrorCode::Parse, std::string("group is missing field '") + f + "'");
    PhaseContext ctx(j["d"].get<int>(), j["n"].get<int>());
    std::vector<PhasedLabel> gens;
    for (const auto& g : j["generators"]) {
        for (const char* f : {"v", "w", "s"})
            require(g.contains(f), ErrorCode::Parse, std::string("generator is missing field '") + f + "'");
        ZVec x = g["v"].get<ZVec>();
        ZVec w = g["w"].get<ZVec>();
        require(static_cast<int>(x.size()) == ctx.n() && static_cast<int>(w.size()) == ctx.n(), ErrorCode::Parse,
                "generator fields 'v' and 'w' need n entries");
        x.insert(x.end(), w.begin(), w.end());
        gens.push_back({std::move(x), g["s"].get<int>()});
    }
    return StabiliserGroup(ctx, std::move(gens), false);
}

std::vector<PhasedLabel> base_phases(const PhaseContext& ctx, const Submodule& isotropic) {
    std::vector<PhasedLabel> out;
    for (const auto& [f, order] : isotropic.independent_generators()) {
        // (omega^s W_f)^order must be the identity.
        const WeylLabel p = WeylLabel(ctx, f).power(order);
        int found = -1;
        for (int s = 0; s < ctx.d() && found < 0; ++s)
            if (ctx.mod_D(2LL * s * order + p.tau_exponent()) == 0) found = s;
        require(found >= 0, ErrorCode::Internal, "no consistent phase for an independent generator");
        out.push_back({f, found});
    }
    return out;
}

Submodule random_lagrangian(const PhaseContext& ctx, Rng& rng) {
    const int d = ctx.d(), m = 2 * ctx.n();
    Submodule X = Submodule::zero(d, m);
    while (X.size_u64() < ctx.dim()) {
        std::vector<ZVec> cands;
        for (const ZVec& x : symplectic_complement(X).elements())
            if (!X.contains(x)) cands.push_back(x);
        require(!cands.empty(), ErrorCode::Internal, "isotropic module cannot be extended");
        std::vector<ZVec> gens = X.basis();
        gens.push_back(cands[rng.below(static_cast<int>(cands.size()))]);
        X = Submodule::canonicalize(d, m, gens);
    }
    return X;
}

StabiliserGroup random_stabiliser_group(const PhaseContext& ctx, Rng& rng) {
    const Submodule M = random_lagrangian(ctx, rng);
    ZVec z(2 * ctx.n());
    for (int& c : z) c = rng.below(ctx.d());
    return StabiliserGroup(ctx, base_phases(ctx, M)).shifted(z);
}

// ---------------------------------------------------------------- states

DenseState stabiliser_state(const StabiliserGroup& g) {
    require(g.is_lagrangian(), ErrorCode::InvalidGroup, "stabiliser state needs a maximal group");
    const PhaseContext& ctx = g.ctx();
    const int n = ctx.n(), d = ctx.d();
    const std::size_t dim = ctx.dim();
    for (std::size_t u = 0; u < dim; ++u) {
        const ZVec uq = point_from_index(u, d, n);
        std::vector<cplx> amp(dim, 0.0);
        for (const PhasedLabel& e : g.elements()) {
            long long vw = 0, uv = 0;
            for (int i = 0; i < n; ++i) {
                vw += static_cast<long long>(e.x[i]) * e.x[n + i];
                uv += static_cast<long long>(uq[i]) * e.x[i];
            }
            ZVec t(n);
            for (int i = 0; i < n; ++i) t[i] = (uq[i] + e.x[n + i]) % d;
            amp[point_index(t, d)] += ctx.omega_pow(e.s + uv) * ctx.tau_pow(vw);
        }
        double nrm = 0.0;
        for (const cplx& a : amp) nrm += std::norm(a);
        if (nrm > 1e-9) {
            DenseState s(d, {n}, std::move(amp));
            s.normalise();
            return s;
        }
    }
    fail(ErrorCode::Internal, "projector annihilates every basis vector");
}

DenseState stabiliser_state_closed_form(const StabiliserGroup& g) {
    require(g.is_lagrangian(), ErrorCode::InvalidGroup, "stabiliser state needs a maximal group");
    const PhaseContext& ctx = g.ctx();
    const int n = ctx.n(), d = ctx.d();
    const auto& gens = g.generators();
    const int l = static_cast<int>(gens.size());
    // row(W): the span of the n rows of W in Z_d^l
    std::vector<ZVec> wrows(n, ZVec(l));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < l; ++j) wrows[i][j] = gens[j].x[n + i];
    const Submodule rowW = Submodule::canonicalize(d, l, wrows);
    std::optional<ZVec> u;
    for (std::size_t ui = 0; ui < ctx.dim() && !u; ++ui) {
        ZVec cand = point_from_index(ui, d, n);
        ZVec t(l);
        for (int j = 0; j < l; ++j) {
            long long acc = gens[j].s;
            for (int i = 0; i < n; ++i) acc += static_cast<long long>(gens[j].x[i]) * cand[i];
            t[j] = ctx.mod_d(acc);
        }
        if (rowW.contains(t)) u = cand;
    }
    require(u.has_value(), ErrorCode::NoValidU, "no basis offset satisfies the row-space condition");

    // The row-space offset is exact for odd d; for even d the sign picked up by
    // lifted cross terms can cancel the sum, so later offsets are tried in turn.
    const std::size_t terms = static_cast<std::size_t>(std::pow(static_cast<double>(d), l) + 0.5);
    auto expand = [&](const ZVec& off) {
        std::vector<cplx> amp(ctx.dim(), 0.0);
        for (std::size_t qi = 0; qi < terms; ++qi) {
            const ZVec q = point_from_index(qi, d, l);
            std::vector<long long> Vq(n, 0), Wq(n, 0);
            long long omega_e = 0;
            for (int j = 0; j < l; ++j) {
                omega_e += static_cast<long long>(q[j]) * gens[j].s;
                for (int i = 0; i < n; ++i) {
                    Vq[i] += static_cast<long long>(gens[j].x[i]) * q[j];
                    Wq[i] += static_cast<long long>(gens[j].x[n + i]) * q[j];
                }
            }
            long long tau_e = 0;
            for (int i = 0; i < n; ++i) {
                tau_e += Vq[i] * Wq[i];
                omega_e += Vq[i] * off[i];
            }
            // Ordering phase from multiplying the generator powers; vanishes for odd d.
            for (int a = 0; a < l; ++a)
                for (int b = a + 1; b < l; ++b) {
                    std::vector<long long> xa(gens[a].x.begin(), gens[a].x.end()), xb(gens[b].x.begin(), gens[b].x.end());
                    tau_e += static_cast<long long>(q[a]) * q[b] * symplectic_product(xa, xb, ctx.D());
                }
            ZVec t(n);
            for (int i = 0; i < n; ++i) t[i] = ctx.mod_d(Wq[i] + off[i]);
            amp[point_index(t, d)] += ctx.omega_pow(omega_e) * ctx.tau_pow(tau_e);
        }
        return amp;
    };
    auto norm2 = [](const std::vector<cplx>& a) {
        double s = 0.0;
        for (const cplx& c : a) s += std::norm(c);
        return s;
    };
    std::vector<cplx> amp = expand(*u);
    for (std::size_t ui = 0; ui < ctx.dim() && norm2(amp) < 1e-9; ++ui) amp = expand(point_from_index(ui, d, n));
    DenseState s(d, {n}, std::move(amp));
    s.normalise();
    return s;
}

Matrix stabiliser_projector(const StabiliserGroup& g) {
    const PhaseContext& ctx = g.ctx();
    Matrix P = Matrix::Zero(ctx.dim(), ctx.dim());
    for (const PhasedLabel& e : g.elements()) P += ctx.omega_pow(e.s) * dense_weyl(WeylLabel(ctx, e.x));
    return P / static_cast<double>(g.elements().size());
}

// ---------------------------------------------------------------- unsigned group

UnsignedGroup unsigned_group(const DenseState& psi, double tol) {
    psi.require_normalised(1e-9);
    PhaseContext ctx(psi.d(), psi.num_qudits());
    require_table_caps(ctx);
    const std::vector<cplx> E = expectation_table(ctx, psi);
    UnsignedGroup out;
    std::vector<ZVec> members;
    for (std::size_t i = 0; i < E.size(); ++i) {
        const double a = std::abs(E[i]);
        if (a >= 1.0 - tol) {
            members.push_back(point_from_index(i, ctx.d(), 2 * ctx.n()));
            out.phases[i] = ctx.mod_d(-phase_class(ctx, E[i]));
        } else if (a > 1.0 - 10.0 * tol) {
            fail(ErrorCode::ToleranceAmbiguity, "a Weyl expectation sits inside the ambiguity band");
        }
    }
    out.module = Submodule::canonicalize(ctx.d(), 2 * ctx.n(), members);
    require(out.module.size() == static_cast<unsigned long>(members.size()), ErrorCode::Internal,
            "unit-modulus Weyl labels are not closed under addition");
    require(is_isotropic(out.module), ErrorCode::Internal, "unsigned group is not isotropic");
    return out;
}

std::uint64_t stabiliser_size(const DenseState& psi, double tol) { return unsigned_group(psi, tol).module.size_u64(); }

// ---------------------------------------------------------------- enumeration

std::vector<Submodule> enumerate_isotropic(const PhaseContext& ctx) {
    const int d = ctx.d(), m = 2 * ctx.n();
    require(ctx.n() <= 2 && d <= 6, ErrorCode::CapExceeded, "isotropic enumeration needs n <= 2 and d <= 6");
    std::map<std::string, Submodule> seen;
    std::deque<Submodule> queue;
    Submodule zero = Submodule::zero(d, m);
    seen.emplace(zero.fingerprint(), zero);
    queue.push_back(zero);
    while (!queue.empty()) {
        Submodule X = queue.front();
        queue.pop_front();
        if (X.size_u64() == ctx.dim()) continue;
        for (const ZVec& x : symplectic_complement(X).elements()) {
            if (X.contains(x)) continue;
            std::vector<ZVec> gens = X.basis();
            gens.push_back(x);
            Submodule Y = Submodule::canonicalize(d, m, gens);
            std::string key = Y.fingerprint();
            if (seen.count(key)) continue;
            seen.emplace(key, Y);
            queue.push_back(std::move(Y));
        }
    }
    std::vector<Submodule> out;
    for (auto& [k, v] : seen) out.push_back(v);
    std::stable_sort(out.begin(), out.end(), [](const Submodule& a, const Submodule& b) { return a.size_u64() < b.size_u64(); });
    return out;
}

std::vector<Submodule> enumerate_lagrangians(const PhaseContext& ctx) {
    std::vector<Submodule> out;
    for (Submodule& X : enumerate_isotropic(ctx))
        if (X.size_u64() == ctx.dim()) out.push_back(std::move(X));
    return out;
}

std::vector<StabiliserGroup> enumerate_stabiliser_groups(const PhaseContext& ctx) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<StabiliserGroup>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({ctx.d(), ctx.n()});
        if (it != cache.end()) return it->second;
    }
    std::vector<StabiliserGroup> out;
    const std::vector<ZVec> pts = all_points(ctx);
    for (const Submodule& M : enumerate_lagrangians(ctx)) {
        const StabiliserGroup base(ctx, base_phases(ctx, M));
        std::set<std::vector<int>> phases_seen;
        for (const ZVec& z : pts) {
            std::vector<int> key;
            for (const PhasedLabel& g : base.generators()) key.push_back(ctx.mod_d(g.s + symplectic_product(z, g.x, ctx.d())));
            if (!phases_seen.insert(key).second) continue;
            out.push_back(base.shifted(z));
        }
        require(phases_seen.size() == ctx.dim(), ErrorCode::Internal, "wrong number of stabiliser states on a Lagrangian");
    }
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(std::make_pair(ctx.d(), ctx.n()), out);
    return out;
}

void enumerate_stabiliser_states(const PhaseContext& ctx,
                                 const std::function<void(const StabiliserGroup&, const DenseState&)>& visit) {
    for (const StabiliserGroup& g : enumerate_stabiliser_groups(ctx)) visit(g, stabiliser_state(g));
}

FidelityResult stabiliser_fidelity(const DenseState& psi) {
    psi.require_normalised(1e-9);
    PhaseContext ctx(psi.d(), psi.num_qudits());
    const std::vector<cplx> E = expectation_table(ctx, psi);
    FidelityResult best;
    best.value = -1.0;
    const double scale = 1.0 / static_cast<double>(ctx.dim());
    for (const StabiliserGroup& g : enumerate_stabiliser_groups(ctx)) {
        double val = 0.0;
        for (const PhasedLabel& e : g.elements()) val += (ctx.omega_pow(e.s) * E[point_index(e.x, ctx.d())]).real();
        val *= scale;
        if (val > best.value + 1e-12) {
            best.value = val;
            best.argmax = g;
        }
    }
    return best;
}

namespace {

double coset_overlap(const PhaseContext& ctx, const std::vector<cplx>& E, const std::vector<PhasedLabel>& elements, const ZVec& b) {
    double val = 0.0;
    for (const PhasedLabel& e : elements)
        val += (ctx.omega_pow(e.s + symplectic_product(b, e.x, ctx.d())) * E[point_index(e.x, ctx.d())]).real();
    return val / static_cast<double>(elements.size());
}

}  // namespace

double k_sized_fidelity(const DenseState& psi, std::uint64_t K) {
    psi.require_normalised(1e-9);
    PhaseContext ctx(psi.d(), psi.num_qudits());
    require(ctx.n() == 1 || (ctx.n() == 2 && ctx.d() <= 3), ErrorCode::CapExceeded, "k-sized fidelity needs n = 1, or n = 2 with d <= 3");
    const std::vector<cplx> E = expectation_table(ctx, psi);
    const std::vector<ZVec> pts = all_points(ctx);
    double best = 0.0;
    for (const Submodule& X : enumerate_isotropic(ctx)) {
        if (X.size_u64() < K) continue;
        const StabiliserGroup g(ctx, base_phases(ctx, X), false);
        for (const ZVec& b : pts) best = std::max(best, coset_overlap(ctx, E, g.elements(), b));
    }
    return best;
}

PartialProjection best_partial_projection(const DenseState& psi, const Submodule& isotropic) {
    psi.require_normalised(1e-9);
    PhaseContext ctx(psi.d(), psi.num_qudits());
    require(is_isotropic(isotropic), ErrorCode::InvalidArgument, "module is not isotropic");
    const std::vector<cplx> E = expectation_table(ctx, psi);
    const StabiliserGroup g(ctx, base_phases(ctx, isotropic), false);
    PartialProjection out;
    out.overlap = -1.0;
    for (const ZVec& b : all_points(ctx)) {
        const double v = coset_overlap(ctx, E, g.elements(), b);
        if (v > out.overlap + 1e-12) {
            out.overlap = v;
            out.shift = b;
        }
    }
    std::vector<cplx> acc(psi.size(), 0.0);
    const DenseState flat(psi.d(), {ctx.n()}, psi.amplitudes());
    for (const PhasedLabel& e : g.elements()) {
        const cplx ph = ctx.omega_pow(e.s + symplectic_product(out.shift, e.x, ctx.d()));
        const DenseState t = apply_weyl(flat, 0, WeylLabel(ctx, e.x));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += ph * t[i];
    }
    out.state = DenseState(psi.d(), {ctx.n()}, std::move(acc));
    out.state.normalise();
    return out;
}

bool is_symplectic(const PhaseContext& ctx, const std::vector<std::vector<int>>& gamma) {
    const int m = 2 * ctx.n(), n = ctx.n();
    require(static_cast<int>(gamma.size()) == m, ErrorCode::InvalidArgument, "symplectic check needs a 2n x 2n matrix");
    for (const auto& row : gamma) require(static_cast<int>(row.size()) == m, ErrorCode::InvalidArgument, "symplectic check needs a 2n x 2n matrix");
    auto omega = [n](int i, int j) -> long long {
        if (i < n && j == i + n) return 1;
        if (i >= n && j == i - n) return -1;
        return 0;
    };
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            long long acc = 0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) acc += static_cast<long long>(gamma[i][a]) * omega(i, j) * gamma[j][b];
            if (ctx.mod_d(acc - omega(a, b)) != 0) return false;
        }
    return true;
}

}  // namespace qbell
