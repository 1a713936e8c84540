#include "qbell/sampling.hpp"

#include <cmath>

#include "qbell/errors.hpp"

namespace qbell {

namespace {

std::size_t upow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

std::vector<double> squared_norms_by_row(const Matrix& C) {
    std::vector<double> out(static_cast<std::size_t>(C.rows()));
    for (Eigen::Index x = 0; x < C.rows(); ++x) {
        const double p = C.row(x).squaredNorm();
        out[static_cast<std::size_t>(x)] = p < kProbabilityFloor ? 0.0 : p;
    }
    return out;
}

// add[i * P + j] = index of x_i + x_j.
std::vector<std::uint32_t> point_addition_table(const PhaseContext& ctx) {
    const std::size_t P = ctx.num_points();
    const int len = 2 * ctx.n();
    std::vector<ZVec> pts(P);
    for (std::size_t i = 0; i < P; ++i) pts[i] = point_from_index(i, ctx.d(), len);
    std::vector<std::uint32_t> add(P * P);
    for (std::size_t i = 0; i < P; ++i)
        for (std::size_t j = 0; j < P; ++j)
            add[i * P + j] = static_cast<std::uint32_t>(point_index(vec_add(pts[i], pts[j], ctx.d()), ctx.d()));
    return add;
}

}  // namespace

SkewedSample subtract_samples(const SkewedSample& a, const SkewedSample& b, int d) {
    require(a.labels.size() == b.labels.size(), ErrorCode::InvalidArgument, "sample arity differs");
    SkewedSample out;
    out.labels.reserve(a.labels.size());
    for (std::size_t i = 0; i < a.labels.size(); ++i) out.labels.push_back(vec_sub(a.labels[i], b.labels[i], d));
    return out;
}

SkewedSampler::SkewedSampler(const DenseState& psi, const RMatrix& R)
    : ctx_(psi.d(), psi.num_qudits()), R_(R) {
    require(psi.num_registers() == 1, ErrorCode::InvalidArgument, "sampler expects a single-register state");
    require(R.d == psi.d(), ErrorCode::ContextMismatch, "R built for a different d");
    require(R.k >= 1 && static_cast<int>(R.entries.size()) == R.k, ErrorCode::InvalidArgument, "malformed R");
    psi.require_normalised(1e-8);

    const std::size_t dim = ctx_.dim();
    const std::size_t P = ctx_.num_points();
    require(upow(dim, R.k) <= amplitude_cap(), ErrorCode::CapExceeded,
            "B_R block of " + std::to_string(upow(dim, R.k)) + " amplitudes exceeds the cap");

    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    phi_.resize(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(dim));
    for (std::size_t x = 0; x < P; ++x) {
        const WeylLabel lab = WeylLabel(ctx_, point_from_index(x, ctx_.d(), 2 * ctx_.n())).adjoint();
        const DenseState moved = apply_weyl(psi, 0, lab);
        for (std::size_t q = 0; q < dim; ++q)
            phi_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(q)) = scale * moved[q];
    }

    independent_ = R.is_identity_mod_d();
    if (independent_) {
        const Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes().data(), static_cast<Eigen::Index>(dim));
        pair_probs_ = squared_norms_by_row(phi_ * v);
    } else {
        const DenseState block = apply_BR_inverse(psi.tensor_power(R.k), R);
        block_ = Eigen::Map<const Eigen::VectorXcd>(block.amplitudes().data(), static_cast<Eigen::Index>(block.size()));
    }
}

Matrix SkewedSampler::contract(const Eigen::Ref<const Eigen::VectorXcd>& block) const {
    const Eigen::Index dim = static_cast<Eigen::Index>(ctx_.dim());
    const Eigen::Index rest = block.size() / dim;
    const Eigen::Map<const Matrix> B(block.data(), dim, rest);
    return phi_ * B;
}

SkewedSample SkewedSampler::round(Rng& rng) const {
    const int d = ctx_.d();
    const int len = 2 * ctx_.n();
    SkewedSample out;
    out.labels.reserve(static_cast<std::size_t>(R_.k));
    if (independent_) {
        for (int i = 0; i < R_.k; ++i) out.labels.push_back(point_from_index(sample_index(pair_probs_, rng), d, len));
        return out;
    }
    Eigen::VectorXcd cur = block_;
    for (int i = 0; i < R_.k; ++i) {
        const Matrix C = contract(cur);
        const std::vector<double> probs = squared_norms_by_row(C);
        const std::size_t x = sample_index(probs, rng);
        out.labels.push_back(point_from_index(x, d, len));
        if (i + 1 < R_.k) {
            cur = C.row(static_cast<Eigen::Index>(x)).transpose();
            cur /= std::sqrt(probs[x]);
        }
    }
    return out;
}

SkewedSample SkewedSampler::difference(Rng& rng) const {
    const SkewedSample a = round(rng);
    const SkewedSample b = round(rng);
    return subtract_samples(a, b, ctx_.d());
}

std::vector<double> SkewedSampler::joint_distribution(std::size_t limit) const {
    const std::size_t P = ctx_.num_points();
    const std::size_t total = upow(P, R_.k);
    require(total <= limit, ErrorCode::CapExceeded,
            "joint table of " + std::to_string(total) + " entries exceeds " + std::to_string(limit));
    std::vector<double> joint(total, 0.0);

    if (independent_) {
        for (std::size_t idx = 0; idx < total; ++idx) {
            double p = 1.0;
            std::size_t rem = idx;
            for (int i = 0; i < R_.k; ++i, rem /= P) p *= pair_probs_[rem % P];
            joint[idx] = p;
        }
        return joint;
    }

    // Depth-first over branches; unnormalised blocks carry the joint weight.
    struct Frame {
        Eigen::VectorXcd block;
        std::size_t prefix;
        std::size_t stride;
        int depth;
    };
    std::vector<Frame> stack{{block_, 0, 1, 0}};
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const Matrix C = contract(f.block);
        for (std::size_t x = 0; x < P; ++x) {
            const double p = C.row(static_cast<Eigen::Index>(x)).squaredNorm();
            if (p < kProbabilityFloor) continue;
            const std::size_t idx = f.prefix + x * f.stride;
            if (f.depth + 1 == R_.k) {
                joint[idx] = p;
            } else {
                stack.push_back({C.row(static_cast<Eigen::Index>(x)).transpose(), idx, f.stride * P, f.depth + 1});
            }
        }
    }
    return joint;
}

PhaseTable b_exact(const DenseState& psi, const RMatrix& R, bool allow_large) {
    const PhaseContext ctx(psi.d(), psi.num_qudits());
    require(ctx.n() == 1, ErrorCode::CapExceeded, "closed-form difference law is limited to n = 1");
    require(R.k == 4, ErrorCode::InvalidArgument, "closed-form difference law needs a 4 x 4 R");
    require(ctx.d() <= (allow_large ? 6 : 4), ErrorCode::CapExceeded,
            "closed-form difference law at d = " + std::to_string(ctx.d()) + " needs the large-table flag");
    const int d = ctx.d();
    const std::size_t P = ctx.num_points();
    const PhaseTable p = p_table(ctx, psi);
    const auto Rm = R.mod_d();
    std::vector<double> pr(P);
    for (std::size_t i = 0; i < P; ++i) pr[i] = p[i].real();
    const auto add = point_addition_table(ctx);

    // Start from prod_i p((YR)_i), then fold p(x_a + y_a) in one axis at a time.
    const std::size_t total = upow(P, 4);
    std::vector<double> cur(total);
    std::vector<ZVec> pts(P);
    for (std::size_t i = 0; i < P; ++i) pts[i] = point_from_index(i, d, 2);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx;
        ZVec Y[4];
        for (int l = 0; l < 4; ++l, rem /= P) Y[l] = pts[rem % P];
        double w = 1.0;
        for (int i = 0; i < 4 && w != 0.0; ++i) {
            ZVec col(2, 0);
            for (int l = 0; l < 4; ++l)
                for (int c = 0; c < 2; ++c) col[c] = (col[c] + Y[l][c] * Rm[l][i]) % d;
            w *= pr[point_index(col, d)];
        }
        cur[idx] = w;
    }
    std::vector<double> next(total);
    std::size_t stride = 1;
    for (int axis = 0; axis < 4; ++axis, stride *= P) {
        for (std::size_t idx = 0; idx < total; ++idx) {
            const std::size_t xa = (idx / stride) % P;
            const std::size_t base = idx - xa * stride;
            double acc = 0.0;
            for (std::size_t y = 0; y < P; ++y) {
                const double t = cur[base + y * stride];
                if (t != 0.0) acc += pr[add[xa * P + y]] * t;
            }
            next[idx] = acc;
        }
        cur.swap(next);
    }

    PhaseTable out(ctx, 4, true);
    for (std::size_t i = 0; i < total; ++i) out[i] = cur[i];
    return out;
}

PhaseTable b_from_branches(const DenseState& psi, const RMatrix& R) {
    require(R.k == 4, ErrorCode::InvalidArgument, "difference table needs a 4 x 4 R");
    const SkewedSampler sampler(psi, R);
    const PhaseContext& ctx = sampler.ctx();
    const std::size_t P = ctx.num_points();
    const std::size_t total = upow(P, 4);
    require(total <= 10000, ErrorCode::CapExceeded, "branch difference table is limited to d^{8n} <= 1e4");
    const std::vector<double> joint = sampler.joint_distribution();
    const auto add = point_addition_table(ctx);

    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < total; ++i)
        if (joint[i] > 0.0) support.push_back(i);

    PhaseTable out(ctx, 4, true);
    for (std::size_t x = 0; x < total; ++x) {
        double acc = 0.0;
        for (std::size_t a : support) {
            std::size_t j = 0, ra = a, rx = x, stride = 1;
            for (int i = 0; i < 4; ++i, ra /= P, rx /= P, stride *= P) j += add[(ra % P) * P + (rx % P)] * stride;
            acc += joint[a] * joint[j];
        }
        out[x] = acc;
    }
    return out;
}

Witness conjugate_witness(const StabiliserGroup& S, const RMatrix& R) {
    const PhaseContext& ctx = S.ctx();
    require(R.d == ctx.d(), ErrorCode::ContextMismatch, "R built for a different d");
    const int k = R.k;
    const int len = 2 * ctx.n();
    const DenseState psi = stabiliser_state(S);
    const DenseState out = apply_BR(psi.tensor_power(k), R);
    const DenseState star = psi.conj();

    // Weyl operators fixing |S*> up to phase, and the phase each picks up
    // on W_y|S*>; matching those phases register by register pins y modulo the group.
    std::vector<WeylLabel> gens;
    for (const PhasedLabel& g : S.generators()) gens.emplace_back(ctx, involution(g.x, ctx.d()));

    const std::size_t P = ctx.num_points();
    std::vector<std::vector<cplx>> predicted(P);
    for (std::size_t y = 0; y < P; ++y) {
        const DenseState shifted = apply_weyl(star, 0, WeylLabel(ctx, point_from_index(y, ctx.d(), len)));
        for (const WeylLabel& g : gens) predicted[y].push_back(expectation_weyl(shifted, g));
    }

    Witness w;
    DenseState target = star.tensor_power(k);
    for (int reg = 0; reg < k; ++reg) {
        std::vector<cplx> seen;
        for (const WeylLabel& g : gens) seen.push_back(inner(out, apply_weyl(out, reg, g)));
        std::optional<std::size_t> hit;
        for (std::size_t y = 0; y < P && !hit; ++y) {
            bool ok = true;
            for (std::size_t j = 0; j < gens.size() && ok; ++j) ok = std::abs(seen[j] - predicted[y][j]) < 1e-6;
            if (ok) hit = y;
        }
        require(hit.has_value(), ErrorCode::WitnessNotFound,
                "register " + std::to_string(reg) + " is not a Weyl shift of the conjugate state");
        w.labels.push_back(point_from_index(*hit, ctx.d(), len));
        target = apply_weyl(target, reg, WeylLabel(ctx, w.labels.back()));
    }
    w.phase = inner(target, out);
    w.fidelity = std::norm(w.phase);
    require(w.fidelity >= 1.0 - 1e-6, ErrorCode::WitnessNotFound,
            "witness fidelity " + std::to_string(w.fidelity) + " below 1 - 1e-6");
    return w;
}

}  // namespace qbell
