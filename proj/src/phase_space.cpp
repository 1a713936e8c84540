#include "qbell/phase_space.hpp"

#include <cmath>

#include "qbell/errors.hpp"

namespace qbell {

// ---------------------------------------------------------------- labels

long long reduction_correction(const PhaseContext& ctx, const std::vector<long long>& u) {
    const int n = ctx.n(), d = ctx.d();
    long long lifted = 0, reduced = 0;
    for (int i = 0; i < n; ++i) {
        lifted += u[i] * u[n + i];
        long long rv = ((u[i] % d) + d) % d, rw = ((u[n + i] % d) + d) % d;
        reduced += rv * rw;
    }
    return ctx.mod_D(lifted - reduced);
}

WeylLabel::WeylLabel(const PhaseContext& ctx, ZVec x, long long tau_exponent) : ctx_(ctx), x_(std::move(x)) {
    require(static_cast<int>(x_.size()) == 2 * ctx.n(), ErrorCode::InvalidArgument, "label length must be 2n");
    for (int& c : x_) c = ctx.mod_d(c);
    tau_ = ctx.mod_D(tau_exponent);
}

WeylLabel WeylLabel::from_lifted(const PhaseContext& ctx, const std::vector<long long>& u, long long tau_exponent) {
    require(static_cast<int>(u.size()) == 2 * ctx.n(), ErrorCode::InvalidArgument, "label length must be 2n");
    ZVec x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) x[i] = ctx.mod_d(u[i]);
    return WeylLabel(ctx, std::move(x), tau_exponent + reduction_correction(ctx, u));
}

WeylLabel WeylLabel::compose(const WeylLabel& b) const {
    require(ctx_ == b.ctx_, ErrorCode::ContextMismatch, "composing labels from different contexts");
    std::vector<long long> u(x_.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = static_cast<long long>(x_[i]) + b.x_[i];
    std::vector<long long> xa(x_.begin(), x_.end()), xb(b.x_.begin(), b.x_.end());
    const long long phase = symplectic_product(xa, xb, ctx_.D());
    return from_lifted(ctx_, u, static_cast<long long>(tau_) + b.tau_ + phase);
}

WeylLabel WeylLabel::power(long long m) const {
    std::vector<long long> u(x_.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = m * x_[i];
    return from_lifted(ctx_, u, ctx_.mod_D(m) * static_cast<long long>(tau_));
}

// ---------------------------------------------------------------- tables

void require_table_caps(const PhaseContext& ctx) {
    require(ctx.n() <= 3 && ctx.d() <= 6, ErrorCode::CapExceeded, "phase-space tables need n <= 3 and d <= 6");
}

PhaseTable::PhaseTable(const PhaseContext& ctx, int arity, bool real)
    : d_(ctx.d()), n_(ctx.n()), arity_(arity), real_(real), points_(ctx.num_points()) {
    require_table_caps(ctx);
    require(arity >= 1 && arity <= 4, ErrorCode::InvalidArgument, "table arity must be 1..4");
    std::size_t total = 1;
    for (int i = 0; i < arity; ++i) {
        total *= points_;
        require(total <= amplitude_cap(), ErrorCode::CapExceeded, "phase table exceeds the cap");
    }
    values_.assign(total, 0.0);
}

cplx PhaseTable::sum() const {
    cplx s = 0.0;
    for (const cplx& v : values_) s += v;
    return s;
}

void PhaseTable::check_probability(double tol) const {
    for (const cplx& v : values_)
        require(v.real() >= -1e-12 && std::abs(v.imag()) <= 1e-12, ErrorCode::Internal, "probability table has a negative entry");
    require(std::abs(sum().real() - 1.0) <= tol, ErrorCode::Internal, "probability table does not sum to one");
}

nlohmann::json PhaseTable::to_json() const {
    nlohmann::json vals = nlohmann::json::array();
    for (const cplx& v : values_) {
        if (real_)
            vals.push_back(v.real());
        else
            vals.push_back({v.real(), v.imag()});
    }
    return {{"d", d_}, {"n", n_}, {"arity", arity_}, {"values", std::move(vals)}};
}

std::vector<cplx> expectation_table(const PhaseContext& ctx, const DenseState& psi) {
    const int n = ctx.n(), d = ctx.d();
    require(psi.d() == d && psi.num_qudits() == n, ErrorCode::ContextMismatch, "state does not match context");
    const std::size_t dim = ctx.dim();
    std::vector<ZVec> digits(dim);
    for (std::size_t q = 0; q < dim; ++q) digits[q] = point_from_index(q, d, n);
    // <q, v> mod d for all pairs
    std::vector<int> qv(dim * dim);
    for (std::size_t q = 0; q < dim; ++q)
        for (std::size_t v = 0; v < dim; ++v) {
            long long s = 0;
            for (int i = 0; i < n; ++i) s += static_cast<long long>(digits[q][i]) * digits[v][i];
            qv[q * dim + v] = static_cast<int>(s % d);
        }
    std::vector<cplx> omega(d);
    for (int k = 0; k < d; ++k) omega[k] = ctx.omega_pow(k);

    const auto& a = psi.amplitudes();
    std::vector<cplx> out(ctx.num_points());
    std::vector<cplx> c(dim);
    for (std::size_t w = 0; w < dim; ++w) {
        for (std::size_t q = 0; q < dim; ++q) {
            ZVec t(n);
            for (int i = 0; i < n; ++i) t[i] = (digits[q][i] + digits[w][i]) % d;
            c[q] = std::conj(a[point_index(t, d)]) * a[q];
        }
        for (std::size_t v = 0; v < dim; ++v) {
            cplx acc = 0.0;
            for (std::size_t q = 0; q < dim; ++q) acc += omega[qv[q * dim + v]] * c[q];
            // tau needs <v, w> over Z, not mod d
            long long vw = 0;
            for (int i = 0; i < n; ++i) vw += static_cast<long long>(digits[v][i]) * digits[w][i];
            out[v + dim * w] = ctx.tau_pow(vw) * acc;
        }
    }
    return out;
}

PhaseTable characteristic_table(const PhaseContext& ctx, const DenseState& psi) {
    psi.require_normalised(1e-9);
    PhaseTable t(ctx, 1, false);
    const double scale = 1.0 / std::sqrt(static_cast<double>(ctx.dim()));
    std::vector<cplx> e = expectation_table(ctx, psi);
    for (std::size_t i = 0; i < e.size(); ++i) t[i] = scale * std::conj(e[i]);
    return t;
}

PhaseTable p_table(const PhaseContext& ctx, const DenseState& psi) {
    psi.require_normalised(1e-9);
    PhaseTable t(ctx, 1, true);
    const double scale = 1.0 / static_cast<double>(ctx.dim());
    std::vector<cplx> e = expectation_table(ctx, psi);
    for (std::size_t i = 0; i < e.size(); ++i) t[i] = scale * std::norm(e[i]);
    return t;
}

PhaseTable symplectic_fourier(const PhaseContext& ctx, const PhaseTable& f) {
    require(f.arity() == 1 && f.d() == ctx.d() && f.n() == ctx.n(), ErrorCode::ContextMismatch, "fourier needs an arity-1 table");
    const int n = ctx.n(), d = ctx.d();
    PhaseTable out(ctx, 1, false);
    out.values() = f.values();
    std::vector<cplx> omega(d);
    for (int k = 0; k < d; ++k) omega[k] = ctx.omega_pow(k);
    std::vector<std::size_t> stride(2 * n);
    stride[0] = 1;
    for (int i = 1; i < 2 * n; ++i) stride[i] = stride[i - 1] * d;
    std::vector<cplx> block(d * d), res(d * d);
    // The character factorises over the pairs (v_i, w_i).
    for (int i = 0; i < n; ++i) {
        const std::size_t sv = stride[i], sw = stride[n + i];
        for (std::size_t base = 0; base < out.size(); ++base) {
            if ((base / sv) % d != 0 || (base / sw) % d != 0) continue;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) block[a * d + b] = out[base + a * sv + b * sw];
            for (int yv = 0; yv < d; ++yv)
                for (int yw = 0; yw < d; ++yw) {
                    cplx acc = 0.0;
                    for (int xv = 0; xv < d; ++xv)
                        for (int xw = 0; xw < d; ++xw) {
                            int e = ((yv * xw - yw * xv) % d + d) % d;
                            acc += omega[e] * block[xv * d + xw];
                        }
                    res[yv * d + yw] = acc;
                }
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) out[base + a * sv + b * sw] = res[a * d + b];
        }
    }
    const double scale = 1.0 / static_cast<double>(ctx.num_points());
    for (cplx& v : out.values()) v *= scale;
    return out;
}

PhaseTable convolve(const PhaseContext& ctx, const PhaseTable& f, const PhaseTable& g) {
    require(f.arity() == 1 && g.arity() == 1 && f.d() == ctx.d() && g.d() == ctx.d() && f.n() == ctx.n() && g.n() == ctx.n(),
            ErrorCode::ContextMismatch, "convolution needs matching arity-1 tables");
    const int d = ctx.d(), len = 2 * ctx.n();
    const std::size_t P = ctx.num_points();
    std::vector<ZVec> pts(P);
    for (std::size_t i = 0; i < P; ++i) pts[i] = point_from_index(i, d, len);
    PhaseTable out(ctx, 1, f.is_real() && g.is_real());
    for (std::size_t x = 0; x < P; ++x) {
        cplx acc = 0.0;
        for (std::size_t y = 0; y < P; ++y) acc += f[y] * g[point_index(vec_sub(pts[x], pts[y], d), d)];
        out[x] = acc / static_cast<double>(P);
    }
    return out;
}

double mass_on(const Submodule& sub, const PhaseTable& f) {
    require(sub.modulus() == f.d() && sub.ambient_rank() == 2 * f.n(), ErrorCode::ContextMismatch, "submodule does not match table");
    std::vector<std::size_t> idx;
    for (const ZVec& x : sub.elements()) idx.push_back(point_index(x, f.d()));
    double total = 0.0;
    if (f.arity() == 1) {
        for (std::size_t i : idx) total += f[i].real();
        return total;
    }
    require(f.arity() == 4, ErrorCode::InvalidArgument, "mass_on supports arity 1 or 4");
    const std::size_t P = f.points();
    for (std::size_t a : idx)
        for (std::size_t b : idx)
            for (std::size_t c : idx)
                for (std::size_t e : idx) total += f[a + P * (b + P * (c + P * e))].real();
    return total;
}

}  // namespace qbell
