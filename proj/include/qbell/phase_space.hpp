#pragma once

#include "json.hpp"
#include <vector>

#include "qbell/state.hpp"
#include "qbell/zmod.hpp"

namespace qbell {

// tau^{tau_exponent} W_x with x = (v, w) reduced into [0, d).
class WeylLabel {
public:
    WeylLabel(const PhaseContext& ctx, ZVec x, long long tau_exponent = 0);
    // Label of tau^e W_u for an unreduced integer representative u.
    static WeylLabel from_lifted(const PhaseContext& ctx, const std::vector<long long>& u, long long tau_exponent = 0);
    static WeylLabel identity(const PhaseContext& ctx) { return WeylLabel(ctx, ZVec(2 * ctx.n(), 0)); }

    const PhaseContext& ctx() const { return ctx_; }
    const ZVec& x() const { return x_; }
    int tau_exponent() const { return tau_; }
    ZVec v() const { return ZVec(x_.begin(), x_.begin() + ctx_.n()); }
    ZVec w() const { return ZVec(x_.begin() + ctx_.n(), x_.end()); }

    WeylLabel compose(const WeylLabel& b) const;  // (this) * b
    WeylLabel power(long long m) const;
    WeylLabel adjoint() const { return power(-1); }
    bool operator==(const WeylLabel& o) const { return ctx_ == o.ctx_ && x_ == o.x_ && tau_ == o.tau_; }

private:
    PhaseContext ctx_;
    ZVec x_;
    int tau_;
};

// tau exponent picked up when an integer representative u is reduced mod d.
long long reduction_correction(const PhaseContext& ctx, const std::vector<long long>& u);

// Dense table over (Z_d^{2n})^arity. Index of (x_1, ..., x_k) is
// idx(x_1) + d^{2n} idx(x_2) + ..., with idx(x) = sum_i x_i d^i, v before w.
class PhaseTable {
public:
    PhaseTable() = default;
    PhaseTable(const PhaseContext& ctx, int arity, bool real);

    int d() const { return d_; }
    int n() const { return n_; }
    int arity() const { return arity_; }
    bool is_real() const { return real_; }
    std::size_t size() const { return values_.size(); }
    std::size_t points() const { return points_; }

    std::vector<cplx>& values() { return values_; }
    const std::vector<cplx>& values() const { return values_; }
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }
    cplx at(const ZVec& x) const { return values_[point_index(x, d_)]; }
    double real_at(const ZVec& x) const { return values_[point_index(x, d_)].real(); }

    cplx sum() const;
    void check_probability(double tol = 1e-9) const;
    nlohmann::json to_json() const;

private:
    int d_ = 0, n_ = 0, arity_ = 1;
    bool real_ = true;
    std::size_t points_ = 0;
    std::vector<cplx> values_;
};

void require_table_caps(const PhaseContext& ctx);

PhaseTable characteristic_table(const PhaseContext& ctx, const DenseState& psi);
PhaseTable p_table(const PhaseContext& ctx, const DenseState& psi);
// <psi|W_x|psi> for every x.
std::vector<cplx> expectation_table(const PhaseContext& ctx, const DenseState& psi);

PhaseTable symplectic_fourier(const PhaseContext& ctx, const PhaseTable& f);
PhaseTable convolve(const PhaseContext& ctx, const PhaseTable& f, const PhaseTable& g);
double mass_on(const Submodule& sub, const PhaseTable& f);

}  // namespace qbell
