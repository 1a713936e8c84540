#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qbell {

using BigInt = mpz_class;
using cplx = std::complex<double>;
using ZVec = std::vector<int>;  // entries in [0, d)

struct PrimePower {
    int p;
    int k;
    bool operator==(const PrimePower&) const = default;
};

std::vector<PrimePower> prime_factorize(long long d);

// Arithmetic frame shared by everything that touches phases.
class PhaseContext {
public:
    PhaseContext(int d, int n);

    int d() const { return d_; }
    int n() const { return n_; }
    int D() const { return D_; }
    cplx omega() const { return tau_table_[2 % D_]; }
    cplx tau() const { return tau_table_[1 % D_]; }
    const std::vector<PrimePower>& factors() const { return factors_; }
    int smallest_prime() const { return factors_.front().p; }
    int exponent_sum() const;

    int mod_d(long long a) const;
    int mod_D(long long a) const;
    cplx tau_pow(long long e) const { return tau_table_[mod_D(e)]; }
    cplx omega_pow(long long e) const { return tau_table_[mod_D(2 * static_cast<long long>(mod_d(e)))]; }

    // ω^s as a τ exponent, and the inverse map for even exponents.
    int tau_from_omega(long long s) const { return mod_D(2 * static_cast<long long>(mod_d(s))); }
    int omega_from_tau(long long e) const;

    std::size_t num_points() const { return points_; }  // d^{2n}
    std::size_t dim() const { return dim_; }            // d^n

    bool operator==(const PhaseContext& o) const { return d_ == o.d_ && n_ == o.n_; }
    bool operator!=(const PhaseContext& o) const { return !(*this == o); }

private:
    int d_, n_, D_;
    std::vector<PrimePower> factors_;
    std::vector<cplx> tau_table_;
    std::size_t points_, dim_;
};

// Exact integer matrix.
class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols) : r_(rows), c_(cols), a_(rows * cols, 0) {}
    static IntMatrix identity(std::size_t n);
    static IntMatrix from_rows(const std::vector<std::vector<long long>>& rows, std::size_t cols = 0);

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    BigInt& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
    const BigInt& operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }

    IntMatrix operator*(const IntMatrix& b) const;
    IntMatrix transpose() const;
    BigInt determinant() const;  // square only, fraction-free elimination
    bool is_diagonal() const;
    bool operator==(const IntMatrix& b) const;
    std::string str() const;

private:
    std::size_t r_ = 0, c_ = 0;
    std::vector<BigInt> a_;
};

// U * A * V = S with U, V unimodular, S diagonal, s_i | s_{i+1}, s_i >= 0.
// Vinv is V^{-1}, tracked alongside V.
struct SmithResult {
    IntMatrix U, S, V, Vinv;
    bool promoted = false;  // true when 128-bit arithmetic overflowed
    std::vector<BigInt> diagonal() const;
};

SmithResult smith_normal_form(const IntMatrix& A);
SmithResult smith_normal_form_bigint(const IntMatrix& A);

// Submodule of Z_d^m in Howell form: echelon rows, unique for the module.
class Submodule {
public:
    Submodule() = default;
    static Submodule canonicalize(int d, int m, const std::vector<ZVec>& generators);
    static Submodule zero(int d, int m) { return canonicalize(d, m, {}); }
    static Submodule full(int d, int m);

    int modulus() const { return d_; }
    int ambient_rank() const { return m_; }
    const std::vector<ZVec>& basis() const { return rows_; }
    const std::vector<int>& pivot_columns() const { return pivot_col_; }
    const std::vector<int>& pivot_values() const { return pivot_val_; }
    const BigInt& size() const { return size_; }
    std::uint64_t size_u64() const;

    bool contains(const ZVec& x) const;
    bool contains(const Submodule& other) const;
    std::vector<ZVec> elements() const;  // each element exactly once

    // Direct-sum generators (x_i, order_i) from the Smith form of [basis; d I].
    std::vector<std::pair<ZVec, int>> independent_generators() const;

    std::string fingerprint() const;
    bool operator==(const Submodule& o) const { return d_ == o.d_ && m_ == o.m_ && rows_ == o.rows_; }
    bool operator!=(const Submodule& o) const { return !(*this == o); }

private:
    int d_ = 0, m_ = 0;
    std::vector<ZVec> rows_;
    std::vector<int> pivot_col_, pivot_val_;
    BigInt size_ = 1;
};

// Size of span(G) + dZ^m over dZ^m, read off the Smith diagonal of [G; d I].
BigInt span_size_by_smith(int d, int m, const std::vector<ZVec>& generators);

Submodule kernel_mod_d(int d, const std::vector<ZVec>& rows, int cols);
Submodule orthogonal_complement(const Submodule& sub);
Submodule symplectic_complement(const Submodule& sub);
Submodule submodule_sum(const Submodule& a, const Submodule& b);
Submodule submodule_intersection(const Submodule& a, const Submodule& b);
bool is_isotropic(const Submodule& sub);

// [x, y] = sum_i x_i y_{n+i} - x_{n+i} y_i, evaluated over Z then reduced mod modulus (>0).
long long symplectic_product(const std::vector<long long>& x, const std::vector<long long>& y, long long modulus);
long long symplectic_product(const ZVec& x, const ZVec& y, long long modulus);
ZVec involution(const ZVec& x, int d);

ZVec vec_add(const ZVec& a, const ZVec& b, int d);
ZVec vec_sub(const ZVec& a, const ZVec& b, int d);
ZVec vec_scale(const ZVec& a, long long c, int d);
std::size_t point_index(const ZVec& x, int d);
ZVec point_from_index(std::size_t idx, int d, int len);

struct FourSquare {
    long long m;
    long long a[4];
};
FourSquare four_square(long long m);

struct RMatrix {
    int k = 0;
    int d = 0;
    long long target = 0;                         // R^T R = target * I (over Z when k = 4)
    std::vector<std::vector<long long>> entries;  // k x k
    std::vector<std::vector<int>> mod_d() const;
    std::vector<std::vector<int>> inverse_mod_d() const;  // -R^T mod d
    bool is_identity_mod_d() const;
};

// k = 4 uses the four-square template for D - 1; k = 2 and k = 1 are the
// prime-d reductions. d = 2 yields the identity unless qubit_template is set.
RMatrix build_R(const PhaseContext& ctx, int k = 4, bool qubit_template = false);

BigInt maximal_submodule_count(int p, int m);

}  // namespace qbell
