#include "qbell/zmod.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qbell/errors.hpp"

namespace qbell {

// ---------------------------------------------------------------- primes

std::vector<PrimePower> prime_factorize(long long d) {
    require(d >= 2, ErrorCode::InvalidArgument, "prime_factorize needs d >= 2");
    std::vector<PrimePower> out;
    for (long long p = 2; p * p <= d; ++p) {
        if (d % p != 0) continue;
        int k = 0;
        while (d % p == 0) {
            d /= p;
            ++k;
        }
        out.push_back({static_cast<int>(p), k});
    }
    if (d > 1) out.push_back({static_cast<int>(d), 1});
    return out;
}

// ---------------------------------------------------------------- context

PhaseContext::PhaseContext(int d, int n) : d_(d), n_(n) {
    require(d >= 2, ErrorCode::InvalidArgument, "d must be >= 2");
    require(n >= 1, ErrorCode::InvalidArgument, "n must be >= 1");
    D_ = (d % 2 == 0) ? 2 * d : d;
    factors_ = prime_factorize(d);
    tau_table_.resize(D_);
    const long long twice_d = 2LL * d;
    const long long step = (static_cast<long long>(d) * d + 1) % twice_d;
    for (int k = 0; k < D_; ++k) {
        long long e = (step * k) % twice_d;  // tau^k = exp(i pi e / d)
        tau_table_[k] = std::polar(1.0, std::numbers::pi * static_cast<double>(e) / d);
    }
    dim_ = 1;
    for (int i = 0; i < n; ++i) dim_ *= static_cast<std::size_t>(d);
    points_ = dim_ * dim_;
}

int PhaseContext::exponent_sum() const {
    int s = 0;
    for (const auto& f : factors_) s += f.k;
    return s;
}

int PhaseContext::mod_d(long long a) const {
    long long r = a % d_;
    return static_cast<int>(r < 0 ? r + d_ : r);
}

int PhaseContext::mod_D(long long a) const {
    long long r = a % D_;
    return static_cast<int>(r < 0 ? r + D_ : r);
}

int PhaseContext::omega_from_tau(long long e) const {
    int r = mod_D(e);
    if (d_ % 2 == 0) {
        require(r % 2 == 0, ErrorCode::Internal, "odd tau exponent is not a power of omega");
        return mod_d(r / 2);
    }
    return mod_d(static_cast<long long>(r) * ((d_ + 1) / 2));
}

// ---------------------------------------------------------------- IntMatrix

IntMatrix IntMatrix::identity(std::size_t n) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<long long>>& rows, std::size_t cols) {
    if (!rows.empty()) cols = rows.front().size();
    IntMatrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].size() == cols, ErrorCode::InvalidArgument, "ragged matrix rows");
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = static_cast<long>(rows[i][j]);
    }
    return m;
}

IntMatrix IntMatrix::operator*(const IntMatrix& b) const {
    require(c_ == b.r_, ErrorCode::InvalidArgument, "matrix shape mismatch");
    IntMatrix out(r_, b.c_);
    for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t k = 0; k < c_; ++k) {
            const BigInt& aik = (*this)(i, k);
            if (aik == 0) continue;
            for (std::size_t j = 0; j < b.c_; ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

IntMatrix IntMatrix::transpose() const {
    IntMatrix t(c_, r_);
    for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

BigInt IntMatrix::determinant() const {
    require(r_ == c_, ErrorCode::InvalidArgument, "determinant of non-square matrix");
    const std::size_t n = r_;
    if (n == 0) return 1;
    std::vector<BigInt> a(a_);
    auto at = [&](std::size_t i, std::size_t j) -> BigInt& { return a[i * n + j]; };
    BigInt prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (at(k, k) == 0) {
            std::size_t sw = k + 1;
            while (sw < n && at(sw, k) == 0) ++sw;
            if (sw == n) return 0;
            for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(sw, j));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) {
                BigInt num = at(i, j) * at(k, k) - at(i, k) * at(k, j);
                mpz_divexact(at(i, j).get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
            }
        prev = at(k, k);
    }
    return sign * at(n - 1, n - 1);
}

bool IntMatrix::is_diagonal() const {
    for (std::size_t i = 0; i < r_; ++i)
        for (std::size_t j = 0; j < c_; ++j)
            if (i != j && (*this)(i, j) != 0) return false;
    return true;
}

bool IntMatrix::operator==(const IntMatrix& b) const { return r_ == b.r_ && c_ == b.c_ && a_ == b.a_; }

std::string IntMatrix::str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < r_; ++i) {
        os << (i ? ",[" : "[");
        for (std::size_t j = 0; j < c_; ++j) os << (j ? "," : "") << (*this)(i, j).get_str();
        os << "]";
    }
    os << "]";
    return os.str();
}

std::vector<BigInt> SmithResult::diagonal() const {
    std::vector<BigInt> out;
    for (std::size_t i = 0; i < std::min(S.rows(), S.cols()); ++i) out.push_back(S(i, i));
    return out;
}

// ---------------------------------------------------------------- Smith form

namespace {

struct OverflowSignal {};

// Signed 128-bit integer that refuses to wrap.
struct C128 {
    __int128 v = 0;
    C128() = default;
    C128(long long x) : v(x) {}
    static C128 raw(__int128 x) {
        C128 c;
        c.v = x;
        return c;
    }
};
inline C128 operator+(C128 a, C128 b) {
    __int128 r;
    if (__builtin_add_overflow(a.v, b.v, &r)) throw OverflowSignal{};
    return C128::raw(r);
}
inline C128 operator-(C128 a, C128 b) {
    __int128 r;
    if (__builtin_sub_overflow(a.v, b.v, &r)) throw OverflowSignal{};
    return C128::raw(r);
}
inline C128 operator*(C128 a, C128 b) {
    __int128 r;
    if (__builtin_mul_overflow(a.v, b.v, &r)) throw OverflowSignal{};
    return C128::raw(r);
}
inline C128 operator/(C128 a, C128 b) { return C128::raw(a.v / b.v); }
inline C128 operator%(C128 a, C128 b) { return C128::raw(a.v % b.v); }
inline C128 operator-(C128 a) { return C128(0) - a; }
inline bool operator<(C128 a, C128 b) { return a.v < b.v; }
inline bool operator==(C128 a, long long b) { return a.v == b; }
inline bool operator!=(C128 a, long long b) { return a.v != b; }

inline bool is_zero(const C128& a) { return a.v == 0; }
inline bool is_zero(const BigInt& a) { return sgn(a) == 0; }
inline bool is_neg(const C128& a) { return a.v < 0; }
inline bool is_neg(const BigInt& a) { return sgn(a) < 0; }
inline C128 abs_of(const C128& a) { return is_neg(a) ? -a : a; }
inline BigInt abs_of(const BigInt& a) { return abs(a); }

BigInt to_big(const C128& a) {
    unsigned __int128 m = a.v < 0 ? -static_cast<unsigned __int128>(a.v) : static_cast<unsigned __int128>(a.v);
    std::uint64_t limbs[2] = {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(m >> 64)};
    BigInt out;
    mpz_import(out.get_mpz_t(), 2, -1, sizeof(std::uint64_t), 0, 0, limbs);
    if (a.v < 0) out = -out;
    return out;
}
inline BigInt to_big(const BigInt& a) { return a; }

template <class T>
struct Mat {
    std::size_t r = 0, c = 0;
    std::vector<T> a;
    Mat(std::size_t rows, std::size_t cols) : r(rows), c(cols), a(rows * cols, T(0)) {}
    T& operator()(std::size_t i, std::size_t j) { return a[i * c + j]; }
    static Mat eye(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }
    void swap_rows(std::size_t i, std::size_t j) {
        if (i == j) return;
        for (std::size_t k = 0; k < c; ++k) std::swap((*this)(i, k), (*this)(j, k));
    }
    void swap_cols(std::size_t i, std::size_t j) {
        if (i == j) return;
        for (std::size_t k = 0; k < r; ++k) std::swap((*this)(k, i), (*this)(k, j));
    }
    void row_axpy(std::size_t dst, std::size_t src, const T& q) {  // row dst += q row src
        for (std::size_t k = 0; k < c; ++k)
            if (!is_zero((*this)(src, k))) (*this)(dst, k) = (*this)(dst, k) + q * (*this)(src, k);
    }
    void col_axpy(std::size_t dst, std::size_t src, const T& q) {  // col dst += q col src
        for (std::size_t k = 0; k < r; ++k)
            if (!is_zero((*this)(k, src))) (*this)(k, dst) = (*this)(k, dst) + q * (*this)(k, src);
    }
    void negate_row(std::size_t i) {
        for (std::size_t k = 0; k < c; ++k) (*this)(i, k) = -(*this)(i, k);
    }
    IntMatrix to_int() const {
        IntMatrix out(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) out(i, j) = to_big(a[i * c + j]);
        return out;
    }
};

template <class T>
void smith_core(Mat<T>& A, Mat<T>& U, Mat<T>& V, Mat<T>& Vi) {
    const std::size_t m = A.r, n = A.c;
    for (std::size_t t = 0; t < std::min(m, n); ++t) {
        for (;;) {
            bool found = false;
            std::size_t pi = 0, pj = 0;
            T best(0);
            for (std::size_t i = t; i < m; ++i)
                for (std::size_t j = t; j < n; ++j) {
                    if (is_zero(A(i, j))) continue;
                    T av = abs_of(A(i, j));
                    if (!found || av < best) {
                        found = true;
                        best = av;
                        pi = i;
                        pj = j;
                    }
                }
            if (!found) return;  // remaining block is zero
            A.swap_rows(pi, t);
            U.swap_rows(pi, t);
            A.swap_cols(pj, t);
            V.swap_cols(pj, t);
            Vi.swap_rows(pj, t);

            const T p = A(t, t);
            bool clean = true;
            for (std::size_t i = t + 1; i < m; ++i) {
                if (is_zero(A(i, t))) continue;
                T q = A(i, t) / p;
                if (!is_zero(q)) {
                    A.row_axpy(i, t, -q);
                    U.row_axpy(i, t, -q);
                }
                if (!is_zero(A(i, t))) clean = false;
            }
            for (std::size_t j = t + 1; j < n; ++j) {
                if (is_zero(A(t, j))) continue;
                T q = A(t, j) / p;
                if (!is_zero(q)) {
                    A.col_axpy(j, t, -q);
                    V.col_axpy(j, t, -q);
                    Vi.row_axpy(t, j, q);
                }
                if (!is_zero(A(t, j))) clean = false;
            }
            if (!clean) continue;

            bool bumped = false;
            for (std::size_t i = t + 1; i < m && !bumped; ++i)
                for (std::size_t j = t + 1; j < n; ++j)
                    if (!is_zero(A(i, j) % p)) {
                        A.row_axpy(t, i, T(1));
                        U.row_axpy(t, i, T(1));
                        bumped = true;
                        break;
                    }
            if (!bumped) break;
        }
        if (is_neg(A(t, t))) {
            A.negate_row(t);
            U.negate_row(t);
        }
    }
}

template <class T>
SmithResult run_smith(const IntMatrix& in, T (*conv)(const BigInt&)) {
    Mat<T> A(in.rows(), in.cols());
    for (std::size_t i = 0; i < in.rows(); ++i)
        for (std::size_t j = 0; j < in.cols(); ++j) A(i, j) = conv(in(i, j));
    Mat<T> U = Mat<T>::eye(in.rows());
    Mat<T> V = Mat<T>::eye(in.cols());
    Mat<T> Vi = Mat<T>::eye(in.cols());
    smith_core(A, U, V, Vi);
    SmithResult res;
    res.U = U.to_int();
    res.S = A.to_int();
    res.V = V.to_int();
    res.Vinv = Vi.to_int();
    return res;
}

C128 big_to_c128(const BigInt& x) {
    if (!x.fits_slong_p()) throw OverflowSignal{};
    return C128(x.get_si());
}
BigInt big_identity(const BigInt& x) { return x; }

}  // namespace

SmithResult smith_normal_form_bigint(const IntMatrix& A) {
    SmithResult r = run_smith<BigInt>(A, &big_identity);
    r.promoted = true;
    return r;
}

SmithResult smith_normal_form(const IntMatrix& A) {
    try {
        return run_smith<C128>(A, &big_to_c128);
    } catch (const OverflowSignal&) {
        return smith_normal_form_bigint(A);
    }
}

// ---------------------------------------------------------------- vectors

ZVec vec_add(const ZVec& a, const ZVec& b, int d) {
    ZVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i]) % d;
    return out;
}

ZVec vec_sub(const ZVec& a, const ZVec& b, int d) {
    ZVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = ((a[i] - b[i]) % d + d) % d;
    return out;
}

ZVec vec_scale(const ZVec& a, long long c, int d) {
    long long cm = ((c % d) + d) % d;
    ZVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<int>((cm * a[i]) % d);
    return out;
}

std::size_t point_index(const ZVec& x, int d) {
    std::size_t idx = 0;
    for (std::size_t i = x.size(); i-- > 0;) idx = idx * d + static_cast<std::size_t>(x[i]);
    return idx;
}

ZVec point_from_index(std::size_t idx, int d, int len) {
    ZVec x(len);
    for (int i = 0; i < len; ++i) {
        x[i] = static_cast<int>(idx % d);
        idx /= d;
    }
    return x;
}

long long symplectic_product(const std::vector<long long>& x, const std::vector<long long>& y, long long modulus) {
    require(x.size() == y.size() && x.size() % 2 == 0, ErrorCode::InvalidArgument, "symplectic product needs equal even lengths");
    const std::size_t n = x.size() / 2;
    long long acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[n + i] - x[n + i] * y[i];
    long long r = acc % modulus;
    return r < 0 ? r + modulus : r;
}

long long symplectic_product(const ZVec& x, const ZVec& y, long long modulus) {
    std::vector<long long> a(x.begin(), x.end()), b(y.begin(), y.end());
    return symplectic_product(a, b, modulus);
}

ZVec involution(const ZVec& x, int d) {
    ZVec out(x);
    const std::size_t n = x.size() / 2;
    for (std::size_t i = 0; i < n; ++i) out[i] = (d - x[i]) % d;
    return out;
}

// ---------------------------------------------------------------- submodules

namespace {

long long mod_pos(long long a, long long d) {
    long long r = a % d;
    return r < 0 ? r + d : r;
}

// Extended gcd for non-negative inputs, not both zero.
void xgcd(long long a, long long b, long long& g, long long& s, long long& t) {
    long long r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
    while (r1 != 0) {
        long long q = r0 / r1;
        long long tmp = r0 - q * r1;
        r0 = r1;
        r1 = tmp;
        tmp = s0 - q * s1;
        s0 = s1;
        s1 = tmp;
        tmp = t0 - q * t1;
        t0 = t1;
        t1 = tmp;
    }
    g = r0;
    s = s0;
    t = t0;
}

}  // namespace

BigInt span_size_by_smith(int d, int m, const std::vector<ZVec>& generators) {
    IntMatrix A(generators.size() + m, m);
    for (std::size_t i = 0; i < generators.size(); ++i)
        for (int j = 0; j < m; ++j) A(i, j) = generators[i][j];
    for (int j = 0; j < m; ++j) A(generators.size() + j, j) = d;
    SmithResult sr = smith_normal_form(A);
    BigInt index = 1;
    for (const BigInt& s : sr.diagonal()) index *= s;
    BigInt total;
    mpz_ui_pow_ui(total.get_mpz_t(), static_cast<unsigned long>(d), static_cast<unsigned long>(m));
    return total / index;
}

Submodule Submodule::canonicalize(int d, int m, const std::vector<ZVec>& generators) {
    require(d >= 2 && m >= 0, ErrorCode::InvalidArgument, "bad submodule ambient");
    using LV = std::vector<long long>;
    std::vector<LV> pool;
    for (const ZVec& g : generators) {
        require(static_cast<int>(g.size()) == m, ErrorCode::InvalidArgument, "generator length mismatch");
        LV v(m);
        bool nz = false;
        for (int j = 0; j < m; ++j) {
            v[j] = mod_pos(g[j], d);
            nz |= v[j] != 0;
        }
        if (nz) pool.push_back(std::move(v));
    }

    Submodule out;
    out.d_ = d;
    out.m_ = m;
    std::vector<LV> rows;
    for (int col = 0; col < m; ++col) {
        LV r(m, 0);
        r[col] = d;
        std::vector<LV> next;
        next.reserve(pool.size() + 1);
        for (LV& p : pool) {
            if (p[col] == 0) {
                next.push_back(std::move(p));
                continue;
            }
            long long a = r[col], b = p[col], g, s, t;
            xgcd(a, b, g, s, t);
            LV rn(m), pn(m);
            bool pnz = false;
            for (int j = 0; j < m; ++j) {
                rn[j] = s * r[j] + t * p[j];
                pn[j] = mod_pos(-(b / g) * r[j] + (a / g) * p[j], d);
                if (j != col) rn[j] = mod_pos(rn[j], d);
                pnz |= pn[j] != 0;
            }
            rn[col] = g;
            if (pnz) next.push_back(std::move(pn));
            r = std::move(rn);
        }
        if (r[col] != d) {
            const long long g = r[col];
            LV extra(m);
            bool enz = false;
            for (int j = 0; j < m; ++j) {
                extra[j] = mod_pos((d / g) * r[j], d);
                enz |= extra[j] != 0;
            }
            if (enz) next.push_back(std::move(extra));
            rows.push_back(r);
            out.pivot_col_.push_back(col);
            out.pivot_val_.push_back(static_cast<int>(g));
        }
        pool = std::move(next);
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const int c = out.pivot_col_[j];
        const long long g = out.pivot_val_[j];
        for (std::size_t i = 0; i < j; ++i) {
            long long q = rows[i][c] / g;
            if (q == 0) continue;
            for (int k = 0; k < m; ++k) rows[i][k] = mod_pos(rows[i][k] - q * rows[j][k], d);
        }
    }
    out.size_ = 1;
    for (std::size_t j = 0; j < rows.size(); ++j) {
        out.rows_.emplace_back(rows[j].begin(), rows[j].end());
        out.size_ *= d / out.pivot_val_[j];
    }
    BigInt by_smith = span_size_by_smith(d, m, out.rows_);
    require(by_smith == out.size_, ErrorCode::Internal, "echelon and Smith sizes disagree");
    return out;
}

Submodule Submodule::full(int d, int m) {
    std::vector<ZVec> gens;
    for (int j = 0; j < m; ++j) {
        ZVec e(m, 0);
        e[j] = 1;
        gens.push_back(e);
    }
    return canonicalize(d, m, gens);
}

std::uint64_t Submodule::size_u64() const {
    require(size_.fits_ulong_p(), ErrorCode::Overflow, "submodule size exceeds 64 bits");
    return size_.get_ui();
}

bool Submodule::contains(const ZVec& x) const {
    require(static_cast<int>(x.size()) == m_, ErrorCode::InvalidArgument, "vector length mismatch");
    std::vector<long long> v(m_);
    for (int j = 0; j < m_; ++j) v[j] = mod_pos(x[j], d_);
    std::size_t row = 0;
    for (int c = 0; c < m_; ++c) {
        if (row < rows_.size() && pivot_col_[row] == c) {
            const long long g = pivot_val_[row];
            if (v[c] % g != 0) return false;
            const long long q = v[c] / g;
            for (int k = c; k < m_; ++k) v[k] = mod_pos(v[k] - q * rows_[row][k], d_);
            ++row;
        } else if (v[c] != 0) {
            return false;
        }
    }
    return true;
}

bool Submodule::contains(const Submodule& other) const {
    for (const ZVec& r : other.rows_)
        if (!contains(r)) return false;
    return true;
}

std::vector<ZVec> Submodule::elements() const {
    std::vector<ZVec> out;
    out.reserve(size_u64());
    ZVec cur(m_, 0);
    std::vector<int> orders;
    for (int g : pivot_val_) orders.push_back(d_ / g);
    std::vector<int> coef(rows_.size(), 0);
    for (;;) {
        ZVec x(m_, 0);
        for (std::size_t j = 0; j < rows_.size(); ++j)
            if (coef[j])
                for (int k = 0; k < m_; ++k) x[k] = static_cast<int>((x[k] + static_cast<long long>(coef[j]) * rows_[j][k]) % d_);
        out.push_back(std::move(x));
        std::size_t j = 0;
        while (j < coef.size()) {
            if (++coef[j] < orders[j]) break;
            coef[j] = 0;
            ++j;
        }
        if (j == coef.size()) break;
    }
    return out;
}

std::vector<std::pair<ZVec, int>> Submodule::independent_generators() const {
    IntMatrix A(rows_.size() + m_, m_);
    for (std::size_t i = 0; i < rows_.size(); ++i)
        for (int j = 0; j < m_; ++j) A(i, j) = rows_[i][j];
    for (int j = 0; j < m_; ++j) A(rows_.size() + j, j) = d_;
    SmithResult sr = smith_normal_form(A);
    std::vector<std::pair<ZVec, int>> out;
    for (int i = 0; i < m_; ++i) {
        BigInt s = sr.S(i, i);
        BigInt g;
        mpz_gcd_ui(g.get_mpz_t(), s.get_mpz_t(), static_cast<unsigned long>(d_));
        const int order = d_ / static_cast<int>(g.get_si());
        if (order == 1) continue;
        ZVec x(m_);
        for (int j = 0; j < m_; ++j) {
            BigInt v = s * sr.Vinv(i, j);
            BigInt r;
            mpz_fdiv_r_ui(r.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(d_));
            x[j] = static_cast<int>(r.get_si());
        }
        out.emplace_back(std::move(x), order);
    }
    return out;
}

std::string Submodule::fingerprint() const {
    std::ostringstream os;
    os << d_ << ":" << m_ << ":";
    for (const ZVec& r : rows_) {
        os << "[";
        for (int v : r) os << v << ",";
        os << "]";
    }
    return os.str();
}

Submodule kernel_mod_d(int d, const std::vector<ZVec>& rows, int cols) {
    if (rows.empty()) return Submodule::full(d, cols);
    IntMatrix A(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(static_cast<int>(rows[i].size()) == cols, ErrorCode::InvalidArgument, "kernel row length mismatch");
        for (int j = 0; j < cols; ++j) A(i, j) = static_cast<long>(mod_pos(rows[i][j], d));
    }
    SmithResult sr = smith_normal_form(A);
    std::vector<ZVec> gens;
    const std::size_t diag = std::min<std::size_t>(rows.size(), cols);
    for (int i = 0; i < cols; ++i) {
        BigInt s = (static_cast<std::size_t>(i) < diag) ? sr.S(i, i) : BigInt(0);
        BigInt g;
        mpz_gcd_ui(g.get_mpz_t(), s.get_mpz_t(), static_cast<unsigned long>(d));
        const long mult = d / g.get_si();
        ZVec v(cols);
        for (int j = 0; j < cols; ++j) {
            BigInt e = sr.V(j, i) * mult;
            BigInt r;
            mpz_fdiv_r_ui(r.get_mpz_t(), e.get_mpz_t(), static_cast<unsigned long>(d));
            v[j] = static_cast<int>(r.get_si());
        }
        gens.push_back(std::move(v));
    }
    return Submodule::canonicalize(d, cols, gens);
}

Submodule orthogonal_complement(const Submodule& sub) {
    return kernel_mod_d(sub.modulus(), sub.basis(), sub.ambient_rank());
}

Submodule symplectic_complement(const Submodule& sub) {
    const int m = sub.ambient_rank();
    require(m % 2 == 0, ErrorCode::InvalidArgument, "symplectic complement needs even ambient rank");
    const int n = m / 2, d = sub.modulus();
    std::vector<ZVec> twisted;
    for (const ZVec& b : sub.basis()) {
        ZVec r(m);
        for (int i = 0; i < n; ++i) {
            r[i] = (d - b[n + i]) % d;
            r[n + i] = b[i];
        }
        twisted.push_back(std::move(r));
    }
    return kernel_mod_d(d, twisted, m);
}

Submodule submodule_sum(const Submodule& a, const Submodule& b) {
    require(a.modulus() == b.modulus() && a.ambient_rank() == b.ambient_rank(), ErrorCode::ContextMismatch,
            "submodule ambient mismatch");
    std::vector<ZVec> gens = a.basis();
    gens.insert(gens.end(), b.basis().begin(), b.basis().end());
    return Submodule::canonicalize(a.modulus(), a.ambient_rank(), gens);
}

Submodule submodule_intersection(const Submodule& a, const Submodule& b) {
    return orthogonal_complement(submodule_sum(orthogonal_complement(a), orthogonal_complement(b)));
}

bool is_isotropic(const Submodule& sub) {
    const auto& B = sub.basis();
    for (std::size_t i = 0; i < B.size(); ++i)
        for (std::size_t j = i + 1; j < B.size(); ++j)
            if (symplectic_product(B[i], B[j], sub.modulus()) != 0) return false;
    return true;
}

// ---------------------------------------------------------------- four squares and R

FourSquare four_square(long long m) {
    require(m >= 0, ErrorCode::InvalidArgument, "four_square needs m >= 0");
    auto isqrt = [](long long v) {
        long long r = static_cast<long long>(std::sqrt(static_cast<double>(v)));
        while (r * r > v) --r;
        while ((r + 1) * (r + 1) <= v) ++r;
        return r;
    };
    const long long top = isqrt(m);
    for (long long a1 = 0; a1 <= top; ++a1)
        for (long long a2 = 0; a2 <= a1; ++a2)
            for (long long a3 = 0; a3 <= a2; ++a3) {
                long long rem = m - a1 * a1 - a2 * a2 - a3 * a3;
                if (rem < 0) break;
                long long a4 = isqrt(rem);
                if (a4 * a4 == rem && a4 <= a3) return FourSquare{m, {a1, a2, a3, a4}};
            }
    fail(ErrorCode::Internal, "no four-square decomposition found");
}

std::vector<std::vector<int>> RMatrix::mod_d() const {
    std::vector<std::vector<int>> out(k, std::vector<int>(k));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) out[i][j] = static_cast<int>(mod_pos(entries[i][j], d));
    return out;
}

std::vector<std::vector<int>> RMatrix::inverse_mod_d() const {
    std::vector<std::vector<int>> out(k, std::vector<int>(k));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) out[i][j] = static_cast<int>(mod_pos(-entries[j][i], d));
    return out;
}

bool RMatrix::is_identity_mod_d() const {
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (mod_pos(entries[i][j], d) != (i == j ? 1 : 0)) return false;
    return true;
}

RMatrix build_R(const PhaseContext& ctx, int k, bool qubit_template) {
    const int d = ctx.d();
    RMatrix R;
    R.k = k;
    R.d = d;
    require(k == 1 || k == 2 || k == 4, ErrorCode::UnsupportedReduction, "copy count must be 1, 2 or 4");
    auto identity = [&]() {
        R.entries.assign(k, std::vector<long long>(k, 0));
        for (int i = 0; i < k; ++i) R.entries[i][i] = 1;
        R.target = 1;
        return R;
    };
    if (d == 2 && !(qubit_template && k == 4)) return identity();
    const bool prime = ctx.factors().size() == 1 && ctx.factors()[0].k == 1;
    if (k == 4) {
        FourSquare fs = four_square(ctx.D() - 1);
        const long long a1 = fs.a[0], a2 = fs.a[1], a3 = fs.a[2], a4 = fs.a[3];
        R.entries = {{a1, a2, a3, a4}, {a2, -a1, a4, -a3}, {a3, -a4, -a1, a2}, {a4, a3, -a2, -a1}};
        R.target = ctx.D() - 1;
        return R;
    }
    require(prime, ErrorCode::UnsupportedReduction, "reduced copy counts need prime d");
    if (k == 2) {
        for (long long a1 = 0; a1 < d; ++a1)
            for (long long a2 = 0; a2 < d; ++a2)
                if (mod_pos(a1 * a1 + a2 * a2 + 1, d) == 0) {
                    R.entries = {{a1, a2}, {a2, -a1}};
                    R.target = a1 * a1 + a2 * a2;
                    return R;
                }
        fail(ErrorCode::UnsupportedReduction, "no two-square root of -1 mod d");
    }
    require(d % 4 == 1, ErrorCode::UnsupportedReduction, "single-copy reduction needs d = 1 mod 4");
    for (long long a = 1; a < d; ++a)
        if (mod_pos(a * a + 1, d) == 0) {
            R.entries = {{a}};
            R.target = a * a;
            return R;
        }
    fail(ErrorCode::UnsupportedReduction, "-1 is not a square mod d");
}

BigInt maximal_submodule_count(int p, int m) {
    require(p >= 2 && m >= 1, ErrorCode::InvalidArgument, "maximal_submodule_count needs p >= 2, m >= 1");
    BigInt pm;
    mpz_ui_pow_ui(pm.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(m));
    return (pm - 1) / (p - 1);
}

}  // namespace qbell
