#include "qbell/qstate.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "qbell/errors.hpp"

namespace qbell {

namespace {

std::size_t ipow(int d, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(d);
    return r;
}

int log_base(int d, std::size_t dim) {
    int m = 0;
    std::size_t r = 1;
    while (r < dim) {
        r *= static_cast<std::size_t>(d);
        ++m;
    }
    require(r == dim, ErrorCode::InvalidArgument, "operator dimension is not a power of d");
    return m;
}

// Per basis value q of one register: the image index and the phase of W_x|q>.
struct WeylAction {
    std::vector<std::size_t> target;
    std::vector<cplx> phase;
};

WeylAction weyl_action(const WeylLabel& x) {
    const PhaseContext& ctx = x.ctx();
    const int n = ctx.n(), d = ctx.d();
    const std::size_t dim = ctx.dim();
    const ZVec v = x.v(), w = x.w();
    long long vw = 0;
    for (int i = 0; i < n; ++i) vw += static_cast<long long>(v[i]) * w[i];
    const long long base = vw + x.tau_exponent();
    WeylAction act;
    act.target.resize(dim);
    act.phase.resize(dim);
    for (std::size_t q = 0; q < dim; ++q) {
        ZVec digits = point_from_index(q, d, n);
        long long qv = 0;
        for (int i = 0; i < n; ++i) qv += static_cast<long long>(digits[i]) * v[i];
        act.phase[q] = ctx.tau_pow(base + 2 * static_cast<long long>(ctx.mod_d(qv)));
        act.target[q] = point_index(vec_add(digits, w, d), d);
    }
    return act;
}

struct RegisterView {
    std::size_t stride, block;
};

RegisterView view_of(const DenseState& s, int reg) {
    return {ipow(s.d(), s.register_offset(reg)), ipow(s.d(), s.registers()[reg])};
}

}  // namespace

DenseState apply_weyl(const DenseState& s, int reg, const WeylLabel& x) {
    require(s.d() == x.ctx().d(), ErrorCode::ContextMismatch, "Weyl label and state disagree on d");
    require(reg >= 0 && reg < s.num_registers() && s.registers()[reg] == x.ctx().n(), ErrorCode::InvalidArgument,
            "register width does not match the Weyl label");
    const WeylAction act = weyl_action(x);
    const RegisterView rv = view_of(s, reg);
    DenseState out(s.d(), s.registers(), std::vector<cplx>(s.size(), 0.0));
    for (std::size_t idx = 0; idx < s.size(); ++idx) {
        const std::size_t lo = idx % rv.stride;
        const std::size_t q = (idx / rv.stride) % rv.block;
        const std::size_t hi = idx / (rv.stride * rv.block);
        out[lo + rv.stride * (act.target[q] + rv.block * hi)] = act.phase[q] * s[idx];
    }
    return out;
}

Matrix dense_weyl(const WeylLabel& x) {
    const std::size_t dim = x.ctx().dim();
    require(dim <= kDenseOperatorCap, ErrorCode::CapExceeded, "Weyl operator too large to materialise");
    const WeylAction act = weyl_action(x);
    Matrix M = Matrix::Zero(dim, dim);
    for (std::size_t q = 0; q < dim; ++q) M(act.target[q], q) = act.phase[q];
    return M;
}

cplx expectation_weyl(const DenseState& s, const WeylLabel& x) {
    require(s.d() == x.ctx().d() && s.num_qudits() == x.ctx().n(), ErrorCode::ContextMismatch, "state does not match label");
    const WeylAction act = weyl_action(x);
    cplx acc = 0.0;
    for (std::size_t q = 0; q < s.size(); ++q) acc += std::conj(s[act.target[q]]) * act.phase[q] * s[q];
    return acc;
}

cplx inner(const DenseState& a, const DenseState& b) {
    require(a.d() == b.d() && a.size() == b.size(), ErrorCode::InvalidArgument, "inner product of mismatched states");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double fidelity(const DenseState& a, const DenseState& b) { return std::norm(inner(a, b)); }

// ---------------------------------------------------------------- B_R

DenseState apply_BR(const DenseState& s, const std::vector<std::vector<int>>& R, const std::vector<int>& regs) {
    const int k = static_cast<int>(regs.size());
    const int d = s.d();
    require(k >= 1 && static_cast<int>(R.size()) == k, ErrorCode::InvalidArgument, "R size does not match register count");
    {
        IntMatrix M(k, k);
        for (int i = 0; i < k; ++i) {
            require(static_cast<int>(R[i].size()) == k, ErrorCode::InvalidArgument, "R must be square");
            for (int j = 0; j < k; ++j) M(i, j) = R[i][j];
        }
        BigInt det = M.determinant();
        BigInt g;
        mpz_gcd_ui(g.get_mpz_t(), det.get_mpz_t(), static_cast<unsigned long>(d));
        require(g == 1, ErrorCode::InvalidArgument, "R is not invertible mod d");
    }
    const int n = s.registers()[regs[0]];
    std::vector<RegisterView> views;
    for (int r : regs) {
        require(s.registers()[r] == n, ErrorCode::InvalidArgument, "B_R registers must have equal width");
        views.push_back(view_of(s, r));
    }
    std::vector<cplx> out(s.size(), 0.0);
    std::vector<ZVec> cols(k), image(k, ZVec(n));
    for (std::size_t idx = 0; idx < s.size(); ++idx) {
        std::size_t base = idx;
        for (int j = 0; j < k; ++j) {
            const std::size_t val = (idx / views[j].stride) % views[j].block;
            cols[j] = point_from_index(val, d, n);
            base -= val * views[j].stride;
        }
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < n; ++i) {
                long long acc = 0;
                for (int l = 0; l < k; ++l) acc += static_cast<long long>(cols[l][i]) * R[l][j];
                image[j][i] = static_cast<int>(((acc % d) + d) % d);
            }
        std::size_t dst = base;
        for (int j = 0; j < k; ++j) dst += point_index(image[j], d) * views[j].stride;
        out[dst] = s[idx];
    }
    return DenseState(d, s.registers(), std::move(out));
}

DenseState apply_BR(const DenseState& s, const RMatrix& R) {
    std::vector<int> regs(R.k);
    std::iota(regs.begin(), regs.end(), 0);
    return apply_BR(s, R.mod_d(), regs);
}

DenseState apply_BR_inverse(const DenseState& s, const RMatrix& R) {
    std::vector<int> regs(R.k);
    std::iota(regs.begin(), regs.end(), 0);
    return apply_BR(s, R.inverse_mod_d(), regs);
}

Matrix dense_BR(const RMatrix& R, int n) {
    const std::size_t dim = ipow(R.d, R.k * n);
    require(dim <= kDenseOperatorCap, ErrorCode::CapExceeded, "B_R too large to materialise");
    Matrix M = Matrix::Zero(dim, dim);
    std::vector<int> regs(R.k, n);
    for (std::size_t c = 0; c < dim; ++c) {
        DenseState e = apply_BR(DenseState::basis(R.d, regs, c), R);
        for (std::size_t r = 0; r < dim; ++r) M(r, c) = e[r];
    }
    return M;
}

// ---------------------------------------------------------------- random

DenseState haar_random(const PhaseContext& ctx, Rng& rng) {
    std::vector<cplx> amp(ctx.dim());
    for (cplx& a : amp) {
        const double re = rng.normal();
        a = cplx(re, rng.normal());
    }
    DenseState s(ctx.d(), {ctx.n()}, std::move(amp));
    s.normalise();
    return s;
}

DenseState haar_random(const PhaseContext& ctx, std::uint64_t seed) {
    Rng rng(seed);
    return haar_random(ctx, rng);
}

Matrix haar_unitary(int dim, Rng& rng) {
    Matrix Z(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) {
            const double re = rng.normal();
            Z(i, j) = cplx(re, rng.normal()) / std::sqrt(2.0);
        }
    Eigen::HouseholderQR<Matrix> qr(Z);
    Matrix Q = qr.householderQ();
    Matrix Rm = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the column phases so the draw is Haar distributed.
    for (int j = 0; j < dim; ++j) {
        const cplx r = Rm(j, j);
        const double a = std::abs(r);
        if (a > 0) Q.col(j) *= r / a;
    }
    return Q;
}

// ---------------------------------------------------------------- gates

DenseState apply_gate(const DenseState& s, const Matrix& U, const std::vector<int>& targets) {
    const int d = s.d();
    const int m = static_cast<int>(targets.size());
    const std::size_t local = ipow(d, m);
    require(static_cast<std::size_t>(U.rows()) == local && U.cols() == U.rows(), ErrorCode::InvalidArgument,
            "gate size does not match target count");
    std::vector<std::size_t> stride(m);
    for (int j = 0; j < m; ++j) {
        require(targets[j] >= 0 && targets[j] < s.num_qudits(), ErrorCode::InvalidArgument, "gate target out of range");
        for (int l = 0; l < j; ++l) require(targets[l] != targets[j], ErrorCode::InvalidArgument, "repeated gate target");
        stride[j] = ipow(d, targets[j]);
    }
    std::vector<std::size_t> offset(local, 0);
    for (std::size_t a = 0; a < local; ++a) {
        std::size_t rem = a;
        for (int j = 0; j < m; ++j) {
            offset[a] += (rem % d) * stride[j];
            rem /= d;
        }
    }
    std::vector<cplx> out(s.size(), 0.0);
    Eigen::VectorXcd in(local), res(local);
    for (std::size_t idx = 0; idx < s.size(); ++idx) {
        bool base = true;
        for (int j = 0; j < m && base; ++j) base = (idx / stride[j]) % d == 0;
        if (!base) continue;
        for (std::size_t a = 0; a < local; ++a) in(a) = s[idx + offset[a]];
        res.noalias() = U * in;
        for (std::size_t a = 0; a < local; ++a) out[idx + offset[a]] = res(a);
    }
    return DenseState(d, s.registers(), std::move(out));
}

Matrix fourier_gate(int d) {
    PhaseContext ctx(d, 1);
    Matrix F(d, d);
    for (int r = 0; r < d; ++r)
        for (int q = 0; q < d; ++q) F(r, q) = ctx.omega_pow(static_cast<long long>(q) * r) / std::sqrt(static_cast<double>(d));
    return F;
}

Matrix phase_gate(int d) {
    PhaseContext ctx(d, 1);
    Matrix S = Matrix::Zero(d, d);
    for (int q = 0; q < d; ++q) S(q, q) = ctx.tau_pow(static_cast<long long>(q) * (q + d));
    return S;
}

Matrix multiplier_gate(int d, int a) {
    require(std::gcd(((a % d) + d) % d, d) == 1, ErrorCode::InvalidArgument, "multiplier must be a unit mod d");
    Matrix M = Matrix::Zero(d, d);
    for (int q = 0; q < d; ++q) M(((static_cast<long long>(a) * q) % d + d) % d, q) = 1.0;
    return M;
}

Matrix sum_gate(int d) {
    Matrix M = Matrix::Zero(d * d, d * d);
    for (int q = 0; q < d; ++q)
        for (int r = 0; r < d; ++r) M(q + d * ((q + r) % d), q + d * r) = 1.0;
    return M;
}

Matrix weyl_gate(int d, int v, int w) {
    PhaseContext ctx(d, 1);
    return dense_weyl(WeylLabel(ctx, {v, w}));
}

Matrix cubic_phase_gate(int d) {
    PhaseContext ctx(d, 1);
    Matrix M = Matrix::Zero(d, d);
    for (int q = 0; q < d; ++q)
        M(q, q) = std::polar(1.0, std::numbers::pi * static_cast<double>(q) * q * q / (static_cast<double>(d) * ctx.D()));
    return M;
}

bool is_unitary(const Matrix& U, double tol) {
    if (U.rows() != U.cols()) return false;
    return (U.adjoint() * U - Matrix::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool is_clifford_gate(int d, const Matrix& U, double tol) {
    require(is_unitary(U, tol), ErrorCode::InvalidArgument, "gate is not unitary");
    const int m = log_base(d, static_cast<std::size_t>(U.rows()));
    PhaseContext ctx(d, m);
    const std::size_t dim = ctx.dim();
    for (int i = 0; i < m; ++i)
        for (int kind = 0; kind < 2; ++kind) {
            ZVec g(2 * m, 0);
            g[kind == 0 ? m + i : i] = 1;  // X_i then Z_i
            const Matrix C = U * dense_weyl(WeylLabel(ctx, g)) * U.adjoint();
            // A Weyl operator has one unit-modulus entry per column; column 0 fixes the shift.
            std::size_t row = 0;
            for (std::size_t r = 1; r < dim; ++r)
                if (std::abs(C(r, 0)) > std::abs(C(row, 0))) row = r;
            if (std::abs(std::abs(C(row, 0)) - 1.0) > 1e-6) return false;
            ZVec w = point_from_index(row, d, m), v(m, 0);
            for (int j = 0; j < m; ++j) {
                ZVec e(m, 0);
                e[j] = 1;
                const cplx ratio = C(point_index(vec_add(e, w, d), d), point_index(e, d)) / C(row, 0);
                const double ang = std::arg(ratio) * d / (2.0 * std::numbers::pi);
                v[j] = ((static_cast<int>(std::lround(ang)) % d) + d) % d;
            }
            ZVec y = v;
            y.insert(y.end(), w.begin(), w.end());
            const Matrix W = dense_weyl(WeylLabel(ctx, y));
            const cplx phase = C(row, 0) / W(row, 0);
            if ((C - phase * W).cwiseAbs().maxCoeff() > 1e-6) return false;
            if (std::abs(std::pow(phase, ctx.D()) - 1.0) > 1e-6) return false;
        }
    return true;
}

Matrix gate_matrix(int d, const Gate& g) {
    auto param = [&](std::size_t i) {
        require(i < g.params.size(), ErrorCode::Parse, "gate '" + g.kind + "' is missing parameter " + std::to_string(i));
        return static_cast<int>(std::lround(g.params[i]));
    };
    if (g.kind == "F") return fourier_gate(d);
    if (g.kind == "S") return phase_gate(d);
    if (g.kind == "M") return multiplier_gate(d, param(0));
    if (g.kind == "SUM") return sum_gate(d);
    if (g.kind == "W") return weyl_gate(d, ((param(0) % d) + d) % d, ((param(1) % d) + d) % d);
    if (g.kind == "CUBIC") return cubic_phase_gate(d);
    if (g.kind == "U") {
        const std::size_t dim = ipow(d, static_cast<int>(g.targets.size()));
        require(g.params.size() == 2 * dim * dim, ErrorCode::Parse, "gate 'U' needs 2 * dim^2 parameters");
        Matrix U(dim, dim);
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) U(r, c) = cplx(g.params[2 * (r * dim + c)], g.params[2 * (r * dim + c) + 1]);
        require(is_unitary(U, 1e-8), ErrorCode::Parse, "gate 'U' is not unitary");
        return U;
    }
    fail(ErrorCode::Parse, "unknown gate kind '" + g.kind + "'");
}

nlohmann::json Circuit::to_json() const {
    nlohmann::json gs = nlohmann::json::array();
    for (const Gate& g : gates) gs.push_back({{"kind", g.kind}, {"targets", g.targets}, {"params", g.params}});
    return {{"d", d}, {"n", n}, {"gates", std::move(gs)}};
}

Circuit Circuit::from_json(const nlohmann::json& j) {
    Circuit c;
    for (const char* f : {"d", "n", "gates"})
        require(j.contains(f), ErrorCode::Parse, std::string("circuit is missing field '") + f + "'");
    c.d = j.at("d").get<int>();
    c.n = j.at("n").get<int>();
    for (const auto& g : j.at("gates")) {
        Gate gate;
        gate.kind = g.at("kind").get<std::string>();
        gate.targets = g.at("targets").get<std::vector<int>>();
        gate.params = g.value("params", std::vector<double>{});
        if (!is_clifford_gate(c.d, gate_matrix(c.d, gate))) ++c.doping_count;
        c.gates.push_back(std::move(gate));
    }
    return c;
}

DenseState run_circuit(const Circuit& c, DenseState start) {
    for (const Gate& g : c.gates) start = apply_gate(start, gate_matrix(c.d, g), g.targets);
    return start;
}

DenseState run_circuit(const Circuit& c) { return run_circuit(c, DenseState::zero(c.d, c.n)); }

namespace {

Gate random_clifford_gate(const PhaseContext& ctx, Rng& rng) {
    const int d = ctx.d(), n = ctx.n();
    std::vector<int> units;
    for (int a = 2; a < d; ++a)
        if (std::gcd(a, d) == 1) units.push_back(a);
    std::vector<std::string> kinds = {"F", "S", "W"};
    if (!units.empty()) kinds.push_back("M");
    if (n >= 2) kinds.push_back("SUM");
    Gate g;
    g.kind = kinds[rng.below(static_cast<int>(kinds.size()))];
    const int q = rng.below(n);
    if (g.kind == "SUM") {
        int r = rng.below(n - 1);
        if (r >= q) ++r;
        g.targets = {q, r};
    } else {
        g.targets = {q};
    }
    if (g.kind == "M") g.params = {static_cast<double>(units[rng.below(static_cast<int>(units.size()))])};
    if (g.kind == "W") g.params = {static_cast<double>(rng.below(d)), static_cast<double>(rng.below(d))};
    require(is_clifford_gate(d, gate_matrix(d, g)), ErrorCode::Internal, "generator '" + g.kind + "' failed Clifford admission");
    return g;
}

}  // namespace

Circuit random_clifford_circuit(const PhaseContext& ctx, int gates, Rng& rng) {
    Circuit c;
    c.d = ctx.d();
    c.n = ctx.n();
    for (int i = 0; i < gates; ++i) c.gates.push_back(random_clifford_gate(ctx, rng));
    return c;
}

std::pair<Circuit, DenseState> doped_clifford(const PhaseContext& ctx, int t, Rng& rng, DopingGate kind) {
    require(t >= 0, ErrorCode::InvalidArgument, "doping count must be >= 0");
    const int d = ctx.d();
    const int block = 4 * ctx.n() + 4;
    Circuit c = random_clifford_circuit(ctx, block, rng);
    for (int i = 0; i < t; ++i) {
        Gate g;
        g.targets = {rng.below(ctx.n())};
        if (kind == DopingGate::Cubic) {
            g.kind = "CUBIC";
        } else {
            g.kind = "U";
            Matrix U;
            do {
                U = haar_unitary(d, rng);
            } while (is_clifford_gate(d, U));
            for (int r = 0; r < d; ++r)
                for (int col = 0; col < d; ++col) {
                    g.params.push_back(U(r, col).real());
                    g.params.push_back(U(r, col).imag());
                }
        }
        require(!is_clifford_gate(d, gate_matrix(d, g)), ErrorCode::Internal, "doping gate is Clifford");
        c.gates.push_back(std::move(g));
        ++c.doping_count;
        Circuit more = random_clifford_circuit(ctx, block, rng);
        c.gates.insert(c.gates.end(), more.gates.begin(), more.gates.end());
    }
    DenseState out = run_circuit(c);
    return {std::move(c), std::move(out)};
}

// ---------------------------------------------------------------- Bell

namespace {

void check_pair(const DenseState& s, int a, int b) {
    require(a != b && a >= 0 && b >= 0 && a < s.num_registers() && b < s.num_registers(), ErrorCode::InvalidArgument,
            "Bell measurement needs two distinct registers");
    require(s.registers()[a] == s.registers()[b], ErrorCode::InvalidArgument, "Bell registers must have equal width");
}

}  // namespace

BellBranch bell_project(const DenseState& s, int a, int b, const ZVec& x) {
    check_pair(s, a, b);
    const int d = s.d(), n = s.registers()[a];
    PhaseContext ctx(d, n);
    // <W_x| = <Phi+| (W_x^dagger (x) I)
    const DenseState t = apply_weyl(s, a, WeylLabel(ctx, x).adjoint());
    const RegisterView va = view_of(s, a), vb = view_of(s, b);
    std::vector<int> rest_regs;
    for (int r = 0; r < s.num_registers(); ++r)
        if (r != a && r != b) rest_regs.push_back(s.registers()[r]);
    std::size_t rest_size = 1;
    for (int w : rest_regs) rest_size *= ipow(d, w);
    std::vector<RegisterView> rest_views;
    for (int r = 0; r < s.num_registers(); ++r)
        if (r != a && r != b) rest_views.push_back(view_of(s, r));

    std::vector<cplx> rem(rest_size, 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(ctx.dim()));
    for (std::size_t idx = 0; idx < t.size(); ++idx) {
        if ((idx / va.stride) % va.block != (idx / vb.stride) % vb.block) continue;
        std::size_t ri = 0, rs = 1;
        for (const RegisterView& rv : rest_views) {
            ri += ((idx / rv.stride) % rv.block) * rs;
            rs *= rv.block;
        }
        rem[ri] += scale * t[idx];
    }
    BellBranch br;
    for (const cplx& c : rem) br.probability += std::norm(c);
    if (!rest_regs.empty()) {
        br.has_remainder = true;
        br.remainder = DenseState(d, rest_regs, std::move(rem));
        if (br.probability > 0) br.remainder.normalise();
    }
    return br;
}

std::vector<double> bell_outcome_table(const DenseState& s, int a, int b) {
    check_pair(s, a, b);
    PhaseContext ctx(s.d(), s.registers()[a]);
    std::vector<double> out(ctx.num_points());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = bell_project(s, a, b, point_from_index(i, ctx.d(), 2 * ctx.n())).probability;
    return out;
}

std::size_t sample_index(const std::vector<double>& probs, Rng& rng) {
    double total = 0.0;
    for (double p : probs) total += std::max(p, 0.0);
    require(total > 0.0, ErrorCode::Internal, "cannot sample from an all-zero table");
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last = i;
        acc += probs[i];
        if (u < acc) return i;
    }
    return last;
}

std::pair<ZVec, BellBranch> bell_sample_pair(const DenseState& s, int a, int b, Rng& rng) {
    const std::vector<double> table = bell_outcome_table(s, a, b);
    const int n = s.registers()[a];
    ZVec x = point_from_index(sample_index(table, rng), s.d(), 2 * n);
    BellBranch br = bell_project(s, a, b, x);
    return {std::move(x), std::move(br)};
}

// ---------------------------------------------------------------- JSON

nlohmann::json state_to_json(const DenseState& s) {
    nlohmann::json amps = nlohmann::json::array();
    for (const cplx& a : s.amplitudes()) amps.push_back({a.real(), a.imag()});
    nlohmann::json j = {{"d", s.d()}, {"n", s.num_qudits()}, {"amplitudes", std::move(amps)}};
    if (s.num_registers() > 1) j["registers"] = s.registers();
    return j;
}

DenseState state_from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorCode::Parse, "state must be a JSON object");
    for (const char* f : {"d", "n", "amplitudes"})
        require(j.contains(f), ErrorCode::Parse, std::string("state is missing field '") + f + "'");
    require(j["d"].is_number_integer() && j["d"].get<int>() >= 2, ErrorCode::Parse, "field 'd' must be an integer >= 2");
    require(j["n"].is_number_integer() && j["n"].get<int>() >= 1, ErrorCode::Parse, "field 'n' must be an integer >= 1");
    require(j["amplitudes"].is_array(), ErrorCode::Parse, "field 'amplitudes' must be an array");
    const int d = j["d"].get<int>(), n = j["n"].get<int>();
    std::vector<int> regs = {n};
    if (j.contains("registers")) {
        require(j["registers"].is_array(), ErrorCode::Parse, "field 'registers' must be an array");
        regs = j["registers"].get<std::vector<int>>();
        require(std::accumulate(regs.begin(), regs.end(), 0) == n, ErrorCode::Parse, "field 'registers' must sum to n");
    }
    std::vector<cplx> amp;
    for (const auto& a : j["amplitudes"]) {
        require(a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number(), ErrorCode::Parse,
                "field 'amplitudes' entries must be [re, im] pairs");
        amp.emplace_back(a[0].get<double>(), a[1].get<double>());
    }
    require(amp.size() == ipow(d, n), ErrorCode::Parse, "field 'amplitudes' must have d^n entries");
    return DenseState(d, std::move(regs), std::move(amp));
}

}  // namespace qbell
