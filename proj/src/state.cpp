#include "qbell/state.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "qbell/errors.hpp"

namespace qbell {

std::size_t amplitude_cap() {
    if (const char* env = std::getenv("QBELL_CAP_AMPLITUDES")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return 20000000;
}

namespace {

std::size_t checked_dim(int d, int qudits) {
    std::size_t dim = 1;
    const std::size_t cap = amplitude_cap();
    for (int i = 0; i < qudits; ++i) {
        dim *= static_cast<std::size_t>(d);
        require(dim <= cap, ErrorCode::CapExceeded,
                "state of " + std::to_string(qudits) + " qudits of dimension " + std::to_string(d) + " exceeds the amplitude cap");
    }
    return dim;
}

}  // namespace

DenseState::DenseState(int d, std::vector<int> registers, std::vector<cplx> amplitudes)
    : d_(d), regs_(std::move(registers)), amp_(std::move(amplitudes)) {
    require(d >= 2, ErrorCode::InvalidArgument, "qudit dimension must be >= 2");
    qudits_ = 0;
    for (int w : regs_) {
        require(w >= 1, ErrorCode::InvalidArgument, "register width must be >= 1");
        qudits_ += w;
    }
    require(amp_.size() == checked_dim(d, qudits_), ErrorCode::InvalidArgument, "amplitude count does not match registers");
}

DenseState DenseState::basis(int d, std::vector<int> registers, std::size_t index) {
    int q = 0;
    for (int w : registers) q += w;
    std::vector<cplx> amp(checked_dim(d, q), 0.0);
    require(index < amp.size(), ErrorCode::InvalidArgument, "basis index out of range");
    amp[index] = 1.0;
    return DenseState(d, std::move(registers), std::move(amp));
}

int DenseState::register_offset(int r) const {
    require(r >= 0 && r < num_registers(), ErrorCode::InvalidArgument, "register index out of range");
    int off = 0;
    for (int i = 0; i < r; ++i) off += regs_[i];
    return off;
}

double DenseState::norm() const {
    double s = 0.0;
    for (const cplx& a : amp_) s += std::norm(a);
    return std::sqrt(s);
}

void DenseState::normalise() {
    const double nrm = norm();
    require(nrm > 0.0, ErrorCode::NotNormalised, "cannot normalise the zero vector");
    for (cplx& a : amp_) a /= nrm;
}

void DenseState::require_normalised(double tol) const {
    require(std::abs(norm() - 1.0) <= tol, ErrorCode::NotNormalised, "state is not unit norm");
}

DenseState DenseState::conj() const {
    DenseState out(*this);
    for (cplx& a : out.amp_) a = std::conj(a);
    return out;
}

DenseState DenseState::tensor(const DenseState& other) const {
    require(d_ == other.d_, ErrorCode::ContextMismatch, "tensor of states with different d");
    std::vector<int> regs = regs_;
    regs.insert(regs.end(), other.regs_.begin(), other.regs_.end());
    std::vector<cplx> amp(checked_dim(d_, qudits_ + other.qudits_));
    const std::size_t lo = amp_.size();
    for (std::size_t j = 0; j < other.amp_.size(); ++j)
        for (std::size_t i = 0; i < lo; ++i) amp[i + lo * j] = amp_[i] * other.amp_[j];
    return DenseState(d_, std::move(regs), std::move(amp));
}

DenseState DenseState::tensor_power(int k) const {
    require(k >= 1, ErrorCode::InvalidArgument, "tensor power must be >= 1");
    DenseState out(*this);
    for (int i = 1; i < k; ++i) out = out.tensor(*this);
    return out;
}

}  // namespace qbell
