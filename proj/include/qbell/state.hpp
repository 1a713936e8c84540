#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qbell {

using cplx = std::complex<double>;

// Largest amplitude count a state may hold; QBELL_CAP_AMPLITUDES overrides.
std::size_t amplitude_cap();

// Amplitudes over registers of qudits. Qudit j has weight d^j in the index, so
// register 0 occupies the least significant digits.
class DenseState {
public:
    DenseState() = default;
    DenseState(int d, std::vector<int> registers, std::vector<cplx> amplitudes);

    static DenseState basis(int d, std::vector<int> registers, std::size_t index);
    static DenseState zero(int d, int n) { return basis(d, {n}, 0); }

    int d() const { return d_; }
    const std::vector<int>& registers() const { return regs_; }
    int num_registers() const { return static_cast<int>(regs_.size()); }
    int num_qudits() const { return qudits_; }
    int register_offset(int r) const;
    std::size_t size() const { return amp_.size(); }

    const std::vector<cplx>& amplitudes() const { return amp_; }
    std::vector<cplx>& amplitudes() { return amp_; }
    const cplx& operator[](std::size_t i) const { return amp_[i]; }
    cplx& operator[](std::size_t i) { return amp_[i]; }

    double norm() const;
    void normalise();
    void require_normalised(double tol = 1e-10) const;

    DenseState conj() const;
    DenseState tensor(const DenseState& other) const;  // this in low digits
    DenseState tensor_power(int k) const;

private:
    int d_ = 0;
    int qudits_ = 0;
    std::vector<int> regs_;
    std::vector<cplx> amp_;
};

}  // namespace qbell
