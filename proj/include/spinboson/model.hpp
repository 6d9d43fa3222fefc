// model.hpp — dimer and spin-boson parameter types, Hamiltonian assembly
// in the spin ⊗ oscillator product basis

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinboson {

// Physical dimer parameters. The transfer magnitude V > 0 sets the energy
// scale of the dimensionless reduction (energies measured in units of 2V).
struct DimerParams {
    double eps1{0.0};   // monomer excitation energy 1
    double eps2{0.0};   // monomer excitation energy 2
    double gamma{0.0};  // vibronic coupling constant
    double omega{1.0};  // vibrational frequency, > 0
    double v{1.0};      // transfer magnitude, > 0
};

// Dimensionless model parameters.
struct ModelParams {
    double p{0.0};          // coupling strength, >= 0
    double r{1.0};          // adiabatic parameter, > 0
    double eps_plus{0.0};   // center of the excitation energy
    double eps_minus{0.0};  // asymmetry

    void validate() const {
        if (!std::isfinite(p) || !(p >= 0.0))
            throw std::invalid_argument("ModelParams: p must be finite and >= 0");
        if (!std::isfinite(r) || !(r > 0.0))
            throw std::invalid_argument("ModelParams: r must be finite and > 0");
        if (!std::isfinite(eps_plus))
            throw std::invalid_argument("ModelParams: eps_plus must be finite");
        if (!std::isfinite(eps_minus))
            throw std::invalid_argument("ModelParams: eps_minus must be finite");
    }
};

// Oscillator truncation: n_osc number states per spin component, so the
// full matrix dimension is 2*n_osc; `keep` lowest eigenstates are retained
// for analysis.
struct BasisSpec {
    int n_osc{2000};
    int keep{1100};

    static constexpr int max_n_osc = 50'000'000;

    int dim() const { return 2 * n_osc; }

    void validate() const {
        if (n_osc < 1 || n_osc > max_n_osc)
            throw std::invalid_argument("BasisSpec: n_osc must be in [1, " +
                                        std::to_string(max_n_osc) + "]");
        if (keep < 1 || keep > 2 * n_osc)
            throw std::invalid_argument("BasisSpec: keep must satisfy 0 < keep <= 2*n_osc");
    }
};

enum class Spin { up, down };

inline constexpr double spin_sign(Spin z) { return z == Spin::up ? 1.0 : -1.0; }

// Basis ordering: index = 2m + (0 for up, 1 for down). Keeps the vibronic
// coupling within a band of width 2.
inline constexpr int basis_index(Spin z, int m) { return 2 * m + (z == Spin::up ? 0 : 1); }

// Normalized two-component real spin vector.
struct SpinProjection {
    double c_up{1.0};
    double c_down{0.0};

    static SpinProjection normalized(double up, double down) {
        const double n = std::hypot(up, down);
        if (n == 0.0 || !std::isfinite(n))
            throw std::invalid_argument("SpinProjection: zero or non-finite norm");
        return {up / n, down / n};
    }
};

// Real symmetric band matrix in LAPACK lower band storage:
// ab[(i-j) + j*(kd+1)] holds A(i,j) for j <= i <= j+kd, column-major.
// Symmetric by construction: only the lower triangle is stored.
class SymmetricBandMatrix {
public:
    SymmetricBandMatrix(int dim, int bandwidth) : dim_(dim), kd_(bandwidth) {
        if (dim < 1 || bandwidth < 0 || bandwidth >= dim)
            throw std::invalid_argument("SymmetricBandMatrix: bad shape");
        try {
            ab_.assign(std::size_t(kd_ + 1) * std::size_t(dim_), 0.0);
        } catch (const std::bad_alloc&) {
            throw std::runtime_error("SymmetricBandMatrix: allocation failed for dim=" +
                                     std::to_string(dim));
        }
    }

    int dim() const { return dim_; }
    int bandwidth() const { return kd_; }

    double operator()(int i, int j) const {
        check_index(i);
        check_index(j);
        if (i < j) std::swap(i, j);
        if (i - j > kd_) return 0.0;
        return ab_[std::size_t(i - j) + std::size_t(j) * std::size_t(kd_ + 1)];
    }

    // Assembly access to the stored lower triangle, j <= i <= j+kd.
    double& at_band(int i, int j) {
        check_index(i);
        check_index(j);
        if (i < j || i - j > kd_)
            throw std::out_of_range("SymmetricBandMatrix: (i,j) outside stored band");
        return ab_[std::size_t(i - j) + std::size_t(j) * std::size_t(kd_ + 1)];
    }

    const std::vector<double>& band_storage() const { return ab_; }

    // y = A x using only the stored band.
    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
        if (x.size() != dim_) throw std::invalid_argument("SymmetricBandMatrix: size mismatch");
        Eigen::VectorXd y = Eigen::VectorXd::Zero(dim_);
        for (int j = 0; j < dim_; ++j) {
            const int top = std::min(dim_ - 1, j + kd_);
            for (int i = j; i <= top; ++i) {
                const double a = ab_[std::size_t(i - j) + std::size_t(j) * std::size_t(kd_ + 1)];
                y[i] += a * x[j];
                if (i != j) y[j] += a * x[i];
            }
        }
        return y;
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim_, dim_);
        for (int j = 0; j < dim_; ++j)
            for (int i = j; i <= std::min(dim_ - 1, j + kd_); ++i) {
                a(i, j) = (*this)(i, j);
                a(j, i) = a(i, j);
            }
        return a;
    }

private:
    void check_index(int i) const {
        if (i < 0 || i >= dim_) throw std::out_of_range("SymmetricBandMatrix: index out of range");
    }

    int dim_;
    int kd_;
    std::vector<double> ab_;
};

// p = gamma^2 / (2 V omega^2), r = omega / (2V), eps_± = (eps1 ± eps2) / (4V).
inline ModelParams reduce_dimer_params(const DimerParams& d) {
    if (!std::isfinite(d.omega) || !(d.omega > 0.0))
        throw std::invalid_argument("reduce_dimer_params: omega must be > 0");
    if (!std::isfinite(d.v) || !(d.v > 0.0))
        throw std::invalid_argument("reduce_dimer_params: v must be > 0");
    ModelParams m;
    m.p = d.gamma * d.gamma / (2.0 * d.v * d.omega * d.omega);
    m.r = d.omega / (2.0 * d.v);
    m.eps_plus = (d.eps1 + d.eps2) / (4.0 * d.v);
    m.eps_minus = (d.eps1 - d.eps2) / (4.0 * d.v);
    m.validate();
    return m;
}

// Matrix element <z2,k2|H|z,k> with the oscillator part taken in the number
// basis of a unit-mass oscillator of frequency r. Nonzero cases:
//   diagonal      eps_+ + r(k + 1/2) + sign(z) eps_-
//   spin flip     -1/2 at k2 == k
//   vibronic      sign(z) * sqrt(p r)/2 * sqrt(max(k,k2)) at |k2 - k| == 1
inline double hamiltonian_element(const ModelParams& m, Spin z2, int k2, Spin z, int k,
                                  int n_osc) {
    if (k < 0 || k >= n_osc || k2 < 0 || k2 >= n_osc)
        throw std::out_of_range("hamiltonian_element: oscillator index out of range");
    if (z2 == z) {
        if (k2 == k) return m.eps_plus + m.r * (k + 0.5) + spin_sign(z) * m.eps_minus;
        if (k2 == k + 1 || k2 == k - 1)
            return spin_sign(z) * 0.5 * std::sqrt(m.p * m.r) * std::sqrt(double(std::max(k, k2)));
        return 0.0;
    }
    return k2 == k ? -0.5 : 0.0;
}

// Assembles the full band matrix; dimension 2*n_osc, bandwidth 2 (a single
// oscillator level needs only the spin-flip subdiagonal).
inline SymmetricBandMatrix build_hamiltonian(const ModelParams& m, const BasisSpec& b) {
    m.validate();
    b.validate();
    SymmetricBandMatrix h(b.dim(), std::min(2, b.dim() - 1));
    const double g = 0.5 * std::sqrt(m.p * m.r);
    for (int k = 0; k < b.n_osc; ++k) {
        for (Spin z : {Spin::up, Spin::down}) {
            const int i = basis_index(z, k);
            h.at_band(i, i) = m.eps_plus + m.r * (k + 0.5) + spin_sign(z) * m.eps_minus;
        }
        h.at_band(basis_index(Spin::down, k), basis_index(Spin::up, k)) = -0.5;
        if (k + 1 < b.n_osc)
            for (Spin z : {Spin::up, Spin::down})
                h.at_band(basis_index(z, k + 1), basis_index(z, k)) =
                    spin_sign(z) * g * std::sqrt(k + 1.0);
    }
    return h;
}

}  // namespace spinboson
