// qubits.hpp: two-qubit reduced density matrix and Wootters concurrence

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "xydm/decoherence.hpp"
#include "xydm/errors.hpp"
#include "xydm/model.hpp"
#include "xydm/parallel.hpp"

namespace xydm {

using Matrix4c = Eigen::Matrix4cd;

struct TwoQubitState {
    Matrix4c rho{Matrix4c::Zero()};
    double t{0.0};
};

// rho_AB(t) = sum_mu,nu c_mu c_nu^* F_mu,nu |phi_mu><phi_nu|, written out:
//   (1/4) [ 1              e^{-iJt/2} F12   e^{-iJt/2} F12   F14            ]
//         [ .              1                1                e^{iJt/2} F24  ]
//         [ .              .                1                e^{iJt/2} F24  ]
//         [ .              .                .                1              ]
// with the lower triangle filled by conjugation.
inline TwoQubitState density_matrix(double t, cplx F12, cplx F14, cplx F24, double J) {
    const cplx down = std::polar(1.0, -0.5 * J * t);
    const cplx up = std::conj(down);
    Matrix4c r;
    r(0, 0) = r(1, 1) = r(2, 2) = r(3, 3) = 1.0;
    r(0, 1) = r(0, 2) = down * F12;
    r(0, 3) = F14;
    r(1, 2) = 1.0;
    r(1, 3) = r(2, 3) = up * F24;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < i; ++j) r(i, j) = std::conj(r(j, i));
    }
    return {0.25 * r, t};
}

inline TwoQubitState reduced_density_matrix_at(std::size_t i, const DecoherenceTrace& trace, double J) {
    if (i >= trace.size()) throw LookupError("trace index " + std::to_string(i) + " out of range");
    return density_matrix(trace.times[i], trace.F12[i], trace.F14[i], trace.F24[i], J);
}

// Looks t up on the trace grid (relative match 1e-12).
inline TwoQubitState reduced_density_matrix(double t, const DecoherenceTrace& trace, double J) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (std::abs(trace.times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
            return reduced_density_matrix_at(i, trace, J);
        }
    }
    throw LookupError("time " + std::to_string(t) + " is not on the trace grid");
}

struct StateDiagnostics {
    double hermiticity{0.0};   // max |rho - rho^dagger|
    double trace_error{0.0};   // |Tr rho - 1|
    double min_eigenvalue{0.0};
};

inline StateDiagnostics diagnose(const Matrix4c& rho) {
    StateDiagnostics d;
    d.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    d.trace_error = std::abs(rho.trace() - cplx{1.0, 0.0});
    const Matrix4c h = 0.5 * (rho + rho.adjoint());
    d.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Matrix4c>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
    return d;
}

// sigma_y (x) sigma_y in the |00>,|01>,|10>,|11> basis.
inline Matrix4c spin_flip() {
    Matrix4c y = Matrix4c::Zero();
    y(0, 3) = y(3, 0) = -1.0;
    y(1, 2) = y(2, 1) = 1.0;
    return y;
}

inline constexpr double kNegativeClip = 1e-8;

// Wootters concurrence via the Hermitian route: the singular values of
// sqrt(rho) Y sqrt(rho)^* are sqrt(omega_i), omega_i the eigenvalues of
// zeta = rho Y rho^* Y. Avoids square roots of roundoff-sized omega for
// (nearly) pure states.
inline double concurrence(const TwoQubitState& state) {
    const Matrix4c& rho = state.rho;
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw NumericalError("concurrence: density matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix4c> eig(0.5 * (rho + rho.adjoint()));
    Eigen::Vector4d p = eig.eigenvalues();
    if (p(0) < -kNegativeClip) {
        throw NumericalError("concurrence: density matrix has eigenvalue " + std::to_string(p(0)));
    }
    p = p.cwiseMax(0.0).cwiseSqrt();
    const Matrix4c root = eig.eigenvectors() * p.asDiagonal() * eig.eigenvectors().adjoint();
    const Matrix4c m = root * spin_flip() * root.conjugate();
    const Eigen::Vector4d s = Eigen::JacobiSVD<Matrix4c>(m).singularValues();  // descending
    return std::clamp(s(0) - s(1) - s(2) - s(3), 0.0, 1.0);
}

// Eigenvalues of zeta from a general complex eigensolver, sorted by
// descending real part.
inline std::array<cplx, 4> zeta_spectrum(const Matrix4c& rho) {
    const Matrix4c zeta = rho * spin_flip() * rho.conjugate() * spin_flip();
    const Eigen::Vector4cd ev = Eigen::ComplexEigenSolver<Matrix4c>(zeta, false).eigenvalues();
    std::array<cplx, 4> out{ev(0), ev(1), ev(2), ev(3)};
    std::sort(out.begin(), out.end(), [](cplx a, cplx b) { return a.real() > b.real(); });
    return out;
}

// Concurrence straight from the zeta spectrum. Eigenvalues in [-1e-8, 0) are
// clipped to zero; more negative or visibly complex ones are an error.
inline double concurrence_from_zeta(const TwoQubitState& state) {
    const auto w = zeta_spectrum(state.rho);
    std::array<double, 4> roots{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (std::abs(w[i].imag()) > 1e-8) throw NumericalError("zeta eigenvalue has imaginary part");
        if (w[i].real() < -kNegativeClip) throw NumericalError("zeta eigenvalue is negative");
        roots[i] = std::sqrt(std::max(w[i].real(), 0.0));
    }
    return std::clamp(roots[0] - roots[1] - roots[2] - roots[3], 0.0, 1.0);
}

// C(t) at arbitrary times for one parameter point, without a stored grid.
class PointEvaluator {
public:
    explicit PointEvaluator(const ModelParams& params)
        : params_(params),
          table_(build_mode_table(params)),
          k12_(table_, BasisState::s00, BasisState::s01),
          k14_(table_, BasisState::s00, BasisState::s11),
          k24_(table_, BasisState::s01, BasisState::s11) {}

    const ModelParams& params() const noexcept { return params_; }
    const ModeTable& table() const noexcept { return table_; }

    std::array<cplx, 3> factors(double t) const { return {k12_.factor(t), k14_.factor(t), k24_.factor(t)}; }

    TwoQubitState state(double t) const {
        const auto f = factors(t);
        return density_matrix(t, f[0], f[1], f[2], params_.J);
    }

    double operator()(double t) const { return concurrence(state(t)); }

private:
    ModelParams params_;
    ModeTable table_;
    PairKernel k12_, k14_, k24_;
};

struct ConcurrenceSeries {
    ModelParams params;
    DecoherenceTrace trace;
    std::vector<double> C;

    const std::vector<double>& times() const noexcept { return trace.times; }

    // Index of the first maximum.
    std::size_t argmax() const {
        return static_cast<std::size_t>(std::max_element(C.begin(), C.end()) - C.begin());
    }
};

inline ConcurrenceSeries concurrence_series(const ModelParams& params, std::span<const double> times,
                                            int threads = 1) {
    ConcurrenceSeries out{params, trace(params, times, threads), {}};
    out.C.resize(times.size());
    parallel_for(times.size(), threads, [&](std::size_t i) {
        out.C[i] = concurrence(reduced_density_matrix_at(i, out.trace, params.J));
    });
    return out;
}

} // namespace xydm
