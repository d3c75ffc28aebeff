// Randomized invariant checks shared by the property test and the acceptance run.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "xydm/qubits.hpp"

namespace xydm::testing {

struct PropertyTolerances {
    double hermiticity{1e-12};
    double trace{1e-12};
    double min_eigenvalue{-1e-10};
    double modulus_slack{1e-12};
    double symmetry{1e-12};
    double local_unitary{1e-10};
};

struct PropertyOutcome {
    ModelParams params;
    std::vector<std::string> failures;
    double worst_hermiticity{0}, worst_trace{0}, lowest_eigenvalue{0}, worst_modulus{0}, worst_symmetry{0},
        worst_local_unitary{0};
};

inline ModelParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams p;
    p.N = 2 + static_cast<int>(u(rng) * 398);
    p.gamma = 1.5 * u(rng);
    p.lambda = -2.0 + 5.0 * u(rng);
    p.D = u(rng) < 0.3 ? 0.0 : u(rng);
    p.g = u(rng) < 0.1 ? 0.0 : -1.5 + 3.0 * u(rng);
    p.J = -3.0 + 6.0 * u(rng);
    return p;
}

inline Eigen::Matrix2cd random_unitary(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Eigen::Matrix2cd m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = {n(rng), n(rng)};
    return Eigen::HouseholderQR<Eigen::Matrix2cd>(m).householderQ();
}

inline Matrix4c kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Matrix4c k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

inline PropertyOutcome check_properties(const ModelParams& p, std::mt19937_64& rng,
                                        const PropertyTolerances& tol = {}) {
    PropertyOutcome out;
    out.params = p;
    auto fail = [&](const std::string& what) { out.failures.push_back(what); };
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> times{0.0};
    for (int i = 0; i < 8; ++i) times.push_back(20.0 * u(rng));
    std::sort(times.begin(), times.end());

    const ModeTable table = build_mode_table(p);
    const PairKernel k14(table, BasisState::s00, BasisState::s11);
    const DecoherenceTrace tr = trace(table, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t m = 0; m < table.size(); ++m) {
            out.worst_modulus = std::max(out.worst_modulus, std::abs(k14.mode_factor(m, times[i])) - 1.0);
        }
        for (BasisState mu : kBasis) {
            for (BasisState nu : kBasis) {
                const cplx a = decoherence_factor(mu, nu, times[i], table);
                const cplx b = decoherence_factor(nu, mu, times[i], table);
                out.worst_modulus = std::max(out.worst_modulus, std::abs(a) - 1.0);
                out.worst_symmetry = std::max(out.worst_symmetry, std::abs(a - std::conj(b)));
            }
        }
        const TwoQubitState s = reduced_density_matrix_at(i, tr, p.J);
        const StateDiagnostics d = diagnose(s.rho);
        out.worst_hermiticity = std::max(out.worst_hermiticity, d.hermiticity);
        out.worst_trace = std::max(out.worst_trace, d.trace_error);
        out.lowest_eigenvalue = std::min(out.lowest_eigenvalue, d.min_eigenvalue);
        const double C = concurrence(s);
        if (!(C >= 0.0 && C <= 1.0)) fail("concurrence out of [0, 1]");
        const Matrix4c U = kron(random_unitary(rng), random_unitary(rng));
        const double C_rot = concurrence({U * s.rho * U.adjoint(), s.t});
        out.worst_local_unitary = std::max(out.worst_local_unitary, std::abs(C - C_rot));
    }

    const ConcurrenceSeries first = concurrence_series(p, times, 1);
    const ConcurrenceSeries second = concurrence_series(p, times, 3);
    if (first.C != second.C || first.trace.F12 != second.trace.F12 || first.trace.F14 != second.trace.F14 ||
        first.trace.F24 != second.trace.F24) {
        fail("outputs differ between runs");
    }

    if (out.worst_hermiticity > tol.hermiticity) fail("rho not Hermitian");
    if (out.worst_trace > tol.trace) fail("trace of rho differs from 1");
    if (out.lowest_eigenvalue < tol.min_eigenvalue) fail("rho not positive semidefinite");
    if (out.worst_modulus > tol.modulus_slack) fail("|F| exceeds 1");
    if (out.worst_symmetry > tol.symmetry) fail("F_nu,mu != conj(F_mu,nu)");
    if (out.worst_local_unitary > tol.local_unitary) fail("concurrence changed under local unitaries");
    return out;
}

inline std::string describe(const ModelParams& p) {
    return "N=" + std::to_string(p.N) + " gamma=" + std::to_string(p.gamma) + " lambda=" + std::to_string(p.lambda) +
           " D=" + std::to_string(p.D) + " g=" + std::to_string(p.g) + " J=" + std::to_string(p.J);
}

} // namespace xydm::testing
