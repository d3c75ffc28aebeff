#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "xydm/qubits.hpp"

using namespace xydm;
using std::numbers::pi;

namespace {

TwoQubitState pure(const Eigen::Vector4cd& psi) {
    const Eigen::Vector4cd v = psi.normalized();
    return {v * v.adjoint(), 0.0};
}

Eigen::Matrix2cd random_unitary(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Eigen::Matrix2cd m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = {n(rng), n(rng)};
    return Eigen::HouseholderQR<Eigen::Matrix2cd>(m).householderQ();
}

Matrix4c random_density(std::mt19937_64& rng, int rank) {
    std::normal_distribution<double> n;
    Eigen::MatrixXcd a(4, rank);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < rank; ++j) a(i, j) = {n(rng), n(rng)};
    Matrix4c r = a * a.adjoint();
    return r / r.trace().real();
}

} // namespace

TEST(Qubits, BellStateIsMaximallyEntangled) {
    EXPECT_NEAR(concurrence(pure(Eigen::Vector4cd(1, 0, 0, 1))), 1.0, 1e-12);
    EXPECT_NEAR(concurrence(pure(Eigen::Vector4cd(0, 1, -1, 0))), 1.0, 1e-12);
}

TEST(Qubits, ProductStatesAreSeparable) {
    EXPECT_EQ(concurrence(pure(Eigen::Vector4cd(1, 0, 0, 0))), 0.0);
    EXPECT_NEAR(concurrence(pure(Eigen::Vector4cd(1, 1, 1, 1))), 0.0, 1e-12);
    EXPECT_NEAR(concurrence({Matrix4c::Identity() / 4.0, 0.0}), 0.0, 1e-15);
}

TEST(Qubits, InitialStateIsPureAndUnentangled) {
    const TwoQubitState s = density_matrix(0.0, 1.0, 1.0, 1.0, 2.0);
    EXPECT_NEAR((s.rho * s.rho - s.rho).norm(), 0.0, 1e-15);
    EXPECT_NEAR(concurrence(s), 0.0, 1e-12);
}

TEST(Qubits, DensityMatrixLayout) {
    const cplx F12{0.3, 0.1}, F14{-0.2, 0.4}, F24{0.5, -0.5};
    const double J = 2.0, t = 0.7;
    const Matrix4c r = density_matrix(t, F12, F14, F24, J).rho;
    const cplx down = std::polar(1.0, -J * t / 2);
    EXPECT_EQ(r(0, 1), 0.25 * down * F12);
    EXPECT_EQ(r(0, 2), 0.25 * down * F12);
    EXPECT_EQ(r(0, 3), 0.25 * F14);
    EXPECT_EQ(r(1, 2), cplx(0.25));
    EXPECT_EQ(r(1, 3), 0.25 * std::conj(down) * F24);
    EXPECT_EQ(r(2, 3), 0.25 * std::conj(down) * F24);
    EXPECT_EQ(r, r.adjoint());
    EXPECT_NEAR(r.trace().real(), 1.0, 1e-15);
}

TEST(Qubits, DecoupledDynamicsIsSine) {
    for (double J : {2.0, 1.3, -0.8}) {
        for (double t = 0.0; t <= 20.0; t += 0.01) {
            const double c = concurrence(density_matrix(t, 1.0, 1.0, 1.0, J));
            EXPECT_NEAR(c, std::abs(std::sin(J * t / 2)), 1e-12) << "J " << J << " t " << t;
        }
    }
}

TEST(Qubits, LocalUnitaryInvariance) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const Matrix4c rho = random_density(rng, 1 + i % 4);
        const Matrix4c u = Eigen::kroneckerProduct(random_unitary(rng), random_unitary(rng));
        const double a = concurrence({rho, 0.0});
        const double b = concurrence({u * rho * u.adjoint(), 0.0});
        EXPECT_NEAR(a, b, 1e-10);
    }
}

TEST(Qubits, CouplingSignActsAsConjugation) {
    // rho(F, -J) is the complex conjugate of rho(F*, J); concurrence is
    // invariant under conjugation.
    std::vector<double> ts;
    for (int i = 0; i <= 200; ++i) ts.push_back(0.05 * i);
    for (const ModelParams& p : {ModelParams{60, 0.6, 0.8, 0.2, 0.4, 2.0}, ModelParams{101, 1.0, 1.0, 0.0, 1.0, 2.0}}) {
        const auto tr = trace(p, ts);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto a = density_matrix(ts[i], tr.F12[i], tr.F14[i], tr.F24[i], -p.J);
            const auto b = density_matrix(ts[i], std::conj(tr.F12[i]), std::conj(tr.F14[i]), std::conj(tr.F24[i]), p.J);
            EXPECT_NEAR((a.rho - b.rho.conjugate()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
            EXPECT_NEAR(concurrence(a), concurrence(b), 1e-12);
        }
    }
}

TEST(Qubits, FactorSubstitutions) {
    for (double t : {0.0, 0.4, 1.0, pi / 2, 2.5}) {
        EXPECT_NEAR(concurrence(density_matrix(t, 0.0, 0.0, 0.0, 2.0)), 0.0, 1e-12);
        EXPECT_NEAR(concurrence(density_matrix(t, 0.0, 0.0, std::polar(1.0, 0.3 * t), 2.0)), 0.5, 1e-12);
    }
}

TEST(Qubits, ZetaRouteAgreesWithHermitianRoute) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) {
        const TwoQubitState s{random_density(rng, 4), 0.0};
        for (cplx w : zeta_spectrum(s.rho)) EXPECT_LT(std::abs(w.imag()), 1e-8);
        EXPECT_NEAR(concurrence_from_zeta(s), concurrence(s), 1e-10);
    }
}

TEST(Qubits, RejectsNonPhysicalMatrices) {
    Matrix4c r = Matrix4c::Identity() / 4.0;
    r(0, 1) = 0.3;
    EXPECT_THROW(concurrence({r, 0.0}), NumericalError);
    Matrix4c neg = Matrix4c::Identity() / 4.0;
    neg(0, 3) = neg(3, 0) = 0.4;
    EXPECT_THROW(concurrence({neg, 0.0}), NumericalError);
}

TEST(Qubits, DiagnosticsOfPhysicalState) {
    const auto d = diagnose(density_matrix(1.1, cplx(0.2, 0.1), cplx(0.0, 0.3), cplx(0.7, 0.0), 2.0).rho);
    EXPECT_LT(d.hermiticity, 1e-16);
    EXPECT_LT(d.trace_error, 1e-15);
    EXPECT_GT(d.min_eigenvalue, -1e-15);
}

TEST(Qubits, TimeLookup) {
    const ModelParams p{40, 1.0, 0.8, 0.0, 0.3, 2.0};
    const std::vector<double> ts{0.0, 0.5, 1.0};
    const auto tr = trace(p, ts);
    EXPECT_EQ(reduced_density_matrix(0.5, tr, p.J).rho, reduced_density_matrix_at(1, tr, p.J).rho);
    EXPECT_THROW(reduced_density_matrix(0.75, tr, p.J), LookupError);
    EXPECT_THROW(reduced_density_matrix_at(3, tr, p.J), LookupError);
}

TEST(Qubits, SeriesExamples) {
    std::vector<double> ts;
    for (int i = 0; i <= 2000; ++i) ts.push_back(0.01 * i);
    const auto decoupled = concurrence_series({100, 1.0, 1.0, 0.0, 0.0, 2.0}, ts, 2);
    for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_NEAR(decoupled.C[i], std::abs(std::sin(ts[i])), 1e-12);

    const auto strong = concurrence_series({400, 1.0, 10.0, 0.0, 0.05, 2.0}, ts, 2);
    for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_NEAR(strong.C[i], std::abs(std::sin(ts[i])), 0.05);

    const PointEvaluator resonance({801, 1.0, 1.0, 0.0, 1.0, 2.0});
    for (int m = 2; m <= 6; ++m) EXPECT_NEAR(resonance(m * pi / 2), 0.5, 0.03);
}

TEST(Qubits, PointEvaluatorMatchesSeries) {
    const ModelParams p{60, 0.7, 0.9, 0.1, 0.4, 2.0};
    const std::vector<double> ts{0.3, 1.7, 4.2};
    const auto s = concurrence_series(p, ts);
    const PointEvaluator e(p);
    for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_EQ(e(ts[i]), s.C[i]);
}
