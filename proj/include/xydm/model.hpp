// model.hpp: two qubits coupled to an XY chain with z-axis DM interaction
//
//   H   = H_E(lambda) + J s_A^z s_B^z + g (s_A^z + s_B^z) sum_j sigma_j^z
//   H_E = sum_j [ (1+gamma)/2 xx + (1-gamma)/2 yy + lambda z_j ] + D sum_j (x_j y_{j+1} - y_j x_{j+1})
//
// The qubit basis is fixed to |00>, |01>, |10>, |11> with |0> the s^z = +1/2
// state. hbar = 1 and parameters carry no units.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"
#include "xydm/errors.hpp"

namespace xydm {

using cplx = std::complex<double>;

struct ModelParams {
    int N{8};            // bath spins
    double gamma{1.0};   // anisotropy
    double lambda{1.0};  // transverse field
    double D{0.0};       // DM strength along z
    double g{0.05};      // qubit-bath coupling
    double J{2.0};       // interqubit coupling

    // Throws ConfigError naming the first offending field. Odd N is accepted.
    void validate() const {
        if (N < 2) throw ConfigError("N", "bath length must be >= 2, got " + std::to_string(N));
        const std::pair<const char*, double> reals[] = {
            {"gamma", gamma}, {"lambda", lambda}, {"D", D}, {"g", g}, {"J", J}};
        for (const auto& [name, value] : reals) {
            if (!std::isfinite(value)) throw ConfigError(name, "must be a finite real number");
        }
    }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Eigenstates |phi_mu> of H_AB, in display order.
enum class BasisState : std::size_t { s00 = 0, s01 = 1, s10 = 2, s11 = 3 };

inline constexpr std::array<BasisState, 4> kBasis{
    BasisState::s00, BasisState::s01, BasisState::s10, BasisState::s11};

inline constexpr std::array<std::string_view, 4> kBasisLabels{"00", "01", "10", "11"};

constexpr std::size_t index(BasisState s) noexcept { return static_cast<std::size_t>(s); }

// s^z of qubit A and B in basis state s.
constexpr double spin_a(BasisState s) noexcept { return index(s) < 2 ? 0.5 : -0.5; }
constexpr double spin_b(BasisState s) noexcept { return index(s) % 2 == 0 ? 0.5 : -0.5; }

// epsilon_mu: eigenvalue of J s_A^z s_B^z, i.e. (J/4, -J/4, -J/4, J/4).
constexpr double qubit_energy(BasisState s, double J) noexcept { return J * spin_a(s) * spin_b(s); }

// xi_mu: field shift H_I exerts on the chain, i.e. (g, 0, 0, -g).
constexpr double dressed_shift(BasisState s, double g) noexcept { return g * (spin_a(s) + spin_b(s)); }

// lambda_mu = lambda + xi_mu in basis order.
inline std::array<double, 4> dressed_fields(const ModelParams& p) {
    std::array<double, 4> fields{};
    for (BasisState s : kBasis) fields[index(s)] = p.lambda + dressed_shift(s, p.g);
    return fields;
}

// <phi_mu|Phi(0)> for the product state (|0>+|1>)/sqrt2 (x) (|0>+|1>)/sqrt2.
inline constexpr double kInitialAmplitude = 0.5;

// exp(-i epsilon_mu t)
inline cplx qubit_phase(BasisState s, double t, double J) {
    return std::polar(1.0, -qubit_energy(s, J) * t);
}

// c_mu(t) = exp(-i epsilon_mu t) <phi_mu|Phi(0)>
inline cplx qubit_amplitude(BasisState s, double t, double J) {
    return kInitialAmplitude * qubit_phase(s, t, J);
}

inline void to_json(nlohmann::json& j, const ModelParams& p) {
    j = nlohmann::json{{"N", p.N}, {"gamma", p.gamma}, {"lambda", p.lambda},
                       {"D", p.D}, {"g", p.g}, {"J", p.J}};
}

// Keys absent from j keep their current value; unknown keys are rejected.
inline void update_from_json(const nlohmann::json& j, ModelParams& p) {
    if (!j.is_object()) throw ConfigError("params", "expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number()) throw ConfigError(key, "expected a number");
        if (key == "N") {
            if (!value.is_number_integer()) throw ConfigError("N", "expected an integer");
            p.N = value.get<int>();
        } else if (key == "gamma") {
            p.gamma = value.get<double>();
        } else if (key == "lambda") {
            p.lambda = value.get<double>();
        } else if (key == "D") {
            p.D = value.get<double>();
        } else if (key == "g") {
            p.g = value.get<double>();
        } else if (key == "J") {
            p.J = value.get<double>();
        } else {
            throw ConfigError(key, "unknown model parameter");
        }
    }
}

inline void from_json(const nlohmann::json& j, ModelParams& p) { update_from_json(j, p); }

} // namespace xydm
