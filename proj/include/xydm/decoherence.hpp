// decoherence.hpp: decoherence factors F_mu,nu(t) as products over k > 0
//
//   F_mu,nu(t) = <G| exp(i H_E(lambda_nu) t) exp(-i H_E(lambda_mu) t) |G>
//
// with |G> the pair-product ground state of the bare chain. Each positive
// momentum contributes the four-term factor
//
//   cos T_mu cos T_nu cos(T_mu - T_nu) e^{ i (W_mu - W_nu) t}
// + sin T_mu sin T_nu cos(T_mu - T_nu) e^{-i (W_mu - W_nu) t}
// + sin T_mu cos T_nu sin(T_mu - T_nu) e^{-i (W_mu + W_nu) t}
// - cos T_mu sin T_nu sin(T_mu - T_nu) e^{ i (W_mu + W_nu) t}
//
// (T = Theta_k, W = Omega_k of the respective dressed field), and the product
// runs over the whole sum.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xydm/errors.hpp"
#include "xydm/model.hpp"
#include "xydm/parallel.hpp"
#include "xydm/spectrum.hpp"

namespace xydm {

// Slack allowed on |per-k factor| <= 1 before the product is rejected.
inline constexpr double kModeModulusTolerance = 1e-12;

// Time-independent part of the per-k factors for one (mu, nu) pair.
class PairKernel {
public:
    PairKernel(const ModeTable& table, BasisState mu, BasisState nu)
        : identical_(table[mu].field == table[nu].field) {
        if (identical_) return;
        const FieldModes& m = table[mu];
        const FieldModes& n = table[nu];
        const std::size_t size = table.size();
        a_.resize(size);
        b_.resize(size);
        c_.resize(size);
        d_.resize(size);
        diff_.resize(size);
        sum_.resize(size);
        for (std::size_t i = 0; i < size; ++i) {
            const double cm = std::cos(m.Theta[i]), sm = std::sin(m.Theta[i]);
            const double cn = std::cos(n.Theta[i]), sn = std::sin(n.Theta[i]);
            const double cd = std::cos(m.Theta[i] - n.Theta[i]);
            const double sd = std::sin(m.Theta[i] - n.Theta[i]);
            a_[i] = cm * cn * cd;
            b_[i] = sm * sn * cd;
            c_[i] = sm * cn * sd;
            d_[i] = cm * sn * sd;
            diff_[i] = m.omega[i] - n.omega[i];
            sum_[i] = m.omega[i] + n.omega[i];
        }
    }

    // Equal dressed fields give identical evolution operators, so F = 1.
    bool identical() const noexcept { return identical_; }

    cplx mode_factor(std::size_t i, double t) const {
        if (identical_) return {1.0, 0.0};
        const cplx e_diff = std::polar(1.0, diff_[i] * t);
        const cplx e_sum = std::polar(1.0, sum_[i] * t);
        return a_[i] * e_diff + b_[i] * std::conj(e_diff) + c_[i] * std::conj(e_sum) - d_[i] * e_sum;
    }

    // Ascending-k direct product of the per-k factors.
    cplx factor(double t) const {
        if (identical_ || t == 0.0) return {1.0, 0.0};
        cplx product{1.0, 0.0};
        for (std::size_t i = 0; i < a_.size(); ++i) {
            const cplx f = mode_factor(i, t);
            if (std::abs(f) > 1.0 + kModeModulusTolerance) {
                throw NumericalError("per-mode decoherence factor has modulus " + std::to_string(std::abs(f)) +
                                     " > 1 at mode " + std::to_string(i));
            }
            product *= f;
        }
        // |F| <= 1 exactly; drop roundoff excess from the unit-modulus flat-band products.
        const double modulus = std::abs(product);
        return modulus > 1.0 ? product / modulus : product;
    }

private:
    bool identical_;
    std::vector<double> a_, b_, c_, d_, diff_, sum_;
};

inline cplx decoherence_factor(BasisState mu, BasisState nu, double t, const ModeTable& table) {
    return PairKernel(table, mu, nu).factor(t);
}

// The three independent factors; F13 = F12, F34 = F24 and F23 = 1 are implied.
struct DecoherenceTrace {
    std::vector<double> times;
    std::vector<cplx> F12, F14, F24;
    bool gapless{false};
    bool degenerate{false};

    std::size_t size() const noexcept { return times.size(); }

    // F_mu,nu at grid index i, reconstructed from the stored factors.
    cplx factor(BasisState mu, BasisState nu, std::size_t i) const {
        if (index(mu) > index(nu)) return std::conj(factor(nu, mu, i));
        if (mu == nu) return {1.0, 0.0};
        using B = BasisState;
        if (mu == B::s00 && nu == B::s11) return F14[i];
        if (mu == B::s00) return F12[i];
        if (mu == B::s01 && nu == B::s10) return {1.0, 0.0};
        return F24[i];
    }
};

inline DecoherenceTrace trace(const ModeTable& table, std::span<const double> times, int threads = 1) {
    if (times.empty()) throw ConfigError("times", "time grid is empty");
    for (double t : times) {
        if (!std::isfinite(t)) throw ConfigError("times", "time grid contains a non-finite value");
    }
    using B = BasisState;
    const PairKernel k12(table, B::s00, B::s01);
    const PairKernel k14(table, B::s00, B::s11);
    const PairKernel k24(table, B::s01, B::s11);

    DecoherenceTrace out;
    out.times.assign(times.begin(), times.end());
    out.F12.resize(times.size());
    out.F14.resize(times.size());
    out.F24.resize(times.size());
    out.gapless = table.gapless;
    out.degenerate = table.degenerate;
    parallel_for(times.size(), threads, [&](std::size_t i) {
        out.F12[i] = k12.factor(times[i]);
        out.F14[i] = k14.factor(times[i]);
        out.F24[i] = k24.factor(times[i]);
    });
    return out;
}

inline DecoherenceTrace trace(const ModelParams& params, std::span<const double> times, int threads = 1) {
    return trace(build_mode_table(params), times, threads);
}

} // namespace xydm
