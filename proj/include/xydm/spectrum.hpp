// spectrum.hpp: Bogoliubov angles and quasiparticle dispersions of the chain
//
// After Jordan-Wigner and Fourier transformation the even-parity sector of the
// chain decouples into (k, -k) pairs on the antiperiodic grid
// k_j = (2j - 1) pi / N. Each pair is rotated by the angle theta_k with
//   tan theta_k = -gamma sin k / (field - cos k)
// and carries the quasiparticle energy
//   Omega_k = 2 sqrt((field - cos k)^2 + (gamma sin k)^2) - 4 D sin k.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <ostream>
#include <vector>

#include "xydm/io.hpp"
#include "xydm/model.hpp"
#include "xydm/parallel.hpp"

namespace xydm {

// Positive momenta of the antiperiodic (phi = pi) sector. For odd N the
// unpaired k = pi mode is dropped, leaving floor(N/2) momenta.
struct MomentumGrid {
    std::vector<double> ks;

    static MomentumGrid antiperiodic(int N) {
        if (N < 2) throw ConfigError("N", "bath length must be >= 2");
        MomentumGrid grid;
        const int count = N / 2;
        grid.ks.reserve(static_cast<std::size_t>(count));
        for (int j = 1; j <= count; ++j) {
            grid.ks.push_back((2.0 * j - 1.0) * std::numbers::pi / N);
        }
        return grid;
    }

    std::size_t size() const noexcept { return ks.size(); }
};

struct BogoliubovAngle {
    double theta{0.0};
    bool degenerate{false};  // both arctangent arguments vanished; theta set to 0
};

// Two-argument arctangent of (-gamma sin k, field - cos k), range (-pi, pi].
inline BogoliubovAngle bogoliubov_angle(double k, double field, double gamma) {
    const double y = -gamma * std::sin(k);
    const double x = field - std::cos(k);
    if (y == 0.0 && x == 0.0) return {0.0, true};
    return {std::atan2(y, x), false};
}

inline double dispersion(double k, double field, double gamma, double D) {
    const double a = field - std::cos(k);
    const double b = gamma * std::sin(k);
    return 2.0 * std::sqrt(a * a + b * b) - 4.0 * D * std::sin(k);
}

// Per-field columns of the mode table, indexed like MomentumGrid::ks.
struct FieldModes {
    double field{0.0};
    std::vector<double> theta;
    std::vector<double> omega;
    std::vector<double> Theta;  // (theta - theta_bare) / 2
};

struct ModeTable {
    std::vector<double> ks;
    FieldModes bare;
    std::array<FieldModes, 4> dressed;

    double min_omega{std::numeric_limits<double>::infinity()};
    bool gapless{false};     // some Omega < 0: the quasiparticle vacuum is not the true ground state
    bool degenerate{false};  // some mode hit the gamma sin k = 0 = field - cos k corner

    const FieldModes& operator[](BasisState s) const { return dressed[index(s)]; }
    std::size_t size() const noexcept { return ks.size(); }
};

inline ModeTable build_mode_table(const ModelParams& params, int threads = 1) {
    params.validate();
    ModeTable table;
    table.ks = MomentumGrid::antiperiodic(params.N).ks;
    const std::size_t n = table.ks.size();
    const auto fields = dressed_fields(params);

    auto init = [n](FieldModes& f, double field) {
        f.field = field;
        f.theta.assign(n, 0.0);
        f.omega.assign(n, 0.0);
        f.Theta.assign(n, 0.0);
    };
    init(table.bare, params.lambda);
    for (BasisState s : kBasis) init(table.dressed[index(s)], fields[index(s)]);

    std::vector<char> degenerate(n, 0);
    parallel_for(n, threads, [&](std::size_t i) {
        const double k = table.ks[i];
        const auto bare = bogoliubov_angle(k, params.lambda, params.gamma);
        table.bare.theta[i] = bare.theta;
        table.bare.omega[i] = dispersion(k, params.lambda, params.gamma, params.D);
        bool flag = bare.degenerate;
        for (auto& f : table.dressed) {
            const auto a = bogoliubov_angle(k, f.field, params.gamma);
            flag = flag || a.degenerate;
            f.theta[i] = a.theta;
            f.omega[i] = dispersion(k, f.field, params.gamma, params.D);
            f.Theta[i] = 0.5 * (a.theta - bare.theta);
        }
        degenerate[i] = flag ? 1 : 0;
    });

    table.degenerate = std::any_of(degenerate.begin(), degenerate.end(), [](char c) { return c != 0; });
    auto scan = [&](const FieldModes& f) {
        for (double w : f.omega) table.min_omega = std::min(table.min_omega, w);
    };
    scan(table.bare);
    for (const auto& f : table.dressed) scan(f);
    table.gapless = table.min_omega < 0.0;
    return table;
}

// Debug dump with columns k, mu, theta, omega, Theta; mu = 0 is the bare field.
inline void write_mode_table_csv(std::ostream& out, const ModeTable& table) {
    out << "k,mu,theta,omega,Theta\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        auto row = [&](int mu, const FieldModes& f) {
            out << format_double(table.ks[i]) << ',' << mu << ',' << format_double(f.theta[i]) << ','
                << format_double(f.omega[i]) << ',' << format_double(f.Theta[i]) << '\n';
        };
        row(0, table.bare);
        for (BasisState s : kBasis) row(static_cast<int>(index(s)) + 1, table[s]);
    }
}

} // namespace xydm
