// analysis.hpp: figure-level post-processing of concurrence dynamics

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xydm/decoherence.hpp"
#include "xydm/errors.hpp"
#include "xydm/model.hpp"
#include "xydm/parallel.hpp"
#include "xydm/qubits.hpp"
#include "xydm/spectrum.hpp"

namespace xydm {

inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

struct LineFit {
    double slope{0.0};
    double intercept{0.0};
    double r2{0.0};
};

// Ordinary least squares y = slope x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("fit_line: need at least two paired samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error("fit_line: abscissae are all equal");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

// ---------------------------------------------------------------------------
// Short-time width of the resonance spikes.
//
// Near t = m pi/2 in the flat-band case |F24| ~ exp(-A delta^2) with
// A = sum_{k>0} (1 - cos 4 Theta_k(lambda_4)). For gamma = 1, D = 0, g = lambda
// the sum has the closed form N lambda^2 / 2 (lambda < 1) or N / 2 (lambda >= 1).

struct WidthResult {
    double A_sum{0.0};
    std::optional<double> A_closed;
    std::optional<double> relative_gap;  // |A_sum - A_closed| / A_closed
};

inline bool closed_form_applies(const ModelParams& p) {
    return p.gamma == 1.0 && p.D == 0.0 && p.g == p.lambda;
}

inline WidthResult width_A(const ModelParams& params) {
    const ModeTable table = build_mode_table(params);
    WidthResult r;
    for (double Theta : table[BasisState::s11].Theta) r.A_sum += 1.0 - std::cos(4.0 * Theta);
    if (closed_form_applies(params)) {
        const double lam = params.lambda;
        r.A_closed = std::abs(lam) < 1.0 ? params.N * lam * lam / 2.0 : params.N / 2.0;
        if (*r.A_closed != 0.0) r.relative_gap = std::abs(r.A_sum - *r.A_closed) / *r.A_closed;
    }
    return r;
}

// Fits ln|F24(m pi/2 + delta)| = c - A delta^2 on delta in [0, delta_max] and
// returns the fitted A.
inline LineFit fit_spike_decay(const ModelParams& params, int m = 1, double delta_max = 0.02,
                               std::size_t samples = 41) {
    const ModeTable table = build_mode_table(params);
    const PairKernel k24(table, BasisState::s01, BasisState::s11);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < samples; ++i) {
        const double delta = delta_max * static_cast<double>(i) / static_cast<double>(samples - 1);
        x.push_back(delta * delta);
        y.push_back(std::log(std::abs(k24.factor(m * kHalfPi + delta))));
    }
    LineFit fit = fit_line(x, y);
    fit.slope = -fit.slope;  // report A > 0
    return fit;
}

// ---------------------------------------------------------------------------
// Maximum concurrence versus chain length.

struct ScalingPoint {
    int N{0};
    double C_max{0.0};
    double t_at_max{0.0};
};

struct ScalingFit {
    std::vector<ScalingPoint> points;
    std::vector<int> excluded;  // N with C_max = 0
    LineFit fit;                // ln C_max = slope sqrt(N) + intercept
};

// Times dt, 2 dt, ... up to 4 pi / J: the first two interqubit periods.
inline std::vector<double> two_period_window(double J, double dt) {
    if (!(dt > 0.0)) throw ConfigError("dt", "must be positive");
    const double t_end = 4.0 * std::numbers::pi / std::abs(J);
    std::vector<double> times;
    for (std::size_t i = 1;; ++i) {
        const double t = static_cast<double>(i) * dt;
        if (t > t_end + 1e-12) break;
        times.push_back(t);
    }
    return times;
}

inline ScalingPoint max_concurrence(const ModelParams& params, double dt = 1e-3, int threads = 1) {
    const auto times = two_period_window(params.J, dt);
    const ConcurrenceSeries s = concurrence_series(params, times, threads);
    const std::size_t i = s.argmax();
    return {params.N, s.C[i], times[i]};
}

inline ScalingFit max_concurrence_scaling(std::span<const int> Ns, const ModelParams& base, double dt = 1e-3,
                                          int threads = 1) {
    ScalingFit out;
    out.points.resize(Ns.size());
    parallel_for(Ns.size(), threads, [&](std::size_t i) {
        ModelParams p = base;
        p.N = Ns[i];
        out.points[i] = max_concurrence(p, dt);
    });
    std::vector<double> x, y;
    for (const auto& pt : out.points) {
        if (pt.C_max > 0.0) {
            x.push_back(std::sqrt(static_cast<double>(pt.N)));
            y.push_back(std::log(pt.C_max));
        } else {
            out.excluded.push_back(pt.N);
        }
    }
    if (x.size() >= 2) out.fit = fit_line(x, y);
    return out;
}

// ---------------------------------------------------------------------------
// Resonance peaks at t = m pi/2 (g = lambda).

struct ResonancePeak {
    int m{0};
    double t{0.0};
    double C_peak{0.0};
    double floor{0.0};  // max C between neighbouring peaks, 10% guard bands excluded
    double width{std::numeric_limits<double>::quiet_NaN()};  // FWHM of C - floor
};

namespace detail {

// First crossing of C below `level` walking from t0 in direction dir (+1/-1),
// refined by bisection. Returns NaN if none within `reach`.
inline double crossing(const PointEvaluator& C, double t0, int dir, double level, double step, double reach) {
    double inside = t0;
    for (double d = step; d <= reach + 1e-15; d += step) {
        const double t = t0 + dir * d;
        if (C(t) < level) {
            double lo = inside, hi = t;
            for (int it = 0; it < 50; ++it) {
                const double mid = 0.5 * (lo + hi);
                (C(mid) < level ? hi : lo) = mid;
            }
            return 0.5 * (lo + hi);
        }
        inside = t;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace detail

inline std::vector<ResonancePeak> resonance_scan(const ModelParams& params, int m_max, double dt = 1e-3,
                                                 int threads = 1) {
    if (m_max < 1) throw ConfigError("m_max", "must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("dt", "must be positive");
    const PointEvaluator C(params);
    std::vector<ResonancePeak> peaks(static_cast<std::size_t>(m_max));
    parallel_for(peaks.size(), threads, [&](std::size_t i) {
        ResonancePeak& pk = peaks[i];
        pk.m = static_cast<int>(i) + 1;
        pk.t = pk.m * kHalfPi;
        pk.C_peak = C(pk.t);
        const double lo = pk.t + 0.1 * kHalfPi, hi = pk.t + 0.9 * kHalfPi;
        pk.floor = 0.0;
        for (double t = lo; t < hi; t += dt) pk.floor = std::max(pk.floor, C(t));
        const double level = pk.floor + 0.5 * (pk.C_peak - pk.floor);
        if (pk.C_peak > pk.floor) {
            const double left = detail::crossing(C, pk.t, -1, level, dt, 0.5 * kHalfPi);
            const double right = detail::crossing(C, pk.t, +1, level, dt, 0.5 * kHalfPi);
            pk.width = right - left;
        }
    });
    return peaks;
}

// ---------------------------------------------------------------------------
// Strong-coupling platform (g = lambda >> 1).

struct PlatformFeature {
    int m{0};
    double t{0.0};
    double C_at{0.0};
    bool peak{false};         // above the platform mean, otherwise a valley
    double half_width{0.0};   // largest |delta| < pi/4 with |C - mean| > tolerance
};

struct PlatformProfile {
    double mean{0.0}, min{0.0}, max{0.0};  // over t at distance > exclusion from every m pi/2
    double exclusion{0.1};
    double tolerance{0.05};
    std::size_t samples{0};
    std::vector<PlatformFeature> features;
};

inline double distance_to_resonance(double t) {
    return std::abs(t - std::round(t / kHalfPi) * kHalfPi);
}

inline PlatformProfile platform_profile(const ModelParams& params, double t_end = 10.0, double exclusion = 0.1,
                                        double dt = 1e-3, double tolerance = 0.05, int threads = 1) {
    if (!(dt > 0.0)) throw ConfigError("dt", "must be positive");
    const PointEvaluator C(params);
    PlatformProfile out;
    out.exclusion = exclusion;
    out.tolerance = tolerance;

    const auto steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9)) + 1;
    std::vector<double> values(steps);
    parallel_for(steps, threads, [&](std::size_t i) { values[i] = C(static_cast<double>(i) * dt); });
    double sum = 0.0;
    out.min = std::numeric_limits<double>::infinity();
    out.max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < steps; ++i) {
        if (distance_to_resonance(static_cast<double>(i) * dt) <= exclusion) continue;
        sum += values[i];
        out.min = std::min(out.min, values[i]);
        out.max = std::max(out.max, values[i]);
        ++out.samples;
    }
    if (out.samples == 0) throw Error("platform_profile: no samples outside the exclusion windows");
    out.mean = sum / static_cast<double>(out.samples);

    const int m_last = static_cast<int>(std::floor(t_end / kHalfPi));
    out.features.resize(static_cast<std::size_t>(std::max(m_last, 0)));
    parallel_for(out.features.size(), threads, [&](std::size_t i) {
        PlatformFeature& f = out.features[i];
        f.m = static_cast<int>(i) + 1;
        f.t = f.m * kHalfPi;
        f.C_at = C(f.t);
        f.peak = f.C_at > out.mean;
        for (double d = 0.0; d < 0.5 * kHalfPi; d += dt) {
            if (std::abs(C(f.t - d) - out.mean) > tolerance || std::abs(C(f.t + d) - out.mean) > tolerance) {
                f.half_width = d;
            }
        }
    });
    return out;
}

} // namespace xydm
