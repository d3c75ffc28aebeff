// cli.hpp: run configuration and the evolve / sweep / check / analyze commands
//
// Configuration precedence, lowest to highest: built-in defaults, the JSON
// config file, environment (XYDM_OUTPUT_DIR, XYDM_THREADS), command-line flags.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xydm/analysis.hpp"
#include "xydm/decoherence.hpp"
#include "xydm/errors.hpp"
#include "xydm/io.hpp"
#include "xydm/model.hpp"
#include "xydm/oracle.hpp"
#include "xydm/parallel.hpp"
#include "xydm/qubits.hpp"
#include "xydm/spectrum.hpp"

namespace xydm::cli {

using nlohmann::json;

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitValidation = 2 };

// ---------------------------------------------------------------------------
// Configuration types

struct TimeGrid {
    double start{0.0};
    double end{20.0};
    double dt{0.01};

    void validate() const {
        if (!std::isfinite(start)) throw ConfigError("time.start", "must be finite");
        if (!std::isfinite(end)) throw ConfigError("time.end", "must be finite");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time.dt", "must be positive");
        if (!(end > start)) throw ConfigError("time.end", "must exceed time.start");
    }

    // start, start + dt, ... up to end (inclusive within roundoff).
    std::vector<double> points() const {
        validate();
        const auto n = static_cast<std::size_t>(std::floor((end - start) / dt + 1e-9));
        std::vector<double> ts(n + 1);
        for (std::size_t i = 0; i <= n; ++i) ts[i] = start + static_cast<double>(i) * dt;
        return ts;
    }

    bool operator==(const TimeGrid&) const = default;
};

inline constexpr std::string_view kParamNames[] = {"N", "gamma", "lambda", "D", "g", "J"};

inline bool is_param_name(std::string_view name) {
    return std::find(std::begin(kParamNames), std::end(kParamNames), name) != std::end(kParamNames);
}

inline void set_param(ModelParams& p, std::string_view name, double v, std::string_view key_prefix = "") {
    const std::string key = std::string(key_prefix) + std::string(name);
    if (name == "N") {
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key, "N must be an integer");
        p.N = static_cast<int>(v);
    } else if (name == "gamma") {
        p.gamma = v;
    } else if (name == "lambda") {
        p.lambda = v;
    } else if (name == "D") {
        p.D = v;
    } else if (name == "g") {
        p.g = v;
    } else if (name == "J") {
        p.J = v;
    } else {
        throw ConfigError(key, "unknown model parameter");
    }
}

struct SweepAxis {
    std::string name;
    std::vector<double> values;

    bool operator==(const SweepAxis&) const = default;
};

// start, start + step, ... up to stop inclusive.
inline std::vector<double> expand_range(double start, double stop, double step, const std::string& key) {
    if (!std::isfinite(start) || !std::isfinite(stop)) throw ConfigError(key, "range bounds must be finite");
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError(key, "range step must be positive");
    if (stop < start) throw ConfigError(key, "range stop is below start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    if (n > 1000000) throw ConfigError(key, "range has too many values");
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) v[i] = start + static_cast<double>(i) * step;
    return v;
}

inline double parse_number(std::string_view text, const std::string& key) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError(key, "cannot parse number '" + std::string(text) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    for (;;) {
        const std::size_t pos = s.find(sep);
        out.push_back(s.substr(0, pos));
        if (pos == std::string_view::npos) return out;
        s.remove_prefix(pos + 1);
    }
}

// Comma list "0.1,0.2" or inclusive range "start:stop:step".
inline std::vector<double> parse_values(std::string_view text, const std::string& key) {
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw ConfigError(key, "range must be start:stop:step");
        return expand_range(parse_number(parts[0], key), parse_number(parts[1], key), parse_number(parts[2], key), key);
    }
    std::vector<double> v;
    for (auto part : split(text, ',')) v.push_back(parse_number(part, key));
    return v;
}

// "name=values" as accepted by --sweep.
inline SweepAxis parse_axis_spec(std::string_view spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string_view::npos) throw ConfigError("sweep", "expected name=values, got '" + std::string(spec) + "'");
    SweepAxis axis{std::string(spec.substr(0, eq)), {}};
    if (!is_param_name(axis.name)) throw ConfigError("sweep." + axis.name, "unknown model parameter");
    axis.values = parse_values(spec.substr(eq + 1), "sweep." + axis.name);
    return axis;
}

inline std::vector<int> to_ints(const std::vector<double>& v, const std::string& key) {
    std::vector<int> out;
    for (double x : v) {
        if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key, "expected integers");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

// Oracle validation matrix: the product of all lists, J from the model.
struct CheckGrid {
    std::vector<int> Ns{4, 6, 8};
    std::vector<double> lambdas{0.5, 1.0, 1.5};
    std::vector<double> gs{0.05, 0.3, 1.0};
    std::vector<double> gammas{1.0, 0.6};
    std::vector<double> Ds{0.0};

    bool operator==(const CheckGrid&) const = default;
};

inline const std::vector<std::string> kAnalysisNames{"width", "scaling", "resonance", "platform", "fig2",
                                                     "fig3",  "fig4",    "fig5",      "fig6",     "fig7"};

struct AnalysisOptions {
    std::string name{"width"};
    std::vector<int> Ns{401, 801, 1201, 1601, 2001};
    int m_max{8};
    double dt{1e-3};          // fine step for maxima, peak scans and platforms
    double exclusion{0.1};    // platform: distance from m pi/2 left out
    double platform_tolerance{0.05};
    double t_end{10.0};       // platform window

    bool operator==(const AnalysisOptions&) const = default;
};

struct RunConfig {
    ModelParams model;
    std::optional<TimeGrid> time;  // unset: each command uses its own default
    std::vector<SweepAxis> sweep;
    std::string output_dir{"xydm_out"};
    int threads{0};                // 0: all available cores
    double tolerance{1e-8};        // oracle agreement threshold
    CheckGrid check;
    AnalysisOptions analysis;
    bool dump_modes{false};

    TimeGrid time_or(const TimeGrid& fallback) const { return time.value_or(fallback); }
    std::filesystem::path out() const { return output_dir; }
};

inline void to_json(json& j, const TimeGrid& t) { j = json{{"start", t.start}, {"end", t.end}, {"dt", t.dt}}; }

inline void to_json(json& j, const RunConfig& c) {
    j = json::object();
    j["model"] = c.model;
    j["time"] = c.time ? json(*c.time) : json(nullptr);
    json axes = json::array();
    for (const auto& a : c.sweep) axes.push_back({{"name", a.name}, {"values", a.values}});
    j["sweep"] = axes;
    j["output_dir"] = c.output_dir;
    j["threads"] = c.threads;
    j["tolerance"] = c.tolerance;
    j["check"] = {{"N", c.check.Ns}, {"lambda", c.check.lambdas}, {"g", c.check.gs},
                  {"gamma", c.check.gammas}, {"D", c.check.Ds}};
    j["analysis"] = {{"name", c.analysis.name},           {"Ns", c.analysis.Ns},
                     {"m_max", c.analysis.m_max},         {"dt", c.analysis.dt},
                     {"exclusion", c.analysis.exclusion}, {"platform_tolerance", c.analysis.platform_tolerance},
                     {"t_end", c.analysis.t_end}};
    j["dump_modes"] = c.dump_modes;
}

namespace detail {

inline double number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    return v.get<double>();
}

inline int integer(const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    return v.get<int>();
}

inline const json& object(const json& v, const std::string& key) {
    if (!v.is_object()) throw ConfigError(key, "expected a JSON object");
    return v;
}

// A list of numbers, or {"start", "stop", "step"}.
inline std::vector<double> values(const json& v, const std::string& key) {
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& x : v) out.push_back(number(x, key));
        if (out.empty()) throw ConfigError(key, "list is empty");
        return out;
    }
    if (v.is_object()) {
        double start = 0, stop = 0, step = 0;
        bool has[3] = {false, false, false};
        for (const auto& el : v.items()) {
            const std::string sub = key + "." + el.key();
            if (el.key() == "start") start = number(el.value(), sub), has[0] = true;
            else if (el.key() == "stop") stop = number(el.value(), sub), has[1] = true;
            else if (el.key() == "step") step = number(el.value(), sub), has[2] = true;
            else throw ConfigError(sub, "unknown range key");
        }
        if (!(has[0] && has[1] && has[2])) throw ConfigError(key, "range needs start, stop and step");
        return expand_range(start, stop, step, key);
    }
    throw ConfigError(key, "expected a list of numbers or a range object");
}

} // namespace detail

// Applies the keys present in j; rejects unknown keys by their dotted path.
inline void update_from_json(const json& j, RunConfig& c) {
    detail::object(j, "config");
    for (const auto& el : j.items()) {
        const std::string& key = el.key();
        const json& v = el.value();
        if (key == "model") {
            detail::object(v, "model");
            for (const auto& m : v.items()) {
                if (!is_param_name(m.key())) throw ConfigError("model." + m.key(), "unknown model parameter");
                if (!m.value().is_number()) throw ConfigError("model." + m.key(), "expected a number");
                if (m.key() == "N" && !m.value().is_number_integer()) throw ConfigError("model.N", "expected an integer");
                set_param(c.model, m.key(), m.value().get<double>(), "model.");
            }
        } else if (key == "time") {
            if (v.is_null()) {
                c.time.reset();
                continue;
            }
            detail::object(v, "time");
            TimeGrid t = c.time.value_or(TimeGrid{});
            for (const auto& f : v.items()) {
                const std::string sub = "time." + f.key();
                if (f.key() == "start") t.start = detail::number(f.value(), sub);
                else if (f.key() == "end") t.end = detail::number(f.value(), sub);
                else if (f.key() == "dt") t.dt = detail::number(f.value(), sub);
                else throw ConfigError(sub, "unknown key");
            }
            c.time = t;
        } else if (key == "sweep") {
            if (!v.is_array()) throw ConfigError("sweep", "expected a list of {name, values} objects");
            c.sweep.clear();
            for (const auto& a : v) {
                detail::object(a, "sweep");
                SweepAxis axis;
                bool has_values = false;
                for (const auto& f : a.items()) {
                    if (f.key() == "name") {
                        if (!f.value().is_string()) throw ConfigError("sweep.name", "expected a string");
                        axis.name = f.value().get<std::string>();
                    } else if (f.key() != "values") {
                        throw ConfigError("sweep." + f.key(), "unknown key");
                    }
                }
                if (!is_param_name(axis.name)) throw ConfigError("sweep." + axis.name, "unknown model parameter");
                for (const auto& f : a.items()) {
                    if (f.key() == "values") {
                        axis.values = detail::values(f.value(), "sweep." + axis.name);
                        has_values = true;
                    }
                }
                if (!has_values) throw ConfigError("sweep." + axis.name, "missing values");
                c.sweep.push_back(std::move(axis));
            }
        } else if (key == "output_dir") {
            if (!v.is_string()) throw ConfigError("output_dir", "expected a string");
            c.output_dir = v.get<std::string>();
        } else if (key == "threads") {
            c.threads = detail::integer(v, "threads");
        } else if (key == "tolerance") {
            c.tolerance = detail::number(v, "tolerance");
        } else if (key == "dump_modes") {
            if (!v.is_boolean()) throw ConfigError("dump_modes", "expected true or false");
            c.dump_modes = v.get<bool>();
        } else if (key == "check") {
            detail::object(v, "check");
            for (const auto& f : v.items()) {
                const std::string sub = "check." + f.key();
                if (f.key() == "N") c.check.Ns = to_ints(detail::values(f.value(), sub), sub);
                else if (f.key() == "lambda") c.check.lambdas = detail::values(f.value(), sub);
                else if (f.key() == "g") c.check.gs = detail::values(f.value(), sub);
                else if (f.key() == "gamma") c.check.gammas = detail::values(f.value(), sub);
                else if (f.key() == "D") c.check.Ds = detail::values(f.value(), sub);
                else throw ConfigError(sub, "unknown key");
            }
        } else if (key == "analysis") {
            detail::object(v, "analysis");
            for (const auto& f : v.items()) {
                const std::string sub = "analysis." + f.key();
                if (f.key() == "name") {
                    if (!f.value().is_string()) throw ConfigError(sub, "expected a string");
                    c.analysis.name = f.value().get<std::string>();
                } else if (f.key() == "Ns") {
                    c.analysis.Ns = to_ints(detail::values(f.value(), sub), sub);
                } else if (f.key() == "m_max") {
                    c.analysis.m_max = detail::integer(f.value(), sub);
                } else if (f.key() == "dt") {
                    c.analysis.dt = detail::number(f.value(), sub);
                } else if (f.key() == "exclusion") {
                    c.analysis.exclusion = detail::number(f.value(), sub);
                } else if (f.key() == "platform_tolerance") {
                    c.analysis.platform_tolerance = detail::number(f.value(), sub);
                } else if (f.key() == "t_end") {
                    c.analysis.t_end = detail::number(f.value(), sub);
                } else {
                    throw ConfigError(sub, "unknown key");
                }
            }
        } else {
            throw ConfigError(key, "unknown configuration key");
        }
    }
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = {}) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw ConfigError("config", e.what());
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    update_from_json(j, base);
    return base;
}

// getenv is injectable for tests.
inline void apply_environment(RunConfig& c, const std::function<const char*(const char*)>& getenv = std::getenv) {
    if (const char* dir = getenv("XYDM_OUTPUT_DIR"); dir && *dir) c.output_dir = dir;
    if (const char* n = getenv("XYDM_THREADS"); n && *n) {
        const double v = parse_number(n, "XYDM_THREADS");
        if (v != std::floor(v) || v < 0 || v > 4096) throw ConfigError("XYDM_THREADS", "expected a non-negative integer");
        c.threads = static_cast<int>(v);
    }
}

inline void validate_common(const RunConfig& c) {
    c.model.validate();
    if (c.time) c.time->validate();
    if (c.threads < 0) throw ConfigError("threads", "must be >= 0");
    if (c.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
    if (!(c.tolerance > 0.0)) throw ConfigError("tolerance", "must be positive");
}

// ---------------------------------------------------------------------------
// Output helpers

inline const TimeGrid kDefaultTimeGrid{0.0, 20.0, 0.01};
inline const TimeGrid kCheckTimeGrid{0.0, 10.0, 0.05};

inline json point_summary(const ConcurrenceSeries& s) {
    const std::size_t i = s.argmax();
    return {{"params", s.params},
            {"C_max", s.C[i]},
            {"t_at_max", s.times()[i]},
            {"gapless", s.trace.gapless},
            {"degenerate", s.trace.degenerate}};
}

inline std::vector<std::string> warnings_for(const ModeTable& table) {
    std::vector<std::string> w;
    if (table.gapless) {
        w.push_back("gapless: min Omega = " + format_double(table.min_omega) +
                    " < 0, the quasiparticle vacuum is not the bath ground state");
    }
    if (table.degenerate) w.push_back("degenerate Bogoliubov mode: theta set to 0");
    return w;
}

inline std::string param_columns(const ModelParams& p) {
    return std::to_string(p.N) + ',' + format_double(p.gamma) + ',' + format_double(p.lambda) + ',' +
           format_double(p.D) + ',' + format_double(p.g) + ',' + format_double(p.J);
}

inline constexpr std::string_view kSeriesColumns = "t,C,absF12,absF14,absF24";
inline constexpr std::string_view kParamColumns = "N,gamma,lambda,D,g,J";

// One row per time point. With params: N..J, t, C, |F|..., gapless; an
// optional leading panel column.
inline std::string series_rows(const ConcurrenceSeries& s, bool with_params, std::string_view panel = {}) {
    std::string out;
    const std::string prefix = (panel.empty() ? std::string() : csv_quote(panel) + ',') +
                               (with_params ? param_columns(s.params) + ',' : std::string());
    const std::string suffix = with_params ? std::string(",") + (s.trace.gapless ? "1" : "0") : std::string();
    for (std::size_t i = 0; i < s.C.size(); ++i) {
        out += prefix;
        out += format_double(s.trace.times[i]);
        out += ',';
        out += format_double(s.C[i]);
        out += ',';
        out += format_double(std::abs(s.trace.F12[i]));
        out += ',';
        out += format_double(std::abs(s.trace.F14[i]));
        out += ',';
        out += format_double(std::abs(s.trace.F24[i]));
        out += suffix;
        out += '\n';
    }
    return out;
}

inline std::string factor_rows(const DecoherenceTrace& tr) {
    std::string out = "t,reF12,imF12,reF14,imF14,reF24,imF24,absF12,absF14,absF24\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
        out += format_double(tr.times[i]);
        for (const auto* f : {&tr.F12, &tr.F14, &tr.F24}) {
            out += ',' + format_double((*f)[i].real()) + ',' + format_double((*f)[i].imag());
        }
        for (const auto* f : {&tr.F12, &tr.F14, &tr.F24}) out += ',' + format_double(std::abs((*f)[i]));
        out += '\n';
    }
    return out;
}

inline void report_warnings(std::ostream& log, const std::string& where, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) log << "warning: " << where << ": " << w << '\n';
}

// ---------------------------------------------------------------------------
// evolve

inline int evolve_cmd(const RunConfig& c, std::ostream& log) {
    validate_common(c);
    const TimeGrid grid = c.time_or(kDefaultTimeGrid);
    const auto times = grid.points();
    const ModeTable table = build_mode_table(c.model, c.threads);
    const ConcurrenceSeries series = concurrence_series(c.model, times, c.threads);

    const auto out = c.out();
    write_text_file(out / "evolve.csv", std::string(kSeriesColumns) + "\n" + series_rows(series, false));
    write_text_file(out / "factors.csv", factor_rows(series.trace));
    if (c.dump_modes) {
        std::ostringstream modes;
        write_mode_table_csv(modes, table);
        write_text_file(out / "modes.csv", modes.str());
    }
    const auto warnings = warnings_for(table);
    report_warnings(log, "evolve", warnings);
    json meta = point_summary(series);
    meta["config"] = c;
    meta["time_grid"] = grid;
    meta["min_omega"] = table.min_omega;
    meta["warnings"] = warnings;
    write_json_file(out / "evolve.json", meta);
    log << "evolve: " << times.size() << " time points, C_max = " << format_double(meta["C_max"].get<double>())
        << " -> " << out.string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

inline std::vector<ModelParams> sweep_points(const RunConfig& c) {
    if (c.sweep.empty()) throw ConfigError("sweep", "at least one sweep axis is required");
    if (c.sweep.size() > 2) throw ConfigError("sweep", "at most two sweep axes are supported");
    if (c.sweep.size() == 2 && c.sweep[0].name == c.sweep[1].name) throw ConfigError("sweep." + c.sweep[1].name, "axis repeated");
    std::vector<ModelParams> points{c.model};
    for (const auto& axis : c.sweep) {
        if (axis.values.empty()) throw ConfigError("sweep." + axis.name, "no values");
        std::vector<ModelParams> next;
        for (const auto& p : points) {
            for (double v : axis.values) {
                ModelParams q = p;
                set_param(q, axis.name, v, "sweep.");
                q.validate();
                next.push_back(q);
            }
        }
        points = std::move(next);
    }
    return points;
}

inline int sweep_cmd(const RunConfig& c, std::ostream& log) {
    validate_common(c);
    const auto points = sweep_points(c);
    const TimeGrid grid = c.time_or(kDefaultTimeGrid);
    const auto times = grid.points();
    const auto out = c.out();
    const auto cache = out / "sweep_points";
    std::filesystem::create_directories(cache);

    std::vector<std::string> rows(points.size());
    std::vector<json> summaries(points.size());
    std::vector<char> reused(points.size(), 0);
    const int inner = points.size() == 1 ? c.threads : 1;
    parallel_for(points.size(), points.size() == 1 ? 1 : c.threads, [&](std::size_t i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "point_%05zu", i);
        const auto rows_path = cache / (std::string(stem) + ".csv");
        const auto done_path = cache / (std::string(stem) + ".done");
        const json key = {{"params", points[i]}, {"time", grid}};
        if (std::filesystem::exists(done_path) && std::filesystem::exists(rows_path)) {
            try {
                const json marker = json::parse(read_text_file(done_path));
                if (marker.at("key") == key) {
                    rows[i] = read_text_file(rows_path);
                    summaries[i] = marker.at("summary");
                    reused[i] = 1;
                    return;
                }
            } catch (const std::exception&) {
                // Stale or truncated marker: recompute.
            }
        }
        const ConcurrenceSeries s = concurrence_series(points[i], times, inner);
        rows[i] = series_rows(s, true);
        summaries[i] = point_summary(s);
        write_text_file(rows_path, rows[i]);
        write_json_file(done_path, json{{"key", key}, {"summary", summaries[i]}});
    });

    std::string body = std::string(kParamColumns) + ',' + std::string(kSeriesColumns) + ",gapless\n";
    std::size_t n_reused = 0, n_gapless = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        body += rows[i];
        n_reused += reused[i];
        if (summaries[i].at("gapless").get<bool>()) ++n_gapless;
    }
    write_text_file(out / "sweep.csv", body);
    json meta = {{"config", c}, {"time_grid", grid}, {"points", summaries}};
    write_json_file(out / "sweep.json", meta);
    if (n_gapless) log << "warning: sweep: " << n_gapless << " point(s) have negative quasiparticle energies\n";
    log << "sweep: " << points.size() << " points x " << times.size() << " times (" << n_reused
        << " resumed) -> " << out.string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// check

inline std::vector<ModelParams> check_points(const RunConfig& c) {
    std::vector<ModelParams> points;
    for (int N : c.check.Ns) {
        if (N > oracle::kMaxBathSites) {
            throw ConfigError("check.N", "N = " + std::to_string(N) + " exceeds the exact-diagonalization limit of " +
                                             std::to_string(oracle::kMaxBathSites) +
                                             "; use evolve or sweep for long chains");
        }
        for (double gamma : c.check.gammas)
            for (double lambda : c.check.lambdas)
                for (double g : c.check.gs)
                    for (double D : c.check.Ds) {
                        ModelParams p{N, gamma, lambda, D, g, c.model.J};
                        p.validate();
                        points.push_back(p);
                    }
    }
    if (points.empty()) throw ConfigError("check", "validation grid is empty");
    return points;
}

inline int check_cmd(const RunConfig& c, std::ostream& log) {
    validate_common(c);
    const auto points = check_points(c);
    const TimeGrid grid = c.time_or(kCheckTimeGrid);
    const auto times = grid.points();
    std::vector<oracle::OracleReport> reports(points.size());
    parallel_for(points.size(), c.threads, [&](std::size_t i) { reports[i] = oracle::compare(points[i], times, c.tolerance); });

    std::ostringstream csv, rows;
    oracle::write_report_header(csv);
    for (const auto& r : reports) oracle::write_report_row(rows, r);
    csv << rows.str();
    const auto out = c.out();
    write_text_file(out / "check.csv", csv.str());

    const auto ledger = out / "validation_ledger.csv";
    {
        const bool fresh = !std::filesystem::exists(ledger);
        std::ofstream app(ledger, std::ios::binary | std::ios::app);
        if (!app) throw Error("cannot append to " + ledger.string());
        if (fresh) oracle::write_report_header(app);
        app << rows.str();
    }

    std::size_t failed = 0;
    double worst_graded = 0.0, worst_info = 0.0;
    json failures = json::array();
    for (const auto& r : reports) {
        double& worst = r.graded ? worst_graded : worst_info;
        worst = std::max({worst, r.max_factor_dev, r.max_concurrence_dev});
        if (r.failed()) {
            ++failed;
            failures.push_back(r.params);
        }
    }
    json meta = {{"config", c},
                 {"time_grid", grid},
                 {"points", reports.size()},
                 {"failed", failed},
                 {"failures", failures},
                 {"max_graded_deviation", worst_graded},
                 {"max_informational_deviation", worst_info}};
    write_json_file(out / "check.json", meta);
    log << "check: " << reports.size() << " points, " << failed << " failed, max graded deviation "
        << format_double(worst_graded) << " (tolerance " << format_double(c.tolerance) << ")\n";
    return failed ? kExitValidation : kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

namespace detail {

struct Curve {
    std::string panel;
    ModelParams params;
};

inline json summarize_width(const ModelParams& p, std::string& csv) {
    const WidthResult w = width_A(p);
    const ModeTable table = build_mode_table(p);
    csv = "k,Theta4,summand\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double T = table[BasisState::s11].Theta[i];
        csv += format_double(table.ks[i]) + ',' + format_double(T) + ',' + format_double(1.0 - std::cos(4.0 * T)) + '\n';
    }
    json j = {{"params", p}, {"A_sum", w.A_sum}};
    j["A_closed"] = w.A_closed ? json(*w.A_closed) : json(nullptr);
    j["relative_gap"] = w.relative_gap ? json(*w.relative_gap) : json(nullptr);
    if (w.A_sum > 0.0) {
        const LineFit fit = fit_spike_decay(p);
        j["spike_fit"] = {{"A_fit", fit.slope}, {"r2", fit.r2}, {"relative_to_sum", fit.slope / w.A_sum - 1.0}};
    }
    return j;
}

inline json summarize_scaling(const std::vector<int>& Ns, const ModelParams& base, double dt, int threads,
                              std::string& csv) {
    const ScalingFit s = max_concurrence_scaling(Ns, base, dt, threads);
    csv = "N,sqrtN,C_max,lnC_max,t_at_max\n";
    json points = json::array();
    for (const auto& pt : s.points) {
        csv += std::to_string(pt.N) + ',' + format_double(std::sqrt(double(pt.N))) + ',' + format_double(pt.C_max) +
               ',' + (pt.C_max > 0 ? format_double(std::log(pt.C_max)) : std::string("")) + ',' +
               format_double(pt.t_at_max) + '\n';
        points.push_back({{"N", pt.N}, {"C_max", pt.C_max}, {"t_at_max", pt.t_at_max}});
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < s.points.size(); ++i) decreasing = decreasing && s.points[i].C_max < s.points[i - 1].C_max;
    return {{"base", base},
            {"dt", dt},
            {"points", points},
            {"excluded", s.excluded},
            {"strictly_decreasing", decreasing},
            {"fit", {{"slope", s.fit.slope}, {"intercept", s.fit.intercept}, {"r2", s.fit.r2}}}};
}

inline std::string nan_or(double v) { return std::isnan(v) ? std::string("nan") : format_double(v); }

inline json summarize_resonance(const ModelParams& p, int m_max, double dt, int threads, std::string& csv) {
    const auto peaks = resonance_scan(p, m_max, dt, threads);
    csv = "m,t,C_peak,floor,width\n";
    json rows = json::array();
    for (const auto& pk : peaks) {
        csv += std::to_string(pk.m) + ',' + format_double(pk.t) + ',' + format_double(pk.C_peak) + ',' +
               format_double(pk.floor) + ',' + nan_or(pk.width) + '\n';
        rows.push_back({{"m", pk.m}, {"t", pk.t}, {"C_peak", pk.C_peak}, {"floor", pk.floor},
                        {"width", std::isnan(pk.width) ? json(nullptr) : json(pk.width)}});
    }
    return {{"params", p}, {"dt", dt}, {"peaks", rows}};
}

inline json summarize_platform(const ModelParams& p, const AnalysisOptions& a, int threads, std::string& csv) {
    const PlatformProfile pr = platform_profile(p, a.t_end, a.exclusion, a.dt, a.platform_tolerance, threads);
    csv = "m,t,C_at,kind,half_width\n";
    json feats = json::array();
    for (const auto& f : pr.features) {
        csv += std::to_string(f.m) + ',' + format_double(f.t) + ',' + format_double(f.C_at) + ',' +
               (f.peak ? "peak" : "valley") + ',' + format_double(f.half_width) + '\n';
        feats.push_back({{"m", f.m}, {"t", f.t}, {"C_at", f.C_at}, {"peak", f.peak}, {"half_width", f.half_width}});
    }
    return {{"params", p},
            {"t_end", a.t_end},
            {"exclusion", pr.exclusion},
            {"tolerance", pr.tolerance},
            {"dt", a.dt},
            {"samples", pr.samples},
            {"mean", pr.mean},
            {"min", pr.min},
            {"max", pr.max},
            {"features", feats}};
}

// Long-format bundle: panel column plus the sweep columns.
inline json write_curves(const std::vector<Curve>& curves, const std::vector<double>& times, int threads,
                         const std::filesystem::path& csv_path, std::ostream& log, const std::string& name) {
    std::vector<std::string> rows(curves.size());
    std::vector<json> summaries(curves.size());
    parallel_for(curves.size(), threads, [&](std::size_t i) {
        const ConcurrenceSeries s = concurrence_series(curves[i].params, times, 1);
        rows[i] = series_rows(s, true, curves[i].panel);
        summaries[i] = point_summary(s);
        summaries[i]["panel"] = curves[i].panel;
    });
    std::string body = "panel," + std::string(kParamColumns) + ',' + std::string(kSeriesColumns) + ",gapless\n";
    std::size_t gapless = 0;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        body += rows[i];
        if (summaries[i].at("gapless").get<bool>()) ++gapless;
    }
    write_text_file(csv_path, body);
    if (gapless) log << "warning: " << name << ": " << gapless << " curve(s) have negative quasiparticle energies\n";
    return summaries;
}

inline std::vector<Curve> along(const std::string& panel, const ModelParams& base, const std::string& axis,
                                const std::vector<double>& values) {
    std::vector<Curve> out;
    for (double v : values) {
        Curve c{panel, base};
        set_param(c.params, axis, v);
        out.push_back(c);
    }
    return out;
}

inline void append(std::vector<Curve>& a, std::vector<Curve> b) { a.insert(a.end(), b.begin(), b.end()); }

} // namespace detail

inline int analyze_cmd(const RunConfig& c, std::ostream& log) {
    validate_common(c);
    const AnalysisOptions& a = c.analysis;
    if (std::find(kAnalysisNames.begin(), kAnalysisNames.end(), a.name) == kAnalysisNames.end()) {
        throw ConfigError("analysis.name", "unknown analysis '" + a.name + "'");
    }
    if (!(a.dt > 0.0)) throw ConfigError("analysis.dt", "must be positive");
    if (a.m_max < 1) throw ConfigError("analysis.m_max", "must be >= 1");
    if (a.Ns.empty()) throw ConfigError("analysis.Ns", "list is empty");
    const auto out = c.out();
    const std::string& name = a.name;
    json meta = {{"analysis", name}, {"config", c}};
    std::string csv;

    if (name == "width") {
        meta["result"] = detail::summarize_width(c.model, csv);
        write_text_file(out / "width.csv", csv);
    } else if (name == "scaling") {
        meta["result"] = detail::summarize_scaling(a.Ns, c.model, a.dt, c.threads, csv);
        write_text_file(out / "scaling.csv", csv);
    } else if (name == "resonance") {
        meta["result"] = detail::summarize_resonance(c.model, a.m_max, a.dt, c.threads, csv);
        write_text_file(out / "resonance.csv", csv);
    } else if (name == "platform") {
        meta["result"] = detail::summarize_platform(c.model, a, c.threads, csv);
        write_text_file(out / "platform.csv", csv);
    } else {
        // Figure bundles with the published parameter sets; only the time grid is configurable.
        const TimeGrid grid = c.time_or(kDefaultTimeGrid);
        const auto times = grid.points();
        meta["time_grid"] = grid;
        std::vector<detail::Curve> curves;
        const double J = 2.0;
        if (name == "fig2") {
            curves = detail::along("a", {801, 1.0, 0.0, 0.0, 0.05, J}, "lambda", expand_range(0.0, 2.0, 0.05, "lambda"));
        } else if (name == "fig3") {
            curves = detail::along("a", {401, 1.0, 1.0, 0.0, 0.05, J}, "N", {401, 801, 1201, 1601, 2001});
            std::string inset;
            meta["inset"] = detail::summarize_scaling({401, 801, 1201, 1601, 2001}, {401, 1.0, 1.0, 0.0, 0.05, J},
                                                      a.dt, c.threads, inset);
            write_text_file(out / "fig3_inset.csv", inset);
        } else if (name == "fig4") {
            const std::vector<double> Ds{0.0, 0.3, 0.6};
            detail::append(curves, detail::along("a", {2001, 0.8, 1.0, 0.0, 0.05, J}, "D", Ds));
            detail::append(curves, detail::along("b", {2001, 0.6, 1.0, 0.0, 0.05, J}, "D", Ds));
            detail::append(curves, detail::along("c", {2001, 0.4, 1.0, 0.0, 0.05, J}, "D", Ds));
        } else if (name == "fig5") {
            curves = detail::along("a", {801, 1.0, 1.0, 0.0, 0.0, J}, "g", expand_range(0.0, 2.0, 0.05, "g"));
        } else if (name == "fig6") {
            detail::append(curves, detail::along("a", {801, 0.0, 1.0, 0.0, 1.0, J}, "gamma", expand_range(0.0, 1.0, 0.05, "gamma")));
            detail::append(curves, detail::along("b", {801, 1.0, 1.0, 0.0, 1.0, J}, "D", expand_range(0.0, 1.0, 0.05, "D")));
            curves.push_back({"factors", {801, 1.0, 1.0, 0.0, 1.0, J}});
            std::string peaks;
            meta["resonance"] = detail::summarize_resonance({801, 1.0, 1.0, 0.0, 1.0, J}, a.m_max, a.dt, c.threads, peaks);
            write_text_file(out / "fig6_peaks.csv", peaks);
        } else {  // fig7
            const std::pair<const char*, ModelParams> panels[] = {
                {"a", {201, 1.0, 100.0, 0.0, 100.0, J}}, {"b", {801, 1.0, 100.0, 0.0, 100.0, J}},
                {"c", {1601, 1.0, 100.0, 0.0, 100.0, J}}, {"d", {201, 1.0, 10.0, 0.0, 10.0, J}},
                {"e", {201, 1.0, 50.0, 0.0, 50.0, J}},   {"f", {201, 1.0, 500.0, 0.0, 500.0, J}}};
            json platforms = json::array();
            for (const auto& [panel, p] : panels) {
                curves.push_back({panel, p});
                std::string unused;
                json pj = detail::summarize_platform(p, a, c.threads, unused);
                pj["panel"] = panel;
                platforms.push_back(pj);
            }
            meta["platforms"] = platforms;
        }
        meta["curves"] = detail::write_curves(curves, times, c.threads, out / (name + ".csv"), log, name);
    }
    write_json_file(out / (name + ".json"), meta);
    log << "analyze " << name << " -> " << out.string() << '\n';
    return kExitOk;
}

} // namespace xydm::cli
