// xydm: command-line front end for the two-qubit / XY-chain decoherence model.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "xydm/cli.hpp"

namespace {

using namespace xydm;
using namespace xydm::cli;

// Flag values are collected here and applied on top of file and environment.
struct Overrides {
    std::string config;
    std::optional<double> N, gamma, lambda, D, g, J;
    std::optional<double> t_start, t_end, dt;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::vector<std::string> sweep;
    std::optional<double> tolerance;
    std::optional<std::string> analysis;
    std::optional<int> m_max;
    std::optional<std::string> Ns, check_N, check_lambda, check_g, check_gamma, check_D;
    std::optional<double> analysis_dt;
    bool dump_modes{false};
};

void add_model_flags(CLI::App& app, Overrides& o) {
    app.add_option("--config", o.config, "JSON config file");
    app.add_option("--N", o.N, "chain length");
    app.add_option("--gamma", o.gamma, "anisotropy");
    app.add_option("--lambda", o.lambda, "transverse field");
    app.add_option("--D", o.D, "DM strength along z");
    app.add_option("--g", o.g, "qubit-chain coupling");
    app.add_option("--J", o.J, "qubit-qubit coupling");
    app.add_option("--t-start", o.t_start, "first time point");
    app.add_option("--t-end", o.t_end, "last time point");
    app.add_option("--dt", o.dt, "time step");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--threads", o.threads, "worker threads, 0 = all cores");
}

RunConfig resolve(const Overrides& o) {
    RunConfig c;
    if (!o.config.empty()) c = load_config(o.config);
    apply_environment(c);
    const std::pair<const char*, const std::optional<double>*> params[] = {
        {"N", &o.N}, {"gamma", &o.gamma}, {"lambda", &o.lambda}, {"D", &o.D}, {"g", &o.g}, {"J", &o.J}};
    for (const auto& [name, v] : params) {
        if (*v) set_param(c.model, name, **v, "--");
    }
    if (o.t_start || o.t_end || o.dt) {
        TimeGrid t = c.time.value_or(kDefaultTimeGrid);
        if (o.t_start) t.start = *o.t_start;
        if (o.t_end) t.end = *o.t_end;
        if (o.dt) t.dt = *o.dt;
        c.time = t;
    }
    if (o.out) c.output_dir = *o.out;
    if (o.threads) c.threads = *o.threads;
    if (!o.sweep.empty()) {
        c.sweep.clear();
        for (const auto& s : o.sweep) c.sweep.push_back(parse_axis_spec(s));
    }
    if (o.tolerance) c.tolerance = *o.tolerance;
    if (o.analysis) c.analysis.name = *o.analysis;
    if (o.m_max) c.analysis.m_max = *o.m_max;
    if (o.analysis_dt) c.analysis.dt = *o.analysis_dt;
    if (o.Ns) c.analysis.Ns = to_ints(parse_values(*o.Ns, "--Ns"), "--Ns");
    if (o.check_N) c.check.Ns = to_ints(parse_values(*o.check_N, "--check-N"), "--check-N");
    if (o.check_lambda) c.check.lambdas = parse_values(*o.check_lambda, "--check-lambda");
    if (o.check_g) c.check.gs = parse_values(*o.check_g, "--check-g");
    if (o.check_gamma) c.check.gammas = parse_values(*o.check_gamma, "--check-gamma");
    if (o.check_D) c.check.Ds = parse_values(*o.check_D, "--check-D");
    if (o.dump_modes) c.dump_modes = true;
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-qubit entanglement dynamics in an XY spin chain with DM interaction"};
    app.require_subcommand(1);
    Overrides o;

    auto* evolve = app.add_subcommand("evolve", "C(t) and decoherence factors for one parameter point");
    add_model_flags(*evolve, o);
    evolve->add_flag("--dump-modes", o.dump_modes, "also write the momentum-mode table");

    auto* sweep = app.add_subcommand("sweep", "C(t) over a grid of one or two parameter axes");
    add_model_flags(*sweep, o);
    sweep->add_option("--sweep", o.sweep, "axis as name=v1,v2,... or name=start:stop:step (repeatable)");

    auto* check = app.add_subcommand("check", "compare against exact diagonalization (N <= 12)");
    add_model_flags(*check, o);
    check->add_option("--tolerance", o.tolerance, "agreement threshold");
    check->add_option("--check-N", o.check_N, "chain lengths");
    check->add_option("--check-lambda", o.check_lambda, "fields");
    check->add_option("--check-g", o.check_g, "couplings");
    check->add_option("--check-gamma", o.check_gamma, "anisotropies");
    check->add_option("--check-D", o.check_D, "DM strengths");

    auto* analyze = app.add_subcommand("analyze", "width, scaling, resonance, platform or fig2..fig7");
    add_model_flags(*analyze, o);
    analyze->add_option("--analysis", o.analysis, "analysis name");
    analyze->add_option("--m-max", o.m_max, "resonances to scan");
    analyze->add_option("--Ns", o.Ns, "chain lengths for scaling");
    analyze->add_option("--analysis-dt", o.analysis_dt, "fine time step for maxima and peak scans");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const RunConfig c = resolve(o);
        if (*evolve) return evolve_cmd(c, std::cerr);
        if (*sweep) return sweep_cmd(c, std::cerr);
        if (*check) return check_cmd(c, std::cerr);
        return analyze_cmd(c, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SizeLimitError& e) {
        std::cerr << "size limit: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}
