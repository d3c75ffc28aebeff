#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "xydm/cli.hpp"

using namespace xydm;
using namespace xydm::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("xydm_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(XYDM_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path& p) { return read_text_file(p); }

} // namespace

TEST(CliConfig, Defaults) {
    const RunConfig c;
    EXPECT_EQ(c.threads, 0);
    EXPECT_FALSE(c.time.has_value());
    EXPECT_EQ(c.time_or(kDefaultTimeGrid), (TimeGrid{0.0, 20.0, 0.01}));
    EXPECT_EQ(kDefaultTimeGrid.points().size(), 2001u);
    EXPECT_EQ(kCheckTimeGrid.points().size(), 201u);
}

TEST(CliConfig, TimeGridValidation) {
    EXPECT_THROW((TimeGrid{0.0, 1.0, 0.0}).validate(), ConfigError);
    EXPECT_THROW((TimeGrid{1.0, 1.0, 0.1}).validate(), ConfigError);
    const auto ts = TimeGrid{0.0, 1.0, 0.1}.points();
    EXPECT_EQ(ts.size(), 11u);
    EXPECT_DOUBLE_EQ(ts.back(), 1.0);
}

TEST(CliConfig, ParsesValuesAndAxes) {
    EXPECT_EQ(parse_values("1,2.5,-3", "x"), (std::vector<double>{1.0, 2.5, -3.0}));
    EXPECT_EQ(parse_values("0:1:0.25", "x").size(), 5u);
    EXPECT_THROW(parse_values("0:1", "x"), ConfigError);
    EXPECT_THROW(parse_values("1,,2", "x"), ConfigError);
    const SweepAxis a = parse_axis_spec("lambda=0:2:0.5");
    EXPECT_EQ(a.name, "lambda");
    EXPECT_EQ(a.values.size(), 5u);
    try {
        parse_axis_spec("lamda=1");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "sweep.lamda");
    }
}

TEST(CliConfig, JsonRoundTripAndUnknownKeys) {
    RunConfig c;
    update_from_json(json::parse(R"({
        "model": {"N": 12, "lambda": 0.5, "g": 0.3},
        "time": {"end": 5, "dt": 0.1},
        "sweep": [{"name": "g", "values": {"start": 0, "stop": 1, "step": 0.5}}],
        "threads": 2,
        "check": {"N": [4], "D": [0.2]},
        "analysis": {"name": "resonance", "m_max": 3}
    })"), c);
    EXPECT_EQ(c.model.N, 12);
    EXPECT_EQ(c.model.g, 0.3);
    EXPECT_EQ(*c.time, (TimeGrid{0.0, 5.0, 0.1}));
    ASSERT_EQ(c.sweep.size(), 1u);
    EXPECT_EQ(c.sweep[0].values, (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(c.check.Ds, std::vector<double>{0.2});
    EXPECT_EQ(c.analysis.m_max, 3);

    RunConfig back;
    update_from_json(json(c), back);
    EXPECT_EQ(json(back), json(c));

    const std::map<std::string, std::string> bad = {
        {R"({"modle": {}})", "modle"},
        {R"({"model": {"lamda": 1}})", "model.lamda"},
        {R"({"model": {"N": 4.5}})", "model.N"},
        {R"({"time": {"step": 1}})", "time.step"},
        {R"({"check": {"lambdas": [1]}})", "check.lambdas"},
        {R"({"analysis": {"mmax": 2}})", "analysis.mmax"},
        {R"({"sweep": [{"name": "h", "values": [1]}]})", "sweep.h"},
        {R"({"threads": "four"})", "threads"},
    };
    for (const auto& [text, key] : bad) {
        RunConfig x;
        try {
            update_from_json(json::parse(text), x);
            ADD_FAILURE() << text;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.key(), key) << text;
        }
    }
}

TEST(CliConfig, ShippedConfigsLoad) {
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(XYDM_CONFIGS_DIR)) {
        if (entry.path().extension() != ".json") continue;
        SCOPED_TRACE(entry.path().string());
        const RunConfig c = load_config(entry.path());
        EXPECT_NO_THROW(validate_common(c));
        ++n;
    }
    EXPECT_GE(n, 4u);
}

TEST(CliConfig, EnvironmentOverrides) {
    RunConfig c;
    std::map<std::string, std::string> env{{"XYDM_OUTPUT_DIR", "/tmp/elsewhere"}, {"XYDM_THREADS", "3"}};
    auto get = [&](const char* k) -> const char* {
        auto it = env.find(k);
        return it == env.end() ? nullptr : it->second.c_str();
    };
    apply_environment(c, get);
    EXPECT_EQ(c.output_dir, "/tmp/elsewhere");
    EXPECT_EQ(c.threads, 3);
    env["XYDM_THREADS"] = "-1";
    EXPECT_THROW(apply_environment(c, get), ConfigError);
}

TEST(CliConfig, SweepPointOrder) {
    RunConfig c;
    c.sweep = {{"lambda", {0.5, 1.0}}, {"g", {0.1, 0.2, 0.3}}};
    const auto pts = sweep_points(c);
    ASSERT_EQ(pts.size(), 6u);
    EXPECT_EQ(pts[0].lambda, 0.5);
    EXPECT_EQ(pts[0].g, 0.1);
    EXPECT_EQ(pts[2].g, 0.3);
    EXPECT_EQ(pts[3].lambda, 1.0);
    c.sweep.push_back({"N", {4}});
    EXPECT_THROW(sweep_points(c), ConfigError);
    c.sweep = {{"N", {4.5}}};
    EXPECT_THROW(sweep_points(c), ConfigError);
}

TEST(CliConfig, CheckRefusesLargeChains) {
    RunConfig c;
    c.check.Ns = {4, 13};
    EXPECT_THROW(check_points(c), ConfigError);
    c.check.Ns = {4};
    EXPECT_EQ(check_points(c).size(), 18u);
}

TEST(CliCommands, EvolveDecoupledIsSine) {
    RunConfig c;
    c.model = {50, 1.0, 1.0, 0.0, 0.0, 2.0};
    c.output_dir = scratch("evolve_g0").string();
    c.threads = 2;
    std::ostringstream log;
    ASSERT_EQ(evolve_cmd(c, log), kExitOk);
    std::istringstream csv(read(c.out() / "evolve.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "t,C,absF12,absF14,absF24");
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        const double t = std::stod(line.substr(0, line.find(',')));
        const double C = std::stod(line.substr(line.find(',') + 1));
        EXPECT_NEAR(C, std::abs(std::sin(t)), 1e-11);  // values printed to 12 digits
        ++rows;
    }
    EXPECT_EQ(rows, 2001u);
    const json meta = json::parse(read(c.out() / "evolve.json"));
    EXPECT_EQ(meta.at("config").at("model").at("N"), 50);
    EXPECT_TRUE(meta.at("warnings").empty());
}

TEST(CliCommands, EvolveReportsGaplessWarning) {
    RunConfig c;
    c.model = {40, 0.3, 1.0, 0.5, 0.05, 2.0};
    c.time = TimeGrid{0.0, 1.0, 0.1};
    c.output_dir = scratch("evolve_gapless").string();
    std::ostringstream log;
    ASSERT_EQ(evolve_cmd(c, log), kExitOk);
    EXPECT_NE(log.str().find("warning"), std::string::npos);
    const json meta = json::parse(read(c.out() / "evolve.json"));
    EXPECT_TRUE(meta.at("gapless").get<bool>());
    EXPECT_FALSE(meta.at("warnings").empty());
}

TEST(CliCommands, SweepIsDeterministicAndResumable) {
    RunConfig c;
    c.model = {101, 1.0, 1.0, 0.0, 0.05, 2.0};
    c.time = TimeGrid{0.0, 2.0, 0.05};
    c.sweep = {{"lambda", {0.5, 1.0, 1.5}}, {"g", {0.05, 1.0}}};
    std::ostringstream log;

    c.output_dir = scratch("sweep_a").string();
    c.threads = 1;
    ASSERT_EQ(sweep_cmd(c, log), kExitOk);
    const std::string first = read(c.out() / "sweep.csv");

    RunConfig d = c;
    d.output_dir = scratch("sweep_b").string();
    d.threads = 4;
    ASSERT_EQ(sweep_cmd(d, log), kExitOk);
    EXPECT_EQ(read(d.out() / "sweep.csv"), first);

    // Drop one completed point and corrupt another marker: both are recomputed.
    fs::remove(d.out() / "sweep_points" / "point_00002.done");
    write_text_file(d.out() / "sweep_points" / "point_00004.done", "{");
    std::ostringstream resumed;
    ASSERT_EQ(sweep_cmd(d, resumed), kExitOk);
    EXPECT_NE(resumed.str().find("(4 resumed)"), std::string::npos) << resumed.str();
    EXPECT_EQ(read(d.out() / "sweep.csv"), first);
    EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 1 + 6 * 41);

    // A changed time grid invalidates every marker.
    d.time = TimeGrid{0.0, 2.0, 0.1};
    std::ostringstream changed;
    ASSERT_EQ(sweep_cmd(d, changed), kExitOk);
    EXPECT_NE(changed.str().find("(0 resumed)"), std::string::npos);
}

TEST(CliCommands, AnalyzeWidth) {
    RunConfig c;
    c.model = {800, 1.0, 1.0, 0.0, 1.0, 2.0};
    c.analysis.name = "width";
    c.output_dir = scratch("width").string();
    std::ostringstream log;
    ASSERT_EQ(analyze_cmd(c, log), kExitOk);
    const json r = json::parse(read(c.out() / "width.json")).at("result");
    EXPECT_NEAR(r.at("A_sum").get<double>(), 400.0, 1e-9);
    EXPECT_EQ(r.at("A_closed").get<double>(), 400.0);
    c.analysis.name = "fig9";
    EXPECT_THROW(analyze_cmd(c, log), ConfigError);
}

TEST(CliBinary, ExitCodes) {
    const fs::path out = scratch("binary");
    EXPECT_EQ(run("evolve --N 20 --t-end 1 --dt 0.1 --out " + (out / "ok").string()), 0);
    EXPECT_EQ(run("evolve --N 20 --dt 0 --out " + (out / "dt0").string()), 1);
    EXPECT_EQ(run("evolve --N 1 --out " + (out / "n1").string()), 1);
    EXPECT_EQ(run("sweep --sweep lambda=1,2 --sweep g=1 --sweep J=1 --out " + (out / "axes").string()), 1);
    EXPECT_EQ(run("check --check-N 13 --out " + (out / "big").string()), 1);
    EXPECT_EQ(run("analyze --analysis nope --out " + (out / "nope").string()), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("evolve --N 20 --t-end 1 --dt 0.1 --out " + (out / "ok").string() + " --config /nonexistent.json"), 1);
}

TEST(CliBinary, CheckPassesAndFlagsFailures) {
    const fs::path out = scratch("check");
    const std::string grid = " --check-N 4 --check-lambda 0.5 --check-g 0,0.3 --check-gamma 1 --t-end 2 --dt 0.1";
    EXPECT_EQ(run("check" + grid + " --out " + (out / "pass").string()), 0);
    EXPECT_EQ(run("check" + grid + " --check-D 0.3 --out " + (out / "dm").string()), 0);
    EXPECT_EQ(run("check" + grid + " --tolerance 1e-20 --out " + (out / "strict").string()), 2);
    const std::string csv = read(out / "pass" / "check.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_EQ(run("check" + grid + " --out " + (out / "pass").string()), 0);
    const std::string ledger = read(out / "pass" / "validation_ledger.csv");
    EXPECT_EQ(std::count(ledger.begin(), ledger.end(), '\n'), 5);  // one header, two runs of two rows
}

TEST(CliBinary, ConfigFileAndFlagPrecedence) {
    const fs::path out = scratch("precedence");
    write_text_file(out / "cfg.json", R"({"model": {"N": 30, "g": 0.0}, "time": {"end": 1, "dt": 0.5}})");
    ASSERT_EQ(run("evolve --config " + (out / "cfg.json").string() + " --N 40 --out " + (out / "run").string()), 0);
    const json meta = json::parse(read(out / "run" / "evolve.json"));
    EXPECT_EQ(meta.at("config").at("model").at("N"), 40);
    EXPECT_EQ(meta.at("config").at("model").at("g"), 0.0);
    EXPECT_EQ(meta.at("time_grid").at("dt"), 0.5);

    const std::string env_run = "XYDM_OUTPUT_DIR=" + (out / "env").string() + " " + std::string(XYDM_CLI_PATH) +
                                " evolve --config " + (out / "cfg.json").string() + " 2>/dev/null";
    ASSERT_EQ(std::system(env_run.c_str()), 0);
    EXPECT_TRUE(fs::exists(out / "env" / "evolve.csv"));
}

TEST(CliBinary, RepeatedRunsAreByteIdentical) {
    const fs::path out = scratch("determinism");
    const std::string args = "sweep --N 201 --sweep lambda=0.5:1.5:0.5 --t-end 3 --dt 0.05 --out ";
    ASSERT_EQ(run(args + (out / "a").string() + " --threads 1"), 0);
    ASSERT_EQ(run(args + (out / "b").string() + " --threads 3"), 0);
    EXPECT_EQ(read(out / "a" / "sweep.csv"), read(out / "b" / "sweep.csv"));
}
