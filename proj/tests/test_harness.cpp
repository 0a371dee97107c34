#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "dnls/harness.hpp"

using namespace dnls;
using harness::ConfigError;
using harness::RunConfig;

namespace {

const char* kMinimal1d = R"({
  "grid": {"counts": [24], "lengths": [1.0]},
  "m": 0.5,
  "a": {"ray_re": 1.0},
  "initial": {"kind": "sine", "amplitude": 1.0},
  "time": {"dt": 0.001, "steps": 40}
})";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() / ("dnls_test_" + tag);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("minimal config gets defaults") {
    const RunConfig cfg = harness::parse_config(kMinimal1d);
    CHECK(cfg.epsilon == 1e-12);
    CHECK(cfg.tol.solver == 1e-10);
    CHECK(cfg.tol.ledger == 1e-9);
    CHECK(cfg.snapshot_stride == 1);
    CHECK(cfg.seed == 1);
    CHECK(cfg.potential.kind == harness::PotentialConfig::Kind::zero);
    CHECK(cfg.forcing.kind == harness::ForcingConfig::Kind::zero);
}

TEST_CASE("config errors carry kinds and key paths") {
    SUBCASE("missing key") {
        try {
            harness::parse_config(R"({"m": 0.5})");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.kind == ConfigError::Kind::MissingKey);
            CHECK(e.key == "grid");
        }
    }
    SUBCASE("bad value") {
        std::string bad = kMinimal1d;
        bad.replace(bad.find("0.5"), 3, "1.5");
        try {
            harness::parse_config(bad);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.kind == ConfigError::Kind::BadValue);
            CHECK(e.key == "m");
        }
    }
    SUBCASE("coefficient outside C(m)") {
        const RunConfig cfg = [] {
            RunConfig c = harness::parse_config(kMinimal1d);
            c.a = harness::CoefficientConfig{false, 1.0, -1.0};
            return c;
        }();
        try {
            harness::build_inputs(cfg);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.kind == ConfigError::Kind::CoefficientOutsideC);
            CHECK(std::string(e.what()).find("Im(a)") != std::string::npos);
        }
    }
    SUBCASE("not json at all") {
        CHECK_THROWS_AS(harness::parse_config("{nope"), ConfigError);
    }
}

TEST_CASE("round trip: parse(emit(config)) == config") {
    RunConfig cfg = harness::parse_config(kMinimal1d);
    cfg.potential.kind = harness::PotentialConfig::Kind::harmonic;
    cfg.potential.strength = -0.37;
    cfg.forcing.kind = harness::ForcingConfig::Kind::windowed;
    cfg.forcing.t0 = 0.123456789012345;
    cfg.forcing.amplitude = 0.7;
    cfg.forcing.modes = {2};
    cfg.seed = 987654321;
    cfg.epsilon = 3.2e-11;
    const RunConfig back = harness::parse_config(harness::emit_config(cfg));
    CHECK(back == cfg);
}

TEST_CASE("built inputs respect the seed exactly") {
    RunConfig cfg = harness::parse_config(kMinimal1d);
    cfg.initial.kind = harness::InitialConfig::Kind::random;
    cfg.potential.kind = harness::PotentialConfig::Kind::random_split;
    cfg.potential.v1_bound = 0.5;
    cfg.potential.v2_amplitude = 0.3;
    const auto b1 = harness::build_inputs(cfg);
    const auto b2 = harness::build_inputs(cfg);
    CHECK(grid::max_abs_diff(b1.inputs.u0, b2.inputs.u0) == 0.0);
    CHECK(b1.inputs.potential.v1 == b2.inputs.potential.v1);
    cfg.seed = 2;
    const auto b3 = harness::build_inputs(cfg);
    CHECK(grid::max_abs_diff(b1.inputs.u0, b3.inputs.u0) > 0.0);
}

TEST_CASE("presets are listed with unique names") {
    const auto& list = harness::presets();
    CHECK(list.size() >= 6);
    for (std::size_t i = 0; i < list.size(); ++i) {
        CHECK_FALSE(list[i].description.empty());
        CHECK_FALSE(list[i].checks.empty());
        for (std::size_t j = i + 1; j < list.size(); ++j)
            CHECK(list[i].name != list[j].name);
    }
    CHECK(harness::find_preset("extinction-1d") != nullptr);
    CHECK(harness::find_preset("definitely-not-a-preset") == nullptr);
}

TEST_CASE("scenario artifacts are deterministic byte for byte") {
    TempDir d1("det1"), d2("det2");
    RunConfig cfg = harness::parse_config(kMinimal1d);
    cfg.initial.kind = harness::InitialConfig::Kind::random;
    const auto r1 = harness::run_scenario(cfg, {"mass-identity"}, d1.path.string());
    const auto r2 = harness::run_scenario(cfg, {"mass-identity"}, d2.path.string());
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(d1.path / "ledger.csv") == slurp(d2.path / "ledger.csv"));
    CHECK(slurp(d1.path / "report.json") == slurp(d2.path / "report.json"));
    CHECK(!slurp(d1.path / "summary.txt").empty());
    CHECK(!slurp(d1.path / "final_state.csv").empty());
}

TEST_CASE("exit codes: check failure and solver failure") {
    SUBCASE("failed check gives 3") {
        RunConfig cfg = harness::parse_config(kMinimal1d);
        // 40 steps of mild damping cannot extinguish the state
        const auto r = harness::run_scenario(cfg, {"extinction"}, "");
        CHECK(r.exit_code == 3);
        REQUIRE(r.checks.size() == 1);
        CHECK_FALSE(r.checks[0].pass);
    }
    SUBCASE("solver failure gives 2") {
        RunConfig cfg = harness::parse_config(kMinimal1d);
        cfg.epsilon = 0.0;  // sharp law forces the slow path
        cfg.time.dt = 1e6;
        cfg.initial.amplitude = 50.0;
        cfg.tol.solver = 1e-14;
        const auto r = harness::run_scenario(cfg, {"mass-identity"}, "");
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("unknown check names fail closed") {
    RunConfig cfg = harness::parse_config(kMinimal1d);
    const auto r = harness::run_scenario(cfg, {"no-such-check"}, "");
    CHECK(r.exit_code == 3);
}

TEST_CASE("sweep writes per-point artifacts and an aggregate") {
    TempDir d("sweep");
    std::ostringstream log;
    harness::SweepSpec spec;
    spec.base = harness::parse_config(kMinimal1d);
    spec.checks = {"mass-identity"};
    spec.axes.push_back({"m", {0.4, 0.6}});
    spec.axes.push_back({"a.ray_re", {0.5, 1.0}});
    const int failures = harness::sweep(spec, d.path.string(), log);
    CHECK(failures == 0);
    const std::string agg = slurp(d.path / "aggregate.csv");
    CHECK(agg.find("point,m,a.ray_re,t_num,fitted_rate,max_identity_residual,exit_code") == 0);
    // four points, one row each after the header
    CHECK(std::count(agg.begin(), agg.end(), '\n') == 5);
    CHECK(std::filesystem::exists(d.path / "point_0000" / "ledger.csv"));
    CHECK(std::filesystem::exists(d.path / "point_0003" / "report.json"));
}

TEST_CASE("dt sweep reports a first-order self-convergence column") {
    TempDir d("dtsweep");
    std::ostringstream log;
    harness::SweepSpec spec;
    spec.base = harness::parse_config(kMinimal1d);
    spec.base.time.dt = 4e-3;
    spec.base.time.steps = 25;  // horizon 0.1, preserved across the axis
    spec.axes.push_back({"time.dt", {4e-3, 2e-3, 1e-3}});
    const int failures = harness::sweep(spec, d.path.string(), log);
    CHECK(failures == 0);
    const std::string agg = slurp(d.path / "aggregate.csv");
    std::istringstream is(agg);
    std::string line, last;
    std::getline(is, line);
    CHECK(line.find("order_vs_prev") != std::string::npos);
    while (std::getline(is, line))
        if (!line.empty()) last = line;
    const double order = std::stod(last.substr(last.rfind(',') + 1));
    CHECK(order > 0.7);
    CHECK(order < 1.3);
}

TEST_CASE("sweep continues after a failing point") {
    TempDir d("sweepfail");
    std::ostringstream log;
    harness::SweepSpec spec;
    spec.base = harness::parse_config(kMinimal1d);
    spec.checks = {"extinction"};  // fails on this short horizon
    spec.axes.push_back({"m", {0.4, 0.6}});
    const int failures = harness::sweep(spec, d.path.string(), log);
    CHECK(failures == 2);
    CHECK(std::filesystem::exists(d.path / "point_0001" / "report.json"));
}

TEST_CASE("sweep spec parsing") {
    const std::string spec_text = std::string(R"({"base": )") + kMinimal1d +
                                  R"(, "axes": {"m": [0.3, 0.5]}, "checks": ["mass-identity"]})";
    const auto spec = harness::parse_sweep(spec_text);
    CHECK(spec.axes.size() == 1);
    CHECK(spec.axes[0].key == "m");
    CHECK(spec.checks.size() == 1);
    CHECK_THROWS_AS(harness::parse_sweep(R"({"axes": {"m": [1]}})"), ConfigError);
    CHECK_THROWS_AS(harness::parse_sweep(std::string(R"({"base": )") + kMinimal1d + "}"),
                    ConfigError);
}

TEST_CASE("apply_override key paths") {
    RunConfig cfg = harness::parse_config(kMinimal1d);
    harness::apply_override(cfg, "grid.count", 32.0);
    CHECK(cfg.grid.counts[0] == 32);
    harness::apply_override(cfg, "epsilon", 1e-8);
    CHECK(cfg.epsilon == 1e-8);
    CHECK_THROWS_AS(harness::apply_override(cfg, "bogus.key", 1.0), ConfigError);
    CHECK_THROWS_AS(harness::apply_override(cfg, "time.steps", 10.5), ConfigError);
}

TEST_CASE("file-based initial data round trips through a run") {
    TempDir d("filedata");
    RunConfig cfg = harness::parse_config(kMinimal1d);
    const auto built = harness::build_inputs(cfg);
    const auto path = d.path / "u0.csv";
    {
        std::ofstream os(path, std::ios::binary);
        grid::save_field_csv(os, built.inputs.u0);
    }
    RunConfig cfg2 = cfg;
    cfg2.initial.kind = harness::InitialConfig::Kind::file;
    cfg2.initial.path = path.string();
    const auto built2 = harness::build_inputs(cfg2);
    CHECK(grid::max_abs_diff(built.inputs.u0, built2.inputs.u0) == 0.0);
}

}  // TEST_SUITE
