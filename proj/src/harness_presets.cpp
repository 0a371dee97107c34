#include "dnls/harness.hpp"

namespace dnls::harness {

namespace {

RunConfig base_1d(int nodes, double length) {
    RunConfig c;
    c.grid.counts = {nodes};
    c.grid.lengths = {length};
    c.m = 0.5;
    c.a = CoefficientConfig{true, 1.0, 0.0};
    c.epsilon = 1e-12;
    c.initial.kind = InitialConfig::Kind::sine;
    c.initial.amplitude = 1.0;
    c.time.dt = 1e-3;
    return c;
}

std::vector<ScenarioPreset> make_presets() {
    std::vector<ScenarioPreset> out;

    {
        ScenarioPreset p;
        p.name = "mass-identity-1d";
        p.description =
            "per-step exactness of the discrete mass balance under a windowed forcing";
        RunConfig c = base_1d(64, 1.0);
        c.initial.kind = InitialConfig::Kind::sine;
        c.initial.amplitude = 1.0;
        c.forcing.kind = ForcingConfig::Kind::windowed;
        c.forcing.t0 = 0.5;
        c.forcing.amplitude = 1.0;
        c.forcing.power = 1.0;
        c.time.steps = 2000;
        c.snapshot_stride = 2000;
        p.config = c;
        p.checks = {"mass-identity"};
        out.push_back(p);
    }

    {
        ScenarioPreset p;
        p.name = "extinction-1d";
        p.description =
            "finite-time extinction of the free 1d run with a critically damped coefficient, "
            "with floor/envelope extinction-time bounds";
        RunConfig c = base_1d(64, 1.0);
        c.time.steps = 16000;
        c.snapshot_stride = 16000;
        p.config = c;
        p.checks = {"mass-identity", "extinction", "bounds"};
        out.push_back(p);
    }

    {
        ScenarioPreset p;
        p.name = "decay-2d";
        p.description = "exponential mass decay of the free 2d run";
        RunConfig c;
        c.grid.counts = {32, 32};
        c.grid.lengths = {1.0, 1.0};
        c.m = 0.5;
        c.a = CoefficientConfig{true, 1.0, 0.0};
        c.epsilon = 1e-12;
        c.initial.kind = InitialConfig::Kind::sine;
        c.initial.amplitude = 1.0;
        c.time.dt = 2e-3;
        c.time.steps = 1900;
        c.snapshot_stride = 1900;
        p.config = c;
        p.checks = {"decay-exp", "vanishing"};
        out.push_back(p);
    }

    {
        ScenarioPreset p;
        p.name = "decay-3d";
        p.description = "algebraic mass-decay exponent of the free 3d run";
        RunConfig c;
        c.grid.counts = {16, 16, 16};
        c.grid.lengths = {1.0, 1.0, 1.0};
        c.m = 0.5;
        c.a = CoefficientConfig{true, 1.0, 0.0};
        c.epsilon = 1e-12;
        c.initial.kind = InitialConfig::Kind::sine;
        c.initial.amplitude = 1.0;
        c.time.dt = 2e-3;
        c.time.steps = 1450;
        c.snapshot_stride = 1450;
        p.config = c;
        p.checks = {"decay-alg"};
        out.push_back(p);
    }

    {
        ScenarioPreset p;
        p.name = "contraction-pair";
        p.description = "two-solution distance bounded by initial distance plus forcing drift";
        RunConfig c1 = base_1d(48, 1.0);
        c1.initial.kind = InitialConfig::Kind::gaussian;
        c1.initial.amplitude = 1.0;
        c1.initial.width = 0.2;
        c1.forcing.kind = ForcingConfig::Kind::windowed;
        c1.forcing.t0 = 0.3;
        c1.forcing.amplitude = 0.5;
        c1.time.steps = 800;
        c1.snapshot_stride = 1;
        RunConfig c2 = c1;
        c2.initial.kind = InitialConfig::Kind::sine;
        c2.initial.amplitude = 0.7;
        c2.forcing.amplitude = 0.8;
        c2.forcing.modes = {2};
        p.config = c1;
        p.config2 = c2;
        p.checks = {"contraction"};
        out.push_back(p);
    }

    {
        ScenarioPreset p;
        p.name = "smallness-early-extinction";
        p.description =
            "forcing-and-data smallness conditions forcing extinction no later than the cutoff";
        RunConfig c = base_1d(320, 40.0);
        c.a = CoefficientConfig{true, 12.0, 0.0};
        c.initial.kind = InitialConfig::Kind::sine;
        c.initial.amplitude = 0.0;  // zero data; the forcing drives the run
        c.forcing.kind = ForcingConfig::Kind::windowed;
        c.forcing.t0 = 1.0;
        c.forcing.amplitude = 0.08;  // stays below sqrt(eps_star) for this (m, a)
        c.forcing.power = 3.0;       // (2 delta - 1) / (2 (1 - delta)) at m = 1/2
        c.forcing.klass = "H10";
        c.time.dt = 1e-3;
        c.time.steps = 1100;
        c.snapshot_stride = 1100;
        p.config = c;
        p.checks = {"smallness"};
        out.push_back(p);
    }

    {
        ScenarioPreset p;
        p.name = "h1-monitor-1d";
        p.description = "gradient-norm budget for constant potentials";
        RunConfig c = base_1d(64, 1.0);
        c.initial.kind = InitialConfig::Kind::gaussian;
        c.initial.width = 0.2;
        c.forcing.kind = ForcingConfig::Kind::windowed;
        c.forcing.t0 = 0.3;
        c.forcing.amplitude = 0.6;
        c.forcing.klass = "H10";
        c.time.steps = 600;
        c.snapshot_stride = 600;
        p.config = c;
        p.checks = {"h1"};
        out.push_back(p);
    }

    return out;
}

}  // namespace

const std::vector<ScenarioPreset>& presets() {
    static const std::vector<ScenarioPreset> list = make_presets();
    return list;
}

const ScenarioPreset* find_preset(const std::string& name) {
    for (const ScenarioPreset& p : presets())
        if (p.name == name) return &p;
    return nullptr;
}

}  // namespace dnls::harness
