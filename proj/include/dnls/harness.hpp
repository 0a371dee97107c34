#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dnls/evolve.hpp"
#include "dnls/extinct.hpp"

namespace dnls::harness {

class ConfigError : public std::runtime_error {
public:
    enum class Kind { MissingKey, BadValue, CoefficientOutsideC };
    ConfigError(Kind k, const std::string& key, const std::string& detail);
    Kind kind;
    std::string key;
};

struct GridConfig {
    std::vector<int> counts;
    std::vector<double> lengths;
    bool operator==(const GridConfig&) const = default;
};

/// Either a point on the critical ray (re only; im derived from m) or an
/// explicit complex value.
struct CoefficientConfig {
    bool on_ray = true;
    double re = 1.0;
    double im = 0.0;
    bool operator==(const CoefficientConfig&) const = default;
};

struct PotentialConfig {
    enum class Kind { zero, constant, harmonic, random_split };
    Kind kind = Kind::zero;
    double value = 0.0;         // constant
    double strength = 0.0;      // harmonic bowl coefficient
    double v1_bound = 0.0;      // random bounded part
    double v2_amplitude = 0.0;  // decaying-tail part
    double beta = 1.0;          // integrability margin in 2d
    bool operator==(const PotentialConfig&) const = default;
};

struct InitialConfig {
    enum class Kind { gaussian, sine, random, file };
    Kind kind = Kind::gaussian;
    double amplitude = 1.0;
    double width = 0.15;         // gaussian
    std::vector<int> modes;      // sine; defaults to the ground mode
    std::string path;            // file
    bool operator==(const InitialConfig&) const = default;
};

/// Windowed forcing is amplitude * (T0 - t)_+^power * phi(x) / ||phi||_2, so
/// that ||f(t)||_2 = amplitude * (T0 - t)_+^power exactly.
struct ForcingConfig {
    enum class Kind { zero, windowed, file };
    Kind kind = Kind::zero;
    double t0 = 0.0;
    double amplitude = 0.0;
    double power = 1.0;
    std::vector<int> modes;
    std::string path;  // file: spatial profile, windowed in time the same way
    std::string klass = "W11L2";
    bool operator==(const ForcingConfig&) const = default;
};

struct TimeConfig {
    double dt = 1e-3;
    int steps = 0;
    std::string scheme = "implicit-euler";  // or "crank-nicolson"
    bool operator==(const TimeConfig&) const = default;
};

struct Tolerances {
    double solver = 1e-10;
    double ledger = 1e-9;
    bool operator==(const Tolerances&) const = default;
};

struct RunConfig {
    GridConfig grid;
    double m = 0.5;
    CoefficientConfig a;
    double epsilon = 1e-12;
    PotentialConfig potential;
    InitialConfig initial;
    ForcingConfig forcing;
    TimeConfig time;
    Tolerances tol;
    int snapshot_stride = 1;
    std::uint64_t seed = 1;
    std::string output_dir;
    bool operator==(const RunConfig&) const = default;
};

/// Accepts either inline JSON text (first non-space character '{') or a path.
RunConfig parse_config(const std::string& text_or_path);
std::string emit_config(const RunConfig& cfg);

/// Applies a sweep override addressed by key path ("m", "a.ray_re", "time.dt",
/// "grid.count", ...).
void apply_override(RunConfig& cfg, const std::string& key, double value);

struct BuiltInputs {
    evolve::RunInputs inputs;
    coeff::DampingCoefficient a;
    double volume = 0.0;
};

/// Materializes fields from the config; all randomness flows from the seed
/// through labeled substreams. Rejects coefficients outside C(m).
BuiltInputs build_inputs(const RunConfig& cfg);

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ScenarioResult {
    int exit_code = 0;  // 0 ok, 2 solver failure, 3 check failure
    std::vector<CheckOutcome> checks;
    std::string report_json;
    std::optional<double> t_num;
    std::optional<evolve::RunResult> run;   // primary run
    std::optional<evolve::RunResult> run2;  // only for paired scenarios
};

struct ScenarioPreset {
    std::string name;
    std::string description;  // names the claim the scenario exercises
    RunConfig config;
    std::optional<RunConfig> config2;  // paired scenarios
    std::vector<std::string> checks;
};

const std::vector<ScenarioPreset>& presets();
const ScenarioPreset* find_preset(const std::string& name);

/// Known check names: mass-identity, extinction, bounds, decay-exp, decay-alg,
/// contraction, h1, smallness, vanishing.
ScenarioResult run_scenario(const RunConfig& cfg, const std::vector<std::string>& checks,
                            const std::string& out_dir);
ScenarioResult run_preset(const ScenarioPreset& preset, const std::string& out_dir);

struct SweepAxis {
    std::string key;
    std::vector<double> values;
};

struct SweepSpec {
    RunConfig base;
    std::vector<SweepAxis> axes;
    std::vector<std::string> checks;
};

SweepSpec parse_sweep(const std::string& text_or_path);

/// Runs the cartesian product, one artifact directory per point, and writes
/// aggregate.csv; per-point failures are recorded and the sweep continues.
/// Returns the number of failed points.
int sweep(const SweepSpec& spec, const std::string& out_dir, std::ostream& log);

}  // namespace dnls::harness
