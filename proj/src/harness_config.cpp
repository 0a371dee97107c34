#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dnls/harness.hpp"
#include "dnls/rng.hpp"

namespace dnls::harness {

using nlohmann::json;

ConfigError::ConfigError(Kind k, const std::string& key_, const std::string& detail)
    : std::runtime_error("config error at '" + key_ + "': " + detail), kind(k), key(key_) {}

namespace {

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& require(const json& j, const char* key, const std::string& path) {
    const json* p = find(j, key);
    if (!p) throw ConfigError(ConfigError::Kind::MissingKey, path, "required key is missing");
    return *p;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(ConfigError::Kind::BadValue, path, "expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer())
        throw ConfigError(ConfigError::Kind::BadValue, path, "expected an integer");
    return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(ConfigError::Kind::BadValue, path, "expected a string");
    return j.get<std::string>();
}

std::vector<int> as_int_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(ConfigError::Kind::BadValue, path, "expected a list");
    std::vector<int> out;
    for (const auto& e : j) out.push_back(as_int(e, path));
    return out;
}

std::vector<double> as_double_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(ConfigError::Kind::BadValue, path, "expected a list");
    std::vector<double> out;
    for (const auto& e : j) out.push_back(as_number(e, path));
    return out;
}

json read_json_input(const std::string& text_or_path) {
    const auto first = text_or_path.find_first_not_of(" \t\r\n");
    std::string text;
    if (first != std::string::npos && text_or_path[first] == '{') {
        text = text_or_path;
    } else {
        std::ifstream in(text_or_path);
        if (!in)
            throw ConfigError(ConfigError::Kind::BadValue, text_or_path, "cannot open config file");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ConfigError(ConfigError::Kind::BadValue, "<root>", "input is not valid JSON");
    return j;
}

}  // namespace

RunConfig parse_config_json(const json& j) {
    RunConfig cfg;

    const json& g = require(j, "grid", "grid");
    cfg.grid.counts = as_int_list(require(g, "counts", "grid.counts"), "grid.counts");
    cfg.grid.lengths = as_double_list(require(g, "lengths", "grid.lengths"), "grid.lengths");
    if (cfg.grid.counts.empty() || cfg.grid.counts.size() > 3)
        throw ConfigError(ConfigError::Kind::BadValue, "grid.counts", "dimension must be 1..3");
    if (cfg.grid.counts.size() != cfg.grid.lengths.size())
        throw ConfigError(ConfigError::Kind::BadValue, "grid.lengths",
                          "must match grid.counts in length");

    cfg.m = as_number(require(j, "m", "m"), "m");
    if (!(cfg.m > 0.0) || !(cfg.m < 1.0))
        throw ConfigError(ConfigError::Kind::BadValue, "m", "must satisfy 0 < m < 1");

    const json& a = require(j, "a", "a");
    if (const json* ray = find(a, "ray_re")) {
        cfg.a.on_ray = true;
        cfg.a.re = as_number(*ray, "a.ray_re");
        cfg.a.im = 0.0;
        if (!(cfg.a.re > 0.0))
            throw ConfigError(ConfigError::Kind::BadValue, "a.ray_re", "must be positive");
    } else {
        cfg.a.on_ray = false;
        cfg.a.re = as_number(require(a, "re", "a.re"), "a.re");
        cfg.a.im = as_number(require(a, "im", "a.im"), "a.im");
    }

    if (const json* e = find(j, "epsilon")) {
        cfg.epsilon = as_number(*e, "epsilon");
        if (!(cfg.epsilon >= 0.0))
            throw ConfigError(ConfigError::Kind::BadValue, "epsilon", "must be >= 0");
    }

    if (const json* p = find(j, "potential")) {
        const std::string kind = as_string(require(*p, "kind", "potential.kind"), "potential.kind");
        if (kind == "zero") {
            cfg.potential.kind = PotentialConfig::Kind::zero;
        } else if (kind == "constant") {
            cfg.potential.kind = PotentialConfig::Kind::constant;
            cfg.potential.value = as_number(require(*p, "value", "potential.value"), "potential.value");
        } else if (kind == "harmonic") {
            cfg.potential.kind = PotentialConfig::Kind::harmonic;
            cfg.potential.strength =
                as_number(require(*p, "strength", "potential.strength"), "potential.strength");
        } else if (kind == "random_split") {
            cfg.potential.kind = PotentialConfig::Kind::random_split;
            cfg.potential.v1_bound =
                as_number(require(*p, "v1_bound", "potential.v1_bound"), "potential.v1_bound");
            cfg.potential.v2_amplitude = as_number(
                require(*p, "v2_amplitude", "potential.v2_amplitude"), "potential.v2_amplitude");
        } else {
            throw ConfigError(ConfigError::Kind::BadValue, "potential.kind", "unknown kind");
        }
        if (const json* b = find(*p, "beta")) {
            cfg.potential.beta = as_number(*b, "potential.beta");
            if (!(cfg.potential.beta > 0.0))
                throw ConfigError(ConfigError::Kind::BadValue, "potential.beta", "must be > 0");
        }
    }

    const json& ini = require(j, "initial", "initial");
    {
        const std::string kind = as_string(require(ini, "kind", "initial.kind"), "initial.kind");
        if (kind == "gaussian")
            cfg.initial.kind = InitialConfig::Kind::gaussian;
        else if (kind == "sine")
            cfg.initial.kind = InitialConfig::Kind::sine;
        else if (kind == "random")
            cfg.initial.kind = InitialConfig::Kind::random;
        else if (kind == "file")
            cfg.initial.kind = InitialConfig::Kind::file;
        else
            throw ConfigError(ConfigError::Kind::BadValue, "initial.kind", "unknown kind");
        if (const json* v = find(ini, "amplitude")) cfg.initial.amplitude = as_number(*v, "initial.amplitude");
        if (const json* v = find(ini, "width")) {
            cfg.initial.width = as_number(*v, "initial.width");
            if (!(cfg.initial.width > 0.0))
                throw ConfigError(ConfigError::Kind::BadValue, "initial.width", "must be > 0");
        }
        if (const json* v = find(ini, "modes")) cfg.initial.modes = as_int_list(*v, "initial.modes");
        if (const json* v = find(ini, "path")) cfg.initial.path = as_string(*v, "initial.path");
        if (cfg.initial.kind == InitialConfig::Kind::file && cfg.initial.path.empty())
            throw ConfigError(ConfigError::Kind::MissingKey, "initial.path", "required for file data");
    }

    if (const json* f = find(j, "forcing")) {
        const std::string kind = as_string(require(*f, "kind", "forcing.kind"), "forcing.kind");
        if (kind == "zero")
            cfg.forcing.kind = ForcingConfig::Kind::zero;
        else if (kind == "windowed")
            cfg.forcing.kind = ForcingConfig::Kind::windowed;
        else if (kind == "file")
            cfg.forcing.kind = ForcingConfig::Kind::file;
        else
            throw ConfigError(ConfigError::Kind::BadValue, "forcing.kind", "unknown kind");
        if (cfg.forcing.kind != ForcingConfig::Kind::zero) {
            cfg.forcing.t0 = as_number(require(*f, "t0", "forcing.t0"), "forcing.t0");
            if (!(cfg.forcing.t0 >= 0.0))
                throw ConfigError(ConfigError::Kind::BadValue, "forcing.t0", "must be >= 0");
            cfg.forcing.amplitude =
                as_number(require(*f, "amplitude", "forcing.amplitude"), "forcing.amplitude");
        }
        if (const json* v = find(*f, "power")) {
            cfg.forcing.power = as_number(*v, "forcing.power");
            if (!(cfg.forcing.power >= 0.0))
                throw ConfigError(ConfigError::Kind::BadValue, "forcing.power", "must be >= 0");
        }
        if (const json* v = find(*f, "modes")) cfg.forcing.modes = as_int_list(*v, "forcing.modes");
        if (const json* v = find(*f, "path")) cfg.forcing.path = as_string(*v, "forcing.path");
        if (const json* v = find(*f, "class")) {
            cfg.forcing.klass = as_string(*v, "forcing.class");
            if (cfg.forcing.klass != "L1L2" && cfg.forcing.klass != "W11L2" &&
                cfg.forcing.klass != "H10")
                throw ConfigError(ConfigError::Kind::BadValue, "forcing.class",
                                  "must be one of L1L2, W11L2, H10");
        }
        if (cfg.forcing.kind == ForcingConfig::Kind::file && cfg.forcing.path.empty())
            throw ConfigError(ConfigError::Kind::MissingKey, "forcing.path", "required for file data");
    }

    const json& t = require(j, "time", "time");
    cfg.time.dt = as_number(require(t, "dt", "time.dt"), "time.dt");
    cfg.time.steps = as_int(require(t, "steps", "time.steps"), "time.steps");
    if (!(cfg.time.dt > 0.0)) throw ConfigError(ConfigError::Kind::BadValue, "time.dt", "must be > 0");
    if (cfg.time.steps < 0)
        throw ConfigError(ConfigError::Kind::BadValue, "time.steps", "must be >= 0");
    if (const json* v = find(t, "scheme")) {
        cfg.time.scheme = as_string(*v, "time.scheme");
        if (cfg.time.scheme != "implicit-euler" && cfg.time.scheme != "crank-nicolson")
            throw ConfigError(ConfigError::Kind::BadValue, "time.scheme",
                              "must be implicit-euler or crank-nicolson");
    }

    if (const json* tol = find(j, "tolerances")) {
        if (const json* v = find(*tol, "solver")) cfg.tol.solver = as_number(*v, "tolerances.solver");
        if (const json* v = find(*tol, "ledger")) cfg.tol.ledger = as_number(*v, "tolerances.ledger");
        if (!(cfg.tol.solver > 0.0) || !(cfg.tol.ledger > 0.0))
            throw ConfigError(ConfigError::Kind::BadValue, "tolerances", "must be positive");
    }
    if (const json* v = find(j, "snapshot_stride")) {
        cfg.snapshot_stride = as_int(*v, "snapshot_stride");
        if (cfg.snapshot_stride < 1)
            throw ConfigError(ConfigError::Kind::BadValue, "snapshot_stride", "must be >= 1");
    }
    if (const json* v = find(j, "seed")) {
        if (!v->is_number_unsigned() && !v->is_number_integer())
            throw ConfigError(ConfigError::Kind::BadValue, "seed", "expected an integer");
        cfg.seed = v->get<std::uint64_t>();
    }
    if (const json* v = find(j, "output_dir")) cfg.output_dir = as_string(*v, "output_dir");
    return cfg;
}

RunConfig parse_config(const std::string& text_or_path) {
    return parse_config_json(read_json_input(text_or_path));
}

std::string emit_config(const RunConfig& cfg) {
    json j;
    j["grid"] = {{"counts", cfg.grid.counts}, {"lengths", cfg.grid.lengths}};
    j["m"] = cfg.m;
    if (cfg.a.on_ray)
        j["a"] = {{"ray_re", cfg.a.re}};
    else
        j["a"] = {{"re", cfg.a.re}, {"im", cfg.a.im}};
    j["epsilon"] = cfg.epsilon;
    {
        json p;
        switch (cfg.potential.kind) {
            case PotentialConfig::Kind::zero: p["kind"] = "zero"; break;
            case PotentialConfig::Kind::constant:
                p["kind"] = "constant";
                p["value"] = cfg.potential.value;
                break;
            case PotentialConfig::Kind::harmonic:
                p["kind"] = "harmonic";
                p["strength"] = cfg.potential.strength;
                break;
            case PotentialConfig::Kind::random_split:
                p["kind"] = "random_split";
                p["v1_bound"] = cfg.potential.v1_bound;
                p["v2_amplitude"] = cfg.potential.v2_amplitude;
                break;
        }
        p["beta"] = cfg.potential.beta;
        j["potential"] = p;
    }
    {
        json i;
        switch (cfg.initial.kind) {
            case InitialConfig::Kind::gaussian: i["kind"] = "gaussian"; break;
            case InitialConfig::Kind::sine: i["kind"] = "sine"; break;
            case InitialConfig::Kind::random: i["kind"] = "random"; break;
            case InitialConfig::Kind::file: i["kind"] = "file"; break;
        }
        i["amplitude"] = cfg.initial.amplitude;
        i["width"] = cfg.initial.width;
        if (!cfg.initial.modes.empty()) i["modes"] = cfg.initial.modes;
        if (!cfg.initial.path.empty()) i["path"] = cfg.initial.path;
        j["initial"] = i;
    }
    {
        json f;
        switch (cfg.forcing.kind) {
            case ForcingConfig::Kind::zero: f["kind"] = "zero"; break;
            case ForcingConfig::Kind::windowed: f["kind"] = "windowed"; break;
            case ForcingConfig::Kind::file: f["kind"] = "file"; break;
        }
        if (cfg.forcing.kind != ForcingConfig::Kind::zero) {
            f["t0"] = cfg.forcing.t0;
            f["amplitude"] = cfg.forcing.amplitude;
        }
        f["power"] = cfg.forcing.power;
        if (!cfg.forcing.modes.empty()) f["modes"] = cfg.forcing.modes;
        if (!cfg.forcing.path.empty()) f["path"] = cfg.forcing.path;
        f["class"] = cfg.forcing.klass;
        j["forcing"] = f;
    }
    j["time"] = {{"dt", cfg.time.dt}, {"steps", cfg.time.steps}, {"scheme", cfg.time.scheme}};
    j["tolerances"] = {{"solver", cfg.tol.solver}, {"ledger", cfg.tol.ledger}};
    j["snapshot_stride"] = cfg.snapshot_stride;
    j["seed"] = cfg.seed;
    if (!cfg.output_dir.empty()) j["output_dir"] = cfg.output_dir;
    return j.dump(2);
}

void apply_override(RunConfig& cfg, const std::string& key, double value) {
    auto as_whole = [&](double v) {
        const int i = static_cast<int>(std::llround(v));
        if (std::abs(v - i) > 1e-9)
            throw ConfigError(ConfigError::Kind::BadValue, key, "expected an integer value");
        return i;
    };
    if (key == "m") {
        cfg.m = value;
    } else if (key == "a.ray_re") {
        cfg.a = CoefficientConfig{true, value, 0.0};
    } else if (key == "a.re") {
        cfg.a.on_ray = false;
        cfg.a.re = value;
    } else if (key == "a.im") {
        cfg.a.on_ray = false;
        cfg.a.im = value;
    } else if (key == "epsilon") {
        cfg.epsilon = value;
    } else if (key == "time.dt") {
        // preserves the horizon so Richardson comparisons across dt make sense
        const double horizon = cfg.time.dt * cfg.time.steps;
        if (!(value > 0.0)) throw ConfigError(ConfigError::Kind::BadValue, key, "dt must be > 0");
        cfg.time.dt = value;
        if (horizon > 0.0) cfg.time.steps = static_cast<int>(std::llround(horizon / value));
    } else if (key == "time.steps") {
        cfg.time.steps = as_whole(value);
    } else if (key == "grid.count") {
        for (int& c : cfg.grid.counts) c = as_whole(value);
    } else if (key == "grid.length") {
        for (double& l : cfg.grid.lengths) l = value;
    } else if (key == "initial.amplitude") {
        cfg.initial.amplitude = value;
    } else if (key == "forcing.amplitude") {
        cfg.forcing.amplitude = value;
    } else if (key == "forcing.t0") {
        cfg.forcing.t0 = value;
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(as_whole(value));
    } else {
        throw ConfigError(ConfigError::Kind::BadValue, key, "unknown sweep key");
    }
}

namespace {

template <class Fn>
void for_each_node(const grid::GridSpec& g, Fn&& fn) {
    const int d = g.dim();
    std::vector<std::size_t> strides(d, 1);
    for (int a = d - 2; a >= 0; --a) strides[a] = strides[a + 1] * g.counts()[a + 1];
    double x[3] = {0, 0, 0};
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        for (int a = 0; a < d; ++a) {
            const std::size_t c = (idx / strides[a]) % g.counts()[a];
            x[a] = g.coord(a, static_cast<int>(c));
        }
        fn(idx, x);
    }
}

grid::Field sine_mode(const grid::GridSpec& g, const std::vector<int>& modes, double amplitude) {
    std::vector<int> k(g.dim(), 1);
    for (std::size_t a = 0; a < modes.size() && a < k.size(); ++a) {
        if (modes[a] < 1)
            throw ConfigError(ConfigError::Kind::BadValue, "modes", "mode numbers must be >= 1");
        k[a] = modes[a];
    }
    grid::Field f = grid::Field::zeros(g);
    constexpr double pi = 3.14159265358979323846;
    for_each_node(g, [&](std::size_t idx, const double* x) {
        double v = amplitude;
        for (int a = 0; a < g.dim(); ++a) v *= std::sin(k[a] * pi * x[a] / g.lengths()[a]);
        f.values[idx] = v;
    });
    return f;
}

grid::Field build_initial(const RunConfig& cfg, const grid::GridSpec& g) {
    switch (cfg.initial.kind) {
        case InitialConfig::Kind::gaussian: {
            grid::Field f = grid::Field::zeros(g);
            for_each_node(g, [&](std::size_t idx, const double* x) {
                double s = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    const double c = 0.5 * g.lengths()[a];
                    s += (x[a] - c) * (x[a] - c);
                }
                f.values[idx] =
                    cfg.initial.amplitude * std::exp(-s / (cfg.initial.width * cfg.initial.width));
            });
            return f;
        }
        case InitialConfig::Kind::sine:
            return sine_mode(g, cfg.initial.modes, cfg.initial.amplitude);
        case InitialConfig::Kind::random: {
            Rng rng = Rng::for_purpose(cfg.seed, "initial");
            grid::Field f = grid::Field::zeros(g);
            for (auto& z : f.values) z = cfg.initial.amplitude * rng.complex_normal();
            return f;
        }
        case InitialConfig::Kind::file: {
            std::ifstream in(cfg.initial.path);
            if (!in)
                throw ConfigError(ConfigError::Kind::BadValue, "initial.path",
                                  "cannot open field file");
            return grid::load_field_csv(in, g);
        }
    }
    throw ConfigError(ConfigError::Kind::BadValue, "initial.kind", "unreachable");
}

grid::PotentialSpec build_potential(const RunConfig& cfg, const grid::GridSpec& g) {
    grid::PotentialSpec p = grid::PotentialSpec::zero(g);
    p.beta = cfg.potential.beta;
    p.p_v = grid::PotentialSpec::exponent_for(g.dim(), p.beta);
    switch (cfg.potential.kind) {
        case PotentialConfig::Kind::zero: break;
        case PotentialConfig::Kind::constant:
            std::fill(p.v1.begin(), p.v1.end(), cfg.potential.value);
            break;
        case PotentialConfig::Kind::harmonic:
            for_each_node(g, [&](std::size_t idx, const double* x) {
                double s = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    const double c = 0.5 * g.lengths()[a];
                    s += (x[a] - c) * (x[a] - c);
                }
                p.v1[idx] = cfg.potential.strength * s;
            });
            break;
        case PotentialConfig::Kind::random_split: {
            Rng r1 = Rng::for_purpose(cfg.seed, "potential.v1");
            for (double& v : p.v1) v = r1.uniform(-cfg.potential.v1_bound, cfg.potential.v1_bound);
            for_each_node(g, [&](std::size_t idx, const double* x) {
                double s = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    const double c = 0.5 * g.lengths()[a];
                    s += (x[a] - c) * (x[a] - c);
                }
                p.v2[idx] = cfg.potential.v2_amplitude / (1.0 + s);
            });
            break;
        }
    }
    return p;
}

evolve::ForcingSpec build_forcing(const RunConfig& cfg, const grid::GridSpec& g) {
    evolve::ForcingSpec f;
    if (cfg.forcing.klass == "L1L2")
        f.tag = evolve::ForcingClass::L1L2;
    else if (cfg.forcing.klass == "H10")
        f.tag = evolve::ForcingClass::H10;
    else
        f.tag = evolve::ForcingClass::W11L2;
    if (cfg.forcing.kind == ForcingConfig::Kind::zero) return f;

    grid::Field profile = grid::Field::zeros(g);
    if (cfg.forcing.kind == ForcingConfig::Kind::windowed) {
        profile = sine_mode(g, cfg.forcing.modes, 1.0);
    } else {
        std::ifstream in(cfg.forcing.path);
        if (!in)
            throw ConfigError(ConfigError::Kind::BadValue, "forcing.path",
                              "cannot open field file");
        profile = grid::load_field_csv(in, g);
    }
    const double nrm = grid::norm_l2(profile);
    if (!(nrm > 0.0))
        throw ConfigError(ConfigError::Kind::BadValue, "forcing", "spatial profile is zero");
    profile = grid::scaled(profile, 1.0 / nrm);

    const double t0 = cfg.forcing.t0;
    const double amp = cfg.forcing.amplitude;
    const double power = cfg.forcing.power;
    f.t0 = t0;
    f.cutoff_active = true;
    f.sampler = [profile, t0, amp, power](double t, grid::Field& out) {
        const double tail = t0 - t;
        if (tail < 0.0) return;  // sample() already zeroes beyond the cutoff
        const double scale = amp * std::pow(tail, power);
        out = grid::scaled(profile, scale);
    };
    return f;
}

}  // namespace

BuiltInputs build_inputs(const RunConfig& cfg) {
    grid::GridSpec g(cfg.grid.lengths, cfg.grid.counts);
    const coeff::Exponent m(cfg.m);
    grid::Complex a = cfg.a.on_ray ? coeff::make_dm_coefficient(m, cfg.a.re)
                                   : grid::Complex(cfg.a.re, cfg.a.im);
    coeff::DampingCoefficient damping = coeff::make_damping(a, m);
    if (damping.classification == coeff::Classification::Outside)
        throw ConfigError(ConfigError::Kind::CoefficientOutsideC, "a",
                          "coefficient lies outside C(m): membership requires Im(a) > 0 and "
                          "2 sqrt(m) Im(a) >= (1-m) |Re(a)|");

    BuiltInputs out{evolve::RunInputs{
                        g,
                        build_initial(cfg, g),
                        nonlin::AbsorptionParams(m, a, cfg.epsilon),
                        build_potential(cfg, g),
                        build_forcing(cfg, g),
                        evolve::TimeGrid{cfg.time.dt, cfg.time.steps},
                        cfg.tol.solver,
                        60,
                        cfg.snapshot_stride,
                        1e-18,
                        cfg.time.scheme == "crank-nicolson" ? evolve::Scheme::crank_nicolson
                                                            : evolve::Scheme::implicit_euler,
                    },
                    damping, g.volume()};
    return out;
}

}  // namespace dnls::harness
