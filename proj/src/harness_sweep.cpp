#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dnls/harness.hpp"

namespace dnls::harness {

using nlohmann::json;

namespace fs = std::filesystem;

// parse_config_json is defined in harness_config.cpp
RunConfig parse_config_json(const json& j);

SweepSpec parse_sweep(const std::string& text_or_path) {
    std::string text = text_or_path;
    const auto first = text_or_path.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text_or_path[first] != '{') {
        std::ifstream in(text_or_path);
        if (!in)
            throw ConfigError(ConfigError::Kind::BadValue, text_or_path, "cannot open sweep file");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ConfigError(ConfigError::Kind::BadValue, "<root>", "input is not valid JSON");
    if (!j.contains("base"))
        throw ConfigError(ConfigError::Kind::MissingKey, "base", "sweep needs a base config");
    SweepSpec spec;
    spec.base = parse_config_json(j["base"]);
    if (j.contains("checks"))
        for (const auto& c : j["checks"]) spec.checks.push_back(c.get<std::string>());
    if (!j.contains("axes") || !j["axes"].is_object() || j["axes"].empty())
        throw ConfigError(ConfigError::Kind::MissingKey, "axes", "sweep needs at least one axis");
    for (auto it = j["axes"].begin(); it != j["axes"].end(); ++it) {
        SweepAxis axis;
        axis.key = it.key();
        if (!it.value().is_array() || it.value().empty())
            throw ConfigError(ConfigError::Kind::BadValue, "axes." + axis.key,
                              "expected a nonempty list of values");
        for (const auto& v : it.value()) axis.values.push_back(v.get<double>());
        spec.axes.push_back(std::move(axis));
    }
    return spec;
}

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

int sweep(const SweepSpec& spec, const std::string& out_dir, std::ostream& log) {
    fs::create_directories(out_dir);
    std::vector<std::size_t> radix(spec.axes.size());
    std::size_t total = 1;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
        radix[a] = spec.axes[a].values.size();
        total *= radix[a];
    }

    const bool dt_order_column = spec.axes.size() == 1 && spec.axes[0].key == "time.dt";
    std::vector<grid::Field> finals;  // for the self-convergence column

    std::ofstream agg(fs::path(out_dir) / "aggregate.csv", std::ios::binary);
    agg << "point";
    for (const SweepAxis& a : spec.axes) agg << "," << a.key;
    agg << ",t_num,fitted_rate,max_identity_residual,exit_code";
    if (dt_order_column) agg << ",order_vs_prev";
    agg << "\n";

    int failures = 0;
    for (std::size_t point = 0; point < total; ++point) {
        RunConfig cfg = spec.base;
        std::vector<double> coords(spec.axes.size());
        std::size_t rem = point;
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
            const std::size_t i = rem % radix[a];
            rem /= radix[a];
            coords[a] = spec.axes[a].values[i];
            apply_override(cfg, spec.axes[a].key, coords[a]);
        }
        char dirname[32];
        std::snprintf(dirname, sizeof dirname, "point_%04zu", point);
        const std::string point_dir = (fs::path(out_dir) / dirname).string();

        double t_num = std::nan("");
        double rate = std::nan("");
        double max_resid = std::nan("");
        int code = 0;
        try {
            ScenarioResult r = run_scenario(cfg, spec.checks, point_dir);
            code = r.exit_code;
            if (r.t_num) t_num = *r.t_num;
            if (r.run) {
                max_resid = r.run->ledger.max_identity_residual();
                try {
                    rate = extinct::best_exponential_decade(r.run->ledger, 1.0).rate_or_exponent;
                } catch (const std::exception&) {
                    // leave the column empty when no decade of decay exists
                }
                if (dt_order_column) finals.push_back(r.run->final_state());
            }
        } catch (const ConfigError& e) {
            code = 1;
            log << dirname << ": " << e.what() << "\n";
        } catch (const std::exception& e) {
            code = 2;
            log << dirname << ": " << e.what() << "\n";
        }
        if (code != 0) ++failures;

        agg << point;
        for (double c : coords) agg << "," << fmt(c);
        agg << "," << fmt(t_num) << "," << fmt(rate) << "," << fmt(max_resid) << "," << code;
        if (dt_order_column) {
            double order = std::nan("");
            const std::size_t k = finals.size();
            if (k >= 3) {
                const double e1 = grid::norm_l2(grid::subtract(finals[k - 3], finals[k - 2]));
                const double e2 = grid::norm_l2(grid::subtract(finals[k - 2], finals[k - 1]));
                if (e1 > 0.0 && e2 > 0.0) order = std::log2(e1 / e2);
            }
            agg << "," << fmt(order);
        }
        agg << "\n";
        log << dirname << ": exit " << code << "\n";
    }
    return failures;
}

}  // namespace dnls::harness
