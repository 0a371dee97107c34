// Command-line front end: run scenarios, sweep parameter grids, list presets,
// classify damping coefficients, and evaluate the closed-form mass envelope.
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure,
// 3 check failure.

#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dnls/harness.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& preset_name,
            const std::string& out_dir, const std::vector<std::string>& checks) {
    using namespace dnls;
    if (!preset_name.empty()) {
        const harness::ScenarioPreset* p = harness::find_preset(preset_name);
        if (!p) {
            std::cerr << "unknown preset '" << preset_name << "'\n";
            return 1;
        }
        harness::ScenarioPreset preset = *p;
        if (!checks.empty()) preset.checks = checks;
        harness::ScenarioResult r = harness::run_preset(preset, out_dir);
        for (const harness::CheckOutcome& c : r.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        if (r.t_num) std::cout << "T_num = " << *r.t_num << "\n";
        return r.exit_code;
    }
    harness::RunConfig cfg = harness::parse_config(config_path);
    const harness::BuiltInputs built = harness::build_inputs(cfg);
    std::cout << "coefficient a = " << built.a.a.real() << " + " << built.a.a.imag()
              << "i, classification " << coeff::to_string(built.a.classification) << "\n";
    harness::ScenarioResult r = harness::run_scenario(cfg, checks, out_dir);
    for (const harness::CheckOutcome& c : r.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    if (r.t_num) std::cout << "T_num = " << *r.t_num << "\n";
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"damped nonlinear Schroedinger laboratory"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_dir, sweep_path;
    std::vector<std::string> checks;

    CLI::App* run = app.add_subcommand("run", "run one scenario from a config file or preset");
    run->add_option("--config", config_path, "config JSON (path or inline)");
    run->add_option("--preset", preset_name, "preset name (see 'presets')");
    run->add_option("--out", out_dir, "artifact directory");
    run->add_option("--check", checks, "checks to attach (overrides preset list)");

    CLI::App* sw = app.add_subcommand("sweep", "run a parameter grid");
    sw->add_option("--spec", sweep_path, "sweep JSON (path or inline)")->required();
    sw->add_option("--out", out_dir, "artifact directory")->required();

    CLI::App* pr = app.add_subcommand("presets", "list scenario presets");

    double opt_m = 0.5, opt_re = 0.0, opt_im = 0.0, opt_ray_re = 0.0;
    CLI::App* cc = app.add_subcommand("check-coefficient", "classify a damping coefficient");
    cc->add_option("--m", opt_m, "absorption exponent in (0,1)")->required();
    cc->add_option("--re", opt_re, "Re(a)");
    cc->add_option("--im", opt_im, "Im(a)");
    CLI::Option* ray_opt = cc->add_option("--ray-re", opt_ray_re,
                                          "build the critical-ray element with this real part");

    double env_y0 = 1.0, env_alpha = 1.0, env_delta = 0.75, env_t0 = 0.0;
    std::optional<double> env_t;
    int env_samples = 0;
    CLI::App* env = app.add_subcommand("envelope", "closed-form mass-envelope calculator");
    env->add_option("--y0", env_y0, "initial mass y(T0)")->required();
    env->add_option("--alpha", env_alpha, "envelope coefficient alpha_l")->required();
    env->add_option("--delta", env_delta, "exponent delta_l in (1/2, 1]")->required();
    env->add_option("--t0", env_t0, "start time T0");
    env->add_option("--t", env_t, "evaluate the envelope at this time");
    env->add_option("--samples", env_samples, "print a CSV curve with this many rows");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (config_path.empty() == preset_name.empty()) {
                std::cerr << "run: provide exactly one of --config or --preset\n";
                return 1;
            }
            return cmd_run(config_path, preset_name, out_dir, checks);
        }
        if (sw->parsed()) {
            dnls::harness::SweepSpec spec = dnls::harness::parse_sweep(sweep_path);
            const int failures = dnls::harness::sweep(spec, out_dir, std::cout);
            std::cout << "sweep finished, " << failures << " failed point(s); aggregate at "
                      << out_dir << "/aggregate.csv\n";
            return failures == 0 ? 0 : 3;
        }
        if (pr->parsed()) {
            for (const auto& p : dnls::harness::presets()) {
                std::printf("%-28s %s\n", p.name.c_str(), p.description.c_str());
                std::printf("%-28s checks:", "");
                for (const auto& c : p.checks) std::printf(" %s", c.c_str());
                std::printf("\n");
            }
            return 0;
        }
        if (cc->parsed()) {
            const dnls::coeff::Exponent m(opt_m);
            dnls::grid::Complex a(opt_re, opt_im);
            if (ray_opt->count() > 0) a = dnls::coeff::make_dm_coefficient(m, opt_ray_re);
            const auto cls = dnls::coeff::classify(a, m);
            std::printf("a = %.17g + %.17gi\n", a.real(), a.imag());
            std::printf("classification: %s\n", dnls::coeff::to_string(cls));
            std::printf("cone test: 2 sqrt(m) Im(a) = %.17g vs (1-m)|Re(a)| = %.17g\n",
                        2.0 * std::sqrt(opt_m) * a.imag(), (1.0 - opt_m) * std::abs(a.real()));
            return cls == dnls::coeff::Classification::Outside ? 3 : 0;
        }
        if (env->parsed()) {
            dnls::extinct::Envelope e(
                dnls::extinct::EnvelopeParams{env_y0, env_alpha, env_delta, env_t0, 1});
            const double text = e.extinction_time();
            if (std::isfinite(text))
                std::printf("extinction_time,%.17g\n", text);
            else
                std::printf("extinction_time,inf\n");
            if (env_t) std::printf("y(%.17g),%.17g\n", *env_t, e(*env_t));
            if (env_samples > 1) {
                const double hi = std::isfinite(text) ? text : env_t0 + 5.0 / env_alpha;
                std::printf("t,y_env\n");
                for (int i = 0; i <= env_samples; ++i) {
                    const double t = env_t0 + (hi - env_t0) * i / env_samples;
                    std::printf("%.17g,%.17g\n", t, e(t));
                }
            }
            return 0;
        }
    } catch (const dnls::harness::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const dnls::evolve::StepFailure& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}
