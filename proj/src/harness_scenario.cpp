#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dnls/harness.hpp"

namespace dnls::harness {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct CheckContext {
    const RunConfig& cfg;
    const BuiltInputs& built;
    const evolve::RunResult& run;
    const evolve::RunResult* run2 = nullptr;
    const BuiltInputs* built2 = nullptr;
};

CheckOutcome check_mass_identity(const CheckContext& c) {
    const double worst = c.run.ledger.max_identity_residual();
    return {"mass-identity", worst <= c.cfg.tol.ledger,
            "max residual " + fmt(worst) + " vs " + fmt(c.cfg.tol.ledger)};
}

CheckOutcome check_extinction(const CheckContext& c) {
    const auto t = extinct::detect_extinction(c.run.ledger);
    return {"extinction", t.has_value(),
            t ? "T_num = " + fmt(*t) : "no extinction within the horizon"};
}

extinct::BoundReport make_bounds(const CheckContext& c) {
    extinct::BoundContext ctx;
    ctx.dim = static_cast<int>(c.cfg.grid.counts.size());
    ctx.ell = 1;
    ctx.m = c.cfg.m;
    ctx.im_a = c.built.a.a.imag();
    ctx.volume = c.built.volume;
    ctx.t0 = c.cfg.forcing.kind == ForcingConfig::Kind::zero ? 0.0 : c.cfg.forcing.t0;
    return extinct::bound_report(c.run.ledger, ctx);
}

CheckOutcome check_bounds(const CheckContext& c, const extinct::BoundReport& b) {
    const bool pass = b.pass_lower && b.pass_upper && b.envelope_ok && b.floor_ok;
    std::ostringstream d;
    d << "lower " << fmt(b.lower_bound) << " <= T_num "
      << (b.t_num ? fmt(*b.t_num) : std::string("none")) << " <= upper "
      << fmt(b.upper_envelope_time) << "; envelope_ok=" << b.envelope_ok
      << " floor_ok=" << b.floor_ok;
    return {"bounds", pass, d.str()};
}

CheckOutcome check_decay_exp(const CheckContext& c, std::optional<extinct::DecayFit>& fit_out) {
    try {
        extinct::DecayFit f = extinct::best_exponential_decade(c.run.ledger, 1.0);
        fit_out = f;
        return {"decay-exp", f.r2 >= 0.99,
                "rate " + fmt(f.rate_or_exponent) + ", r2 " + fmt(f.r2) + " on [" +
                    fmt(f.window_lo) + ", " + fmt(f.window_hi) + "]"};
    } catch (const std::exception& e) {
        return {"decay-exp", false, e.what()};
    }
}

CheckOutcome check_decay_alg(const CheckContext& c, std::optional<extinct::DecayFit>& fit_out) {
    const int dim = static_cast<int>(c.cfg.grid.counts.size());
    const double t0 = c.cfg.forcing.kind == ForcingConfig::Kind::zero ? 0.0 : c.cfg.forcing.t0;
    try {
        const auto win = extinct::late_decay_window(c.run.ledger, t0);
        if (!win) return {"decay-alg", false, "no late-decay window in the ledger"};
        extinct::DecayFit f =
            extinct::decay_fit(c.run.ledger, extinct::FitKind::algebraic, win->lo, win->hi, t0);
        fit_out = f;
        const double ref = extinct::reference_decay_exponent(dim, 1, coeff::Exponent(c.cfg.m));
        const double rel = std::abs(f.rate_or_exponent - ref) / ref;
        return {"decay-alg", rel <= 0.15,
                "exponent " + fmt(f.rate_or_exponent) + " vs reference " + fmt(ref) +
                    " (rel err " + fmt(rel) + ", r2 " + fmt(f.r2) + ")"};
    } catch (const std::exception& e) {
        return {"decay-alg", false, e.what()};
    }
}

CheckOutcome check_contraction(const CheckContext& c) {
    if (!c.run2 || !c.built2) return {"contraction", false, "paired run missing"};
    const evolve::ContractionReport rep = evolve::contraction_check(
        c.run, *c.run2, c.built.inputs.forcing, c.built2->inputs.forcing, c.cfg.tol.solver);
    return {"contraction", rep.pass,
            rep.pass ? "bound holds at all ledger times (slack " + fmt(rep.slack) + ")"
                     : "violated by " + fmt(rep.max_violation) + " at s=" + fmt(rep.worst_s) +
                           ", t=" + fmt(rep.worst_t)};
}

CheckOutcome check_h1(const CheckContext& c) {
    if (c.cfg.potential.kind != PotentialConfig::Kind::zero &&
        c.cfg.potential.kind != PotentialConfig::Kind::constant)
        return {"h1", false, "requires a constant potential"};
    const evolve::H1Report rep = evolve::h1_monitor(c.run, c.built.inputs.forcing);
    return {"h1", rep.pass, "max gradient/budget ratio " + fmt(rep.max_ratio)};
}

CheckOutcome check_smallness(const CheckContext& c) {
    const coeff::Exponent m(c.cfg.m);
    const int dim = static_cast<int>(c.cfg.grid.counts.size());
    if (dim != 1) return {"smallness", false, "smallness scenario is one-dimensional"};
    const double dlt = coeff::delta(1, 1, m);
    const double alpha = c.built.a.a.imag() / coeff::gn_constant_1d_bound(m);
    const double es = coeff::eps_star(alpha, dlt);

    coeff::SmallnessInput in;
    in.u0_mass = std::pow(grid::norm_l2(c.built.inputs.u0), 2);
    in.u0_grad_or_star = grid::h1_seminorm(c.built.inputs.u0);
    const double dt = c.cfg.time.dt;
    double budget = 0.0;
    for (int k = 1; k <= c.cfg.time.steps; ++k) {
        const grid::Field f = c.built.inputs.forcing.sample(dt * k, c.built.inputs.grid);
        budget += dt * grid::h1_seminorm(f);
    }
    in.forcing_budget = budget;
    const double amp = c.cfg.forcing.amplitude, t0f = c.cfg.forcing.t0,
                 pw = c.cfg.forcing.power;
    in.f_l2 = [amp, t0f, pw](double t) {
        return amp * std::pow(std::max(t0f - t, 0.0), pw);
    };
    in.t0 = t0f;
    in.eps_star = es;
    in.delta = dlt;
    in.horizon = c.cfg.time.dt * c.cfg.time.steps;
    const coeff::SmallnessReport rep = coeff::smallness_check(in);

    const auto t_num = extinct::detect_extinction(c.run.ledger);
    const bool early = t_num && *t_num <= t0f * 1.05;
    std::ostringstream d;
    d << "eps_star " << fmt(es) << "; conditions " << rep.mass_ok << "/" << rep.budget_ok << "/"
      << rep.envelope_ok << "; T_num " << (t_num ? fmt(*t_num) : std::string("none"));
    return {"smallness", rep.all() && early, d.str()};
}

CheckOutcome check_vanishing(const CheckContext& c) {
    const extinct::VanishingReport rep = extinct::vanishing_monitor(
        c.run.ledger, c.built.inputs.forcing.t0, c.built.inputs.forcing.is_zero());
    if (rep.status == extinct::VanishingStatus::inconclusive)
        return {"vanishing", false, "inconclusive: forcing active up to the horizon"};
    return {"vanishing", rep.all_vanishing,
            std::string("tail trends mass/lmp1/h1/dmass: ") + (rep.mass.decreasing ? "v" : "x") +
                (rep.lmp1.decreasing ? "v" : "x") + (rep.h1.decreasing ? "v" : "x") +
                (rep.dmass_dt.decreasing ? "v" : "x")};
}

ScenarioResult run_impl(const RunConfig& cfg, const RunConfig* cfg2,
                        const std::vector<std::string>& checks, const std::string& out_dir,
                        const std::string& preset_name) {
    ScenarioResult res;
    BuiltInputs built = build_inputs(cfg);
    std::optional<BuiltInputs> built2;
    if (cfg2) built2 = build_inputs(*cfg2);

    json report;
    report["schema_version"] = 1;
    if (!preset_name.empty()) report["preset"] = preset_name;
    report["classification"] = coeff::to_string(built.a.classification);
    report["a"] = {{"re", built.a.a.real()}, {"im", built.a.a.imag()}};
    report["config"] = json::parse(emit_config(cfg));
    if (cfg2) report["config2"] = json::parse(emit_config(*cfg2));

    try {
        res.run = evolve::run(built.inputs);
        if (built2) res.run2 = evolve::run(built2->inputs);
    } catch (const evolve::StepFailure& e) {
        res.exit_code = 2;
        report["solver_error"] = e.what();
        res.report_json = report.dump(2);
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            write_text(fs::path(out_dir) / "report.json", res.report_json);
        }
        return res;
    }

    CheckContext ctx{cfg, built, *res.run, res.run2 ? &*res.run2 : nullptr,
                     built2 ? &*built2 : nullptr};
    res.t_num = extinct::detect_extinction(res.run->ledger);

    std::optional<extinct::BoundReport> bounds;
    std::optional<extinct::DecayFit> fit;
    for (const std::string& name : checks) {
        if (name == "mass-identity") {
            res.checks.push_back(check_mass_identity(ctx));
        } else if (name == "extinction") {
            res.checks.push_back(check_extinction(ctx));
        } else if (name == "bounds") {
            bounds = make_bounds(ctx);
            res.checks.push_back(check_bounds(ctx, *bounds));
        } else if (name == "decay-exp") {
            res.checks.push_back(check_decay_exp(ctx, fit));
        } else if (name == "decay-alg") {
            res.checks.push_back(check_decay_alg(ctx, fit));
        } else if (name == "contraction") {
            res.checks.push_back(check_contraction(ctx));
        } else if (name == "h1") {
            res.checks.push_back(check_h1(ctx));
        } else if (name == "smallness") {
            res.checks.push_back(check_smallness(ctx));
        } else if (name == "vanishing") {
            res.checks.push_back(check_vanishing(ctx));
        } else {
            res.checks.push_back({name, false, "unknown check"});
        }
    }

    extinct::ExtinctionReport xrep;
    xrep.t_num = res.t_num;
    if (bounds) {
        xrep.bounds = *bounds;
        xrep.envelope_ok = bounds->envelope_ok;
        xrep.lower_bound = bounds->lower_bound;
        xrep.upper_envelope_time = bounds->upper_envelope_time;
    }
    xrep.fit = fit;
    report["extinction"] = json::parse(extinct::to_json(xrep));

    json jc = json::array();
    bool all_pass = true;
    for (const CheckOutcome& c : res.checks) {
        jc.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        all_pass = all_pass && c.pass;
    }
    report["checks"] = jc;
    report["all_checks_pass"] = all_pass;
    res.exit_code = all_pass ? 0 : 3;
    res.report_json = report.dump(2);

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text(fs::path(out_dir) / "config.json", emit_config(cfg));
        if (cfg2) write_text(fs::path(out_dir) / "config2.json", emit_config(*cfg2));
        {
            std::ofstream os(fs::path(out_dir) / "ledger.csv", std::ios::binary);
            res.run->ledger.write_csv(os);
        }
        if (res.run2) {
            std::ofstream os(fs::path(out_dir) / "ledger2.csv", std::ios::binary);
            res.run2->ledger.write_csv(os);
        }
        write_text(fs::path(out_dir) / "report.json", res.report_json);
        {
            std::ofstream os(fs::path(out_dir) / "final_state.csv", std::ios::binary);
            grid::save_field_csv(os, res.run->final_state());
        }
        if (res.run->snapshots.size() > 2) {
            const fs::path snapdir = fs::path(out_dir) / "snapshots";
            fs::create_directories(snapdir);
            std::ofstream index(snapdir / "index.csv", std::ios::binary);
            index << "file,t\n";
            char name[40], row[96];
            for (std::size_t i = 0; i < res.run->snapshots.size(); ++i) {
                std::snprintf(name, sizeof name, "snapshot_%06zu.csv", i);
                std::snprintf(row, sizeof row, "%s,%.17g\n", name, res.run->snapshot_times[i]);
                index << row;
                std::ofstream os(snapdir / name, std::ios::binary);
                grid::save_field_csv(os, res.run->snapshots[i]);
            }
        }
        if (bounds && bounds->y0_at_t0 > 0.0 && bounds->delta <= 1.0 && bounds->alpha_ell > 0.0) {
            const double t0 =
                cfg.forcing.kind == ForcingConfig::Kind::zero ? 0.0 : cfg.forcing.t0;
            extinct::Envelope env(extinct::EnvelopeParams{bounds->y0_at_t0, bounds->alpha_ell,
                                                          bounds->delta, t0, 1});
            extinct::Envelope floor =
                extinct::mass_floor(bounds->y0_at_t0, built.a.a.imag(), built.volume, cfg.m, t0);
            std::ofstream os(fs::path(out_dir) / "envelope.csv", std::ios::binary);
            extinct::write_envelope_csv(os, res.run->ledger, env, floor);
        }
        std::ostringstream summary;
        summary << "scenario: " << (preset_name.empty() ? "custom" : preset_name) << "\n";
        summary << "coefficient: a = " << built.a.a.real() << " + " << built.a.a.imag()
                << "i, classification " << coeff::to_string(built.a.classification) << "\n";
        summary << "t_num: " << (res.t_num ? fmt(*res.t_num) : std::string("none")) << "\n";
        for (const CheckOutcome& c : res.checks)
            summary << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        summary << "exit: " << res.exit_code << "\n";
        write_text(fs::path(out_dir) / "summary.txt", summary.str());
    }
    return res;
}

}  // namespace

ScenarioResult run_scenario(const RunConfig& cfg, const std::vector<std::string>& checks,
                            const std::string& out_dir) {
    return run_impl(cfg, nullptr, checks, out_dir, "");
}

ScenarioResult run_preset(const ScenarioPreset& preset, const std::string& out_dir) {
    return run_impl(preset.config, preset.config2 ? &*preset.config2 : nullptr, preset.checks,
                    out_dir, preset.name);
}

}  // namespace dnls::harness
