#include "dnls/extinct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace dnls::extinct {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Envelope::Envelope(EnvelopeParams p) : p_(p) {
    if (!(p_.y0 >= 0.0)) throw std::invalid_argument("Envelope: y0 must be nonnegative");
    if (!(p_.alpha_ell > 0.0)) throw std::invalid_argument("Envelope: alpha_ell must be positive");
    if (!(p_.delta > 0.5) || !(p_.delta <= 1.0))
        throw std::invalid_argument("Envelope: delta must lie in (1/2, 1]");
}

double Envelope::operator()(double t) const {
    if (p_.y0 == 0.0) return 0.0;
    const double s = t - p_.t0;
    if (s <= 0.0) return p_.y0;
    if (p_.delta == 1.0) return p_.y0 * std::exp(-2.0 * p_.alpha_ell * s);
    const double om = 1.0 - p_.delta;
    const double core = std::pow(p_.y0, om) - 2.0 * p_.alpha_ell * om * s;
    if (core <= 0.0) return 0.0;
    return std::pow(core, 1.0 / om);
}

double Envelope::extinction_time() const {
    if (p_.y0 == 0.0) return p_.t0;
    if (p_.delta == 1.0) return kInf;
    const double om = 1.0 - p_.delta;
    return p_.t0 + std::pow(p_.y0, om) / (2.0 * p_.alpha_ell * om);
}

Envelope envelope(const EnvelopeParams& p) { return Envelope(p); }

Envelope mass_floor(double y0, double im_a, double volume, double m, double t0) {
    EnvelopeParams p;
    p.y0 = y0;
    p.alpha_ell = im_a * std::pow(volume, 0.5 * (1.0 - m));
    p.delta = 0.5 * (m + 1.0);
    p.t0 = t0;
    return Envelope(p);
}

GnEstimate gn_constant_estimate(const MassLedger& ledger, int dim, coeff::Exponent m, int ell) {
    if (ell != 1 && ell != 2) throw std::invalid_argument("gn_constant_estimate: ell must be 1 or 2");
    const double dl = coeff::delta(dim, ell, m);
    const double kappa = dim * (1.0 - m.value()) / (2.0 * ell);
    GnEstimate est;
    for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
        const evolve::MassLedgerEntry& e = ledger.entries[i];
        if (!(e.mass > 1e-16)) continue;
        const double grad = (ell == 1) ? e.h1 : e.lapl2;
        if (!(grad > 0.0) || !(e.lmp1 > 0.0)) continue;
        const double ratio = std::pow(e.mass, dl) / (e.lmp1 * std::pow(grad, kappa));
        if (ratio > est.value) {
            est.value = ratio;
            est.argmax = i;
        }
        ++est.samples;
    }
    if (est.samples == 0)
        throw std::invalid_argument("gn_constant_estimate: no admissible ledger entries");
    return est;
}

std::optional<double> detect_extinction(const MassLedger& ledger, double threshold) {
    if (ledger.entries.empty()) return std::nullopt;
    std::size_t first = ledger.entries.size();
    for (std::size_t i = ledger.entries.size(); i-- > 0;) {
        if (ledger.entries[i].mass > threshold) break;
        first = i;
    }
    if (first == ledger.entries.size()) return std::nullopt;
    return ledger.entries[first].t;
}

namespace {

struct LinFit {
    double intercept = 0.0, slope = 0.0, sse = 0.0, r2 = 0.0;
};

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinFit f;
    f.slope = (sxx > 0.0) ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    f.sse = ss_res;
    f.r2 = (ss_tot > 0.0) ? std::max(0.0, 1.0 - ss_res / ss_tot) : (ss_res == 0.0 ? 1.0 : 0.0);
    return f;
}

double algebraic_sse(const std::vector<double>& t, const std::vector<double>& logy, double c,
                     LinFit* out) {
    std::vector<double> x(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double arg = 1.0 + c * t[i];
        if (!(arg > 0.0)) return kInf;
        x[i] = std::log(arg);
    }
    LinFit f = linear_fit(x, logy);
    if (out) *out = f;
    return f.sse;
}

}  // namespace

DecayFit decay_fit(const MassLedger& ledger, FitKind kind, double window_lo, double window_hi,
                   double t0) {
    std::vector<double> t, logy;
    for (const evolve::MassLedgerEntry& e : ledger.entries) {
        if (e.t < window_lo || e.t > window_hi) continue;
        if (!(e.mass > 1e-14)) continue;
        t.push_back(e.t);
        logy.push_back(std::log(e.mass));
    }
    if (t.size() < 10) throw std::invalid_argument("decay_fit: insufficient data in window");

    DecayFit fit;
    fit.kind = kind;
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;

    if (kind == FitKind::exponential) {
        LinFit f = linear_fit(t, logy);
        fit.rate_or_exponent = -f.slope;
        fit.r2 = f.r2;
        return fit;
    }

    // shift times so the model reads 1 + c (t - t0)
    std::vector<double> ts(t.size());
    const double tmax = *std::max_element(t.begin(), t.end());
    for (std::size_t i = 0; i < t.size(); ++i) ts[i] = t[i] - t0;

    // scan candidate time scales of both signs, then refine around the best
    std::vector<double> candidates;
    for (int k = -60; k <= 90; ++k) candidates.push_back(std::pow(10.0, k / 10.0));
    const double cmin_neg = -(1.0 - 1e-9) / std::max(tmax - t0, 1e-300);
    for (int k = 1; k <= 120; ++k) {
        const double frac = static_cast<double>(k) / 121.0;
        candidates.push_back(cmin_neg * frac);
    }
    double best_c = 0.0, best_sse = kInf;
    for (double c : candidates) {
        const double sse = algebraic_sse(ts, logy, c, nullptr);
        if (sse < best_sse) {
            best_sse = sse;
            best_c = c;
        }
    }
    if (!std::isfinite(best_sse)) throw std::invalid_argument("decay_fit: no admissible time scale");
    // golden-section refinement on a bracket around the best candidate
    double lo = best_c > 0 ? best_c / 4.0 : best_c * 4.0;
    double hi = best_c > 0 ? best_c * 4.0 : best_c / 4.0;
    if (best_c < 0) hi = std::min(hi, -1e-12);
    if (best_c < 0) lo = std::max(lo, cmin_neg);
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = algebraic_sse(ts, logy, x1, nullptr), f2 = algebraic_sse(ts, logy, x2, nullptr);
    for (int it = 0; it < 200; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = algebraic_sse(ts, logy, x1, nullptr);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = algebraic_sse(ts, logy, x2, nullptr);
        }
    }
    const double c_refined = 0.5 * (a + b);
    LinFit f;
    const double sse_refined = algebraic_sse(ts, logy, c_refined, &f);
    if (sse_refined > best_sse) algebraic_sse(ts, logy, best_c, &f);
    fit.c = (sse_refined <= best_sse) ? c_refined : best_c;
    fit.rate_or_exponent = std::abs(f.slope);
    fit.r2 = f.r2;
    return fit;
}

double reference_decay_exponent(int dim, int ell, coeff::Exponent m) {
    if (dim <= 2 * ell)
        throw std::invalid_argument("reference_decay_exponent: requires N > 2l");
    return 2.0 * ell / ((1.0 - m.value()) * (dim - 2 * ell));
}

DecayFit best_exponential_decade(const MassLedger& ledger, double min_decades) {
    std::vector<std::pair<double, double>> pts;  // (t, mass)
    for (const evolve::MassLedgerEntry& e : ledger.entries)
        if (e.mass > 1e-14) pts.emplace_back(e.t, e.mass);
    const std::size_t n = pts.size();
    if (n < 10) throw std::invalid_argument("best_exponential_decade: insufficient data");
    const double drop = std::pow(10.0, -min_decades);

    std::optional<DecayFit> best;
    const std::size_t stride = std::max<std::size_t>(1, n / 400);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; i += stride) {
        if (j < i + 1) j = i + 1;
        while (j < n && pts[j].second > pts[i].second * drop) ++j;
        if (j >= n) break;
        if (j - i + 1 < 10) continue;
        DecayFit f = decay_fit(ledger, FitKind::exponential, pts[i].first, pts[j].first, 0.0);
        if (!best || f.r2 > best->r2) best = f;
    }
    if (!best)
        throw std::invalid_argument("best_exponential_decade: no window with the requested decay");
    return *best;
}

std::optional<FitWindow> late_decay_window(const MassLedger& ledger, double t0) {
    std::size_t i0 = 0;
    while (i0 + 1 < ledger.entries.size() && ledger.entries[i0].t < t0 - 1e-12) ++i0;
    const double y0 = ledger.entries[i0].mass;
    std::optional<double> lo;
    double hi = 0.0;
    for (std::size_t i = i0; i < ledger.entries.size(); ++i) {
        const evolve::MassLedgerEntry& e = ledger.entries[i];
        if (!lo && e.mass <= y0 / 10.0) lo = e.t;
        if (e.mass > 1e-13) hi = e.t;
    }
    if (!lo || hi <= *lo) return std::nullopt;
    return FitWindow{*lo, hi};
}

BoundReport bound_report(const MassLedger& ledger, const BoundContext& ctx) {
    if (ledger.entries.empty()) throw std::invalid_argument("bound_report: empty ledger");
    BoundReport rep;
    const coeff::Exponent m(ctx.m);

    // mass at the forcing cutoff
    std::size_t i0 = 0;
    while (i0 + 1 < ledger.entries.size() && ledger.entries[i0].t < ctx.t0 - 1e-12) ++i0;
    rep.y0_at_t0 = ledger.entries[i0].mass;
    const double y0 = rep.y0_at_t0;

    rep.t_num = detect_extinction(ledger, ctx.mass_threshold);
    rep.delta = coeff::delta(ctx.dim, ctx.ell, m);

    const GnEstimate gn = gn_constant_estimate(ledger, ctx.dim, m, ctx.ell);
    rep.c_gn = gn.value;
    double sup_grad = 0.0;
    for (const evolve::MassLedgerEntry& e : ledger.entries)
        sup_grad = std::max(sup_grad, (ctx.ell == 1) ? e.h1 : e.lapl2);
    rep.sup_grad = sup_grad;

    // floor and its zero give the earliest admissible extinction time
    const Envelope floor = mass_floor(y0, ctx.im_a, ctx.volume, ctx.m, ctx.t0);
    rep.lower_bound = floor.extinction_time();

    if (y0 == 0.0) {
        rep.upper_envelope_time = ctx.t0;
        rep.envelope_ok = rep.floor_ok = rep.pass_lower = rep.pass_upper = true;
        return rep;
    }

    const coeff::ExtinctionExponents ee =
        coeff::extinction_exponents(ctx.dim, ctx.ell, m, ctx.im_a, gn.value, sup_grad);
    rep.alpha_ell = ee.alpha_ell;
    std::optional<Envelope> env;
    if (ee.delta <= 1.0) {
        env.emplace(EnvelopeParams{y0, ee.alpha_ell, ee.delta, ctx.t0, ctx.ell});
        rep.upper_envelope_time = env->extinction_time();
    } else {
        rep.upper_envelope_time = kInf;
    }

    double env_excess = 0.0, floor_deficit = 0.0;
    for (const evolve::MassLedgerEntry& e : ledger.entries) {
        if (e.t < ctx.t0) continue;
        if (env) {
            const double ye = (*env)(e.t);
            if (e.mass > ye * (1.0 + ctx.slack)) {
                const double scale = std::max(ye, ctx.mass_threshold);
                env_excess = std::max(env_excess, (e.mass - ye * (1.0 + ctx.slack)) / scale);
            }
        }
        const double yf = floor(e.t);
        if (yf * (1.0 - ctx.slack) > ctx.mass_threshold &&
            e.mass < yf * (1.0 - ctx.slack)) {
            floor_deficit = std::max(floor_deficit, (yf * (1.0 - ctx.slack) - e.mass) / yf);
        }
    }
    rep.max_envelope_excess = env_excess;
    rep.max_floor_deficit = floor_deficit;
    rep.envelope_ok = env.has_value() && env_excess == 0.0;
    rep.floor_ok = floor_deficit == 0.0;

    if (rep.t_num) {
        rep.pass_lower = rep.lower_bound * (1.0 - ctx.slack) <= *rep.t_num;
        rep.pass_upper = *rep.t_num <= rep.upper_envelope_time * (1.0 + ctx.slack);
    }
    return rep;
}

VanishingReport vanishing_monitor(const MassLedger& ledger, double forcing_t0,
                                  bool forcing_zero) {
    VanishingReport rep;
    if (ledger.entries.size() < 8) return rep;
    const double horizon = ledger.entries.back().t;
    if (!forcing_zero && forcing_t0 >= horizon * (1.0 - 1e-12)) {
        rep.status = VanishingStatus::inconclusive;  // cutoff hypothesis unmet
        return rep;
    }
    rep.status = VanishingStatus::conclusive;

    const std::size_t n = ledger.entries.size();
    const std::size_t q = (3 * n) / 4;
    auto tail = [&](auto&& get) {
        VanishingReport::Tail t;
        t.at_start = get(ledger.entries[q]);
        t.at_end = get(ledger.entries[n - 1]);
        double maxin = 0.0;
        for (std::size_t i = q; i < n; ++i) maxin = std::max(maxin, get(ledger.entries[i]));
        t.decreasing = t.at_end <= t.at_start * (1.0 + 1e-9) + 1e-30 &&
                       maxin <= t.at_start * (1.0 + 1e-6) + 1e-30;
        return t;
    };
    rep.mass = tail([](const evolve::MassLedgerEntry& e) { return e.mass; });
    rep.lmp1 = tail([](const evolve::MassLedgerEntry& e) { return e.lmp1; });
    rep.h1 = tail([](const evolve::MassLedgerEntry& e) { return e.h1; });

    auto slope = [&](std::size_t i) {
        if (i == 0) return 0.0;
        const double dt = ledger.entries[i].t - ledger.entries[i - 1].t;
        if (dt <= 0.0) return 0.0;
        return std::abs(ledger.entries[i].mass - ledger.entries[i - 1].mass) / dt;
    };
    rep.dmass_dt.at_start = slope(q);
    rep.dmass_dt.at_end = slope(n - 1);
    double maxs = 0.0;
    for (std::size_t i = q; i < n; ++i) maxs = std::max(maxs, slope(i));
    rep.dmass_dt.decreasing = rep.dmass_dt.at_end <= rep.dmass_dt.at_start * (1.0 + 1e-9) + 1e-30 &&
                              maxs <= rep.dmass_dt.at_start * (1.0 + 1e-6) + 1e-30;

    rep.all_vanishing = rep.mass.decreasing && rep.lmp1.decreasing && rep.h1.decreasing &&
                        rep.dmass_dt.decreasing;
    return rep;
}

std::string to_json(const ExtinctionReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    if (report.t_num)
        j["t_num"] = *report.t_num;
    else
        j["t_num"] = nullptr;
    j["envelope_ok"] = report.envelope_ok;
    j["lower_bound"] = report.lower_bound;
    j["upper_envelope_time"] = std::isfinite(report.upper_envelope_time)
                                   ? nlohmann::json(report.upper_envelope_time)
                                   : nlohmann::json(nullptr);
    if (report.fit) {
        nlohmann::json f;
        f["kind"] = report.fit->kind == FitKind::exponential ? "exponential" : "algebraic";
        f["rate_or_exponent"] = report.fit->rate_or_exponent;
        f["r2"] = report.fit->r2;
        f["window"] = {report.fit->window_lo, report.fit->window_hi};
        j["fit"] = f;
    } else {
        j["fit"] = nullptr;
    }
    nlohmann::json b;
    b["lower_bound"] = report.bounds.lower_bound;
    b["upper_envelope_time"] = std::isfinite(report.bounds.upper_envelope_time)
                                   ? nlohmann::json(report.bounds.upper_envelope_time)
                                   : nlohmann::json(nullptr);
    b["envelope_ok"] = report.bounds.envelope_ok;
    b["floor_ok"] = report.bounds.floor_ok;
    b["pass_lower"] = report.bounds.pass_lower;
    b["pass_upper"] = report.bounds.pass_upper;
    b["c_gn"] = report.bounds.c_gn;
    b["sup_grad"] = report.bounds.sup_grad;
    b["alpha_ell"] = report.bounds.alpha_ell;
    b["delta"] = report.bounds.delta;
    b["y0_at_t0"] = report.bounds.y0_at_t0;
    j["bounds"] = b;
    return j.dump(2);
}

void write_envelope_csv(std::ostream& os, const MassLedger& ledger, const Envelope& env,
                        const Envelope& floor) {
    os << "t,y_env,y_floor,y_ledger\n";
    char buf[160];
    for (const evolve::MassLedgerEntry& e : ledger.entries) {
        if (e.t < env.params().t0) continue;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", e.t, env(e.t), floor(e.t),
                      e.mass);
        os << buf;
    }
}

}  // namespace dnls::extinct
