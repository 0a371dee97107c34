#include "dnls/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace dnls::evolve {

Field ForcingSpec::sample(double t, const grid::GridSpec& g) const {
    Field out = Field::zeros(g);
    if (!sampler) return out;
    if (cutoff_active && t > t0) return out;
    sampler(t, out);
    return out;
}

void MassLedger::write_csv(std::ostream& os) const {
    os << csv_header << '\n';
    char buf[256];
    for (const MassLedgerEntry& e : entries) {
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.t, e.mass,
                      e.absorption, e.lmp1, e.work, e.step_defect, e.identity_residual, e.h1,
                      e.lapl2);
        os << buf;
    }
}

MassLedger MassLedger::read_csv(std::istream& is) {
    MassLedger l;
    std::string line;
    if (!std::getline(is, line) || line != csv_header)
        throw std::runtime_error("mass ledger csv: bad header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        MassLedgerEntry e;
        if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg", &e.t, &e.mass,
                        &e.absorption, &e.lmp1, &e.work, &e.step_defect, &e.identity_residual,
                        &e.h1, &e.lapl2) != 9)
            throw std::runtime_error("mass ledger csv: malformed row");
        l.entries.push_back(e);
    }
    return l;
}

double MassLedger::max_identity_residual() const {
    double m = 0.0;
    for (const MassLedgerEntry& e : entries) m = std::max(m, e.identity_residual);
    return m;
}

namespace {

MassLedgerEntry ledger_entry(double t, const Field& u, const nonlin::AbsorptionParams& params,
                             const Field& f) {
    MassLedgerEntry e;
    e.t = t;
    const grid::FieldNorms n = grid::compute_norms(u, params.m.value());
    e.mass = n.l2 * n.l2;
    e.h1 = n.h1;
    e.lapl2 = n.lapl2;
    e.lmp1 = n.lmp1_power;
    e.absorption = nonlin::absorption_integral(u, params.m.value(), params.epsilon);
    e.work = grid::inner_complex(f, u).imag();
    return e;
}

}  // namespace

StepResult step(const Field& u, double t, double dt, const nonlin::AbsorptionParams& params,
                const grid::PotentialSpec& V, const ForcingSpec& f, double tol,
                const stationary::LinearPart* cache, int max_iter, Scheme scheme) {
    const double t_next = t + dt;
    const bool midpoint = scheme == Scheme::crank_nicolson;
    const double tau = midpoint ? 0.5 * dt : dt;
    Field f_next = f.sample(midpoint ? t + 0.5 * dt : t_next, u.spec);
    // implicit Euler: u+ + dt A_eps u+ = u - i dt f(t+dt)
    // midpoint: w + (dt/2) A_eps w = u - i (dt/2) f(t+dt/2), then u+ = 2w - u
    Field rhs = u;
    grid::add_scaled(rhs, Complex(0.0, -tau), f_next);
    stationary::ResolventProblem prob(std::move(rhs), tau, params, V);
    stationary::SolveOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    stationary::SolveResult sol = stationary::resolvent_solve(prob, opts, &u, cache);

    StepResult out;
    if (midpoint) {
        out.u = grid::scaled(sol.u, 2.0);
        grid::add_scaled(out.u, -1.0, u);
    } else {
        out.u = std::move(sol.u);
    }
    out.solver = sol.report;
    out.ledger = ledger_entry(t_next, out.u, params, f_next);
    const double l2_prev = grid::norm_l2(u);
    const double l2d = grid::norm_l2(grid::subtract(out.u, u));
    out.ledger.step_defect = 0.5 * l2d * l2d;
    out.ledger.identity_residual =
        std::abs(0.5 * (out.ledger.mass - l2_prev * l2_prev) + out.ledger.step_defect +
                 dt * params.a.a.imag() * out.ledger.absorption - dt * out.ledger.work);
    return out;
}

RunResult run(const RunInputs& in) {
    if (!(in.time.dt > 0.0) || in.time.steps < 0)
        throw std::invalid_argument("run: invalid time grid");
    if (!(in.u0.spec == in.grid)) throw std::invalid_argument("run: u0 grid mismatch");
    if (in.params.a.classification == coeff::Classification::Outside)
        throw std::invalid_argument(
            "run: damping coefficient outside C(m); the scheme requires Im(a) > 0 and "
            "2 sqrt(m) Im(a) >= (1-m) |Re(a)|");

    RunResult out;
    out.grid = in.grid;
    out.time = in.time;
    out.ledger.entries.reserve(in.time.steps + 1);
    out.snapshots.reserve(in.time.steps / std::max(in.snapshot_stride, 1) + 2);

    const double tau = in.scheme == Scheme::crank_nicolson ? 0.5 * in.time.dt : in.time.dt;
    stationary::LinearPart cache(in.grid, tau, in.potential);

    Field u = in.u0;
    {
        Field f0 = in.forcing.sample(0.0, in.grid);
        out.ledger.entries.push_back(ledger_entry(0.0, u, in.params, f0));
    }
    out.snapshot_times.push_back(0.0);
    out.snapshots.push_back(u);

    for (int k = 0; k < in.time.steps; ++k) {
        const double t = in.time.dt * k;
        StepResult s;
        try {
            s = step(u, t, in.time.dt, in.params, in.potential, in.forcing, in.solver_tol, &cache,
                     in.max_iter, in.scheme);
        } catch (const stationary::NonConvergence& e) {
            throw StepFailure("step " + std::to_string(k + 1) + " at t=" + std::to_string(t) +
                                  ": " + e.what(),
                              k + 1, t);
        }
        u = std::move(s.u);
        if (s.ledger.mass < in.snap_mass_floor) {
            // absorbing state of the monotone flow; avoids denormal stagnation
            std::fill(u.values.begin(), u.values.end(), Complex(0.0, 0.0));
            out.snapped_to_zero = true;
        }
        out.ledger.entries.push_back(s.ledger);
        const bool last = (k + 1 == in.time.steps);
        if (last || ((k + 1) % std::max(in.snapshot_stride, 1)) == 0) {
            out.snapshot_times.push_back(in.time.dt * (k + 1));
            out.snapshots.push_back(u);
        }
    }
    return out;
}

ContractionReport contraction_check(const RunResult& r1, const RunResult& r2,
                                    const ForcingSpec& f1, const ForcingSpec& f2, double tol) {
    if (!(r1.grid == r2.grid) || r1.time.dt != r2.time.dt || r1.time.steps != r2.time.steps)
        throw std::invalid_argument("contraction_check: incompatible runs");
    const std::size_t k = r1.snapshots.size();
    if (k != r2.snapshots.size() || k != r1.ledger.entries.size())
        throw std::invalid_argument("contraction_check: stride-1 snapshots required");

    const double dt = r1.time.dt;
    std::vector<double> d(k), cum(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        d[i] = grid::norm_l2(grid::subtract(r1.snapshots[i], r2.snapshots[i]));
    for (std::size_t i = 1; i < k; ++i) {
        const double t = r1.snapshot_times[i];
        const Field df = grid::subtract(f1.sample(t, r1.grid), f2.sample(t, r1.grid));
        cum[i] = cum[i - 1] + dt * grid::norm_l2(df);
    }

    ContractionReport rep;
    rep.slack = 10.0 * static_cast<double>(r1.time.steps) * tol;
    // d[t] <= d[s] + (cum[t]-cum[s]) + slack for all s <= t
    // equivalent to a running-minimum scan of d[s] - cum[s]
    double best = d[0] - cum[0];
    double best_s = r1.snapshot_times[0];
    rep.max_violation = 0.0;
    rep.pass = true;
    for (std::size_t i = 0; i < k; ++i) {
        const double excess = (d[i] - cum[i]) - best - rep.slack;
        if (excess > rep.max_violation) {
            rep.max_violation = excess;
            rep.worst_s = best_s;
            rep.worst_t = r1.snapshot_times[i];
            rep.pass = false;
        }
        if (d[i] - cum[i] < best) {
            best = d[i] - cum[i];
            best_s = r1.snapshot_times[i];
        }
    }
    return rep;
}

H1Report h1_monitor(const RunResult& run, const ForcingSpec& f, double rel_tol) {
    H1Report rep;
    rep.rel_tol = rel_tol;
    const double dt = run.time.dt;
    double budget = run.ledger.entries.front().h1;
    double max_ratio = 0.0;
    for (std::size_t i = 1; i < run.ledger.entries.size(); ++i) {
        const double t = run.ledger.entries[i].t;
        if (!f.is_zero()) budget += dt * grid::h1_seminorm(f.sample(t, run.grid));
        const double denom = budget > 1e-300 ? budget : 1e-300;
        max_ratio = std::max(max_ratio, run.ledger.entries[i].h1 / denom);
    }
    rep.max_ratio = max_ratio;
    rep.pass = max_ratio <= 1.0 + rel_tol;
    return rep;
}

}  // namespace dnls::evolve
