#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "dnls/grid.hpp"
#include "dnls/nonlin.hpp"
#include "dnls/stationary.hpp"

namespace dnls::evolve {

using grid::Complex;
using grid::Field;

/// Uniform time grid starting at t = 0.
struct TimeGrid {
    double dt = 0.0;
    int steps = 0;
    double horizon() const noexcept { return dt * steps; }
};

enum class ForcingClass { L1L2, W11L2, H10 };

/// Time-dependent right-hand side. The sampler fills the field for a given
/// time; when the cutoff is active the sample is exactly zero for t > t0.
struct ForcingSpec {
    std::function<void(double t, Field& out)> sampler;  // null means identically zero
    double t0 = 0.0;
    bool cutoff_active = true;
    ForcingClass tag = ForcingClass::L1L2;

    bool is_zero() const noexcept { return !sampler; }
    Field sample(double t, const grid::GridSpec& g) const;
};

struct MassLedgerEntry {
    double t = 0.0;
    double mass = 0.0;               // ||u||_2^2
    double absorption = 0.0;         // weighted sum (|u|^2+eps)^{-(1-m)/2}|u|^2
    double lmp1 = 0.0;               // ||u||_{m+1}^{m+1}
    double work = 0.0;               // Im integral f conj(u)
    double step_defect = 0.0;        // 0.5 ||u+ - u||_2^2
    double identity_residual = 0.0;  // |0.5 d(mass) + defect + dt Im(a) absorption - dt work|
    double h1 = 0.0;                 // ||grad u||_2
    double lapl2 = 0.0;              // ||lap u||_2
};

struct MassLedger {
    std::vector<MassLedgerEntry> entries;

    static constexpr const char* csv_header =
        "t,mass,absorption,lmp1,work,step_defect,identity_residual,h1,lapl2";

    void write_csv(std::ostream& os) const;
    static MassLedger read_csv(std::istream& is);
    double max_identity_residual() const;
};

/// Primary scheme is the implicit Euler step, whose ledger identity is exact;
/// the midpoint variant is second order but demotes the recorded identity
/// residual to a first-order diagnostic (absorption is logged at u+, not at
/// the midpoint the variant pairs with).
enum class Scheme { implicit_euler, crank_nicolson };

struct StepResult {
    Field u;
    MassLedgerEntry ledger;
    stationary::SolveReport solver;
};

/// One implicit step: solves i (u+ - u)/dt + lap u+ + V u+ + a g_eps(u+) = f(t + dt)
/// through the resolvent with tau = dt; the ledger identity is exact up to the
/// solver residual paired with u+. The midpoint variant solves the same
/// resolvent problem at tau = dt/2 for w = (u + u+)/2 and extrapolates.
StepResult step(const Field& u, double t, double dt, const nonlin::AbsorptionParams& params,
                const grid::PotentialSpec& V, const ForcingSpec& f, double tol,
                const stationary::LinearPart* cache = nullptr, int max_iter = 60,
                Scheme scheme = Scheme::implicit_euler);

struct RunInputs {
    grid::GridSpec grid;
    Field u0;
    nonlin::AbsorptionParams params;
    grid::PotentialSpec potential;
    ForcingSpec forcing;
    TimeGrid time;
    double solver_tol = 1e-10;
    int max_iter = 60;
    int snapshot_stride = 1;
    double snap_mass_floor = 1e-18;  // state snapped to exactly 0 below this
    Scheme scheme = Scheme::implicit_euler;
};

class StepFailure : public std::runtime_error {
public:
    StepFailure(const std::string& what, int step_index, double t)
        : std::runtime_error(what), step_index(step_index), t(t) {}
    int step_index;
    double t;
};

struct RunResult {
    grid::GridSpec grid;
    TimeGrid time;
    MassLedger ledger;
    std::vector<double> snapshot_times;
    std::vector<Field> snapshots;  // always includes t = 0 and the final state
    bool snapped_to_zero = false;

    const Field& final_state() const { return snapshots.back(); }
};

/// Runs the scheme from u(0) = u0; rejects damping coefficients outside C(m).
RunResult run(const RunInputs& in);

struct ContractionReport {
    bool pass = false;
    double max_violation = 0.0;  // worst excess over the allowed bound
    double slack = 0.0;
    double worst_s = 0.0, worst_t = 0.0;
};

/// Discrete two-solution estimate: for every pair of ledger times s <= t,
/// ||u(t)-v(t)|| <= ||u(s)-v(s)|| + sum dt ||f-g|| + slack, slack = 10 steps tol.
/// Requires identical grids and time grids and stride-1 snapshots.
ContractionReport contraction_check(const RunResult& r1, const RunResult& r2,
                                    const ForcingSpec& f1, const ForcingSpec& f2, double tol);

struct H1Report {
    bool pass = false;
    double max_ratio = 0.0;  // max over t of h1(t) / budget(t)
    double rel_tol = 0.05;
};

/// Monitored gradient estimate for constant potentials: checks
/// ||grad u(t)|| <= ||grad u(0)|| + sum dt ||grad f|| within a relative tolerance.
H1Report h1_monitor(const RunResult& run, const ForcingSpec& f, double rel_tol = 0.05);

}  // namespace dnls::evolve
