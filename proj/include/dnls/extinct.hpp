#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "dnls/coeff.hpp"
#include "dnls/evolve.hpp"

namespace dnls::extinct {

using evolve::MassLedger;

/// Parameters of the comparison equation y' + 2 alpha_l y^delta = 0 for the
/// mass y(t) = ||u(t)||_2^2, valid from t = T0 with y(T0) = y0.
struct EnvelopeParams {
    double y0 = 0.0;
    double alpha_ell = 0.0;
    double delta = 0.0;  // in (1/2, 1]
    double t0 = 0.0;
    int ell = 1;
};

/// Closed-form solution of the comparison equation. For delta < 1 the value
/// vanishes at a finite extinction time; delta = 1 gives pure exponential decay.
class Envelope {
public:
    explicit Envelope(EnvelopeParams p);
    double operator()(double t) const;
    /// +infinity when delta = 1 and y0 > 0; t0 when y0 = 0.
    double extinction_time() const;
    const EnvelopeParams& params() const { return p_; }

private:
    EnvelopeParams p_;
};

Envelope envelope(const EnvelopeParams& p);

/// The pointwise reverse bound y' >= -2 Im(a) |Omega|^{(1-m)/2} y^{(m+1)/2},
/// integrated in closed form; y0 is the mass at T0.
Envelope mass_floor(double y0, double im_a, double volume, double m, double t0);

struct GnEstimate {
    double value = 0.0;    // max ratio over admissible ledger entries
    std::size_t argmax = 0;
    std::size_t samples = 0;
};

/// Trajectory-derived interpolation constant: the max over ledger entries with
/// mass > 1e-16 of ||u||_2^{2 delta_l} / (||u||_{m+1}^{m+1} ||grad^l u||_2^{N(1-m)/(2l)}).
/// l = 1 uses the gradient column, l = 2 the Laplacian column.
GnEstimate gn_constant_estimate(const MassLedger& ledger, int dim, coeff::Exponent m, int ell);

/// First ledger time with mass <= threshold that stays below it afterwards.
std::optional<double> detect_extinction(const MassLedger& ledger, double threshold = 1e-12);

enum class FitKind { exponential, algebraic };

struct DecayFit {
    FitKind kind = FitKind::exponential;
    /// exponential: decay rate lambda of the mass, mass ~ e^{-lambda t};
    /// algebraic: magnitude of the slope of log mass against log(1 + c (t - T0)).
    double rate_or_exponent = 0.0;
    double r2 = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    double c = 0.0;  // algebraic time-scale parameter chosen by the fit
};

/// Least-squares fit of the ledger mass over a time window; entries with
/// mass <= 1e-14 are excluded and at least 10 points are required.
DecayFit decay_fit(const MassLedger& ledger, FitKind kind, double window_lo, double window_hi,
                   double t0);

/// Reference algebraic mass-decay exponent 2l / ((1-m)(N-2l)); requires N > 2l.
double reference_decay_exponent(int dim, int ell, coeff::Exponent m);

/// Best-r2 exponential fit over ledger windows spanning at least the given
/// number of decades of mass decay; throws when no admissible window exists.
DecayFit best_exponential_decade(const MassLedger& ledger, double min_decades = 1.0);

struct FitWindow {
    double lo = 0.0, hi = 0.0;
};

/// Late-decay window for algebraic fits: from the first time the mass falls
/// below y(T0)/10 until it last exceeds the 1e-13 floor.
std::optional<FitWindow> late_decay_window(const MassLedger& ledger, double t0);

struct BoundContext {
    int dim = 1;
    int ell = 1;
    double m = 0.5;
    double im_a = 0.0;
    double volume = 0.0;
    double t0 = 0.0;
    double mass_threshold = 1e-12;
    double slack = 0.05;  // relative slack on bound comparisons
};

struct BoundReport {
    std::optional<double> t_num;
    double lower_bound = 0.0;          // floor-derived earliest extinction time
    double upper_envelope_time = 0.0;  // +infinity when delta_l >= 1
    bool envelope_ok = false;          // mass dominated by the run-derived envelope
    bool floor_ok = false;             // mass above the closed-form floor until extinction
    bool pass_lower = false;           // lower_bound <= t_num within slack
    bool pass_upper = false;           // t_num <= upper time within slack
    double max_envelope_excess = 0.0;  // worst relative violation of the envelope
    double max_floor_deficit = 0.0;    // worst relative violation of the floor
    double c_gn = 0.0;
    double sup_grad = 0.0;
    double alpha_ell = 0.0;
    double delta = 0.0;
    double y0_at_t0 = 0.0;
};

/// Compares the ledger against the run-derived envelope, the closed-form
/// floor, and the two extinction-time bounds. Report-only: never throws on a
/// failed comparison.
BoundReport bound_report(const MassLedger& ledger, const BoundContext& ctx);

enum class VanishingStatus { conclusive, inconclusive };

struct VanishingReport {
    VanishingStatus status = VanishingStatus::inconclusive;
    struct Tail {
        double at_start = 0.0;  // value at the start of the final quarter
        double at_end = 0.0;
        bool decreasing = false;
    };
    Tail mass, lmp1, h1, dmass_dt;
    bool all_vanishing = false;
};

/// Tail-trend monitor over the final quarter of the horizon; inconclusive when
/// the forcing stays active up to the horizon.
VanishingReport vanishing_monitor(const MassLedger& ledger, double forcing_t0, bool forcing_zero);

struct ExtinctionReport {
    std::optional<double> t_num;
    bool envelope_ok = false;
    double lower_bound = 0.0;
    double upper_envelope_time = 0.0;
    std::optional<DecayFit> fit;
    BoundReport bounds;
};

/// Single JSON document with stable field names; schema_version is bumped on
/// layout changes.
std::string to_json(const ExtinctionReport& report);

/// Columns: t, y_env, y_floor, y_ledger for ledger times t >= T0.
void write_envelope_csv(std::ostream& os, const MassLedger& ledger, const Envelope& env,
                        const Envelope& floor);

}  // namespace dnls::extinct
