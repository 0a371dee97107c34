#pragma once

#include <complex>
#include <functional>

namespace dnls::coeff {

using Complex = std::complex<double>;

/// Sublinear absorption exponent, constrained to the open interval (0, 1).
class Exponent {
public:
    explicit Exponent(double m);
    double value() const noexcept { return m_; }

private:
    double m_;
};

enum class Classification { InD, InCOnly, Outside };

const char* to_string(Classification c) noexcept;

/// Damping coefficient bundled with its membership classification.
struct DampingCoefficient {
    Complex a{};
    Classification classification = Classification::Outside;
};

/// Relative tolerance for the exact-equality ray membership test; chosen at
/// the floating-point representability limit of (1-m)/(2 sqrt(m)).
inline constexpr double kRayRelTol = 1e-12;

/// Membership test. The cone C(m) is { Im(z) > 0, 2 sqrt(m) Im(z) >= (1-m)|Re(z)| };
/// the critical ray D(m) is { Im(z) > 0, 2 sqrt(m) Im(z) = (1-m) Re(z) }, the
/// equality tested with relative tolerance kRayRelTol.
Classification classify(Complex a, Exponent m) noexcept;

DampingCoefficient make_damping(Complex a, Exponent m) noexcept;

/// The D(m) element with the given real part: re + i (1-m) re / (2 sqrt(m)).
/// Rejects re <= 0.
Complex make_dm_coefficient(Exponent m, double re);

/// Extinction exponent delta_l = ((N + 2l) - m (N - 2l)) / (4l).
/// Admissible pairs: l = 1 with N in {1,2,3}; l = 2 with N in {1,...,5}.
/// delta_l < 1 iff N < 2l, and delta_l = 1 exactly when N = 2l.
double delta(int dim, int ell, Exponent m);

/// Left-hand interpolation exponent theta_l = 2 delta_l.
double theta(int dim, int ell, Exponent m);

/// Smallness threshold as a function of (alpha, delta), delta in (1/2, 1):
/// min of (2d-1)^{-(2d-1)/d} (a d)^{1/(1-d)} (1-d)^{(2d-1)/(d(1-d))} and a d (1-d).
double eps_star(double alpha, double delta);

/// Rigorous one-dimensional interpolation constant 2^{(1-m)/2}, from
/// ||v||_inf^2 <= 2 ||v||_2 ||v'||_2 on H^1_0 of an interval.
double gn_constant_1d_bound(Exponent m);

struct ExtinctionExponents {
    int dim = 0;
    int ell = 0;
    double delta = 0.0;      // delta_l
    double alpha = 0.0;      // Im(a) / C_gn
    double alpha_ell = 0.0;  // alpha * sup_grad^{-N(1-m)/(2l)}
    double eps_star = 0.0;   // 0 when delta >= 1 (no finite threshold there)
};

/// Assembles the exponent bundle for a run; c_gn and sup_grad are
/// trajectory-derived quantities (see the extinction module).
ExtinctionExponents extinction_exponents(int dim, int ell, Exponent m, double im_a,
                                         double c_gn, double sup_grad);

struct SmallnessInput {
    double u0_mass = 0.0;               // ||u0||_2^2
    double u0_grad_or_star = 0.0;       // ||grad u0||_2 (l=1) or the star norm (l=2)
    double forcing_budget = 0.0;        // integral gradient norm (l=1) / W^{1,1} norm (l=2)
    std::function<double(double)> f_l2; // t -> ||f(t)||_2; null means identically 0
    double t0 = 0.0;
    double eps_star = 0.0;
    double delta = 0.0;                 // must lie in (1/2, 1)
    double horizon = 0.0;               // sampling horizon for the pointwise condition
    int samples = 1024;
};

struct SmallnessReport {
    bool mass_ok = false;      // ||u0||^{2(1-delta)} <= eps_star T0
    bool budget_ok = false;    // data + forcing norms <= eps_star
    bool envelope_ok = false;  // ||f(t)||^2 <= eps_star (T0 - t)_+^{(2 delta - 1)/(1 - delta)}
    double mass_lhs = 0.0, mass_rhs = 0.0;
    double budget_lhs = 0.0, budget_rhs = 0.0;
    double envelope_worst_excess = 0.0;  // max over samples of lhs - rhs
    bool all() const noexcept { return mass_ok && budget_ok && envelope_ok; }
};

/// Evaluates the three smallness conditions separately; the pointwise forcing
/// condition is sampled on a uniform grid over [0, horizon].
SmallnessReport smallness_check(const SmallnessInput& in);

}  // namespace dnls::coeff
