#include "dnls/coeff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dnls::coeff {

Exponent::Exponent(double m) : m_(m) {
    if (!(m > 0.0) || !(m < 1.0))
        throw std::invalid_argument("exponent m must satisfy 0 < m < 1");
}

const char* to_string(Classification c) noexcept {
    switch (c) {
        case Classification::InD: return "InD";
        case Classification::InCOnly: return "InCOnly";
        default: return "Outside";
    }
}

Classification classify(Complex a, Exponent m) noexcept {
    const double im = a.imag();
    if (!(im > 0.0)) return Classification::Outside;
    const double lhs = 2.0 * std::sqrt(m.value()) * im;
    const double one_minus_m = 1.0 - m.value();
    // Ray first: points generated on D(m) may fall a rounding error outside
    // the cone, so the equality test must not be gated on the cone test.
    const double ray_rhs = one_minus_m * a.real();
    const double scale = std::max(std::abs(lhs), std::abs(ray_rhs));
    if (std::abs(lhs - ray_rhs) <= kRayRelTol * scale) return Classification::InD;
    if (lhs >= one_minus_m * std::abs(a.real())) return Classification::InCOnly;
    return Classification::Outside;
}

DampingCoefficient make_damping(Complex a, Exponent m) noexcept {
    return DampingCoefficient{a, classify(a, m)};
}

Complex make_dm_coefficient(Exponent m, double re) {
    if (!(re > 0.0)) throw std::invalid_argument("make_dm_coefficient: re must be positive");
    return {re, (1.0 - m.value()) / (2.0 * std::sqrt(m.value())) * re};
}

double delta(int dim, int ell, Exponent m) {
    const bool ok = (ell == 1 && dim >= 1 && dim <= 3) || (ell == 2 && dim >= 1 && dim <= 5);
    if (!ok) throw std::invalid_argument("delta: unsupported (dim, ell) pair");
    return ((dim + 2 * ell) - m.value() * (dim - 2 * ell)) / (4.0 * ell);
}

double theta(int dim, int ell, Exponent m) { return 2.0 * delta(dim, ell, m); }

double eps_star(double alpha, double delta) {
    if (!(alpha > 0.0)) throw std::invalid_argument("eps_star: alpha must be positive");
    if (!(delta > 0.5) || !(delta < 1.0))
        throw std::invalid_argument("eps_star: delta must lie in (1/2, 1)");
    const double d = delta;
    const double first = std::pow(2.0 * d - 1.0, -(2.0 * d - 1.0) / d) *
                         std::pow(alpha * d, 1.0 / (1.0 - d)) *
                         std::pow(1.0 - d, (2.0 * d - 1.0) / (d * (1.0 - d)));
    const double second = alpha * d * (1.0 - d);
    return std::min(first, second);
}

double gn_constant_1d_bound(Exponent m) {
    return std::pow(2.0, 0.5 * (1.0 - m.value()));
}

ExtinctionExponents extinction_exponents(int dim, int ell, Exponent m, double im_a,
                                         double c_gn, double sup_grad) {
    if (!(im_a > 0.0)) throw std::invalid_argument("extinction_exponents: Im(a) must be positive");
    if (!(c_gn > 0.0)) throw std::invalid_argument("extinction_exponents: C_gn must be positive");
    if (!(sup_grad > 0.0))
        throw std::invalid_argument("extinction_exponents: sup gradient norm must be positive");
    ExtinctionExponents e;
    e.dim = dim;
    e.ell = ell;
    e.delta = delta(dim, ell, m);
    e.alpha = im_a / c_gn;
    const double kappa = dim * (1.0 - m.value()) / (2.0 * ell);
    e.alpha_ell = e.alpha * std::pow(sup_grad, -kappa);
    e.eps_star = (e.delta < 1.0) ? eps_star(e.alpha, e.delta) : 0.0;
    return e;
}

SmallnessReport smallness_check(const SmallnessInput& in) {
    if (!(in.delta > 0.5) || !(in.delta < 1.0))
        throw std::invalid_argument("smallness_check: delta must lie in (1/2, 1)");
    SmallnessReport r;
    const double rel = 1e-12;  // admit equality cases up to rounding

    r.mass_lhs = std::pow(in.u0_mass, 1.0 - in.delta);
    if (in.u0_mass == 0.0) r.mass_lhs = 0.0;  // 0^x with x in (0, 1/2)
    r.mass_rhs = in.eps_star * in.t0;
    r.mass_ok = r.mass_lhs <= r.mass_rhs * (1.0 + rel);

    r.budget_lhs = in.u0_grad_or_star + in.forcing_budget;
    r.budget_rhs = in.eps_star;
    r.budget_ok = r.budget_lhs <= r.budget_rhs * (1.0 + rel);

    const double expo = (2.0 * in.delta - 1.0) / (1.0 - in.delta);
    double worst = 0.0;
    if (in.f_l2) {
        const int n = std::max(in.samples, 2);
        for (int k = 0; k <= n; ++k) {
            const double t = in.horizon * static_cast<double>(k) / n;
            const double fncast = in.f_l2(t);
            const double lhs = fncast * fncast;
            const double tail = std::max(in.t0 - t, 0.0);
            const double rhs = in.eps_star * std::pow(tail, expo);
            worst = std::max(worst, lhs - rhs * (1.0 + rel));
        }
    }
    r.envelope_worst_excess = worst;
    r.envelope_ok = worst <= 0.0;
    return r;
}

}  // namespace dnls::coeff
