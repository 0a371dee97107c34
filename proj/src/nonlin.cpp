#include "dnls/nonlin.hpp"

#include <cmath>
#include <stdexcept>

namespace dnls::nonlin {

AbsorptionParams::AbsorptionParams(coeff::Exponent m_, Complex a_, double eps)
    : m(m_), a(coeff::make_damping(a_, m_)), epsilon(eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("AbsorptionParams: epsilon must be >= 0");
}

Complex g_eps(Complex z, double m, double eps) noexcept {
    const double s = std::norm(z) + eps;
    if (s <= 0.0) return {0.0, 0.0};
    return std::pow(s, -0.5 * (1.0 - m)) * z;
}

Field g_eps(const Field& u, const AbsorptionParams& p) {
    Field out = u;
    const double m = p.m.value();
    for (Complex& z : out.values) z = g_eps(z, m, p.epsilon);
    return out;
}

double absorption_integral(const Field& u, double m, double eps) {
    double acc = 0.0;
    for (const Complex& z : u.values) {
        const double s = std::norm(z) + eps;
        if (s > 0.0) acc += std::pow(s, -0.5 * (1.0 - m)) * std::norm(z);
    }
    return u.spec.cell_volume() * acc;
}

HolderCertificate holder_certificate(const Field& u, const Field& v, double p,
                                     coeff::Exponent m) {
    if (!(p >= 1.0) || std::isinf(p))
        throw std::invalid_argument("holder_certificate: p must lie in [1, inf)");
    const double mm = m.value();
    Field gu = u, gv = v;
    for (Complex& z : gu.values) z = g_eps(z, mm, 0.0);
    for (Complex& z : gv.values) z = g_eps(z, mm, 0.0);
    HolderCertificate c;
    c.lhs = grid::norm_lp(grid::subtract(gu, gv), p / mm);
    c.rhs = 3.0 * std::pow(grid::norm_lp(grid::subtract(u, v), p), mm);
    c.pass = c.lhs <= c.rhs * (1.0 + 1e-12);
    return c;
}

double accretivity_witness(Complex z1, Complex z2, Complex a, coeff::Exponent m) noexcept {
    const Complex dg = g_eps(z1, m.value(), 0.0) - g_eps(z2, m.value(), 0.0);
    const Complex dz = z1 - z2;
    const Complex w = dg * std::conj(dz);
    // Re[-i a w] = Im(a) Re(w) + Re(a) Im(w)
    return a.imag() * w.real() + a.real() * w.imag();
}

}  // namespace dnls::nonlin
