#pragma once

#include "dnls/coeff.hpp"
#include "dnls/grid.hpp"

namespace dnls::nonlin {

using grid::Complex;
using grid::Field;

/// Parameters of the saturating absorption law and its regularization.
/// eps = 0 selects the sharp sublinear law.
struct AbsorptionParams {
    coeff::Exponent m;
    coeff::DampingCoefficient a;
    double epsilon = 0.0;

    AbsorptionParams(coeff::Exponent m_, Complex a_, double eps);
};

/// Pointwise map (|z|^2 + eps)^{-(1-m)/2} z, extended by 0 at z = 0 when
/// eps = 0 (the unique continuous extension).
Complex g_eps(Complex z, double m, double eps) noexcept;

Field g_eps(const Field& u, const AbsorptionParams& p);

/// Quadrature-weighted sum of (|u|^2 + eps)^{-(1-m)/2} |u|^2, the absorption
/// density of the mass ledger.
double absorption_integral(const Field& u, double m, double eps);

struct HolderCertificate {
    double lhs = 0.0;  // ||g(u) - g(v)||_{p/m}
    double rhs = 0.0;  // 3 ||u - v||_p^m
    bool pass = false;
};

/// Checks the sharp-law Hoelder estimate with constant 3 on discrete norms,
/// p in [1, inf).
HolderCertificate holder_certificate(const Field& u, const Field& v, double p,
                                     coeff::Exponent m);

/// Re[-i a (g(z1) - g(z2)) conj(z1 - z2)] with the sharp law. Monotonicity of
/// the absorption operator reduces to this being >= 0 pointwise, which holds
/// exactly when a lies in C(m).
double accretivity_witness(Complex z1, Complex z2, Complex a, coeff::Exponent m) noexcept;

}  // namespace dnls::nonlin
