#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace dnls::grid {

using Complex = std::complex<double>;

/// Axis-aligned box with homogeneous Dirichlet boundary, dimension 1..3.
/// Only interior nodes are stored; spacing h = length / (count + 1) per axis,
/// node coordinates (i + 1) h. Flattening is row-major with axis 0 slowest.
class GridSpec {
public:
    GridSpec() = default;  // empty state, only valid as a moved-from placeholder
    GridSpec(std::vector<double> lengths, std::vector<int> counts);

    int dim() const noexcept { return static_cast<int>(counts_.size()); }
    const std::vector<double>& lengths() const noexcept { return lengths_; }
    const std::vector<int>& counts() const noexcept { return counts_; }
    const std::vector<double>& spacing() const noexcept { return spacing_; }
    std::size_t size() const noexcept { return size_; }

    double volume() const noexcept;       // product of lengths
    double cell_volume() const noexcept;  // product of spacings = quadrature weight
    double coord(int axis, int i) const { return (i + 1) * spacing_[axis]; }

    bool operator==(const GridSpec&) const = default;

private:
    std::vector<double> lengths_;
    std::vector<int> counts_;
    std::vector<double> spacing_;
    std::size_t size_ = 0;
};

/// Complex state on the interior nodes of a grid. Boundary values are
/// identically zero and never stored.
struct Field {
    GridSpec spec;
    std::vector<Complex> values;

    static Field zeros(const GridSpec& g) { return Field{g, std::vector<Complex>(g.size())}; }
    std::size_t size() const noexcept { return values.size(); }
};

/// Real potential sampled on the grid as V = V1 + V2 (bounded part plus the
/// p_V-integrable part). Sample vectors must match the owning grid's size.
struct PotentialSpec {
    std::vector<double> v1;
    std::vector<double> v2;
    double p_v = 2.0;
    double beta = 1.0;  // only meaningful in dimension 2

    static PotentialSpec zero(const GridSpec& g);
    static double exponent_for(int dim, double beta);

    double sup_v1() const;
    double lp_v2(const GridSpec& g) const;  // discrete p_V norm of V2
    bool is_zero() const;
};

// -- operators ---------------------------------------------------------------

/// Second-order central Dirichlet Laplacian (2N+1 point stencil).
Field laplacian(const Field& u);

/// Pointwise product (V1 + V2) u; grids must match.
Field apply_potential(const Field& u, const PotentialSpec& v);

// -- discrete norms (midpoint quadrature) ------------------------------------

double norm_l2(const Field& u);
/// ||u||_p for p in (0, inf]; infinity gives the nodewise max.
double norm_lp(const Field& u, double p);
/// Quadrature-weighted power sum (cell volume) * sum |u_j|^p.
double lp_power(const Field& u, double p);
/// Forward-difference seminorm with Dirichlet closure; chosen so that
/// -Re<lap u, u> = ||grad u||^2 holds exactly in floating point.
double h1_seminorm(const Field& u);
double laplacian_l2(const Field& u);

struct FieldNorms {
    double l2 = 0.0;
    double h1 = 0.0;
    double lapl2 = 0.0;
    double lmp1_power = 0.0;  // ||u||_{m+1}^{m+1}
};
FieldNorms compute_norms(const Field& u, double m);

/// Real L^2 pairing (cell volume) * sum Re(u conj(v)).
double inner_real(const Field& u, const Field& v);
Complex inner_complex(const Field& u, const Field& v);

// -- small arithmetic helpers -------------------------------------------------

Field& add_scaled(Field& u, Complex alpha, const Field& v);  // u += alpha v
Field subtract(const Field& u, const Field& v);
Field scaled(const Field& u, Complex alpha);
double max_abs_diff(const Field& u, const Field& v);

// -- serialization -----------------------------------------------------------

/// CSV layout: header "index,re,im", one row per node in row-major order.
void save_field_csv(std::ostream& os, const Field& u);
Field load_field_csv(std::istream& is, const GridSpec& g);

/// Flat binary layout: magic, dimension, per-axis count and length, then
/// interleaved (re, im) doubles in row-major order.
void save_field_binary(std::ostream& os, const Field& u);
Field load_field_binary(std::istream& is);

}  // namespace dnls::grid
