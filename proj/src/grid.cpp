#include "dnls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dnls::grid {

namespace {

void require_same_grid(const Field& u, const Field& v, const char* what) {
    if (!(u.spec == v.spec)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

// Strides for row-major flattening, axis 0 slowest.
std::vector<std::size_t> strides_of(const GridSpec& g) {
    const int d = g.dim();
    std::vector<std::size_t> s(d, 1);
    for (int a = d - 2; a >= 0; --a) s[a] = s[a + 1] * g.counts()[a + 1];
    return s;
}

}  // namespace

GridSpec::GridSpec(std::vector<double> lengths, std::vector<int> counts)
    : lengths_(std::move(lengths)), counts_(std::move(counts)) {
    if (counts_.empty() || counts_.size() > 3 || counts_.size() != lengths_.size())
        throw std::invalid_argument("GridSpec: dimension must be 1, 2 or 3");
    size_ = 1;
    spacing_.resize(counts_.size());
    for (std::size_t a = 0; a < counts_.size(); ++a) {
        if (counts_[a] < 1) throw std::invalid_argument("GridSpec: counts must be >= 1");
        if (!(lengths_[a] > 0.0)) throw std::invalid_argument("GridSpec: lengths must be positive");
        spacing_[a] = lengths_[a] / (counts_[a] + 1);
        size_ *= static_cast<std::size_t>(counts_[a]);
    }
}

double GridSpec::volume() const noexcept {
    double v = 1.0;
    for (double l : lengths_) v *= l;
    return v;
}

double GridSpec::cell_volume() const noexcept {
    double v = 1.0;
    for (double h : spacing_) v *= h;
    return v;
}

PotentialSpec PotentialSpec::zero(const GridSpec& g) {
    PotentialSpec p;
    p.v1.assign(g.size(), 0.0);
    p.v2.assign(g.size(), 0.0);
    p.p_v = exponent_for(g.dim(), p.beta);
    return p;
}

double PotentialSpec::exponent_for(int dim, double beta) {
    if (dim == 1) return 2.0;
    if (dim == 2) {
        if (!(beta > 0.0)) throw std::invalid_argument("PotentialSpec: beta must be positive in 2d");
        return 2.0 + beta;
    }
    return static_cast<double>(dim);
}

double PotentialSpec::sup_v1() const {
    double s = 0.0;
    for (double x : v1) s = std::max(s, std::abs(x));
    return s;
}

double PotentialSpec::lp_v2(const GridSpec& g) const {
    double acc = 0.0;
    for (double x : v2) acc += std::pow(std::abs(x), p_v);
    return std::pow(g.cell_volume() * acc, 1.0 / p_v);
}

bool PotentialSpec::is_zero() const {
    auto all0 = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };
    return all0(v1) && all0(v2);
}

Field laplacian(const Field& u) {
    const GridSpec& g = u.spec;
    Field out = Field::zeros(g);
    const auto st = strides_of(g);
    const std::size_t n = g.size();
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_h2 = 1.0 / (g.spacing()[a] * g.spacing()[a]);
        const std::size_t s = st[a];
        const std::size_t cnt = g.counts()[a];
        for (std::size_t idx = 0; idx < n; ++idx) {
            const std::size_t c = (idx / s) % cnt;
            Complex acc = -2.0 * u.values[idx];
            if (c > 0) acc += u.values[idx - s];
            if (c + 1 < cnt) acc += u.values[idx + s];
            out.values[idx] += acc * inv_h2;
        }
    }
    return out;
}

Field apply_potential(const Field& u, const PotentialSpec& v) {
    if (v.v1.size() != u.size() || v.v2.size() != u.size())
        throw std::invalid_argument("apply_potential: grid mismatch");
    Field out = u;
    for (std::size_t i = 0; i < u.size(); ++i) out.values[i] *= (v.v1[i] + v.v2[i]);
    return out;
}

double norm_l2(const Field& u) {
    double acc = 0.0;
    for (const Complex& z : u.values) acc += std::norm(z);
    return std::sqrt(u.spec.cell_volume() * acc);
}

double norm_lp(const Field& u, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("norm_lp: p must be positive");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const Complex& z : u.values) m = std::max(m, std::abs(z));
        return m;
    }
    return std::pow(lp_power(u, p), 1.0 / p);
}

double lp_power(const Field& u, double p) {
    double acc = 0.0;
    for (const Complex& z : u.values) acc += std::pow(std::abs(z), p);
    return u.spec.cell_volume() * acc;
}

double h1_seminorm(const Field& u) {
    const GridSpec& g = u.spec;
    const auto st = strides_of(g);
    const std::size_t n = g.size();
    double total = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const double inv_h2 = 1.0 / (g.spacing()[a] * g.spacing()[a]);
        const std::size_t s = st[a];
        const std::size_t cnt = g.counts()[a];
        double axis = 0.0;
        for (std::size_t idx = 0; idx < n; ++idx) {
            const std::size_t c = (idx / s) % cnt;
            // interior/left-boundary edge, plus the closing edge at the far wall
            axis += (c > 0) ? std::norm(u.values[idx] - u.values[idx - s]) : std::norm(u.values[idx]);
            if (c + 1 == cnt) axis += std::norm(u.values[idx]);
        }
        total += axis * inv_h2;
    }
    return std::sqrt(total * g.cell_volume());
}

double laplacian_l2(const Field& u) { return norm_l2(laplacian(u)); }

FieldNorms compute_norms(const Field& u, double m) {
    FieldNorms n;
    n.l2 = norm_l2(u);
    n.h1 = h1_seminorm(u);
    n.lapl2 = laplacian_l2(u);
    n.lmp1_power = lp_power(u, m + 1.0);
    return n;
}

double inner_real(const Field& u, const Field& v) {
    require_same_grid(u, v, "inner_real");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        acc += u.values[i].real() * v.values[i].real() + u.values[i].imag() * v.values[i].imag();
    return u.spec.cell_volume() * acc;
}

Complex inner_complex(const Field& u, const Field& v) {
    require_same_grid(u, v, "inner_complex");
    Complex acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += u.values[i] * std::conj(v.values[i]);
    return u.spec.cell_volume() * acc;
}

Field& add_scaled(Field& u, Complex alpha, const Field& v) {
    require_same_grid(u, v, "add_scaled");
    for (std::size_t i = 0; i < u.size(); ++i) u.values[i] += alpha * v.values[i];
    return u;
}

Field subtract(const Field& u, const Field& v) {
    require_same_grid(u, v, "subtract");
    Field out = u;
    for (std::size_t i = 0; i < u.size(); ++i) out.values[i] -= v.values[i];
    return out;
}

Field scaled(const Field& u, Complex alpha) {
    Field out = u;
    for (Complex& z : out.values) z *= alpha;
    return out;
}

double max_abs_diff(const Field& u, const Field& v) {
    require_same_grid(u, v, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        m = std::max(m, std::abs(u.values[i] - v.values[i]));
    return m;
}

void save_field_csv(std::ostream& os, const Field& u) {
    os << "index,re,im\n";
    char buf[80];
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, u.values[i].real(),
                      u.values[i].imag());
        os << buf;
    }
}

Field load_field_csv(std::istream& is, const GridSpec& g) {
    Field out = Field::zeros(g);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("field csv: missing header");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t idx = 0;
        double re = 0.0, im = 0.0;
        if (std::sscanf(line.c_str(), "%zu,%lg,%lg", &idx, &re, &im) != 3)
            throw std::runtime_error("field csv: malformed row '" + line + "'");
        if (idx >= out.size()) throw std::runtime_error("field csv: index out of range");
        out.values[idx] = Complex(re, im);
        ++rows;
    }
    if (rows != g.size()) throw std::runtime_error("field csv: node count does not match grid");
    return out;
}

namespace {
constexpr std::uint64_t kFieldMagic = 0x444e4c53464c4431ull;  // "DNLSFLD1"
}

void save_field_binary(std::ostream& os, const Field& u) {
    auto put = [&os](const void* p, std::size_t n) {
        os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    put(&kFieldMagic, 8);
    const std::uint32_t d = static_cast<std::uint32_t>(u.spec.dim());
    put(&d, 4);
    for (int a = 0; a < u.spec.dim(); ++a) {
        const std::uint32_t c = static_cast<std::uint32_t>(u.spec.counts()[a]);
        const double l = u.spec.lengths()[a];
        put(&c, 4);
        put(&l, 8);
    }
    for (const Complex& z : u.values) {
        const double re = z.real(), im = z.imag();
        put(&re, 8);
        put(&im, 8);
    }
}

Field load_field_binary(std::istream& is) {
    auto get = [&is](void* p, std::size_t n) {
        is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!is) throw std::runtime_error("field binary: truncated input");
    };
    std::uint64_t magic = 0;
    get(&magic, 8);
    if (magic != kFieldMagic) throw std::runtime_error("field binary: bad magic");
    std::uint32_t d = 0;
    get(&d, 4);
    if (d < 1 || d > 3) throw std::runtime_error("field binary: bad dimension");
    std::vector<int> counts(d);
    std::vector<double> lengths(d);
    for (std::uint32_t a = 0; a < d; ++a) {
        std::uint32_t c = 0;
        get(&c, 4);
        get(&lengths[a], 8);
        counts[a] = static_cast<int>(c);
    }
    Field out = Field::zeros(GridSpec(lengths, counts));
    for (Complex& z : out.values) {
        double re = 0.0, im = 0.0;
        get(&re, 8);
        get(&im, 8);
        z = Complex(re, im);
    }
    return out;
}

}  // namespace dnls::grid
