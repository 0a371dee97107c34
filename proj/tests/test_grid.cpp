#include <cmath>
#include <sstream>

#include <doctest.h>
#include <Eigen/Dense>

#include "dnls/grid.hpp"
#include "dnls/rng.hpp"

using namespace dnls;
using grid::Complex;
using grid::Field;
using grid::GridSpec;

namespace {

Field random_field(const GridSpec& g, Rng& rng, double scale = 1.0) {
    Field f = Field::zeros(g);
    for (Complex& z : f.values) z = scale * rng.complex_normal();
    return f;
}

constexpr double kPi = 3.14159265358979323846;

Field sine_1d(const GridSpec& g, int k) {
    Field f = Field::zeros(g);
    const int n = g.counts()[0];
    for (int i = 0; i < n; ++i) f.values[i] = std::sin(k * kPi * (i + 1) / (n + 1));
    return f;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("grid spec validation and geometry") {
    GridSpec g({2.0, 3.0}, {4, 5});
    CHECK(g.dim() == 2);
    CHECK(g.size() == 20);
    CHECK(g.volume() == doctest::Approx(6.0));
    CHECK(g.spacing()[0] == doctest::Approx(2.0 / 5.0));
    CHECK(g.spacing()[1] == doctest::Approx(3.0 / 6.0));
    CHECK(g.cell_volume() == doctest::Approx(0.2));
    CHECK(g.coord(0, 0) == doctest::Approx(0.4));

    CHECK_THROWS_AS(GridSpec({1.0}, {0}), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec({-1.0}, {4}), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec({1.0, 1.0, 1.0, 1.0}, {2, 2, 2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec({1.0, 2.0}, {4}), std::invalid_argument);
}

TEST_CASE("laplacian of zero is zero") {
    GridSpec g({1.0}, {16});
    const Field z = Field::zeros(g);
    CHECK(grid::norm_l2(grid::laplacian(z)) == 0.0);
}

TEST_CASE("1d sine modes are eigenvectors") {
    const int n = 12;
    GridSpec g({1.0}, {n});
    const double h = g.spacing()[0];
    for (int k = 1; k <= 4; ++k) {
        const Field u = sine_1d(g, k);
        const Field lap = grid::laplacian(u);
        const double mu = -4.0 / (h * h) * std::pow(std::sin(k * kPi / (2.0 * (n + 1))), 2);
        for (std::size_t i = 0; i < u.size(); ++i)
            CHECK(std::abs(lap.values[i] - mu * u.values[i]) < 1e-11);
    }
}

TEST_CASE("dense diagonalization oracle matches the closed-form spectrum") {
    const int n = 16;
    GridSpec g({2.0}, {n});
    const double h = g.spacing()[0];
    Eigen::MatrixXd dense(n, n);
    for (int j = 0; j < n; ++j) {
        Field e = Field::zeros(g);
        e.values[j] = 1.0;
        const Field col = grid::laplacian(e);
        for (int i = 0; i < n; ++i) dense(i, j) = col.values[i].real();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    std::vector<double> expect;
    for (int k = 1; k <= n; ++k)
        expect.push_back(-4.0 / (h * h) * std::pow(std::sin(k * kPi / (2.0 * (n + 1))), 2));
    std::sort(expect.begin(), expect.end());
    for (int i = 0; i < n; ++i)
        CHECK(es.eigenvalues()[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("2d tensor modes add eigenvalues") {
    GridSpec g({1.0, 1.0}, {9, 7});
    const double h0 = g.spacing()[0], h1 = g.spacing()[1];
    const int k0 = 2, k1 = 3;
    Field u = Field::zeros(g);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 7; ++j)
            u.values[i * 7 + j] =
                std::sin(k0 * kPi * (i + 1) / 10.0) * std::sin(k1 * kPi * (j + 1) / 8.0);
    const double mu = -4.0 / (h0 * h0) * std::pow(std::sin(k0 * kPi / 20.0), 2) -
                      4.0 / (h1 * h1) * std::pow(std::sin(k1 * kPi / 16.0), 2);
    const Field lap = grid::laplacian(u);
    for (std::size_t i = 0; i < u.size(); ++i)
        CHECK(std::abs(lap.values[i] - mu * u.values[i]) < 1e-11);
}

TEST_CASE("norms: quadrature definitions") {
    GridSpec g({1.0}, {1});  // single interior node, h = 0.5
    Field u = Field::zeros(g);
    CHECK(grid::norm_l2(u) == 0.0);
    CHECK(grid::norm_lp(u, 3.0) == 0.0);
    u.values[0] = 1.0;
    CHECK(grid::norm_l2(u) == doctest::Approx(std::sqrt(0.5)));
    CHECK(grid::norm_lp(u, std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(grid::lp_power(u, 1.5) == doctest::Approx(0.5));
    CHECK_THROWS_AS(grid::norm_lp(u, 0.0), std::invalid_argument);
}

TEST_CASE("summation by parts is exact") {
    Rng rng(31337);
    for (int rep = 0; rep < 20; ++rep) {
        GridSpec g = (rep % 2 == 0) ? GridSpec({1.7}, {23}) : GridSpec({1.0, 0.8}, {9, 11});
        const Field u = random_field(g, rng);
        const double lhs = -grid::inner_real(grid::laplacian(u), u);
        const double h1 = grid::h1_seminorm(u);
        CHECK(lhs == doctest::Approx(h1 * h1).epsilon(1e-12));
    }
}

TEST_CASE("laplacian is self-adjoint and negative semidefinite") {
    Rng rng(99);
    GridSpec g({1.0, 1.3}, {8, 6});
    for (int rep = 0; rep < 20; ++rep) {
        const Field u = random_field(g, rng);
        const Field v = random_field(g, rng);
        const double a = grid::inner_real(grid::laplacian(u), v);
        const double b = grid::inner_real(u, grid::laplacian(v));
        CHECK(a == doctest::Approx(b).epsilon(1e-11));
        CHECK(grid::inner_real(grid::laplacian(u), u) <= 1e-12);
    }
}

TEST_CASE("discrete gradient interpolation bound") {
    // ||grad u||^2 <= ||lap u|| ||u|| with the matched discrete norms
    Rng rng(411);
    GridSpec g({1.0}, {31});
    for (int rep = 0; rep < 50; ++rep) {
        const Field u = random_field(g, rng);
        const double h1 = grid::h1_seminorm(u);
        CHECK(h1 * h1 <=
              grid::laplacian_l2(u) * grid::norm_l2(u) * (1.0 + 1e-12) + 1e-300);
    }
}

TEST_CASE("lp monotone under pointwise domination") {
    Rng rng(5150);
    GridSpec g({1.0}, {40});
    for (int rep = 0; rep < 20; ++rep) {
        const Field v = random_field(g, rng);
        Field u = v;
        for (Complex& z : u.values) z *= rng.uniform();  // |u| <= |v| nodewise
        for (double p : {0.5, 1.0, 2.0, 7.5}) CHECK(grid::norm_lp(u, p) <= grid::norm_lp(v, p));
        CHECK(grid::norm_lp(u, std::numeric_limits<double>::infinity()) <=
              grid::norm_lp(v, std::numeric_limits<double>::infinity()));
    }
}

TEST_CASE("apply_potential") {
    Rng rng(8);
    GridSpec g({1.0}, {12});
    const Field u = random_field(g, rng);

    grid::PotentialSpec zero = grid::PotentialSpec::zero(g);
    CHECK(grid::norm_l2(grid::apply_potential(u, zero)) == 0.0);
    CHECK(zero.is_zero());

    grid::PotentialSpec c = zero;
    std::fill(c.v1.begin(), c.v1.end(), 2.5);
    const Field cu = grid::apply_potential(u, c);
    for (std::size_t i = 0; i < u.size(); ++i)
        CHECK(cu.values[i] == 2.5 * u.values[i]);

    grid::PotentialSpec r = zero;
    for (std::size_t i = 0; i < g.size(); ++i) {
        r.v1[i] = rng.normal();
        r.v2[i] = rng.normal();
    }
    const Field ru = grid::apply_potential(u, r);
    for (std::size_t i = 0; i < u.size(); ++i)
        CHECK(ru.values[i] == (r.v1[i] + r.v2[i]) * u.values[i]);

    GridSpec g2({1.0}, {13});
    const Field w = Field::zeros(g2);
    CHECK_THROWS_AS(grid::apply_potential(w, r), std::invalid_argument);
    CHECK_THROWS_AS(grid::inner_real(u, w), std::invalid_argument);
}

TEST_CASE("potential exponent per dimension") {
    CHECK(grid::PotentialSpec::exponent_for(1, 1.0) == 2.0);
    CHECK(grid::PotentialSpec::exponent_for(2, 0.5) == 2.5);
    CHECK(grid::PotentialSpec::exponent_for(3, 1.0) == 3.0);
    CHECK_THROWS_AS(grid::PotentialSpec::exponent_for(2, 0.0), std::invalid_argument);
}

TEST_CASE("field serialization round trips") {
    Rng rng(4242);
    GridSpec g({1.0, 2.0}, {5, 4});
    const Field u = random_field(g, rng, 3.0);

    SUBCASE("csv") {
        std::stringstream ss;
        grid::save_field_csv(ss, u);
        const Field v = grid::load_field_csv(ss, g);
        CHECK(grid::max_abs_diff(u, v) == 0.0);
    }
    SUBCASE("binary") {
        std::stringstream ss;
        grid::save_field_binary(ss, u);
        const Field v = grid::load_field_binary(ss);
        CHECK(v.spec == g);
        CHECK(grid::max_abs_diff(u, v) == 0.0);
    }
    SUBCASE("csv node count mismatch rejected") {
        std::stringstream ss;
        grid::save_field_csv(ss, u);
        GridSpec g2({1.0}, {7});
        CHECK_THROWS(grid::load_field_csv(ss, g2));
    }
}

}  // TEST_SUITE
