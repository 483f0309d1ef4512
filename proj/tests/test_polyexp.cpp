#include <cmath>
#include <random>

#include "doctest.h"
#include "gripflow/poly_expansion.hpp"
#include "test_support.hpp"

using namespace gripflow;

namespace {

// Quadratic surface with known coefficients, evaluated in absolute image
// coordinates. The expansion works in window-local coordinates, so the
// expected per-pixel coefficients follow from recentering the polynomial.
struct Surface {
    double a11, a12, a22, b1, b2, c;

    double operator()(double x, double y) const {
        return a11 * x * x + 2.0 * a12 * x * y + a22 * y * y + b1 * x + b2 * y + c;
    }
    // b and c of the same surface written around (px, py).
    double local_b1(double px, double py) const { return b1 + 2.0 * a11 * px + 2.0 * a12 * py; }
    double local_b2(double px, double py) const { return b2 + 2.0 * a22 * py + 2.0 * a12 * px; }
    double local_c(double px, double py) const { return (*this)(px, py); }
};

Frame render(const Surface& s, int w, int h) {
    Frame f(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) f.at(x, y) = s(x, y);
    return f;
}

} // namespace

TEST_SUITE("polyexp") {

TEST_CASE("constant image gives zero A and b") {
    Frame f(24, 24, 0.5);
    PolyExpansion e = poly_expansion(f, 4, 1.5);
    for (int y = 4; y < 20; ++y) {
        for (int x = 4; x < 20; ++x) {
            const size_t i = static_cast<size_t>(y) * 24 + x;
            CHECK(std::fabs(e.a11[i]) < 1e-9);
            CHECK(std::fabs(e.a12[i]) < 1e-9);
            CHECK(std::fabs(e.a22[i]) < 1e-9);
            CHECK(std::fabs(e.b1[i]) < 1e-9);
            CHECK(std::fabs(e.b2[i]) < 1e-9);
            CHECK(e.c[i] == doctest::Approx(0.5).epsilon(1e-9));
        }
    }
}

TEST_CASE("linear ramp gives the slope in b and the pixel value in c") {
    Frame f(32, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 32; ++x) f.at(x, y) = 0.01 * x;
    PolyExpansion e = poly_expansion(f, 5, 1.5);
    for (int y = 5; y < 11; ++y) {
        for (int x = 5; x < 27; ++x) {
            const size_t i = static_cast<size_t>(y) * 32 + x;
            CHECK(e.b1[i] == doctest::Approx(0.01).epsilon(1e-9));
            CHECK(std::fabs(e.b2[i]) < 1e-9);
            CHECK(std::fabs(e.a11[i]) < 1e-9);
            CHECK(e.c[i] == doctest::Approx(f.at(x, y)).epsilon(1e-9));
        }
    }
}

TEST_CASE("pure parabola along x matches the dense single-pixel solve") {
    const int x0 = 16;
    Frame f(33, 33);
    for (int y = 0; y < 33; ++y)
        for (int x = 0; x < 33; ++x)
            f.at(x, y) = (x - x0) * (x - x0) / 5000.0;
    PolyExpansion e = poly_expansion(f, 4, 1.5);
    const size_t i = static_cast<size_t>(16) * 33 + x0;
    CHECK(e.a11[i] == doctest::Approx(1.0 / 5000.0).epsilon(1e-9));

    const testsupport::QuadFit fit = testsupport::quad_fit_at(f, x0, 16, 4, 1.5);
    CHECK(e.a11[i] == doctest::Approx(fit.a11).epsilon(1e-9));
    CHECK(e.b1[i] == doctest::Approx(fit.b1).epsilon(1e-9));
    CHECK(e.c[i] == doctest::Approx(fit.c).epsilon(1e-9));
}

TEST_CASE("globally quadratic image is reproduced exactly at the interior") {
    const Surface s{1.0 / 4000.0, -1.0 / 9000.0, 1.0 / 7000.0, -0.004, 0.002, 0.3};
    Frame f = render(s, 64, 64);
    const int r = 5;
    PolyExpansion e = poly_expansion(f, r, 1.5);
    for (int y = r; y < 64 - r; y += 3) {
        for (int x = r; x < 64 - r; x += 3) {
            const size_t i = static_cast<size_t>(y) * 64 + x;
            CHECK(e.a11[i] == doctest::Approx(s.a11).epsilon(1e-9));
            CHECK(e.a12[i] == doctest::Approx(s.a12).epsilon(1e-9));
            CHECK(e.a22[i] == doctest::Approx(s.a22).epsilon(1e-9));
            CHECK(e.b1[i] == doctest::Approx(s.local_b1(x, y)).epsilon(1e-9));
            CHECK(e.b2[i] == doctest::Approx(s.local_b2(x, y)).epsilon(1e-9));
            CHECK(e.c[i] == doctest::Approx(s.local_c(x, y)).epsilon(1e-9));
        }
    }
}

TEST_CASE("exactness holds for other window parameters") {
    const Surface s{-1.0 / 6000.0, 1.0 / 8000.0, 1.0 / 5000.0, 0.003, -0.001, 0.4};
    Frame f = render(s, 48, 48);
    for (const auto& [r, sigma] : {std::pair{2, 0.8}, std::pair{3, 1.0}, std::pair{7, 2.5}}) {
        PolyExpansion e = poly_expansion(f, r, sigma);
        const size_t i = static_cast<size_t>(24) * 48 + 24;
        CHECK(e.a11[i] == doctest::Approx(s.a11).epsilon(1e-9));
        CHECK(e.a12[i] == doctest::Approx(s.a12).epsilon(1e-9));
        CHECK(e.a22[i] == doctest::Approx(s.a22).epsilon(1e-9));
    }
}

TEST_CASE("separable path equals the dense per-pixel solve on a random image") {
    std::mt19937_64 rng(991);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Frame f(32, 32);
    for (double& v : f.intensities) v = uni(rng);

    const int r = 5;
    const double sigma = 1.5;
    PolyExpansion e = poly_expansion(f, r, sigma);
    for (int y = r; y < 32 - r; ++y) {
        for (int x = r; x < 32 - r; ++x) {
            const size_t i = static_cast<size_t>(y) * 32 + x;
            const testsupport::QuadFit fit = testsupport::quad_fit_at(f, x, y, r, sigma);
            CHECK(e.a11[i] == doctest::Approx(fit.a11).epsilon(1e-9));
            CHECK(e.a12[i] == doctest::Approx(fit.a12).epsilon(1e-9));
            CHECK(e.a22[i] == doctest::Approx(fit.a22).epsilon(1e-9));
            CHECK(e.b1[i] == doctest::Approx(fit.b1).epsilon(1e-9));
            CHECK(e.b2[i] == doctest::Approx(fit.b2).epsilon(1e-9));
            CHECK(e.c[i] == doctest::Approx(fit.c).epsilon(1e-9));
        }
    }
}

TEST_CASE("border pixels agree with the clamped-window dense solve") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(0.2, 0.8);
    Frame f(24, 24);
    for (double& v : f.intensities) v = uni(rng);

    PolyExpansion e = poly_expansion(f, 3, 1.2);
    for (const auto& [x, y] : {std::pair{0, 0}, std::pair{23, 0}, std::pair{1, 22}, std::pair{12, 0}}) {
        const size_t i = static_cast<size_t>(y) * 24 + x;
        const testsupport::QuadFit fit = testsupport::quad_fit_at(f, x, y, 3, 1.2);
        CHECK(e.a11[i] == doctest::Approx(fit.a11).epsilon(1e-9));
        CHECK(e.b1[i] == doctest::Approx(fit.b1).epsilon(1e-9));
        CHECK(e.c[i] == doctest::Approx(fit.c).epsilon(1e-9));
    }
}

TEST_CASE("c stays within curvature-bounded distance of the image") {
    const Surface s{1.0 / 4000.0, 0.0, 1.0 / 4000.0, 0.0, 0.0, 0.3};
    Frame f = render(s, 48, 48);
    const int r = 4;
    PolyExpansion e = poly_expansion(f, r, 1.5);
    const double max_curvature = 2.0 * std::max(s.a11, s.a22);
    for (int y = r; y < 48 - r; y += 5) {
        for (int x = r; x < 48 - r; x += 5) {
            const size_t i = static_cast<size_t>(y) * 48 + x;
            CHECK(std::fabs(e.c[i] - f.at(x, y)) <= max_curvature * r * r + 1e-12);
        }
    }
}

TEST_CASE("window preconditions are enforced") {
    Frame small(8, 8, 0.5);
    CHECK_THROWS_AS(poly_expansion(small, 5, 1.5), DimensionError);
    Frame ok(32, 32, 0.5);
    CHECK_THROWS_AS(poly_expansion(ok, 1, 1.5), ParameterError);
    CHECK_THROWS_AS(poly_expansion(ok, 5, 0.0), ParameterError);
}

TEST_CASE("basis applicability is normalized and g_inv is symmetric") {
    PolyBasis basis(5, 1.5);
    double sum = 0.0;
    for (double w : basis.applicability) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(basis.g_inv[i][j] == doctest::Approx(basis.g_inv[j][i]).epsilon(1e-9));
}

TEST_CASE("integer translation shifts the expansion grids") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> uni(0.2, 0.8);
    Frame f(40, 40);
    for (double& v : f.intensities) v = uni(rng);
    PolyExpansion e1 = poly_expansion(f, 4, 1.5);
    // shift content by (2, 1): out(x, y) = f(x-2, y-1)
    Frame g(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) g.at(x, y) = f.at_clamped(x - 2, y - 1);
    PolyExpansion e2 = poly_expansion(g, 4, 1.5);
    for (int y = 10; y < f.height - 10; ++y) {
        for (int x = 10; x < f.width - 10; ++x) {
            const size_t i = static_cast<size_t>(y) * f.width + x;
            const size_t j = static_cast<size_t>(y - 1) * f.width + (x - 2);
            CHECK(e2.a11[i] == doctest::Approx(e1.a11[j]).epsilon(1e-12));
            CHECK(e2.b1[i] == doctest::Approx(e1.b1[j]).epsilon(1e-12));
            CHECK(e2.c[i] == doctest::Approx(e1.c[j]).epsilon(1e-12));
        }
    }
}

} // TEST_SUITE
