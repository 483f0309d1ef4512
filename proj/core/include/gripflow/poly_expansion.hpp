#pragma once

#include <array>
#include <vector>

#include "gripflow/image.hpp"

namespace gripflow {

// Per-pixel quadratic local model  I(p+w) ~ w'Aw + b'w + c  with
// A = [[a11, a12], [a12, a22]], fitted over a (2r+1)^2 window by least
// squares under a Gaussian applicability weight. Local coordinates put the
// pixel at the origin with y pointing down.
struct PolyExpansion {
    int width = 0;
    int height = 0;
    std::vector<double> a11, a12, a22;
    std::vector<double> b1, b2;
    std::vector<double> c;
    int window_radius = 0;
    double sigma_applic = 0.0;
};

// The normal-equation geometry for one (radius, sigma) pair: the 6x6 moment
// matrix over the basis {1, x, y, x^2, y^2, xy} is constant across pixels,
// so its inverse is computed once and reapplied per pixel.
struct PolyBasis {
    int radius = 0;
    double sigma = 0.0;
    std::vector<double> applicability;        // 1D kernel, normalized to sum 1
    std::array<std::array<double, 6>, 6> g_inv{};

    PolyBasis(int radius, double sigma);
};

PolyExpansion poly_expansion(const Frame& frame, int window_radius, double sigma_applic);

} // namespace gripflow
