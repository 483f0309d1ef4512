#include "gripflow/poly_expansion.hpp"

#include <algorithm>
#include <cmath>
#include <cassert>
#include <string>

namespace gripflow {

namespace {

// Gauss-Jordan inverse with partial pivoting; n <= 6.
std::array<std::array<double, 6>, 6> invert6(std::array<std::array<double, 6>, 6> m) {
    std::array<std::array<double, 6>, 6> inv{};
    for (int i = 0; i < 6; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < 6; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 6; ++row) {
            if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
        }
        assert(std::abs(m[pivot][col]) > 0.0 && "basis matrix is singular");
        std::swap(m[col], m[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = m[col][col];
        for (int j = 0; j < 6; ++j) {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for (int row = 0; row < 6; ++row) {
            if (row == col) continue;
            const double f = m[row][col];
            if (f == 0.0) continue;
            for (int j = 0; j < 6; ++j) {
                m[row][j] -= f * m[col][j];
                inv[row][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

} // namespace

PolyBasis::PolyBasis(int radius_in, double sigma_in) : radius(radius_in), sigma(sigma_in) {
    if (radius < 2) throw ParameterError("poly expansion window radius must be >= 2");
    if (sigma <= 0.0) throw ParameterError("poly expansion applicability sigma must be positive");

    applicability.resize(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        applicability[k + radius] = w;
        sum += w;
    }
    for (double& w : applicability) w /= sum;

    // G_jk = sum_w g(w) b_j(w) b_k(w) over the basis {1, x, y, x^2, y^2, xy}.
    std::array<std::array<double, 6>, 6> g_mat{};
    for (int wy = -radius; wy <= radius; ++wy) {
        for (int wx = -radius; wx <= radius; ++wx) {
            const double g = applicability[wx + radius] * applicability[wy + radius];
            const double x = wx;
            const double y = wy;
            const double basis[6] = {1.0, x, y, x * x, y * y, x * y};
            for (int j = 0; j < 6; ++j) {
                for (int k = 0; k < 6; ++k) {
                    g_mat[j][k] += g * basis[j] * basis[k];
                }
            }
        }
    }
    g_inv = invert6(g_mat);
}

PolyExpansion poly_expansion(const Frame& frame, int window_radius, double sigma_applic) {
    const PolyBasis basis(window_radius, sigma_applic);
    const int r = window_radius;
    const int w = frame.width;
    const int h = frame.height;
    if (w < 2 * r + 1 || h < 2 * r + 1) {
        throw DimensionError("poly_expansion: frame " + std::to_string(w) + "x" +
                             std::to_string(h) + " is smaller than the " +
                             std::to_string(2 * r + 1) + "px window");
    }

    PolyExpansion out;
    out.width = w;
    out.height = h;
    out.window_radius = r;
    out.sigma_applic = sigma_applic;
    const size_t n = static_cast<size_t>(w) * h;
    out.a11.resize(n);
    out.a12.resize(n);
    out.a22.resize(n);
    out.b1.resize(n);
    out.b2.resize(n);
    out.c.resize(n);

    const std::vector<double>& g = basis.applicability;

    // Vertical pass: per pixel, the window column moments
    //   t0 = sum_k g(k) I(x, y+k), t1 = sum g(k) k I, t2 = sum g(k) k^2 I
    // with clamped row reads.
    std::vector<double> t0(n), t1(n), t2(n);
    for (int y = 0; y < h; ++y) {
        double* o0 = t0.data() + static_cast<size_t>(y) * w;
        double* o1 = t1.data() + static_cast<size_t>(y) * w;
        double* o2 = t2.data() + static_cast<size_t>(y) * w;
        std::fill(o0, o0 + w, 0.0);
        std::fill(o1, o1 + w, 0.0);
        std::fill(o2, o2 + w, 0.0);
        for (int k = -r; k <= r; ++k) {
            const int yy = std::clamp(y + k, 0, h - 1);
            const double c0 = g[k + r];
            const double c1 = c0 * k;
            const double c2 = c1 * k;
            const double* row = frame.intensities.data() + static_cast<size_t>(yy) * w;
            for (int x = 0; x < w; ++x) {
                o0[x] += c0 * row[x];
                o1[x] += c1 * row[x];
                o2[x] += c2 * row[x];
            }
        }
    }

    // Horizontal pass over padded rows (edge replication = clamped x reads),
    // producing the six basis moments, then one multiply by the precomputed
    // inverse per pixel.
    std::vector<double> p0(w + 2 * r), p1(w + 2 * r), p2(w + 2 * r);
    std::vector<double> m1(w), mx(w), my(w), mxx(w), myy(w), mxy(w);
    for (int y = 0; y < h; ++y) {
        const double* r0 = t0.data() + static_cast<size_t>(y) * w;
        const double* r1 = t1.data() + static_cast<size_t>(y) * w;
        const double* r2 = t2.data() + static_cast<size_t>(y) * w;
        std::copy(r0, r0 + w, p0.begin() + r);
        std::copy(r1, r1 + w, p1.begin() + r);
        std::copy(r2, r2 + w, p2.begin() + r);
        std::fill(p0.begin(), p0.begin() + r, r0[0]);
        std::fill(p1.begin(), p1.begin() + r, r1[0]);
        std::fill(p2.begin(), p2.begin() + r, r2[0]);
        std::fill(p0.begin() + r + w, p0.end(), r0[w - 1]);
        std::fill(p1.begin() + r + w, p1.end(), r1[w - 1]);
        std::fill(p2.begin() + r + w, p2.end(), r2[w - 1]);

        std::fill(m1.begin(), m1.end(), 0.0);
        std::fill(mx.begin(), mx.end(), 0.0);
        std::fill(my.begin(), my.end(), 0.0);
        std::fill(mxx.begin(), mxx.end(), 0.0);
        std::fill(myy.begin(), myy.end(), 0.0);
        std::fill(mxy.begin(), mxy.end(), 0.0);
        for (int j = 0; j <= 2 * r; ++j) {
            const double c0 = g[j];
            const double c1 = c0 * (j - r);
            const double c2 = c1 * (j - r);
            const double* s0 = p0.data() + j;
            const double* s1 = p1.data() + j;
            const double* s2 = p2.data() + j;
            for (int x = 0; x < w; ++x) {
                m1[x] += c0 * s0[x];
                mx[x] += c1 * s0[x];
                mxx[x] += c2 * s0[x];
                my[x] += c0 * s1[x];
                mxy[x] += c1 * s1[x];
                myy[x] += c0 * s2[x];
            }
        }

        const auto& gi = basis.g_inv;
        for (int x = 0; x < w; ++x) {
            const double m[6] = {m1[x], mx[x], my[x], mxx[x], myy[x], mxy[x]};
            double coeff[6];
            for (int j = 0; j < 6; ++j) {
                coeff[j] = gi[j][0] * m[0] + gi[j][1] * m[1] + gi[j][2] * m[2] +
                           gi[j][3] * m[3] + gi[j][4] * m[4] + gi[j][5] * m[5];
            }
            const size_t i = static_cast<size_t>(y) * w + x;
            out.c[i] = coeff[0];
            out.b1[i] = coeff[1];
            out.b2[i] = coeff[2];
            out.a11[i] = coeff[3];
            out.a22[i] = coeff[4];
            out.a12[i] = 0.5 * coeff[5];
        }
    }
    return out;
}

} // namespace gripflow
