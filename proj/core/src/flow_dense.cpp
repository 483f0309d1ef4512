#include "gripflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gripflow {

FlowField::FlowField(int w, int h)
    : width(w), height(h), u(static_cast<size_t>(w) * h, 0.0),
      v(static_cast<size_t>(w) * h, 0.0) {}

void FarnebackParams::validate() const {
    if (num_levels < 1) throw ParameterError("num_levels must be >= 1");
    if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0)) {
        throw ParameterError("pyramid_scale must lie in (0,1)");
    }
    if (iterations_per_level < 1) throw ParameterError("iterations_per_level must be >= 1");
    if (window_radius < 2) throw ParameterError("window_radius must be >= 2");
    if (sigma_applic <= 0.0) throw ParameterError("sigma_applic must be positive");
    if (avg_radius < 1) throw ParameterError("avg_radius must be >= 1");
    if (regularization_eps <= 0.0) throw ParameterError("regularization_eps must be positive");
}

namespace {

// Box mean over (2R+1)^2 with clamp-to-edge, separable, in place via a
// scratch buffer.
void box_mean(std::vector<double>& img, std::vector<double>& scratch, int w, int h, int R) {
    const double norm = 1.0 / (2 * R + 1);
    scratch.resize(img.size());
    for (int y = 0; y < h; ++y) {
        const double* row = img.data() + static_cast<size_t>(y) * w;
        double* out = scratch.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            if (x >= R && x + R < w) {
                for (int k = -R; k <= R; ++k) acc += row[x + k];
            } else {
                for (int k = -R; k <= R; ++k) acc += row[std::clamp(x + k, 0, w - 1)];
            }
            out[x] = acc * norm;
        }
    }
    for (int y = 0; y < h; ++y) {
        double* out = img.data() + static_cast<size_t>(y) * w;
        std::fill(out, out + w, 0.0);
        for (int k = -R; k <= R; ++k) {
            const int yy = std::clamp(y + k, 0, h - 1);
            const double* row = scratch.data() + static_cast<size_t>(yy) * w;
            for (int x = 0; x < w; ++x) out[x] += row[x];
        }
        for (int x = 0; x < w; ++x) out[x] *= norm;
    }
}

// The solver works in 8-bit intensity units internally. The displacement is
// invariant to the intensity scale except through regularization_eps, whose
// default is sized against gradient magnitudes of 0..255-range images; on
// [0,1]-range frames the normal-equation entries would sit near eps itself
// and bias every solve toward zero.
Frame to_solver_units(const Frame& frame) {
    Frame scaled = frame;
    for (double& v : scaled.intensities) v *= 255.0;
    return scaled;
}

FlowField upsample_flow(const FlowField& coarse, int new_w, int new_h, double vector_gain) {
    FlowField fine(new_w, new_h);
    const double sx = static_cast<double>(coarse.width) / new_w;
    const double sy = static_cast<double>(coarse.height) / new_h;
    auto sample = [&](const std::vector<double>& grid, double x, double y) {
        x = std::clamp(x, 0.0, static_cast<double>(coarse.width - 1));
        y = std::clamp(y, 0.0, static_cast<double>(coarse.height - 1));
        const int x0 = std::min(static_cast<int>(x), std::max(coarse.width - 2, 0));
        const int y0 = std::min(static_cast<int>(y), std::max(coarse.height - 2, 0));
        const int x1 = std::min(x0 + 1, coarse.width - 1);
        const int y1 = std::min(y0 + 1, coarse.height - 1);
        const double fx = x - x0;
        const double fy = y - y0;
        const double top = grid[static_cast<size_t>(y0) * coarse.width + x0] * (1.0 - fx) +
                           grid[static_cast<size_t>(y0) * coarse.width + x1] * fx;
        const double bot = grid[static_cast<size_t>(y1) * coarse.width + x0] * (1.0 - fx) +
                           grid[static_cast<size_t>(y1) * coarse.width + x1] * fx;
        return top * (1.0 - fy) + bot * fy;
    };
    for (int y = 0; y < new_h; ++y) {
        const double src_y = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < new_w; ++x) {
            const double src_x = (x + 0.5) * sx - 0.5;
            fine.u_at(x, y) = vector_gain * sample(coarse.u, src_x, src_y);
            fine.v_at(x, y) = vector_gain * sample(coarse.v, src_x, src_y);
        }
    }
    return fine;
}

} // namespace

FlowField displacement_step(const PolyExpansion& e1, const PolyExpansion& e2,
                            const FlowField& prior, int avg_radius, double eps) {
    const int w = e1.width;
    const int h = e1.height;
    if (e2.width != w || e2.height != h || prior.width != w || prior.height != h) {
        throw DimensionError("displacement_step: expansions and prior must share dimensions");
    }

    const size_t n = static_cast<size_t>(w) * h;
    std::vector<double> g11(n), g12(n), g22(n), h1(n), h2(n);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const double pu = prior.u[i];
            const double pv = prior.v[i];
            const int qx = std::clamp(static_cast<int>(std::lround(x + pu)), 0, w - 1);
            const int qy = std::clamp(static_cast<int>(std::lround(y + pv)), 0, h - 1);
            const size_t q = static_cast<size_t>(qy) * w + qx;

            const double a11 = 0.5 * (e1.a11[i] + e2.a11[q]);
            const double a12 = 0.5 * (e1.a12[i] + e2.a12[q]);
            const double a22 = 0.5 * (e1.a22[i] + e2.a22[q]);
            // Compensate by the displacement the lookup actually applied
            // (q - p, integer), not the raw prior: b2(q) - b1(p) measures the
            // residual motion relative to q, so adding A*prior would double-
            // count the prior's fractional part and the iteration would lose
            // the true flow as a fixed point.
            const double du = qx - x;
            const double dv = qy - y;
            const double db1 = -0.5 * (e2.b1[q] - e1.b1[i]) + a11 * du + a12 * dv;
            const double db2 = -0.5 * (e2.b2[q] - e1.b2[i]) + a12 * du + a22 * dv;

            g11[i] = a11 * a11 + a12 * a12;
            g12[i] = a12 * (a11 + a22);
            g22[i] = a12 * a12 + a22 * a22;
            h1[i] = a11 * db1 + a12 * db2;
            h2[i] = a12 * db1 + a22 * db2;
        }
    }

    std::vector<double> scratch;
    box_mean(g11, scratch, w, h, avg_radius);
    box_mean(g12, scratch, w, h, avg_radius);
    box_mean(g22, scratch, w, h, avg_radius);
    box_mean(h1, scratch, w, h, avg_radius);
    box_mean(h2, scratch, w, h, avg_radius);

    FlowField flow(w, h);
    for (size_t i = 0; i < n; ++i) {
        const double m11 = g11[i] + eps;
        const double m22 = g22[i] + eps;
        const double m12 = g12[i];
        const double det = m11 * m22 - m12 * m12;
        flow.u[i] = (m22 * h1[i] - m12 * h2[i]) / det;
        flow.v[i] = (m11 * h2[i] - m12 * h1[i]) / det;
    }
    return flow;
}

FlowField estimate_flow_dense(const Frame& f1, const Frame& f2, const FarnebackParams& params) {
    params.validate();
    if (!f1.same_dims(f2)) {
        throw DimensionError("estimate_flow_dense: frames must share dimensions");
    }

    const Pyramid pyr1 = build_pyramid(f1, params.num_levels, params.pyramid_scale);
    const Pyramid pyr2 = build_pyramid(f2, params.num_levels, params.pyramid_scale);
    const int levels = static_cast<int>(pyr1.levels.size());
    const Frame& coarsest = pyr1.levels[levels - 1];
    const int support = 2 * params.window_radius + 1;
    if (coarsest.width < support || coarsest.height < support) {
        throw DimensionError("estimate_flow_dense: coarsest level " +
                             std::to_string(coarsest.width) + "x" +
                             std::to_string(coarsest.height) +
                             " cannot support the expansion window");
    }

    FlowField flow(coarsest.width, coarsest.height);
    for (int level = levels - 1; level >= 0; --level) {
        const Frame& l1 = pyr1.levels[level];
        const Frame& l2 = pyr2.levels[level];
        if (flow.width != l1.width || flow.height != l1.height) {
            flow = upsample_flow(flow, l1.width, l1.height, 1.0 / params.pyramid_scale);
        }
        const PolyExpansion e1 =
            poly_expansion(to_solver_units(l1), params.window_radius, params.sigma_applic);
        const PolyExpansion e2 =
            poly_expansion(to_solver_units(l2), params.window_radius, params.sigma_applic);
        for (int iter = 0; iter < params.iterations_per_level; ++iter) {
            flow = displacement_step(e1, e2, flow, params.avg_radius, params.regularization_eps);
        }
    }
    return flow;
}

} // namespace gripflow
