#pragma once

#include <vector>

#include "gripflow/image.hpp"
#include "gripflow/poly_expansion.hpp"

namespace gripflow {

// Dense displacement field in pixels per frame interval.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<double> u; // x displacement
    std::vector<double> v; // y displacement

    FlowField() = default;
    FlowField(int w, int h);

    double& u_at(int x, int y) { return u[static_cast<size_t>(y) * width + x]; }
    double& v_at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
    double u_at(int x, int y) const { return u[static_cast<size_t>(y) * width + x]; }
    double v_at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
};

struct FarnebackParams {
    int num_levels = 3;
    double pyramid_scale = 0.5;
    int iterations_per_level = 3;
    int window_radius = 5;
    double sigma_applic = 1.5;
    int avg_radius = 5;        // neighborhood averaging of the normal equations
    double regularization_eps = 1e-6;

    void validate() const;
};

struct TrackedPoint {
    double x = 0.0, y = 0.0;   // position in the first frame
    double dx = 0.0, dy = 0.0; // displacement, pixels per frame; valid when tracked
    bool tracked = false;
};

// One solve of the two-expansion displacement system under a prior field.
// With q = clamp(round(p + prior)): A = (A1(p) + A2(q))/2 and
// db = -(b2(q) - b1(p))/2 + A*(q - p), i.e. the constraint is compensated by
// the displacement the rounded lookup applied; G = A'A and h = A'db are
// box-averaged over the (2*avg_radius+1)^2 neighborhood and
// flow = (G + eps*I)^-1 h.
FlowField displacement_step(const PolyExpansion& e1, const PolyExpansion& e2,
                            const FlowField& prior, int avg_radius, double eps);

// Coarse-to-fine dense flow between two frames.
FlowField estimate_flow_dense(const Frame& f1, const Frame& f2, const FarnebackParams& params);

// Minimum-eigenvalue corner selection with non-maximum suppression and a
// greedy minimum-distance rule.
std::vector<std::pair<double, double>> detect_features(const Frame& frame, int max_points,
                                                       double quality, double min_distance);

// Pyramidal Lucas-Kanade tracking of explicit points.
std::vector<TrackedPoint> track_sparse(const Frame& f1, const Frame& f2,
                                       const std::vector<std::pair<double, double>>& points,
                                       int window_radius, int num_levels, int max_iters);

} // namespace gripflow
