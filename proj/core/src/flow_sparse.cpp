#include "gripflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gripflow {

namespace {

struct Corner {
    int x, y;
    double score;
};

} // namespace

std::vector<std::pair<double, double>> detect_features(const Frame& frame, int max_points,
                                                       double quality, double min_distance) {
    if (max_points < 1) throw ParameterError("detect_features: max_points must be >= 1");
    const int w = frame.width;
    const int h = frame.height;

    const Gradients grad = gradients(frame, frame);
    const size_t n = static_cast<size_t>(w) * h;
    std::vector<double> ixx(n), ixy(n), iyy(n);
    for (size_t i = 0; i < n; ++i) {
        ixx[i] = grad.ix[i] * grad.ix[i];
        ixy[i] = grad.ix[i] * grad.iy[i];
        iyy[i] = grad.iy[i] * grad.iy[i];
    }

    // Minimum eigenvalue of the 3x3-summed structure tensor. The outermost
    // pixel ring is excluded: one-sided border differences plus the clamped
    // sums inflate scores there, and those pixels outrank real corners.
    std::vector<double> score(n, 0.0);
    double max_score = 0.0;
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            double sxx = 0.0, sxy = 0.0, syy = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const size_t j = static_cast<size_t>(y + dy) * w + (x + dx);
                    sxx += ixx[j];
                    sxy += ixy[j];
                    syy += iyy[j];
                }
            }
            const double tr = 0.5 * (sxx + syy);
            const double disc = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
            const double lambda_min = tr - disc;
            score[static_cast<size_t>(y) * w + x] = lambda_min;
            max_score = std::max(max_score, lambda_min);
        }
    }
    if (max_score <= 0.0) return {};

    const double threshold = quality * max_score;
    std::vector<Corner> candidates;
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            const double s = score[static_cast<size_t>(y) * w + x];
            if (s < threshold || s <= 0.0) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int xx = std::clamp(x + dx, 0, w - 1);
                    const int yy = std::clamp(y + dy, 0, h - 1);
                    if (score[static_cast<size_t>(yy) * w + xx] > s) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) candidates.push_back({x, y, s});
        }
    }

    std::sort(candidates.begin(), candidates.end(), [](const Corner& a, const Corner& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    std::vector<std::pair<double, double>> accepted;
    const double min_dist_sq = min_distance * min_distance;
    for (const Corner& cand : candidates) {
        bool ok = true;
        for (const auto& [ax, ay] : accepted) {
            const double dx = cand.x - ax;
            const double dy = cand.y - ay;
            if (dx * dx + dy * dy < min_dist_sq) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        accepted.emplace_back(cand.x, cand.y);
        if (static_cast<int>(accepted.size()) >= max_points) break;
    }
    return accepted;
}

std::vector<TrackedPoint> track_sparse(const Frame& f1, const Frame& f2,
                                       const std::vector<std::pair<double, double>>& points,
                                       int window_radius, int num_levels, int max_iters) {
    if (window_radius < 2) throw ParameterError("track_sparse: window_radius must be >= 2");
    if (!f1.same_dims(f2)) throw DimensionError("track_sparse: frames must share dimensions");

    constexpr double kPyramidScale = 0.5;
    constexpr double kConvergence = 0.01; // px
    const Pyramid pyr1 = build_pyramid(f1, num_levels, kPyramidScale);
    const Pyramid pyr2 = build_pyramid(f2, num_levels, kPyramidScale);
    const int levels = static_cast<int>(pyr1.levels.size());
    const int r = window_radius;
    const int win_count = (2 * r + 1) * (2 * r + 1);
    const double eig_threshold = 1e-4 * win_count;

    std::vector<TrackedPoint> result(points.size());
    std::vector<double> gx(win_count), gy(win_count), tmpl(win_count);

    for (size_t pi = 0; pi < points.size(); ++pi) {
        TrackedPoint& tp = result[pi];
        tp.x = points[pi].first;
        tp.y = points[pi].second;
        tp.tracked = tp.x >= 0.0 && tp.x <= f1.width - 1 && tp.y >= 0.0 && tp.y <= f1.height - 1;

        double dx = 0.0, dy = 0.0;
        for (int level = levels - 1; level >= 0 && tp.tracked; --level) {
            const Frame& l1 = pyr1.levels[level];
            const Frame& l2 = pyr2.levels[level];
            // Pixel-center mapping of the point into this level.
            double px = tp.x, py = tp.y;
            for (int k = 0; k < level; ++k) {
                px = (px + 0.5) * kPyramidScale - 0.5;
                py = (py + 0.5) * kPyramidScale - 0.5;
            }

            // Template window and its gradients from the first frame; the
            // structure tensor stays fixed across iterations.
            double sxx = 0.0, sxy = 0.0, syy = 0.0;
            int wi = 0;
            for (int oy = -r; oy <= r; ++oy) {
                for (int ox = -r; ox <= r; ++ox, ++wi) {
                    const double sx = px + ox;
                    const double sy = py + oy;
                    tmpl[wi] = l1.sample_bilinear(sx, sy);
                    gx[wi] = 0.5 * (l1.sample_bilinear(sx + 1, sy) - l1.sample_bilinear(sx - 1, sy));
                    gy[wi] = 0.5 * (l1.sample_bilinear(sx, sy + 1) - l1.sample_bilinear(sx, sy - 1));
                    sxx += gx[wi] * gx[wi];
                    sxy += gx[wi] * gy[wi];
                    syy += gy[wi] * gy[wi];
                }
            }
            const double tr = 0.5 * (sxx + syy);
            const double disc = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
            if (tr - disc < eig_threshold) {
                // Degenerate at the finest scale means the point has no
                // displacement claim to make. Degenerate at a coarser scale
                // only means this level cannot refine the estimate: smooth
                // content fades out of small pyramid levels.
                if (level == 0) {
                    tp.tracked = false;
                    break;
                }
                dx /= kPyramidScale;
                dy /= kPyramidScale;
                continue;
            }
            const double det = sxx * syy - sxy * sxy;

            for (int iter = 0; iter < max_iters; ++iter) {
                double m1 = 0.0, m2 = 0.0;
                wi = 0;
                for (int oy = -r; oy <= r; ++oy) {
                    for (int ox = -r; ox <= r; ++ox, ++wi) {
                        const double diff =
                            tmpl[wi] - l2.sample_bilinear(px + ox + dx, py + oy + dy);
                        m1 += gx[wi] * diff;
                        m2 += gy[wi] * diff;
                    }
                }
                const double step_x = (syy * m1 - sxy * m2) / det;
                const double step_y = (sxx * m2 - sxy * m1) / det;
                dx += step_x;
                dy += step_y;
                if (std::sqrt(step_x * step_x + step_y * step_y) < kConvergence) break;
            }

            // A point that leaves the frame is lost. At coarse levels the
            // pixel-center mapping puts the last row and column slightly past
            // dim-1 (63 maps to 31.25 on a 32px level), so the bound there is
            // the half-pixel sampling support rather than the pixel grid.
            const double slack = level == 0 ? 0.0 : 0.5;
            if (px + dx < -slack || px + dx > l2.width - 1 + slack || py + dy < -slack ||
                py + dy > l2.height - 1 + slack) {
                tp.tracked = false;
                break;
            }
            if (level > 0) {
                dx /= kPyramidScale;
                dy /= kPyramidScale;
            }
        }

        if (tp.tracked) {
            tp.dx = dx;
            tp.dy = dy;
        }
    }
    return result;
}

} // namespace gripflow
