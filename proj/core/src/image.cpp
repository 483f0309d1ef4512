#include "gripflow/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gripflow/flow.hpp"

namespace gripflow {

Frame::Frame(int w, int h, double fill)
    : width(w), height(h), intensities(static_cast<size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) {
        throw DimensionError("frame dimensions must be positive, got " + std::to_string(w) + "x" +
                             std::to_string(h));
    }
}

double Frame::at_clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
}

double Frame::sample_bilinear(double x, double y) const {
    x = std::clamp(x, 0.0, static_cast<double>(width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height - 1));
    const int x0 = std::min(static_cast<int>(x), width - 2 >= 0 ? width - 2 : 0);
    const int y0 = std::min(static_cast<int>(y), height - 2 >= 0 ? height - 2 : 0);
    const int x1 = std::min(x0 + 1, width - 1);
    const int y1 = std::min(y0 + 1, height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
    const double bot = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

RgbImage::RgbImage(int w, int h)
    : width(w), height(h), r(static_cast<size_t>(w) * h, 0.0), g(static_cast<size_t>(w) * h, 0.0),
      b(static_cast<size_t>(w) * h, 0.0) {}

Frame luma(const RgbImage& rgb) {
    const size_t n = static_cast<size_t>(rgb.width) * rgb.height;
    if (rgb.r.size() != n || rgb.g.size() != n || rgb.b.size() != n) {
        throw DimensionError("luma: channel sizes disagree with declared dimensions");
    }
    Frame out(rgb.width, rgb.height);
    for (size_t i = 0; i < n; ++i) {
        out.intensities[i] = 0.299 * rgb.r[i] + 0.587 * rgb.g[i] + 0.114 * rgb.b[i];
    }
    return out;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        kernel[k + radius] = w;
        sum += w;
    }
    for (double& w : kernel) w /= sum;
    return kernel;
}

// Separable 1D correlation along x with clamp-to-edge reads.
void convolve_rows(const std::vector<double>& src, std::vector<double>& dst, int w, int h,
                   const std::vector<double>& kernel) {
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
    for (int y = 0; y < h; ++y) {
        const double* row = src.data() + static_cast<size_t>(y) * w;
        double* out = dst.data() + static_cast<size_t>(y) * w;
        const int interior_lo = std::min(radius, w);
        const int interior_hi = std::max(w - radius, interior_lo);
        for (int x = 0; x < interior_lo; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * row[std::clamp(x + k, 0, w - 1)];
            }
            out[x] = acc;
        }
        for (int x = interior_lo; x < interior_hi; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * row[x + k];
            }
            out[x] = acc;
        }
        for (int x = interior_hi; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[k + radius] * row[std::clamp(x + k, 0, w - 1)];
            }
            out[x] = acc;
        }
    }
}

// Separable 1D correlation along y with clamp-to-edge reads. Accumulates
// whole rows at a time to stay cache-friendly.
void convolve_cols(const std::vector<double>& src, std::vector<double>& dst, int w, int h,
                   const std::vector<double>& kernel) {
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
    for (int y = 0; y < h; ++y) {
        double* out = dst.data() + static_cast<size_t>(y) * w;
        std::fill(out, out + w, 0.0);
        for (int k = -radius; k <= radius; ++k) {
            const int yy = std::clamp(y + k, 0, h - 1);
            const double kw = kernel[k + radius];
            const double* row = src.data() + static_cast<size_t>(yy) * w;
            for (int x = 0; x < w; ++x) {
                out[x] += kw * row[x];
            }
        }
    }
}

Frame resample_bilinear(const Frame& frame, int out_w, int out_h) {
    Frame out(out_w, out_h);
    out.timestamp_index = frame.timestamp_index;
    out.frame_interval = frame.frame_interval;
    const double sx = static_cast<double>(frame.width) / out_w;
    const double sy = static_cast<double>(frame.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double src_y = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double src_x = (x + 0.5) * sx - 0.5;
            out.at(x, y) = frame.sample_bilinear(src_x, src_y);
        }
    }
    return out;
}

} // namespace

Frame gaussian_blur(const Frame& frame, double sigma) {
    if (sigma <= 0.0) {
        throw ParameterError("gaussian_blur: sigma must be positive, got " + std::to_string(sigma));
    }
    const std::vector<double> kernel = gaussian_kernel(sigma);
    Frame out = frame;
    std::vector<double> tmp(frame.intensities.size());
    convolve_rows(frame.intensities, tmp, frame.width, frame.height, kernel);
    convolve_cols(tmp, out.intensities, frame.width, frame.height, kernel);
    return out;
}

Frame downsample(const Frame& frame, double scale) {
    if (!(scale > 0.0 && scale < 1.0)) {
        throw ParameterError("downsample: scale must lie in (0,1), got " + std::to_string(scale));
    }
    const int out_w = static_cast<int>(std::ceil(frame.width * scale));
    const int out_h = static_cast<int>(std::ceil(frame.height * scale));
    if (out_w < 1 || out_h < 1) {
        throw ParameterError("downsample: resulting dimensions would be empty");
    }
    const double sigma = 0.5 * (1.0 / scale - 1.0) + 0.25;
    return resample_bilinear(gaussian_blur(frame, sigma), out_w, out_h);
}

Frame resize_to(const Frame& frame, int out_width, int out_height) {
    if (out_width < 1 || out_height < 1) {
        throw ParameterError("resize_to: target dimensions must be positive");
    }
    if (out_width == frame.width && out_height == frame.height) return frame;
    const double sx = static_cast<double>(out_width) / frame.width;
    const double sy = static_cast<double>(out_height) / frame.height;
    const double s = std::min(sx, sy);
    if (s < 1.0) {
        const double sigma = 0.5 * (1.0 / s - 1.0) + 0.25;
        return resample_bilinear(gaussian_blur(frame, sigma), out_width, out_height);
    }
    return resample_bilinear(frame, out_width, out_height);
}

Pyramid build_pyramid(const Frame& frame, int num_levels, double scale) {
    if (num_levels < 1) {
        throw ParameterError("build_pyramid: num_levels must be >= 1");
    }
    if (!(scale > 0.0 && scale < 1.0)) {
        throw ParameterError("build_pyramid: scale must lie in (0,1)");
    }
    Pyramid pyr;
    pyr.scale = scale;
    pyr.levels.push_back(frame);
    for (int level = 1; level < num_levels; ++level) {
        const Frame& prev = pyr.levels.back();
        const int next_w = static_cast<int>(std::ceil(prev.width * scale));
        const int next_h = static_cast<int>(std::ceil(prev.height * scale));
        if (next_w < 16 || next_h < 16) break;
        pyr.levels.push_back(downsample(prev, scale));
    }
    return pyr;
}

Frame warp(const Frame& frame, const FlowField& flow) {
    if (flow.width != frame.width || flow.height != frame.height) {
        throw DimensionError("warp: flow dimensions do not match the frame");
    }
    Frame out = frame;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const double u = flow.u_at(x, y);
            const double v = flow.v_at(x, y);
            if (u == 0.0 && v == 0.0) {
                out.at(x, y) = frame.at(x, y);
            } else {
                out.at(x, y) = frame.sample_bilinear(x - u, y - v);
            }
        }
    }
    return out;
}

Gradients gradients(const Frame& f1, const Frame& f2) {
    if (!f1.same_dims(f2)) {
        throw DimensionError("gradients: frames must share dimensions");
    }
    const int w = f1.width;
    const int h = f1.height;
    Gradients out;
    out.width = w;
    out.height = h;
    out.ix.resize(static_cast<size_t>(w) * h);
    out.iy.resize(static_cast<size_t>(w) * h);
    out.it.resize(static_cast<size_t>(w) * h);

    std::vector<double> avg(static_cast<size_t>(w) * h);
    for (size_t i = 0; i < avg.size(); ++i) {
        avg[i] = 0.5 * (f1.intensities[i] + f2.intensities[i]);
        out.it[i] = f2.intensities[i] - f1.intensities[i];
    }

    auto a = [&](int x, int y) { return avg[static_cast<size_t>(y) * w + x]; };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            if (x == 0) {
                out.ix[i] = w > 1 ? a(1, y) - a(0, y) : 0.0;
            } else if (x == w - 1) {
                out.ix[i] = a(w - 1, y) - a(w - 2, y);
            } else {
                out.ix[i] = 0.5 * (a(x + 1, y) - a(x - 1, y));
            }
            if (y == 0) {
                out.iy[i] = h > 1 ? a(x, 1) - a(x, 0) : 0.0;
            } else if (y == h - 1) {
                out.iy[i] = a(x, h - 1) - a(x, h - 2);
            } else {
                out.iy[i] = 0.5 * (a(x, y + 1) - a(x, y - 1));
            }
        }
    }
    return out;
}

} // namespace gripflow
