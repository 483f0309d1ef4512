#include <algorithm>
#include <cmath>

#include "gripflow/errors.hpp"
#include "gripflow/io.hpp"

namespace gripflow {

namespace {

void put_green(RgbImage& image, int x, int y) {
    const size_t i = static_cast<size_t>(y) * image.width + x;
    image.r[i] = 0.0;
    image.g[i] = 1.0;
    image.b[i] = 0.0;
}

// Bresenham segment; endpoints are already inside the image.
void draw_segment(RgbImage& image, int x0, int y0, int x1, int y1) {
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        put_green(image, x0, y0);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

} // namespace

RgbImage render_flow_overlay(const Frame& frame, const FlowField& flow, int stride, double gain) {
    if (stride < 4) throw ParameterError("render_flow_overlay: stride must be >= 4");
    if (frame.width != flow.width || frame.height != flow.height)
        throw DimensionError("render_flow_overlay: frame and flow must share dimensions");

    RgbImage image(frame.width, frame.height);
    image.r = frame.intensities;
    image.g = frame.intensities;
    image.b = frame.intensities;

    for (int y = 0; y < frame.height; y += stride) {
        for (int x = 0; x < frame.width; x += stride) {
            const double tx = x + gain * flow.u_at(x, y);
            const double ty = y + gain * flow.v_at(x, y);
            const int x1 = std::clamp(static_cast<int>(std::lround(tx)), 0, frame.width - 1);
            const int y1 = std::clamp(static_cast<int>(std::lround(ty)), 0, frame.height - 1);
            draw_segment(image, x, y, x1, y1);
        }
    }
    return image;
}

} // namespace gripflow
