#include "straightkit/kernels.hpp"

#include <algorithm>

namespace straightkit::kernels {

namespace {

inline double sample_bilinear(const GrayImage& src, double fy, double fx) {
    const int y0 = static_cast<int>(std::floor(fy));
    const int x0 = static_cast<int>(std::floor(fx));
    const double dy = fy - y0;
    const double dx = fx - x0;
    double acc = 0.0;
    const double wts[4] = {(1 - dy) * (1 - dx), (1 - dy) * dx, dy * (1 - dx), dy * dx};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    for (int i = 0; i < 4; ++i)
        if (src.in_bounds(ys[i], xs[i])) acc += wts[i] * src.at(ys[i], xs[i]);
    return acc;
}

inline double sample_nearest(const GrayImage& src, double fy, double fx) {
    const int y = static_cast<int>(std::lround(fy));
    const int x = static_cast<int>(std::lround(fx));
    return src.in_bounds(y, x) ? src.at(y, x) : 0.0;
}

// Pixel (py,px) is covered by stick s if it projects onto the segment
// within half_width, or lies in the rounded joint wedge at the segment's
// far end: inside the cap disk, past this segment's end plane and before
// the next segment's start plane. The wedge is empty for collinear sticks,
// so straight figures keep exact per-stick spans and flat ends.
inline bool stick_covers(const std::vector<StickPoint>& pts, size_t s, double half_width,
                         double py, double px) {
    const double ay = pts[s].y, ax = pts[s].x;
    const double by = pts[s + 1].y, bx = pts[s + 1].x;
    const double vy = by - ay, vx = bx - ax;
    const double len2 = vy * vy + vx * vx;
    const double t = ((py - ay) * vy + (px - ax) * vx) / len2;
    if (t >= 0.0 && t <= 1.0) {
        const double cy = ay + t * vy - py;
        const double cx = ax + t * vx - px;
        if (cy * cy + cx * cx <= half_width * half_width) return true;
    }
    if (t > 1.0 && s + 2 < pts.size()) {
        const double dy = py - by, dx = px - bx;
        if (dy * dy + dx * dx > half_width * half_width) return false;
        const double wy = pts[s + 2].y - by, wx = pts[s + 2].x - bx;
        if (dy * wy + dx * wx < 0.0) return true;
    }
    return false;
}

inline double raster_pixel(const std::vector<StickPoint>& pts, const std::vector<double>& values,
                           double half_width, int y, int x) {
    for (size_t s = values.size(); s-- > 0;)
        if (stick_covers(pts, s, half_width, y, x)) return values[s];
    return 0.0;
}

// Guo-Hall deletion test; neighbors clockwise from north, zero outside.
inline bool thin_delete(const std::vector<uint8_t>& g, int w, int h, int y, int x, int parity) {
    auto px = [&](int yy, int xx) -> int {
        return (yy >= 0 && yy < h && xx >= 0 && xx < w) ? g[static_cast<size_t>(yy) * w + xx] : 0;
    };
    const int p2 = px(y - 1, x), p3 = px(y - 1, x + 1), p4 = px(y, x + 1), p5 = px(y + 1, x + 1);
    const int p6 = px(y + 1, x), p7 = px(y + 1, x - 1), p8 = px(y, x - 1), p9 = px(y - 1, x - 1);
    const int c = ((!p2) & (p3 | p4)) + ((!p4) & (p5 | p6)) + ((!p6) & (p7 | p8)) +
                  ((!p8) & (p9 | p2));
    const int n1 = (p9 | p2) + (p3 | p4) + (p5 | p6) + (p7 | p8);
    const int n2 = (p2 | p3) + (p4 | p5) + (p6 | p7) + (p8 | p9);
    const int n = n1 < n2 ? n1 : n2;
    const int m = parity == 0 ? ((p6 | p7 | (!p9)) & p8) : ((p2 | p3 | (!p5)) & p4);
    return c == 1 && n >= 2 && n <= 3 && m == 0;
}

}  // namespace

void warp_bilinear(const GrayImage& src, const std::vector<double>& map_y,
                   const std::vector<double>& map_x, GrayImage& dst) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dst.height; ++y)
        for (int x = 0; x < dst.width; ++x) {
            const size_t i = static_cast<size_t>(y) * dst.width + x;
            dst.data[i] = sample_bilinear(src, map_y[i], map_x[i]);
        }
}

void warp_nearest(const GrayImage& src, const std::vector<double>& map_y,
                  const std::vector<double>& map_x, GrayImage& dst) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dst.height; ++y)
        for (int x = 0; x < dst.width; ++x) {
            const size_t i = static_cast<size_t>(y) * dst.width + x;
            dst.data[i] = sample_nearest(src, map_y[i], map_x[i]);
        }
}

void raster_sticks(const std::vector<StickPoint>& points, const std::vector<double>& values,
                   double half_width, GrayImage& dst) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dst.height; ++y)
        for (int x = 0; x < dst.width; ++x)
            dst.at(y, x) = raster_pixel(points, values, half_width, y, x);
}

bool thin_pass(const std::vector<uint8_t>& in, std::vector<uint8_t>& out, int width, int height,
               int parity) {
    out = in;
    bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const size_t i = static_cast<size_t>(y) * width + x;
            if (in[i] && thin_delete(in, width, height, y, x, parity)) {
                out[i] = 0;
                changed = true;
            }
        }
    return changed;
}

namespace serial {

void warp_bilinear(const GrayImage& src, const std::vector<double>& map_y,
                   const std::vector<double>& map_x, GrayImage& dst) {
    for (int y = 0; y < dst.height; ++y)
        for (int x = 0; x < dst.width; ++x) {
            const size_t i = static_cast<size_t>(y) * dst.width + x;
            dst.data[i] = sample_bilinear(src, map_y[i], map_x[i]);
        }
}

void warp_nearest(const GrayImage& src, const std::vector<double>& map_y,
                  const std::vector<double>& map_x, GrayImage& dst) {
    for (int y = 0; y < dst.height; ++y)
        for (int x = 0; x < dst.width; ++x) {
            const size_t i = static_cast<size_t>(y) * dst.width + x;
            dst.data[i] = sample_nearest(src, map_y[i], map_x[i]);
        }
}

void raster_sticks(const std::vector<StickPoint>& points, const std::vector<double>& values,
                   double half_width, GrayImage& dst) {
    for (int y = 0; y < dst.height; ++y)
        for (int x = 0; x < dst.width; ++x)
            dst.at(y, x) = raster_pixel(points, values, half_width, y, x);
}

bool thin_pass(const std::vector<uint8_t>& in, std::vector<uint8_t>& out, int width, int height,
               int parity) {
    out = in;
    bool changed = false;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const size_t i = static_cast<size_t>(y) * width + x;
            if (in[i] && thin_delete(in, width, height, y, x, parity)) {
                out[i] = 0;
                changed = true;
            }
        }
    return changed;
}

}  // namespace serial

}  // namespace straightkit::kernels
