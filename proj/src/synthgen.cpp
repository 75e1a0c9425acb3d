#include "straightkit/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "straightkit/common.hpp"

namespace straightkit {

BandProfile make_band_profile(int length, int band_period, uint64_t seed, double lo, double hi) {
    if (length < 22) throw DataError("band profile must be at least 22 samples");
    Rng rng(seed);
    const int bands = (length + band_period - 1) / band_period;
    std::vector<double> levels(bands);
    for (int b = 0; b < bands; ++b) {
        const double base = b % 2 == 0 ? hi : lo;
        levels[b] = std::clamp(base + rng.uniform(-0.05, 0.05), 0.05, 1.0);
    }
    BandProfile p;
    p.samples.resize(length);
    // Smooth band transitions over ~2 px with a cosine ramp.
    for (int i = 0; i < length; ++i) {
        const int b = i / band_period;
        const int edge = (b + 1) * band_period;  // next transition
        double v = levels[b];
        const double d = edge - i;
        if (d <= 2.0 && b + 1 < bands) {
            const double t = 0.5 - 0.5 * std::cos(3.14159265358979323846 * d / 2.0);
            v = levels[b + 1] + (levels[b] - levels[b + 1]) * t;
        }
        p.samples[i] = v;
    }
    return p;
}

std::vector<double> default_width_profile(int length, double width_scale) {
    std::vector<double> w(length);
    for (int i = 0; i < length; ++i) {
        const double t = length > 1 ? static_cast<double>(i) / (length - 1) : 0.0;
        const double bump = 0.5 - 0.5 * std::cos(2.0 * 3.14159265358979323846 * t);
        w[i] = (17.0 + 8.0 * bump) * width_scale;
    }
    return w;
}

namespace {

// Shared body center column; an integer so odd widths raster symmetrically.
inline double center_col(int canvas) { return std::floor((canvas - 1) / 2.0); }

}  // namespace

GrayImage make_straight_chromosome(const BandProfile& profile,
                                   const std::vector<double>& width_profile, int canvas) {
    const int length = profile.length();
    if (length < 22) throw DataError("profile too short");
    if (length + 4 > canvas) throw DataError("profile too long for canvas");
    if (static_cast<int>(width_profile.size()) != length)
        throw DataError("width profile length mismatch");

    GrayImage img(canvas, canvas);
    const int top = (canvas - length) / 2;
    const double cx = center_col(canvas);
    for (int r = 0; r < length; ++r) {
        const double hw = width_profile[r] / 2.0;
        for (int x = 0; x < canvas; ++x) {
            const double d = std::abs(x - cx);
            // 2 px lateral edge ramp.
            const double a = std::clamp((hw - d) / 2.0, 0.0, 1.0);
            if (a > 0.0) img.at(top + r, x) = profile.samples[r] * a;
        }
    }
    return img;
}

namespace {

Spine resample_by_arc(const std::vector<std::pair<double, double>>& fine, double step) {
    Spine spine;
    std::vector<double> cum(fine.size(), 0.0);
    for (size_t i = 1; i < fine.size(); ++i) {
        const double dy = fine[i].first - fine[i - 1].first;
        const double dx = fine[i].second - fine[i - 1].second;
        cum[i] = cum[i - 1] + std::sqrt(dy * dy + dx * dx);
    }
    spine.arc_length = cum.back();
    // Exactly uniform arc spacing, endpoint included.
    const int segs = std::max(1, static_cast<int>(std::ceil(spine.arc_length / step)));
    const double s_step = spine.arc_length / segs;
    size_t j = 1;
    for (int i = 0; i <= segs; ++i) {
        const double s = std::min(i * s_step, spine.arc_length);
        while (j < fine.size() - 1 && cum[j] < s) ++j;
        const double seg = cum[j] - cum[j - 1];
        const double t = seg > 0.0 ? (s - cum[j - 1]) / seg : 0.0;
        spine.samples.emplace_back(fine[j - 1].first + t * (fine[j].first - fine[j - 1].first),
                                   fine[j - 1].second + t * (fine[j].second - fine[j - 1].second));
    }
    return spine;
}

}  // namespace

Spine make_bezier_spine(int canvas, double length, double curvature, int bends) {
    const double cx = center_col(canvas);
    const double y0 = (canvas - length) / 2.0;
    const double y3 = y0 + length;
    // Control net keeps y monotone; one bend is a C, two are an S.
    const double d1 = curvature;
    const double d2 = bends >= 2 ? -curvature : curvature;
    const std::pair<double, double> p0{y0, cx - (bends >= 2 ? 0.0 : curvature / 2.0)};
    const std::pair<double, double> p1{y0 + length / 3.0, cx + d1};
    const std::pair<double, double> p2{y0 + 2.0 * length / 3.0, cx + d2};
    const std::pair<double, double> p3{y3, cx - (bends >= 2 ? 0.0 : curvature / 2.0)};

    std::vector<std::pair<double, double>> fine;
    const int steps = 2048;
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        const double u = 1.0 - t;
        const double y = u * u * u * p0.first + 3 * u * u * t * p1.first +
                         3 * u * t * t * p2.first + t * t * t * p3.first;
        const double x = u * u * u * p0.second + 3 * u * u * t * p1.second +
                         3 * u * t * t * p2.second + t * t * t * p3.second;
        fine.emplace_back(y, x);
    }
    return resample_by_arc(fine, 0.5);
}

Spine make_vertical_spine(int canvas, double length) {
    const double cx = center_col(canvas);
    const double y0 = (canvas - length) / 2.0;
    std::vector<std::pair<double, double>> fine;
    for (int i = 0; i <= 2048; ++i)
        fine.emplace_back(y0 + length * i / 2048.0, cx);
    return resample_by_arc(fine, 0.5);
}

GrayImage bend_along_spine(const GrayImage& img, const Spine& spine) {
    // Foreground body extent of the straight source.
    int top = -1, bottom = -1;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.at(y, x) > 0.0) {
                if (top < 0) top = y;
                bottom = y;
                break;
            }
    if (top < 0) throw DataError("empty source image");
    const double body = bottom - top + 1;
    if (spine.arc_length < body - 1) throw DataError("spine shorter than chromosome");
    // Integer offset keeps an identity spine an exact identity.
    const double arc_offset = std::floor((spine.arc_length - (body - 1)) / 2.0);
    const double cx = center_col(img.width);

    const auto& pts = spine.samples;
    const double step = pts.size() > 1 ? spine.arc_length / (pts.size() - 1) : 1.0;
    GrayImage out(img.width, img.height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            // Nearest spine sample, then exact projection onto the adjacent
            // polyline segments.
            size_t best = 0;
            double best_d2 = 1e300;
            for (size_t m = 0; m < pts.size(); ++m) {
                const double dy = y - pts[m].first, dx = x - pts[m].second;
                const double d2 = dy * dy + dx * dx;
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = m;
                }
            }
            double s_best = best * step, d_best = 0.0, best_dist2 = 1e300;
            for (size_t seg = best > 0 ? best - 1 : 0; seg <= best && seg + 1 < pts.size(); ++seg) {
                const double ay = pts[seg].first, ax = pts[seg].second;
                const double vy = pts[seg + 1].first - ay, vx = pts[seg + 1].second - ax;
                const double len2 = vy * vy + vx * vx;
                if (len2 <= 0.0) continue;
                double t = ((y - ay) * vy + (x - ax) * vx) / len2;
                t = std::clamp(t, 0.0, 1.0);
                const double qy = ay + t * vy, qx = ax + t * vx;
                const double len = std::sqrt(len2);
                const double dist2 = (y - qy) * (y - qy) + (x - qx) * (x - qx);
                if (dist2 < best_dist2) {
                    best_dist2 = dist2;
                    // Signed offset via the left normal of the tangent.
                    const double ny = -vx / len, nx = vy / len;
                    d_best = ((y - qy) * ny + (x - qx) * nx) >= 0.0 ? std::sqrt(dist2)
                                                                    : -std::sqrt(dist2);
                    s_best = seg * step + t * len;
                }
            }
            const double src_row = top + (s_best - arc_offset);
            const double src_col = cx + d_best;
            if (src_row < top - 1.0 || src_row > bottom + 1.0) continue;
            const int y0 = static_cast<int>(std::floor(src_row));
            const int x0 = static_cast<int>(std::floor(src_col));
            const double fy = src_row - y0, fx = src_col - x0;
            double acc = 0.0;
            const double wts[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
            const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
            const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
            for (int i = 0; i < 4; ++i)
                if (img.in_bounds(ys[i], xs[i])) acc += wts[i] * img.at(ys[i], xs[i]);
            out.at(y, x) = acc;
        }
    }
    return out;
}

SynthCase make_synth_case(int canvas, double length, double curvature, int bends, uint64_t seed) {
    SynthCase c;
    const int len = static_cast<int>(length);
    c.profile = make_band_profile(len, std::max(5, len / 6), seed);
    const double scale = canvas / 256.0 * 2.0;  // wider-than-life bodies keep bands readable
    c.straight = make_straight_chromosome(c.profile, default_width_profile(len, scale), canvas);
    Spine spine = make_bezier_spine(canvas, length * 1.04, curvature, bends);
    c.bent = bend_along_spine(c.straight, spine);
    return c;
}

}  // namespace straightkit
