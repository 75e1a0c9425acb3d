#include "straightkit/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "straightkit/kernels.hpp"

namespace straightkit {

Axis extract_central_axis(const GrayImage& img) {
    std::vector<double> center(img.height, -1.0);
    int h1 = -1, h2 = -1, fg_rows = 0;
    for (int y = 0; y < img.height; ++y) {
        int w1 = -1, w2 = -1;
        for (int x = 0; x < img.width; ++x) {
            if (img.at(y, x) > 0.0) {
                if (w1 < 0) w1 = x;
                w2 = x;
            }
        }
        if (w1 >= 0) {
            center[y] = 0.5 * (w1 + w2);
            if (h1 < 0) h1 = y;
            h2 = y;
            ++fg_rows;
        }
    }
    if (h1 < 0) throw DataError("no foreground");
    if (fg_rows < 22)
        throw DataError("too few foreground rows: " + std::to_string(fg_rows) + " < 22");

    Axis axis;
    axis.h1 = h1;
    axis.h2 = h2;
    axis.center.assign(center.begin() + h1, center.begin() + h2 + 1);

    // Fill interior gap rows by linear interpolation between neighbors.
    int i = 0;
    const int n = axis.rows();
    while (i < n) {
        if (axis.center[i] >= 0.0) { ++i; continue; }
        int lo = i - 1;  // always valid: row h1 has foreground
        int hi = i;
        while (axis.center[hi] < 0.0) ++hi;  // row h2 has foreground
        for (int j = lo + 1; j < hi; ++j) {
            double t = static_cast<double>(j - lo) / (hi - lo);
            axis.center[j] = axis.center[lo] + t * (axis.center[hi] - axis.center[lo]);
        }
        i = hi;
    }
    return axis;
}

Axis smooth_axis(const Axis& axis, int window) {
    if (window < 3 || window % 2 == 0)
        throw DataError("smoothing window must be odd and >= 3");
    if (axis.center.empty()) throw DataError("empty axis");
    const int n = axis.rows();
    const int half = window / 2;
    Axis out = axis;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        double sum = 0.0;
        for (int j = lo; j <= hi; ++j) sum += axis.center[j];
        out.center[i] = sum / (hi - lo + 1);
    }
    return out;
}

namespace {

double axis_col_at(const Axis& axis, double y) {
    const double f = y - axis.h1;
    const int i = std::clamp(static_cast<int>(std::floor(f)), 0, axis.rows() - 1);
    const int j = std::min(i + 1, axis.rows() - 1);
    const double t = f - i;
    return axis.center[i] + t * (axis.center[j] - axis.center[i]);
}

std::vector<kernels::StickPoint> to_stick_points(const ControlPoints& cp) {
    std::vector<kernels::StickPoint> pts;
    pts.reserve(cp.points.size());
    for (const auto& [y, x] : cp.points) pts.push_back({y, x});
    return pts;
}

std::vector<double> stick_values() {
    std::vector<double> v(9);
    for (int k = 1; k <= 9; ++k) v[k - 1] = stick_value(k);
    return v;
}

}  // namespace

ControlPoints make_control_points(const Axis& axis) {
    const double span = axis.h2 - axis.h1;
    if (span < 11.0)
        throw DataError("axis span too short for an 11-part split: " + std::to_string(span));
    ControlPoints cp;
    for (int j = 1; j <= 10; ++j) {
        const double y = axis.h1 + j * span / 11.0;
        cp.points[j - 1] = {y, axis_col_at(axis, y)};
    }
    for (int k = 0; k < 9; ++k) {
        const double dy = cp.points[k + 1].first - cp.points[k].first;
        const double dx = cp.points[k + 1].second - cp.points[k].second;
        cp.stick_lengths[k] = std::sqrt(dy * dy + dx * dx);
    }
    return cp;
}

GrayImage rasterize_backbone(const ControlPoints& cp, int canvas, double stick_width) {
    for (const auto& [y, x] : cp.points)
        if (y < 0.0 || y > canvas - 1 || x < 0.0 || x > canvas - 1)
            throw DataError("control point outside canvas");
    GrayImage out(canvas, canvas);
    kernels::raster_sticks(to_stick_points(cp), stick_values(), (stick_width - 1.0) / 2.0, out);
    return out;
}

GrayImage make_vertical_backbone(const ControlPoints& cp, int canvas, double stick_width) {
    double total = 0.0;
    for (double len : cp.stick_lengths) total += len;
    if (total + stick_width > canvas)
        throw DataError("total stick length exceeds canvas");

    const double x = std::floor(canvas / 2.0);
    const double y0 = (canvas - total) / 2.0;
    std::vector<kernels::StickPoint> pts;
    pts.push_back({y0, x});
    double acc = 0.0;
    for (double len : cp.stick_lengths) {
        acc += len;
        pts.push_back({y0 + acc, x});
    }
    GrayImage out(canvas, canvas);
    kernels::raster_sticks(pts, stick_values(), (stick_width - 1.0) / 2.0, out);
    return out;
}

BackbonePair make_backbone_pair(const GrayImage& img, int window, double stick_width) {
    if (img.width != img.height) throw DataError("backbone extraction expects a square canvas");
    const Axis axis = smooth_axis(extract_central_axis(img), window);
    const ControlPoints cp = make_control_points(axis);
    BackbonePair pair;
    pair.curved = rasterize_backbone(cp, img.width, stick_width);
    pair.vertical = make_vertical_backbone(cp, img.width, stick_width);
    pair.lengths = cp.stick_lengths;
    return pair;
}

std::string control_points_table(const ControlPoints& cp) {
    std::string out;
    char buf[64];
    for (const auto& [y, x] : cp.points) {
        std::snprintf(buf, sizeof(buf), "%.6f %.6f\n", y, x);
        out += buf;
    }
    return out;
}

}  // namespace straightkit
