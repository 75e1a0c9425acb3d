#include "straightkit/geobase.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "straightkit/kernels.hpp"

namespace straightkit {

GrayImage BendAnalysis::upper_mask(const GrayImage& img) const {
    GrayImage m(img.width, img.height);
    for (int y = 0; y <= std::min(bend_row, img.height - 1); ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.at(y, x) > 0.0) m.at(y, x) = 1.0;
    return m;
}

GrayImage BendAnalysis::lower_mask(const GrayImage& img) const {
    GrayImage m(img.width, img.height);
    for (int y = bend_row + 1; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.at(y, x) > 0.0) m.at(y, x) = 1.0;
    return m;
}

BendAnalysis find_bending_point(const Axis& axis, int window) {
    const int n = axis.rows();
    if (n < 2 * window + 1)
        throw DataError("axis too short for bend analysis: " + std::to_string(n) + " rows");

    double best_angle = -1.0;
    int best_i = -1;
    for (int i = window; i < n - window; ++i) {
        // Chord directions over the windows before and after the candidate.
        const double uy = window, ux = axis.center[i] - axis.center[i - window];
        const double vy = window, vx = axis.center[i + window] - axis.center[i];
        const double dot = uy * vy + ux * vx;
        const double nu = std::sqrt(uy * uy + ux * ux);
        const double nv = std::sqrt(vy * vy + vx * vx);
        const double c = std::clamp(dot / (nu * nv), -1.0, 1.0);
        const double angle = std::acos(c) * 180.0 / 3.14159265358979323846;
        if (angle > best_angle) {
            best_angle = angle;
            best_i = i;
        }
    }
    if (best_angle < 5.0) throw DataError("no significant bend");
    BendAnalysis out;
    out.bend_row = axis.h1 + best_i;
    out.bend_angle_deg = best_angle;
    return out;
}

namespace {

// Least-squares direction (unit, pointing down) of axis rows [lo, hi].
std::pair<double, double> arm_direction(const Axis& axis, int lo, int hi) {
    // Slope of x on y over the arm span.
    double sy = 0, sx = 0, syy = 0, syx = 0;
    const int n = hi - lo + 1;
    for (int i = lo; i <= hi; ++i) {
        const double y = i, x = axis.center[i];
        sy += y;
        sx += x;
        syy += y * y;
        syx += y * x;
    }
    const double denom = n * syy - sy * sy;
    const double slope = denom != 0.0 ? (n * syx - sy * sx) / denom : 0.0;
    const double norm = std::sqrt(1.0 + slope * slope);
    return {1.0 / norm, slope / norm};  // (dy, dx)
}

}  // namespace

GrayImage stitch_straighten(const GrayImage& img, const BendAnalysis& bend) {
    const Axis axis = extract_central_axis(img);
    const Axis smoothed = smooth_axis(axis);
    const int bi = std::clamp(bend.bend_row - axis.h1, 1, axis.rows() - 2);
    const double py = bend.bend_row;
    const double px = smoothed.center[bi];

    const auto [uy, ux] = arm_direction(smoothed, 0, bi);
    const auto [ly, lx] = arm_direction(smoothed, bi, axis.rows() - 1);
    const double upper_rot = std::atan2(ux, uy);  // rotation that makes the arm vertical
    const double lower_rot = std::atan2(lx, ly);

    // Verify the rotated arm silhouettes stay inside the canvas.
    auto check_fit = [&](double rot, int y_lo, int y_hi) {
        int min_x = img.width, max_x = -1;
        for (int y = y_lo; y <= y_hi; ++y)
            for (int x = 0; x < img.width; ++x)
                if (img.at(y, x) > 0.0) {
                    min_x = std::min(min_x, x);
                    max_x = std::max(max_x, x);
                }
        if (max_x < 0) return;
        const double c = std::cos(rot), s = std::sin(rot);
        for (int y : {y_lo, y_hi})
            for (int x : {min_x, max_x}) {
                const double ry = py + c * (y - py) - s * (x - px);
                const double rx = px + s * (y - py) + c * (x - px);
                if (ry < -1 || ry > img.height || rx < -1 || rx > img.width)
                    throw DataError("rotated arms exceed canvas");
            }
    };
    check_fit(-upper_rot, axis.h1, bend.bend_row);
    check_fit(-lower_rot, bend.bend_row, axis.h2);

    // Backward mapping: each output half samples its own arm, restricted to
    // the source side of the cut.
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const bool upper = y <= bend.bend_row;
        const double rot = upper ? upper_rot : lower_rot;
        const double c = std::cos(rot), s = std::sin(rot);
        for (int x = 0; x < img.width; ++x) {
            const double sy = py + c * (y - py) - s * (x - px);
            const double sx = px + s * (y - py) + c * (x - px);
            if (upper ? sy > bend.bend_row + 0.5 : sy <= bend.bend_row - 0.5) continue;
            const int y0 = static_cast<int>(std::floor(sy));
            const int x0 = static_cast<int>(std::floor(sx));
            const double dy = sy - y0, dx = sx - x0;
            double acc = 0.0;
            const double wts[4] = {(1 - dy) * (1 - dx), (1 - dy) * dx, dy * (1 - dx), dy * dx};
            const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
            const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
            for (int i = 0; i < 4; ++i)
                if (img.in_bounds(ys[i], xs[i])) acc += wts[i] * img.at(ys[i], xs[i]);
            out.at(y, x) = acc;
        }
    }

    // Fill empty pixels between foreground runs at each row with the row's
    // pre-fill mean foreground value.
    for (int y = 0; y < out.height; ++y) {
        int lo = -1, hi = -1;
        double sum = 0.0;
        int cnt = 0;
        for (int x = 0; x < out.width; ++x)
            if (out.at(y, x) > 0.0) {
                if (lo < 0) lo = x;
                hi = x;
                sum += out.at(y, x);
                ++cnt;
            }
        if (cnt == 0) continue;
        const double fill = sum / cnt;
        for (int x = lo + 1; x < hi; ++x)
            if (out.at(y, x) == 0.0) out.at(y, x) = fill;
    }

    // Re-center the silhouette on the canvas (integer shift).
    int min_y = out.height, max_y = -1, min_x = out.width, max_x = -1;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            if (out.at(y, x) > 0.0) {
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
            }
    if (max_y < 0) return out;
    const int shift_y = (out.height - 1 - (min_y + max_y)) / 2;
    const int shift_x = (out.width - 1 - (min_x + max_x)) / 2;
    GrayImage centered(out.width, out.height);
    for (int y = min_y; y <= max_y; ++y)
        for (int x = min_x; x <= max_x; ++x) {
            const int ty = y + shift_y, tx = x + shift_x;
            if (centered.in_bounds(ty, tx)) centered.at(ty, tx) = out.at(y, x);
        }
    return centered;
}

GrayImage thin(const GrayImage& img, double threshold) {
    std::vector<uint8_t> grid(img.size());
    bool any = false;
    for (size_t i = 0; i < img.size(); ++i) {
        grid[i] = img.data[i] > threshold ? 1 : 0;
        any |= grid[i] != 0;
    }
    if (!any) throw DataError("empty foreground");

    std::vector<uint8_t> next(grid.size());
    bool changed = true;
    while (changed) {
        changed = kernels::thin_pass(grid, next, img.width, img.height, 0);
        grid.swap(next);
        changed = kernels::thin_pass(grid, next, img.width, img.height, 1) || changed;
        grid.swap(next);
    }
    GrayImage out(img.width, img.height);
    for (size_t i = 0; i < grid.size(); ++i) out.data[i] = grid[i] ? 1.0 : 0.0;
    return out;
}

int count_endpoints(const GrayImage& skel) {
    int count = 0;
    for (int y = 0; y < skel.height; ++y)
        for (int x = 0; x < skel.width; ++x) {
            if (skel.at(y, x) <= 0.0) continue;
            int nbrs = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    if (skel.in_bounds(y + dy, x + dx) && skel.at(y + dy, x + dx) > 0.0) ++nbrs;
                }
            if (nbrs == 1) ++count;
        }
    return count;
}

int count_components(const GrayImage& img, double threshold) {
    std::vector<uint8_t> seen(img.size(), 0);
    std::vector<std::pair<int, int>> stack;
    int components = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const size_t i = static_cast<size_t>(y) * img.width + x;
            if (seen[i] || img.data[i] <= threshold) continue;
            ++components;
            seen[i] = 1;
            stack.push_back({y, x});
            while (!stack.empty()) {
                auto [cy, cx] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int ny = cy + dy, nx = cx + dx;
                        if (!img.in_bounds(ny, nx)) continue;
                        const size_t j = static_cast<size_t>(ny) * img.width + nx;
                        if (!seen[j] && img.data[j] > threshold) {
                            seen[j] = 1;
                            stack.push_back({ny, nx});
                        }
                    }
            }
        }
    return components;
}

}  // namespace straightkit
