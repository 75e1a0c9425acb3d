#pragma once

#include <array>
#include <string>
#include <vector>

#include "straightkit/image.hpp"

namespace straightkit {

// Per-row central axis of a chromosome mask: one fractional column per row
// of [h1, h2]. Rows without foreground inside the span hold interpolated
// values.
struct Axis {
    int h1 = 0;
    int h2 = 0;
    std::vector<double> center;  // center[i] is the column at row h1 + i

    int rows() const { return static_cast<int>(center.size()); }
    double col(int row) const { return center[row - h1]; }
};

// The 10-point central axis and its 9 stick lengths.
struct ControlPoints {
    std::array<std::pair<double, double>, 10> points;  // (y, x), y strictly increasing
    std::array<double, 9> stick_lengths;               // Euclidean, in pixels
};

struct BackbonePair {
    GrayImage curved;
    GrayImage vertical;
    std::array<double, 9> lengths;
};

// Stick intensities: 23k/255 for k = 1..9, stored exactly so that 8-bit
// output files carry the values 23, 46, ..., 207.
inline double stick_value(int k) { return 23.0 * k / 255.0; }

// Per-row first/last foreground midpoints (w_c = (w1+w2)/2) over the
// foreground row span; interior gap rows are filled by linear
// interpolation. Errors: no foreground at all, or fewer than 22
// foreground rows.
Axis extract_central_axis(const GrayImage& img);

// Centered moving average with a truncated (shrinking) window at the ends.
// The window must be odd and >= 3.
Axis smooth_axis(const Axis& axis, int window = 11);

// Divides the axis span into 11 equal parts by y, keeps the 10 interior
// boundaries, and interpolates x on the smoothed axis. Errors when
// h2 - h1 < 11.
ControlPoints make_control_points(const Axis& axis);

// Draws the 9-stick figure over the original pose. Sticks are rectangles
// of the given width with rounded caps at interior joints, drawn in
// ascending order (later sticks overwrite). Errors if any control point
// lies outside the canvas.
GrayImage rasterize_backbone(const ControlPoints& cp, int canvas, double stick_width = 33.0);

// Re-lays the sticks on a vertical line through the canvas center with the
// same per-stick lengths, vertically centered. Errors if the total length
// does not fit.
GrayImage make_vertical_backbone(const ControlPoints& cp, int canvas, double stick_width = 33.0);

BackbonePair make_backbone_pair(const GrayImage& img, int window = 11, double stick_width = 33.0);

// One "y x" pair per line, 6 decimal places.
std::string control_points_table(const ControlPoints& cp);

}  // namespace straightkit
