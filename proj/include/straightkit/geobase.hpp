#pragma once

#include "straightkit/backbone.hpp"
#include "straightkit/image.hpp"

namespace straightkit {

// Bend localization result. Arms partition the foreground by row: upper is
// every foreground pixel with y <= bend_row, lower the rest.
struct BendAnalysis {
    int bend_row = 0;
    double bend_angle_deg = 0.0;

    GrayImage upper_mask(const GrayImage& img) const;
    GrayImage lower_mask(const GrayImage& img) const;
};

// Maximizes the turning angle between chord directions taken over
// `window`-row spans before and after each candidate row of the smoothed
// axis. Errors when the axis is shorter than 2*window + 1 rows or the
// maximum turning angle is below 5 degrees ("no significant bend").
BendAnalysis find_bending_point(const Axis& smoothed_axis, int window = 10);

// Cuts at the bend row, rotates each arm about the bend point so its
// least-squares axis direction is vertical, stacks the arms, re-centers,
// and fills empty pixels between foreground runs of each row with that
// row's pre-fill mean foreground value.
GrayImage stitch_straighten(const GrayImage& img, const BendAnalysis& bend);

// Parallel morphological thinning (pass-pair subiterations iterated to a
// fixed point) of the binarized image; returns a 0/1-valued skeleton.
GrayImage thin(const GrayImage& img, double threshold = 10.0 / 255.0);

// Skeleton pixels with exactly one 8-neighbor.
int count_endpoints(const GrayImage& skeleton);

// Number of 8-connected foreground components (value > threshold).
int count_components(const GrayImage& img, double threshold = 0.0);

}  // namespace straightkit
