#pragma once

#include <cstdint>
#include <vector>

#include "straightkit/image.hpp"

namespace straightkit {

// Ground-truth longitudinal intensity pattern, values in [0, 1].
struct BandProfile {
    std::vector<double> samples;

    int length() const { return static_cast<int>(samples.size()); }
};

// Arc-length parameterized curve the straight body is bent along.
// Samples are (y, x) at ~unit arc spacing with strictly increasing y.
struct Spine {
    std::vector<std::pair<double, double>> samples;
    double arc_length = 0.0;
};

// Alternating light/dark bands with smooth transitions and slight seeded
// level jitter; length must be >= 22.
BandProfile make_band_profile(int length, int band_period, uint64_t seed, double lo = 0.3,
                              double hi = 0.85);

// Smooth taper, widest at the center: 25 px at the centromere to 17 px at
// the ends for a 256 canvas, scaled by width_scale.
std::vector<double> default_width_profile(int length, double width_scale = 1.0);

// Vertical chromosome centered on the canvas: body row r carries
// profile.samples[r] across width_profile[r] columns with a 2 px lateral
// edge ramp.
GrayImage make_straight_chromosome(const BandProfile& profile,
                                   const std::vector<double>& width_profile, int canvas);

// Cubic Bezier spine resampled by arc length. `bends` is 1 (C shape) or
// 2 (S shape); `curvature` is the lateral control-point offset in pixels.
Spine make_bezier_spine(int canvas, double length, double curvature, int bends);

// Exactly vertical spine (for identity checks).
Spine make_vertical_spine(int canvas, double length);

// Bends the straight chromosome along the spine: output pixels project
// onto the spine polyline and sample the straight body at (arc position,
// signed lateral offset) with bilinear interpolation.
GrayImage bend_along_spine(const GrayImage& img, const Spine& spine);

// One ready-made oracle case: straight ground truth, bent version, and the
// generating profile.
struct SynthCase {
    GrayImage straight;
    GrayImage bent;
    BandProfile profile;
};

SynthCase make_synth_case(int canvas, double length, double curvature, int bends, uint64_t seed);

}  // namespace straightkit
