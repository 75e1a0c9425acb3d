#pragma once

#include <filesystem>
#include <string>

#include "straightkit/common.hpp"
#include "straightkit/image.hpp"

namespace testutil {

using straightkit::GrayImage;

// Solid vertical bar: rows [y0, y1], cols [x0, x1], value v.
inline GrayImage bar(int canvas, int y0, int y1, int x0, int x1, double v = 1.0) {
    GrayImage img(canvas, canvas);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) img.at(y, x) = v;
    return img;
}

inline GrayImage random_image(int w, int h, uint64_t seed) {
    GrayImage img(w, h);
    straightkit::Rng rng(seed);
    for (double& v : img.data) v = rng.uniform01();
    return img;
}

inline double max_abs_diff(const GrayImage& a, const GrayImage& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

// Unique scratch directory under the build tree.
inline std::string scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("straightkit_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace testutil
