#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "straightkit/common.hpp"

namespace straightkit {

// Single-channel raster with intensities in [0, 1], row-major.
// The universal currency of the pipeline; 8-bit only at file boundaries.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    double& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    bool in_bounds(int y, int x) const { return y >= 0 && y < height && x >= 0 && x < width; }
    size_t size() const { return data.size(); }
};

// Normalized intensities in [-1, 1]: v' = (v - 0.5) / 0.5.
struct ModelImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;
};

// Quantization helpers shared with data-set hashing and PNG/PGM output.
inline uint8_t quantize8(double v) {
    double q = v * 255.0 + 0.5;
    if (q < 0.0) q = 0.0;
    if (q > 255.0) q = 255.0;
    return static_cast<uint8_t>(q);
}

std::vector<uint8_t> to_bytes(const GrayImage& img);

// Loads an 8-bit grayscale PNG or binary PGM (P5); the format is detected
// from the file's magic bytes. Multi-channel PNGs are collapsed by
// averaging channels. Values are scaled to [0,1]; if `invert`, v <- 1-v.
// If canvas > 0 the image is centered on a canvas x canvas black background
// (offsets floor((canvas-dim)/2)); it is an error if either dimension
// exceeds the canvas.
GrayImage load_image(const std::string& path, bool invert = false, int canvas = 0);

// Writes 8-bit single-channel PNG or PGM depending on the file extension
// (".pgm" -> binary P5 with maxval 255, anything else -> PNG).
void save_image(const GrayImage& img, const std::string& path);

GrayImage invert(const GrayImage& img);

// Centers `img` on an s x s zero canvas; error if it does not fit.
GrayImage center_on_canvas(const GrayImage& img, int s);

ModelImage to_model_range(const GrayImage& img);
GrayImage from_model_range(const ModelImage& m);

}  // namespace straightkit
