#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "straightkit/common.hpp"
#include "straightkit/image.hpp"

namespace straightkit {

// Coarse grid of Gaussian displacements and its dense bicubic
// interpolation. Displacements are (dy, dx) in pixels; the dense field is
// evaluated lazily per image size.
struct DeformField {
    int points = 3;
    double sigma = 18.0;
    std::vector<double> grid_dy;  // points x points, row-major
    std::vector<double> grid_dx;

    // Dense per-pixel displacement by bicubic (Catmull-Rom) interpolation
    // of the control grid, whose nodes sit at equally spaced positions
    // covering the image (corners included).
    void dense(int width, int height, std::vector<double>& dy, std::vector<double>& dx) const;
};

DeformField sample_deform_field(int points, double sigma, uint64_t seed);

struct TrainingPair {
    GrayImage x;  // backbone stick figure (condition)
    GrayImage y;  // chromosome (target)
    double angle_deg = 0.0;
    uint64_t deform_seed = 0;
};

struct AugmentedDataset {
    std::vector<TrainingPair> pairs;
    std::vector<int> train_indices;
    std::vector<int> val_indices;
    uint64_t seed = 0;
    int points = 3;
    double sigma = 18.0;
    double angle_range = 45.0;

    // FNV-1a over the 8-bit quantization of every pair, in index order.
    uint64_t content_hash() const;
};

// Warps chromosome (bilinear) and backbone (nearest-neighbor) through one
// shared dense field sampled from `seed`; backward mapping, zero fill.
std::pair<GrayImage, GrayImage> elastic_deform_pair(const GrayImage& y, const GrayImage& x,
                                                    int points, double sigma, uint64_t seed);

// Same geometric rotation about the canvas center for both images;
// chromosome bilinear, backbone nearest-neighbor.
std::pair<GrayImage, GrayImage> rotate_pair(const GrayImage& y, const GrayImage& x,
                                            double angle_deg);

// K pairs from one source pair: per item, rotation (uniform in
// [-angle_range, angle_range]) followed by elastic deformation, both from
// the per-item stream derive_seed(seed, i). Split is a seeded 9:1 shuffle.
// Items are generated in parallel; the result is independent of thread
// count.
AugmentedDataset build_augmented_dataset(const GrayImage& y, const GrayImage& x, int k,
                                         uint64_t seed, int points = 3, double sigma = 18.0,
                                         double angle_range = 45.0);

// Directory layout: pairs/{i:04}_x.png, pairs/{i:04}_y.png + manifest.txt.
void save_dataset(const AugmentedDataset& ds, const std::string& dir);
AugmentedDataset load_dataset(const std::string& dir);

}  // namespace straightkit
