#include "straightkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "straightkit/kernels.hpp"

namespace fs = std::filesystem;

namespace straightkit {

namespace {

// Catmull-Rom weights for fractional offset t, taps at -1..2.
inline void catmull_rom(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = -0.5 * t3 + t2 - 0.5 * t;
    w[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
    w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
    w[3] = 0.5 * t3 - 0.5 * t2;
}

inline double grid_at(const std::vector<double>& g, int points, int i, int j) {
    i = std::clamp(i, 0, points - 1);
    j = std::clamp(j, 0, points - 1);
    return g[static_cast<size_t>(i) * points + j];
}

}  // namespace

void DeformField::dense(int width, int height, std::vector<double>& dy,
                        std::vector<double>& dx) const {
    dy.assign(static_cast<size_t>(width) * height, 0.0);
    dx.assign(static_cast<size_t>(width) * height, 0.0);
    const double sy = height > 1 ? static_cast<double>(points - 1) / (height - 1) : 0.0;
    const double sx = width > 1 ? static_cast<double>(points - 1) / (width - 1) : 0.0;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
        const double u = y * sy;
        const int i0 = static_cast<int>(std::floor(u));
        double wy[4];
        catmull_rom(u - i0, wy);
        for (int x = 0; x < width; ++x) {
            const double v = x * sx;
            const int j0 = static_cast<int>(std::floor(v));
            double wx[4];
            catmull_rom(v - j0, wx);
            double ay = 0.0, ax = 0.0;
            for (int di = -1; di <= 2; ++di)
                for (int dj = -1; dj <= 2; ++dj) {
                    const double w = wy[di + 1] * wx[dj + 1];
                    ay += w * grid_at(grid_dy, points, i0 + di, j0 + dj);
                    ax += w * grid_at(grid_dx, points, i0 + di, j0 + dj);
                }
            dy[static_cast<size_t>(y) * width + x] = ay;
            dx[static_cast<size_t>(y) * width + x] = ax;
        }
    }
}

DeformField sample_deform_field(int points, double sigma, uint64_t seed) {
    if (points < 2) throw DataError("deformation grid needs points >= 2");
    DeformField f;
    f.points = points;
    f.sigma = sigma;
    f.grid_dy.resize(static_cast<size_t>(points) * points);
    f.grid_dx.resize(f.grid_dy.size());
    Rng rng(seed);
    for (double& v : f.grid_dy) v = rng.normal(0.0, sigma);
    for (double& v : f.grid_dx) v = rng.normal(0.0, sigma);
    return f;
}

std::pair<GrayImage, GrayImage> elastic_deform_pair(const GrayImage& y, const GrayImage& x,
                                                    int points, double sigma, uint64_t seed) {
    if (y.width != x.width || y.height != x.height) throw DataError("pair dimension mismatch");
    const DeformField field = sample_deform_field(points, sigma, seed);
    std::vector<double> dy, dx;
    field.dense(y.width, y.height, dy, dx);
    // Backward mapping: output pixel p samples input at p + field(p).
    std::vector<double> map_y(dy.size()), map_x(dx.size());
    for (int r = 0; r < y.height; ++r)
        for (int c = 0; c < y.width; ++c) {
            const size_t i = static_cast<size_t>(r) * y.width + c;
            map_y[i] = r + dy[i];
            map_x[i] = c + dx[i];
        }
    GrayImage wy(y.width, y.height), wx(x.width, x.height);
    kernels::warp_bilinear(y, map_y, map_x, wy);
    kernels::warp_nearest(x, map_y, map_x, wx);
    return {wy, wx};
}

std::pair<GrayImage, GrayImage> rotate_pair(const GrayImage& y, const GrayImage& x,
                                            double angle_deg) {
    if (y.width != x.width || y.height != x.height) throw DataError("pair dimension mismatch");
    const double rad = angle_deg * 3.14159265358979323846 / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const double cy = (y.height - 1) / 2.0, cx = (y.width - 1) / 2.0;
    std::vector<double> map_y(y.size()), map_x(y.size());
    for (int r = 0; r < y.height; ++r)
        for (int col = 0; col < y.width; ++col) {
            const size_t i = static_cast<size_t>(r) * y.width + col;
            const double py = r - cy, px = col - cx;
            map_y[i] = cy + c * py - s * px;
            map_x[i] = cx + s * py + c * px;
        }
    GrayImage wy(y.width, y.height), wx(x.width, x.height);
    kernels::warp_bilinear(y, map_y, map_x, wy);
    kernels::warp_nearest(x, map_y, map_x, wx);
    return {wy, wx};
}

AugmentedDataset build_augmented_dataset(const GrayImage& y, const GrayImage& x, int k,
                                         uint64_t seed, int points, double sigma,
                                         double angle_range) {
    if (y.width != x.width || y.height != x.height) throw DataError("pair dimension mismatch");
    if (k < 10) throw DataError("dataset size must be >= 10 for a 9:1 split");

    AugmentedDataset ds;
    ds.seed = seed;
    ds.points = points;
    ds.sigma = sigma;
    ds.angle_range = angle_range;
    ds.pairs.resize(k);

#pragma omp parallel for schedule(static)
    for (int i = 0; i < k; ++i) {
        Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
        const double angle = rng.uniform(-angle_range, angle_range);
        const uint64_t dseed = rng.next_u64();
        auto [ry, rx] = rotate_pair(y, x, angle);
        auto [ey, ex] = elastic_deform_pair(ry, rx, points, sigma, dseed);
        ds.pairs[i] = TrainingPair{std::move(ex), std::move(ey), angle, dseed};
    }

    // Seeded shuffle for the 9:1 split; index k tags the split stream so it
    // cannot collide with any per-item stream.
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, static_cast<uint64_t>(k)));
    for (int i = k - 1; i > 0; --i)
        std::swap(idx[i], idx[static_cast<size_t>(rng.below(static_cast<uint64_t>(i) + 1))]);
    const int n_val = k / 10;
    ds.val_indices.assign(idx.begin(), idx.begin() + n_val);
    ds.train_indices.assign(idx.begin() + n_val, idx.end());
    std::sort(ds.val_indices.begin(), ds.val_indices.end());
    std::sort(ds.train_indices.begin(), ds.train_indices.end());
    return ds;
}

uint64_t AugmentedDataset::content_hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const TrainingPair& p : pairs) {
        const auto bx = to_bytes(p.x);
        const auto by = to_bytes(p.y);
        h = fnv1a(bx.data(), bx.size(), h);
        h = fnv1a(by.data(), by.size(), h);
    }
    return h;
}

namespace {

std::string index_list(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<int> parse_index_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoi(tok));
    return out;
}

}  // namespace

void save_dataset(const AugmentedDataset& ds, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "pairs");
    char name[64];
    for (size_t i = 0; i < ds.pairs.size(); ++i) {
        std::snprintf(name, sizeof(name), "%04zu", i);
        save_image(ds.pairs[i].x, (fs::path(dir) / "pairs" / (std::string(name) + "_x.png")).string());
        save_image(ds.pairs[i].y, (fs::path(dir) / "pairs" / (std::string(name) + "_y.png")).string());
    }
    std::ofstream m(fs::path(dir) / "manifest.txt");
    if (!m) throw DataError("cannot write manifest in " + dir);
    m << "k=" << ds.pairs.size() << "\n";
    m << "seed=" << ds.seed << "\n";
    m << "points=" << ds.points << "\n";
    m << "sigma=" << ds.sigma << "\n";
    m << "angle_range=" << ds.angle_range << "\n";
    m << "order=rotate_then_deform\n";
    m << "content_hash=" << ds.content_hash() << "\n";
    m << "train_indices=" << index_list(ds.train_indices) << "\n";
    m << "val_indices=" << index_list(ds.val_indices) << "\n";
}

AugmentedDataset load_dataset(const std::string& dir) {
    std::ifstream m(fs::path(dir) / "manifest.txt");
    if (!m) throw DataError("no manifest.txt in " + dir);
    AugmentedDataset ds;
    size_t k = 0;
    std::string line;
    while (std::getline(m, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "k") k = std::stoull(val);
        else if (key == "seed") ds.seed = std::stoull(val);
        else if (key == "points") ds.points = std::stoi(val);
        else if (key == "sigma") ds.sigma = std::stod(val);
        else if (key == "angle_range") ds.angle_range = std::stod(val);
        else if (key == "train_indices") ds.train_indices = parse_index_list(val);
        else if (key == "val_indices") ds.val_indices = parse_index_list(val);
    }
    if (k == 0) throw DataError("manifest missing k in " + dir);
    ds.pairs.resize(k);
    char name[64];
    for (size_t i = 0; i < k; ++i) {
        std::snprintf(name, sizeof(name), "%04zu", i);
        ds.pairs[i].x = load_image((fs::path(dir) / "pairs" / (std::string(name) + "_x.png")).string());
        ds.pairs[i].y = load_image((fs::path(dir) / "pairs" / (std::string(name) + "_y.png")).string());
    }
    return ds;
}

}  // namespace straightkit
