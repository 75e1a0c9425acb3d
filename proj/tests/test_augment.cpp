#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "straightkit/augment.hpp"
#include "straightkit/backbone.hpp"
#include "straightkit/kernels.hpp"

using namespace straightkit;

namespace {

// Independent dense-field oracle: direct tensor-product Catmull-Rom sum of
// the same (clamped) control grid, evaluated without any shared helper.
double bicubic_oracle(const std::vector<double>& grid, int points, double u, double v) {
    auto node = [&](int i, int j) {
        i = std::min(std::max(i, 0), points - 1);
        j = std::min(std::max(j, 0), points - 1);
        return grid[static_cast<size_t>(i) * points + j];
    };
    auto weight = [](double t, int tap) {
        switch (tap) {
            case -1: return ((-0.5 * t + 1.0) * t - 0.5) * t;
            case 0: return (1.5 * t - 2.5) * t * t + 1.0;
            case 1: return ((-1.5 * t + 2.0) * t + 0.5) * t;
            default: return (0.5 * t - 0.5) * t * t;
        }
    };
    const int i0 = static_cast<int>(std::floor(u));
    const int j0 = static_cast<int>(std::floor(v));
    double acc = 0.0;
    for (int a = -1; a <= 2; ++a)
        for (int b = -1; b <= 2; ++b)
            acc += weight(u - i0, a) * weight(v - j0, b) * node(i0 + a, j0 + b);
    return acc;
}

GrayImage checkerboard(int size, int cell) {
    GrayImage img(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) img.at(y, x) = ((y / cell + x / cell) % 2) ? 0.9 : 0.1;
    return img;
}

std::pair<double, double> centroid(const GrayImage& img) {
    double sy = 0, sx = 0, m = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            sy += y * img.at(y, x);
            sx += x * img.at(y, x);
            m += img.at(y, x);
        }
    return {sy / m, sx / m};
}

}  // namespace

TEST_CASE("sigma zero leaves both images unchanged") {
    GrayImage y = testutil::random_image(48, 48, 1);
    GrayImage x = testutil::random_image(48, 48, 2);
    auto [wy, wx] = elastic_deform_pair(y, x, 3, 0.0, 42);
    CHECK(testutil::max_abs_diff(y, wy) < 1e-12);
    CHECK(x.data == wx.data);
}

TEST_CASE("a constant (0,5) field shifts content five pixels left") {
    GrayImage y(32, 32);
    for (int r = 0; r < 32; ++r) y.at(r, 20) = 1.0;
    DeformField f;
    f.points = 3;
    f.grid_dy.assign(9, 0.0);
    f.grid_dx.assign(9, 5.0);
    std::vector<double> dy, dx;
    f.dense(32, 32, dy, dx);
    for (double v : dx) CHECK(v == doctest::Approx(5.0).epsilon(1e-12));
    for (double v : dy) CHECK(v == doctest::Approx(0.0));
    // Backward mapping: out(r, c) = in(r, c + 5), so the column lands at 15.
    std::vector<double> my(y.size()), mx(y.size());
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) {
            my[r * 32 + c] = r + dy[r * 32 + c];
            mx[r * 32 + c] = c + dx[r * 32 + c];
        }
    GrayImage out(32, 32);
    kernels::warp_nearest(y, my, mx, out);
    for (int r = 0; r < 32; ++r) {
        CHECK(out.at(r, 15) == 1.0);
        CHECK(out.at(r, 20) == 0.0);
    }
}

TEST_CASE("dense field matches the independent bicubic oracle elementwise") {
    const int size = 64;
    DeformField f = sample_deform_field(3, 18.0, 777);
    std::vector<double> dy, dx;
    f.dense(size, size, dy, dx);
    const double scale = static_cast<double>(f.points - 1) / (size - 1);
    double worst = 0.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double u = y * scale, v = x * scale;
            worst = std::max(worst, std::abs(dy[y * size + x] - bicubic_oracle(f.grid_dy, 3, u, v)));
            worst = std::max(worst, std::abs(dx[y * size + x] - bicubic_oracle(f.grid_dx, 3, u, v)));
        }
    CHECK(worst <= 1e-9);

    // Deformed checkerboards through both field paths agree pixel for pixel.
    GrayImage board = checkerboard(size, 8);
    std::vector<double> my(board.size()), mx(board.size());
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const size_t i = static_cast<size_t>(y) * size + x;
            my[i] = y + bicubic_oracle(f.grid_dy, 3, y * scale, x * scale);
            mx[i] = x + bicubic_oracle(f.grid_dx, 3, y * scale, x * scale);
        }
    GrayImage via_oracle(size, size);
    kernels::warp_bilinear(board, my, mx, via_oracle);
    auto [wy, wx] = elastic_deform_pair(board, board, 3, 18.0, 777);
    CHECK(testutil::max_abs_diff(wy, via_oracle) <= 1e-9);
}

TEST_CASE("field interpolates the control grid at the node positions") {
    const int size = 65;  // nodes at 0, 32, 64
    DeformField f = sample_deform_field(3, 10.0, 5);
    std::vector<double> dy, dx;
    f.dense(size, size, dy, dx);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const int y = i * 32, x = j * 32;
            CHECK(dy[y * size + x] == doctest::Approx(f.grid_dy[i * 3 + j]).epsilon(1e-9));
            CHECK(dx[y * size + x] == doctest::Approx(f.grid_dx[i * 3 + j]).epsilon(1e-9));
        }
}

TEST_CASE("deformation rejects bad inputs") {
    GrayImage a(16, 16), b(16, 17);
    CHECK_THROWS_AS(elastic_deform_pair(a, b, 3, 18.0, 1), DataError);
    GrayImage c(16, 16);
    CHECK_THROWS_AS(elastic_deform_pair(a, c, 1, 18.0, 1), DataError);
}

TEST_CASE("zero-angle rotation is the identity") {
    GrayImage y = testutil::random_image(32, 32, 9);
    auto [wy, wx] = rotate_pair(y, y, 0.0);
    CHECK(testutil::max_abs_diff(y, wy) < 1e-12);
    CHECK(y.data == wx.data);
}

TEST_CASE("a 45-degree rotation maps the horizontal center line onto a diagonal") {
    const int n = 65;
    GrayImage y(n, n);
    for (int x = 0; x < n; ++x) y.at(32, x) = 1.0;
    auto [wy, wx] = rotate_pair(y, y, 45.0);
    // Every bright output pixel lies within 1 px of a diagonal through the center.
    int bright = 0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (wx.at(r, c) > 0.5) {
                ++bright;
                CHECK(std::abs(std::abs(r - 32.0) - std::abs(c - 32.0)) <= 1.0 + 1e-9);
            }
    CHECK(bright > 30);
}

TEST_CASE("nearest-neighbor rotation preserves the label set") {
    GrayImage x(64, 64);
    for (int k = 1; k <= 9; ++k)
        for (int y = k * 6; y < k * 6 + 6; ++y)
            for (int c = 20; c < 44; ++c) x.at(y, c) = stick_value(k);
    auto [wy, wx] = rotate_pair(x, x, 33.0);
    std::set<double> allowed{0.0};
    for (int k = 1; k <= 9; ++k) allowed.insert(stick_value(k));
    for (double v : wx.data) CHECK(allowed.count(v) == 1);
}

TEST_CASE("dataset build is deterministic and splits 9:1") {
    GrayImage y = testutil::random_image(48, 48, 21);
    GrayImage x = testutil::bar(48, 8, 40, 20, 28, stick_value(3));
    AugmentedDataset a = build_augmented_dataset(y, x, 50, 1234, 3, 4.0, 45.0);
    AugmentedDataset b = build_augmented_dataset(y, x, 50, 1234, 3, 4.0, 45.0);
    CHECK(a.content_hash() == b.content_hash());
    CHECK(a.train_indices.size() == 45);
    CHECK(a.val_indices.size() == 5);
    for (size_t i = 0; i < a.pairs.size(); ++i) {
        CHECK(a.pairs[i].x.data == b.pairs[i].x.data);
        CHECK(a.pairs[i].y.data == b.pairs[i].y.data);
    }
    // train and validation indices are disjoint and cover everything
    std::set<int> all(a.train_indices.begin(), a.train_indices.end());
    for (int i : a.val_indices) CHECK(all.insert(i).second);
    CHECK(all.size() == 50);

    AugmentedDataset c = build_augmented_dataset(y, x, 50, 999, 3, 4.0, 45.0);
    CHECK(a.content_hash() != c.content_hash());
}

TEST_CASE("k below ten is rejected") {
    GrayImage y(32, 32), x(32, 32);
    CHECK_THROWS_AS(build_augmented_dataset(y, x, 9, 1, 3, 18.0, 45.0), DataError);
}

TEST_CASE("degenerate augmentation reproduces the source pair exactly") {
    GrayImage y = testutil::random_image(32, 32, 33);
    GrayImage x = testutil::bar(32, 4, 28, 12, 18, stick_value(5));
    AugmentedDataset ds = build_augmented_dataset(y, x, 10, 7, 3, 0.0, 0.0);
    for (const TrainingPair& p : ds.pairs) {
        CHECK(testutil::max_abs_diff(p.y, y) < 1e-12);
        CHECK(p.x.data == x.data);
    }
}

TEST_CASE("label closure holds across the whole augmented set") {
    GrayImage y = testutil::random_image(48, 48, 2);
    GrayImage x(48, 48);
    for (int k = 1; k <= 9; ++k)
        for (int r = 4 + 4 * k; r < 8 + 4 * k; ++r)
            for (int c = 18; c < 30; ++c) x.at(r, c) = stick_value(k);
    AugmentedDataset ds = build_augmented_dataset(y, x, 12, 5, 3, 5.0, 45.0);
    std::set<double> allowed{0.0};
    for (int k = 1; k <= 9; ++k) allowed.insert(stick_value(k));
    for (const TrainingPair& p : ds.pairs)
        for (double v : p.x.data) CHECK(allowed.count(v) == 1);
}

TEST_CASE("both warp paths move a marker pixel to the same place") {
    const int size = 64;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        GrayImage marker(size, size);
        marker.at(40, 28) = 1.0;
        Rng rng(derive_seed(91, seed));
        const double angle = rng.uniform(-45.0, 45.0);
        const uint64_t dseed = rng.next_u64();
        auto [ry, rx] = rotate_pair(marker, marker, angle);
        auto [ey, ex] = elastic_deform_pair(ry, rx, 3, 4.5, dseed);
        // bilinear path: centroid of the blurred marker; nearest path: argmax
        if (ex.data == std::vector<double>(ex.data.size(), 0.0)) continue;  // warped out
        auto [cy, cx] = centroid(ey);
        int best_y = 0, best_x = 0;
        double best = -1.0;
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                if (ex.at(y, x) > best) {
                    best = ex.at(y, x);
                    best_y = y;
                    best_x = x;
                }
        CHECK(std::hypot(cy - best_y, cx - best_x) <= 1.0);
    }
}

TEST_CASE("dataset save/load round trips pixels and split") {
    GrayImage y = testutil::random_image(32, 32, 3);
    GrayImage x = testutil::bar(32, 4, 28, 12, 18, stick_value(2));
    AugmentedDataset ds = build_augmented_dataset(y, x, 12, 77, 3, 3.0, 30.0);
    const std::string dir = testutil::scratch_dir("ds");
    save_dataset(ds, dir);
    AugmentedDataset back = load_dataset(dir);
    REQUIRE(back.pairs.size() == ds.pairs.size());
    CHECK(back.train_indices == ds.train_indices);
    CHECK(back.val_indices == ds.val_indices);
    for (size_t i = 0; i < ds.pairs.size(); ++i) {
        CHECK(testutil::max_abs_diff(back.pairs[i].y, ds.pairs[i].y) <= 1.0 / 255.0);
        CHECK(testutil::max_abs_diff(back.pairs[i].x, ds.pairs[i].x) <= 1.0 / 255.0);
    }
}
