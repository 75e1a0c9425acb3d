#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "straightkit/evalkit.hpp"
#include "straightkit/synthgen.hpp"

using namespace straightkit;

namespace {

double mass(const GrayImage& img) {
    double m = 0.0;
    for (double v : img.data) m += v;
    return m;
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

TEST_CASE("a constant-profile chromosome has the documented bounding box") {
    BandProfile p;
    p.samples.assign(100, 0.8);
    GrayImage img = make_straight_chromosome(p, std::vector<double>(100, 21.0), 256);
    int min_y = 256, max_y = -1, min_x = 256, max_x = -1;
    for (int y = 0; y < 256; ++y)
        for (int x = 0; x < 256; ++x)
            if (img.at(y, x) > 0) {
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
            }
    CHECK(max_y - min_y + 1 == 100);
    CHECK(max_x - min_x + 1 == 21);
    // interior value (inside the 2 px ramp) is exactly 0.8
    CHECK(img.at((min_y + max_y) / 2, (min_x + max_x) / 2) == doctest::Approx(0.8));
}

TEST_CASE("short profiles are rejected") {
    BandProfile p;
    p.samples.assign(10, 0.5);
    CHECK_THROWS_AS(make_straight_chromosome(p, std::vector<double>(10, 15.0), 64), DataError);
    CHECK_THROWS_AS(make_band_profile(10, 5, 1), DataError);
}

TEST_CASE("profiles that do not fit the canvas are rejected") {
    BandProfile p;
    p.samples.assign(100, 0.5);
    CHECK_THROWS_AS(make_straight_chromosome(p, std::vector<double>(100, 15.0), 64), DataError);
}

TEST_CASE("band profile recovery: two-level square wave within tolerance") {
    BandProfile p;
    p.samples.resize(60);
    for (int i = 0; i < 60; ++i) p.samples[i] = (i / 10) % 2 ? 0.3 : 0.9;
    GrayImage img = make_straight_chromosome(p, std::vector<double>(60, 17.0), 128);
    BandProfile rec = band_profile(img, 60);
    int mismatches = 0;
    for (int i = 2; i < 58; ++i) {
        const double expect = (i / 10) % 2 ? 0.3 : 0.9;
        if (std::abs(rec.samples[i] - expect) > 0.05) ++mismatches;
    }
    // transitions blur over ~2 rows per edge; the plateaus must be exact
    CHECK(mismatches <= 12);
}

TEST_CASE("a vertical spine bends the chromosome onto itself") {
    SynthCase c = make_synth_case(96, 60, 10.0, 1, 3);
    Spine vertical = make_vertical_spine(96, 62.0);
    GrayImage bent = bend_along_spine(c.straight, vertical);
    CHECK(testutil::max_abs_diff(bent, c.straight) <= 0.02);
}

TEST_CASE("a curved spine shifts the centroid off the vertical centerline") {
    BandProfile p = make_band_profile(60, 10, 5);
    GrayImage straight = make_straight_chromosome(p, default_width_profile(60, 0.75), 128);
    Spine arc = make_bezier_spine(128, 66.0, 30.0, 1);
    GrayImage bent = bend_along_spine(straight, arc);
    auto [sy, sx] = centroid(straight);
    auto [by, bx] = centroid(bent);
    CHECK(std::abs(bx - sx) > 10.0);
    (void)sy;
    (void)by;
}

TEST_CASE("bending preserves foreground mass within five percent") {
    for (int bends : {1, 2}) {
        SynthCase c = make_synth_case(96, 56, 12.0, bends, 7);
        CHECK(mass(c.bent) == doctest::Approx(mass(c.straight)).epsilon(0.05));
    }
}

TEST_CASE("a spine shorter than the body is rejected") {
    BandProfile p = make_band_profile(60, 10, 5);
    GrayImage straight = make_straight_chromosome(p, default_width_profile(60, 0.75), 128);
    Spine tiny = make_vertical_spine(128, 30.0);
    CHECK_THROWS_AS(bend_along_spine(straight, tiny), DataError);
}

TEST_CASE("generated cases satisfy the backbone preconditions") {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        SynthCase c = make_synth_case(64, 44, 9.0, seed % 2 ? 1 : 2, seed);
        int fg_rows = 0;
        for (int y = 0; y < 64; ++y) {
            bool any = false;
            for (int x = 0; x < 64; ++x) any |= c.bent.at(y, x) > 0;
            fg_rows += any;
        }
        CHECK(fg_rows >= 22);
        for (double v : c.bent.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("spine samples have strictly increasing y and continuous x") {
    Spine s = make_bezier_spine(128, 70.0, 25.0, 2);
    for (size_t i = 1; i < s.samples.size(); ++i) {
        CHECK(s.samples[i].first > s.samples[i - 1].first);
        CHECK(std::abs(s.samples[i].second - s.samples[i - 1].second) <= 2.0);
    }
    CHECK(s.arc_length >= 70.0);
}
