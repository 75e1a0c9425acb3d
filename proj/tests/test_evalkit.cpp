#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "straightkit/evalkit.hpp"

using namespace straightkit;

namespace {

BandProfile from_values(std::vector<double> v) {
    BandProfile p;
    p.samples = std::move(v);
    return p;
}

// Direct covariance-formula oracle.
double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    const int n = static_cast<int>(a.size());
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n; ++i) {
        sa += a[i];
        sb += b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
        sab += a[i] * b[i];
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double va = saa / n - (sa / n) * (sa / n);
    const double vb = sbb / n - (sb / n) * (sb / n);
    return cov / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("a uniform chromosome yields a near-constant profile") {
    BandProfile flat;
    flat.samples.assign(80, 0.7);
    GrayImage img = make_straight_chromosome(flat, std::vector<double>(80, 19.0), 160);
    BandProfile p = band_profile(img);
    double mean = 0.0;
    for (double v : p.samples) mean += v;
    mean /= p.samples.size();
    double var = 0.0;
    for (double v : p.samples) var += (v - mean) * (v - mean);
    CHECK(std::sqrt(var / p.samples.size()) < 0.02);
}

TEST_CASE("band profile propagates backbone errors on blank input") {
    GrayImage blank(64, 64);
    CHECK_THROWS_AS(band_profile(blank), DataError);
}

TEST_CASE("band profile is invariant under horizontal translation") {
    BandProfile bands = make_band_profile(70, 12, 3);
    GrayImage img = make_straight_chromosome(bands, default_width_profile(70, 0.8), 160);
    GrayImage shifted(160, 160);
    for (int y = 0; y < 160; ++y)
        for (int x = 0; x < 130; ++x) shifted.at(y, x + 25) = img.at(y, x);
    CHECK(profile_correlation(band_profile(img), band_profile(shifted)) > 0.99);
}

TEST_CASE("identical and negated profiles hit the correlation extremes") {
    BandProfile a = from_values({0.1, 0.6, 0.3, 0.9, 0.2, 0.8});
    CHECK(profile_correlation(a, a) == doctest::Approx(1.0));
    std::vector<double> neg;
    for (double v : a.samples) neg.push_back(1.0 - v);
    CHECK(profile_correlation(a, from_values(neg)) == doctest::Approx(-1.0));
}

TEST_CASE("zero-variance profiles correlate to zero") {
    BandProfile flat = from_values(std::vector<double>(10, 0.5));
    BandProfile other = from_values({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
    CHECK(profile_correlation(flat, other) == 0.0);
    CHECK(profile_correlation(other, flat) == 0.0);
}

TEST_CASE("correlation matches the covariance oracle on random vectors") {
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> a(50), b(50);
        for (int i = 0; i < 50; ++i) {
            a[i] = rng.uniform01();
            b[i] = rng.uniform01();
        }
        CHECK(std::abs(profile_correlation(from_values(a), from_values(b)) -
                       pearson_oracle(a, b)) < 1e-9);
    }
}

TEST_CASE("correlation is symmetric and invariant under positive affine maps") {
    Rng rng(13);
    std::vector<double> a(40), b(40);
    for (int i = 0; i < 40; ++i) {
        a[i] = rng.uniform01();
        b[i] = rng.uniform01();
    }
    const double ab = profile_correlation(from_values(a), from_values(b));
    CHECK(profile_correlation(from_values(b), from_values(a)) == doctest::Approx(ab).epsilon(1e-12));
    std::vector<double> a2;
    for (double v : a) a2.push_back(0.3 * v + 0.17);
    CHECK(std::abs(profile_correlation(from_values(a2), from_values(b)) - ab) < 1e-9);
}

TEST_CASE("profiles of mismatched length are rejected") {
    CHECK_THROWS_AS(profile_correlation(from_values({1, 2, 3}), from_values({1, 2})), DataError);
}

TEST_CASE("evaluation of a perfect method reports correlation one and zero error") {
    SynthCase c = make_synth_case(96, 60, 10.0, 1, 5);
    EvalCase ec{"case0", c.straight, {{"perfect", c.straight}}};
    MetricsReport rep = evaluate_methods({ec});
    REQUIRE(rep.aggregates.size() == 1);
    CHECK(rep.aggregates[0].corr_mean == doctest::Approx(1.0));
    CHECK(rep.aggregates[0].mad_mean == doctest::Approx(0.0));
    CHECK(rep.aggregates[0].mass_mean == doctest::Approx(1.0));
}

TEST_CASE("one case with two methods yields two aggregate rows") {
    SynthCase c = make_synth_case(96, 60, 10.0, 1, 6);
    EvalCase ec{"case0", c.straight, {{"a", c.straight}, {"b", c.bent}}};
    MetricsReport rep = evaluate_methods({ec});
    CHECK(rep.aggregates.size() == 2);
    CHECK(rep.records.size() == 2);
    CHECK(rep.aggregates[0].corr_mean >= rep.aggregates[1].corr_mean);
}

TEST_CASE("aggregates equal a brute-force recomputation from the records") {
    std::vector<EvalCase> cases;
    for (uint64_t s = 1; s <= 4; ++s) {
        SynthCase c = make_synth_case(96, 58, 8.0 + 2.0 * s, 1, s);
        cases.push_back({"case" + std::to_string(s), c.straight, {{"bent", c.bent}}});
    }
    MetricsReport rep = evaluate_methods(cases);
    REQUIRE(rep.aggregates.size() == 1);
    double mean = 0.0;
    for (const auto& r : rep.records) mean += r.correlation;
    mean /= rep.records.size();
    double var = 0.0;
    for (const auto& r : rep.records) var += (r.correlation - mean) * (r.correlation - mean);
    var /= rep.records.size();
    CHECK(rep.aggregates[0].corr_mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(rep.aggregates[0].corr_std == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
}

TEST_CASE("empty case lists are rejected") {
    CHECK_THROWS_AS(evaluate_methods({}), DataError);
}

TEST_CASE("report renders a table and csv") {
    SynthCase c = make_synth_case(96, 60, 10.0, 1, 9);
    MetricsReport rep = evaluate_methods({{"x", c.straight, {{"m", c.straight}}}});
    CHECK(rep.table().find("method") != std::string::npos);
    CHECK(rep.csv().find("case,method,correlation") == 0);
    CHECK(rep.csv().find("x,m,") != std::string::npos);
}
