#pragma once

#include <string>
#include <vector>

#include "straightkit/image.hpp"
#include "straightkit/synthgen.hpp"

namespace straightkit {

// Longitudinal intensity signature along the smoothed central axis,
// resampled to `resample` points: at each axis row, the mean of foreground
// samples on the perpendicular cross-section within the local half width.
BandProfile band_profile(const GrayImage& img, int resample = 100, int window = 11);

// Pearson correlation; 0 when either input has (near-)zero variance.
double profile_correlation(const BandProfile& a, const BandProfile& b);

struct CaseRecord {
    std::string case_name;
    std::string method;
    double correlation = 0.0;
    double mean_abs_diff = 0.0;  // on the foreground overlap with ground truth
    double mass_ratio = 0.0;     // foreground mass vs ground truth
};

struct MethodAggregate {
    std::string method;
    double corr_mean = 0.0, corr_std = 0.0;
    double mad_mean = 0.0, mad_std = 0.0;
    double mass_mean = 0.0, mass_std = 0.0;
    int cases = 0;
};

struct MetricsReport {
    std::vector<CaseRecord> records;
    std::vector<MethodAggregate> aggregates;  // ranked by descending mean correlation

    std::string table() const;  // aligned plain text
    std::string csv() const;    // machine-readable records
};

struct EvalCase {
    std::string name;
    GrayImage ground_truth;  // straight reference
    std::vector<std::pair<std::string, GrayImage>> outputs;
};

MetricsReport evaluate_methods(const std::vector<EvalCase>& cases);

}  // namespace straightkit
