#include "straightkit/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "straightkit/backbone.hpp"

namespace straightkit {

BandProfile band_profile(const GrayImage& img, int resample, int window) {
    const Axis raw = extract_central_axis(img);
    const Axis axis = smooth_axis(raw, window);

    // Per-row local half width from the foreground run of the raw scan.
    std::vector<double> halfw(axis.rows(), 0.0);
    for (int i = 0; i < axis.rows(); ++i) {
        const int y = axis.h1 + i;
        int w1 = -1, w2 = -1;
        for (int x = 0; x < img.width; ++x)
            if (img.at(y, x) > 0.0) {
                if (w1 < 0) w1 = x;
                w2 = x;
            }
        halfw[i] = w1 >= 0 ? (w2 - w1) / 2.0 : 1.0;
    }

    std::vector<double> values(axis.rows(), 0.0);
    for (int i = 0; i < axis.rows(); ++i) {
        // Tangent from neighboring axis rows; the cross-section is its
        // perpendicular.
        const int lo = std::max(0, i - 1), hi = std::min(axis.rows() - 1, i + 1);
        const double ty = hi - lo, tx = axis.center[hi] - axis.center[lo];
        const double norm = std::sqrt(ty * ty + tx * tx);
        const double ny = -tx / norm, nx = ty / norm;
        const double cy = axis.h1 + i, cx = axis.center[i];
        double sum = 0.0;
        int count = 0;
        // Stop 2 px short of the silhouette edge so the anti-aliased rim
        // does not bias the band level.
        const int reach = std::max(1, static_cast<int>(std::floor(halfw[i])) - 2);
        for (int d = -reach; d <= reach; ++d) {
            const double sy = cy + ny * d, sx = cx + nx * d;
            const int y0 = static_cast<int>(std::floor(sy));
            const int x0 = static_cast<int>(std::floor(sx));
            const double fy = sy - y0, fx = sx - x0;
            double acc = 0.0;
            const double wts[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
            const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
            const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
            for (int t = 0; t < 4; ++t)
                if (img.in_bounds(ys[t], xs[t])) acc += wts[t] * img.at(ys[t], xs[t]);
            if (acc > 0.0) {
                sum += acc;
                ++count;
            }
        }
        values[i] = count > 0 ? sum / count : 0.0;
    }

    // Length-normalize by linear interpolation.
    BandProfile out;
    out.samples.resize(resample);
    const int n = static_cast<int>(values.size());
    for (int i = 0; i < resample; ++i) {
        const double pos = resample > 1 ? static_cast<double>(i) * (n - 1) / (resample - 1) : 0.0;
        const int j = std::min(static_cast<int>(std::floor(pos)), n - 1);
        const int k = std::min(j + 1, n - 1);
        const double t = pos - j;
        out.samples[i] = values[j] + t * (values[k] - values[j]);
    }
    return out;
}

double profile_correlation(const BandProfile& a, const BandProfile& b) {
    if (a.length() != b.length()) throw DataError("profiles must have equal length");
    const int n = a.length();
    if (n == 0) throw DataError("empty profiles");
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < n; ++i) {
        ma += a.samples[i];
        mb += b.samples[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (int i = 0; i < n; ++i) {
        const double da = a.samples[i] - ma, db = b.samples[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 1e-18 || sbb <= 1e-18) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

namespace {

double foreground_mass(const GrayImage& img) {
    double m = 0.0;
    for (double v : img.data)
        if (v > 0.0) m += v;
    return m;
}

double mean_abs_diff_overlap(const GrayImage& a, const GrayImage& gt) {
    double sum = 0.0;
    int count = 0;
    for (size_t i = 0; i < gt.data.size() && i < a.data.size(); ++i)
        if (gt.data[i] > 0.0 && a.data[i] > 0.0) {
            sum += std::abs(a.data[i] - gt.data[i]);
            ++count;
        }
    return count > 0 ? sum / count : 1.0;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    return {mean, std::sqrt(var)};
}

}  // namespace

MetricsReport evaluate_methods(const std::vector<EvalCase>& cases) {
    if (cases.empty()) throw DataError("no evaluation cases");
    MetricsReport report;
    std::map<std::string, std::vector<double>> corr, mad, mass;
    for (const EvalCase& c : cases) {
        const BandProfile gt_profile = band_profile(c.ground_truth);
        const double gt_mass = foreground_mass(c.ground_truth);
        for (const auto& [method, out] : c.outputs) {
            CaseRecord rec;
            rec.case_name = c.name;
            rec.method = method;
            try {
                rec.correlation = profile_correlation(band_profile(out), gt_profile);
            } catch (const DataError&) {
                rec.correlation = 0.0;  // degenerate output: no extractable axis
            }
            rec.mean_abs_diff = mean_abs_diff_overlap(out, c.ground_truth);
            rec.mass_ratio = gt_mass > 0.0 ? foreground_mass(out) / gt_mass : 0.0;
            corr[method].push_back(rec.correlation);
            mad[method].push_back(rec.mean_abs_diff);
            mass[method].push_back(rec.mass_ratio);
            report.records.push_back(rec);
        }
    }
    for (const auto& [method, values] : corr) {
        MethodAggregate agg;
        agg.method = method;
        std::tie(agg.corr_mean, agg.corr_std) = mean_std(values);
        std::tie(agg.mad_mean, agg.mad_std) = mean_std(mad[method]);
        std::tie(agg.mass_mean, agg.mass_std) = mean_std(mass[method]);
        agg.cases = static_cast<int>(values.size());
        report.aggregates.push_back(agg);
    }
    std::sort(report.aggregates.begin(), report.aggregates.end(),
              [](const MethodAggregate& a, const MethodAggregate& b) {
                  return a.corr_mean > b.corr_mean;
              });
    return report;
}

std::string MetricsReport::table() const {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-16s %5s %18s %18s %18s\n", "method", "cases",
                  "correlation", "mean_abs_diff", "mass_ratio");
    out += line;
    for (const MethodAggregate& a : aggregates) {
        std::snprintf(line, sizeof(line), "%-16s %5d %9.4f +- %5.4f %9.4f +- %5.4f %9.4f +- %5.4f\n",
                      a.method.c_str(), a.cases, a.corr_mean, a.corr_std, a.mad_mean, a.mad_std,
                      a.mass_mean, a.mass_std);
        out += line;
    }
    return out;
}

std::string MetricsReport::csv() const {
    std::string out = "case,method,correlation,mean_abs_diff,mass_ratio\n";
    char line[256];
    for (const CaseRecord& r : records) {
        std::snprintf(line, sizeof(line), "%s,%s,%.6f,%.6f,%.6f\n", r.case_name.c_str(),
                      r.method.c_str(), r.correlation, r.mean_abs_diff, r.mass_ratio);
        out += line;
    }
    return out;
}

}  // namespace straightkit
