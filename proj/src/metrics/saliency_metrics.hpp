#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace gcrp {

// Evaluation works on plain grayscale buffers in [0,1], detached from the
// training tensor machinery; everything here runs in double precision.
struct GrayMap {
    int64_t h = 0, w = 0;
    std::vector<double> v;  // row-major, h*w values

    double at(int64_t r, int64_t c) const { return v[static_cast<size_t>(r * w + c)]; }
};

constexpr int kThresholdCount = 256;
constexpr double kFBetaSq = 0.3;

// Midpoint thresholds (k + 0.5) / 256: evenly spaced, never exactly 0, 0.5,
// or 1, so binarization (p >= t) is insensitive to those common values.
inline double threshold_at(int k) { return (k + 0.5) / kThresholdCount; }

// Binarization threshold an image picks for itself: twice its mean saliency.
double adaptive_threshold(const GrayMap& p);

struct PrecRecall {
    double precision = 0, recall = 0, f = 0;
};

double mae(const GrayMap& p, const GrayMap& g);
PrecRecall f_measure(const GrayMap& p, const GrayMap& g, double threshold);
double e_measure(const GrayMap& p, const GrayMap& g, double threshold);
double s_measure(const GrayMap& p, const GrayMap& g, double alpha = 0.5);

// Per-image battery: the eight scalar measures plus the 256-threshold
// precision/recall/F curves.
struct PerImageMetrics {
    double mae = 0, s = 0;
    double f_max = 0, f_mean = 0, f_adp = 0;
    double e_max = 0, e_mean = 0, e_adp = 0;
    std::array<double, kThresholdCount> precision{}, recall{}, f{};
};

PerImageMetrics evaluate_single(const GrayMap& pred, const GrayMap& gt);

// Dataset-level report: per-image metrics averaged, curves averaged per
// threshold.
struct EvalReport {
    int64_t images = 0;
    double mae = 0, s = 0;
    double f_max = 0, f_mean = 0, f_adp = 0;
    double e_max = 0, e_mean = 0, e_adp = 0;
    std::array<double, kThresholdCount> precision{}, recall{}, f{};
};

EvalReport evaluate_maps(const std::vector<GrayMap>& preds, const std::vector<GrayMap>& gts);

std::string report_kv(const EvalReport& r);
std::string report_csv(const EvalReport& r);     // header line + one data row
std::string report_curves_csv(const EvalReport& r);  // threshold,precision,recall,f

}  // namespace gcrp
