#include "metrics/saliency_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "support/errors.hpp"
#include "support/parallel.hpp"

namespace gcrp {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_pair(const GrayMap& p, const GrayMap& g) {
    if (p.h != g.h || p.w != g.w || p.h <= 0 || p.w <= 0) {
        throw ValidationError("metric maps must share positive dims");
    }
    if (p.v.size() != static_cast<size_t>(p.h * p.w) ||
        g.v.size() != static_cast<size_t>(g.h * g.w)) {
        throw ValidationError("metric map buffer size mismatch");
    }
}

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double f_from_counts(int64_t tp, int64_t fp, int64_t fn, int64_t npos, PrecRecall* pr) {
    // Empty-vs-empty counts as perfect; any disagreement with an empty side
    // scores zero. Pinned conventions for degenerate maps.
    if (npos == 0) {
        const bool mask_empty = (tp + fp) == 0;
        if (pr) pr->precision = pr->recall = mask_empty ? 1.0 : 0.0;
        return mask_empty ? 1.0 : 0.0;
    }
    if (tp + fp == 0 || tp == 0) {
        if (pr) pr->precision = pr->recall = 0.0;
        return 0.0;
    }
    const double prec = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double rec = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (pr) {
        pr->precision = prec;
        pr->recall = rec;
    }
    return (1.0 + kFBetaSq) * prec * rec / (kFBetaSq * prec + rec);
}

// Enhanced-alignment score from confusion counts. With both maps binary the
// alignment matrix takes one value per confusion cell, so the pixel sum
// collapses to four terms. The reference normalization divides by N-1, which
// nudges a perfect map above 1; the result is clamped to the contractual
// [0,1] range.
double e_from_counts(int64_t tp, int64_t fp, int64_t fn, int64_t tn, int64_t n) {
    const int64_t npos = tp + fn;
    double sum;
    if (npos == 0) {
        sum = static_cast<double>(tn + fn);  // 1 - FM
    } else if (npos == n) {
        sum = static_cast<double>(tp + fp);  // FM
    } else {
        const double nn = static_cast<double>(n);
        const double mu_fm = static_cast<double>(tp + fp) / nn;
        const double mu_gt = static_cast<double>(npos) / nn;
        const int64_t counts[4] = {tp, fp, fn, tn};
        const double fvals[4] = {1, 1, 0, 0};
        const double gvals[4] = {1, 0, 1, 0};
        sum = 0;
        for (int i = 0; i < 4; ++i) {
            if (counts[i] == 0) continue;
            const double a = fvals[i] - mu_fm;
            const double b = gvals[i] - mu_gt;
            const double align = 2.0 * a * b / (a * a + b * b + kEps);
            const double enhanced = (align + 1.0) * (align + 1.0) / 4.0;
            sum += static_cast<double>(counts[i]) * enhanced;
        }
    }
    const double score = sum / (static_cast<double>(n) - 1.0 + kEps);
    return std::min(1.0, std::max(0.0, score));
}

struct Counts {
    int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

Counts count_at(const GrayMap& p, const GrayMap& g, double threshold) {
    Counts c;
    const int64_t n = p.h * p.w;
    for (int64_t i = 0; i < n; ++i) {
        const bool m = p.v[static_cast<size_t>(i)] >= threshold;
        const bool fg = g.v[static_cast<size_t>(i)] >= 0.5;
        if (m && fg) ++c.tp;
        else if (m) ++c.fp;
        else if (fg) ++c.fn;
        else ++c.tn;
    }
    return c;
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() <= 1) return 0.0;
    double s = 0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// 2*mean / (mean^2 + 1 + std): object-level similarity of a masked map.
double object_score(const std::vector<double>& vals) {
    if (vals.empty()) return 0.0;
    const double x = mean_of(vals);
    const double sx = sample_std(vals, x);
    return 2.0 * x / (x * x + 1.0 + sx + kEps);
}

// Region similarity on one quadrant: a covariance-based structural term with
// the exact zero/zero conventions of the reference formulation.
double region_ssim(const GrayMap& p, const GrayMap& g, int64_t r0, int64_t r1, int64_t c0,
                   int64_t c1) {
    const int64_t nr = (r1 - r0) * (c1 - c0);
    if (nr <= 0) return 0.0;
    double sx = 0, sy = 0;
    for (int64_t r = r0; r < r1; ++r) {
        for (int64_t c = c0; c < c1; ++c) {
            sx += p.at(r, c);
            sy += g.at(r, c);
        }
    }
    const double mx = sx / static_cast<double>(nr);
    const double my = sy / static_cast<double>(nr);
    double vx = 0, vy = 0, cxy = 0;
    for (int64_t r = r0; r < r1; ++r) {
        for (int64_t c = c0; c < c1; ++c) {
            const double dx = p.at(r, c) - mx;
            const double dy = g.at(r, c) - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
        }
    }
    const double denom = nr > 1 ? static_cast<double>(nr - 1) : 1.0;
    vx /= denom;
    vy /= denom;
    cxy /= denom;
    const double a = 4.0 * mx * my * cxy;
    const double b = (mx * mx + my * my) * (vx + vy);
    if (a != 0.0) return a / (b + kEps);
    return b == 0.0 ? 1.0 : 0.0;
}

int64_t round_half_up(double x) { return static_cast<int64_t>(std::llround(x)); }

}  // namespace

double adaptive_threshold(const GrayMap& p) {
    return std::min(1.0, 2.0 * mean_of(p.v));
}

double mae(const GrayMap& p, const GrayMap& g) {
    check_pair(p, g);
    double s = 0;
    for (size_t i = 0; i < p.v.size(); ++i) s += std::fabs(p.v[i] - g.v[i]);
    return s / static_cast<double>(p.v.size());
}

PrecRecall f_measure(const GrayMap& p, const GrayMap& g, double threshold) {
    check_pair(p, g);
    const Counts c = count_at(p, g, threshold);
    PrecRecall pr;
    pr.f = f_from_counts(c.tp, c.fp, c.fn, c.tp + c.fn, &pr);
    return pr;
}

double e_measure(const GrayMap& p, const GrayMap& g, double threshold) {
    check_pair(p, g);
    const Counts c = count_at(p, g, threshold);
    return e_from_counts(c.tp, c.fp, c.fn, c.tn, p.h * p.w);
}

double s_measure(const GrayMap& p, const GrayMap& g, double alpha) {
    check_pair(p, g);
    const int64_t n = p.h * p.w;
    int64_t npos = 0;
    for (double x : g.v) {
        if (x >= 0.5) ++npos;
    }
    const double gmean = static_cast<double>(npos) / static_cast<double>(n);
    if (npos == 0) return 1.0 - mean_of(p.v);
    if (npos == n) return mean_of(p.v);

    // Object term: foreground saliency where GT is on, inverted saliency
    // where it is off.
    std::vector<double> fg, bg;
    fg.reserve(static_cast<size_t>(npos));
    bg.reserve(static_cast<size_t>(n - npos));
    for (int64_t i = 0; i < n; ++i) {
        if (g.v[static_cast<size_t>(i)] >= 0.5) fg.push_back(p.v[static_cast<size_t>(i)]);
        else bg.push_back(1.0 - p.v[static_cast<size_t>(i)]);
    }
    const double s_obj = gmean * object_score(fg) + (1.0 - gmean) * object_score(bg);

    // Region term: quadrants around the GT centroid (1-based, rounded),
    // weighted by area.
    double col_acc = 0, row_acc = 0, total = 0;
    for (int64_t r = 0; r < p.h; ++r) {
        for (int64_t c = 0; c < p.w; ++c) {
            if (g.at(r, c) >= 0.5) {
                col_acc += static_cast<double>(c + 1);
                row_acc += static_cast<double>(r + 1);
                total += 1.0;
            }
        }
    }
    const int64_t cx = round_half_up(col_acc / total);  // 1..w
    const int64_t cy = round_half_up(row_acc / total);  // 1..h
    const double area = static_cast<double>(n);
    const double w1 = static_cast<double>(cx * cy) / area;
    const double w2 = static_cast<double>((p.w - cx) * cy) / area;
    const double w3 = static_cast<double>(cx * (p.h - cy)) / area;
    const double w4 = 1.0 - w1 - w2 - w3;
    const double s_reg = w1 * region_ssim(p, g, 0, cy, 0, cx) +
                         w2 * region_ssim(p, g, 0, cy, cx, p.w) +
                         w3 * region_ssim(p, g, cy, p.h, 0, cx) +
                         w4 * region_ssim(p, g, cy, p.h, cx, p.w);

    return std::max(0.0, alpha * s_obj + (1.0 - alpha) * s_reg);
}

PerImageMetrics evaluate_single(const GrayMap& pred, const GrayMap& gt) {
    check_pair(pred, gt);
    PerImageMetrics m;
    m.mae = mae(pred, gt);
    m.s = s_measure(pred, gt);

    // Threshold sweep via histograms: a pixel is positive at threshold k iff
    // the number of thresholds it clears exceeds k, so per-threshold counts
    // are suffix sums over the cleared-threshold histogram.
    const int64_t n = pred.h * pred.w;
    std::array<int64_t, kThresholdCount + 1> hist_fg{}, hist_bg{};
    int64_t npos = 0;
    for (int64_t i = 0; i < n; ++i) {
        const double p = pred.v[static_cast<size_t>(i)];
        int64_t cleared = static_cast<int64_t>(std::floor(p * kThresholdCount + 0.5));
        cleared = std::max<int64_t>(0, std::min<int64_t>(kThresholdCount, cleared));
        if (gt.v[static_cast<size_t>(i)] >= 0.5) {
            ++hist_fg[static_cast<size_t>(cleared)];
            ++npos;
        } else {
            ++hist_bg[static_cast<size_t>(cleared)];
        }
    }
    int64_t tp = 0, fp = 0;
    std::array<int64_t, kThresholdCount> tps{}, fps{};
    for (int k = kThresholdCount - 1; k >= 0; --k) {
        tp += hist_fg[static_cast<size_t>(k + 1)];
        fp += hist_bg[static_cast<size_t>(k + 1)];
        tps[static_cast<size_t>(k)] = tp;
        fps[static_cast<size_t>(k)] = fp;
    }
    double f_sum = 0, e_sum = 0;
    m.f_max = 0;
    m.e_max = 0;
    for (int k = 0; k < kThresholdCount; ++k) {
        const int64_t tpk = tps[static_cast<size_t>(k)];
        const int64_t fpk = fps[static_cast<size_t>(k)];
        const int64_t fnk = npos - tpk;
        PrecRecall pr;
        const double fk = f_from_counts(tpk, fpk, fnk, npos, &pr);
        m.precision[static_cast<size_t>(k)] = pr.precision;
        m.recall[static_cast<size_t>(k)] = pr.recall;
        m.f[static_cast<size_t>(k)] = fk;
        f_sum += fk;
        m.f_max = std::max(m.f_max, fk);
        const double ek = e_from_counts(tpk, fpk, fnk, n - tpk - fpk - fnk, n);
        e_sum += ek;
        m.e_max = std::max(m.e_max, ek);
    }
    m.f_mean = f_sum / kThresholdCount;
    m.e_mean = e_sum / kThresholdCount;

    const double adp = adaptive_threshold(pred);
    m.f_adp = f_measure(pred, gt, adp).f;
    m.e_adp = e_measure(pred, gt, adp);
    return m;
}

EvalReport evaluate_maps(const std::vector<GrayMap>& preds, const std::vector<GrayMap>& gts) {
    if (preds.size() != gts.size() || preds.empty()) {
        throw ValidationError("evaluation needs equal nonempty prediction/GT lists");
    }
    const int64_t n = static_cast<int64_t>(preds.size());
    std::vector<PerImageMetrics> per(static_cast<size_t>(n));
    parallel_for(n, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            per[static_cast<size_t>(i)] =
                evaluate_single(preds[static_cast<size_t>(i)], gts[static_cast<size_t>(i)]);
        }
    });
    EvalReport r;
    r.images = n;
    for (const auto& m : per) {
        r.mae += m.mae;
        r.s += m.s;
        r.f_max += m.f_max;
        r.f_mean += m.f_mean;
        r.f_adp += m.f_adp;
        r.e_max += m.e_max;
        r.e_mean += m.e_mean;
        r.e_adp += m.e_adp;
        for (int k = 0; k < kThresholdCount; ++k) {
            r.precision[static_cast<size_t>(k)] += m.precision[static_cast<size_t>(k)];
            r.recall[static_cast<size_t>(k)] += m.recall[static_cast<size_t>(k)];
            r.f[static_cast<size_t>(k)] += m.f[static_cast<size_t>(k)];
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    r.mae *= inv;
    r.s *= inv;
    r.f_max *= inv;
    r.f_mean *= inv;
    r.f_adp *= inv;
    r.e_max *= inv;
    r.e_mean *= inv;
    r.e_adp *= inv;
    for (int k = 0; k < kThresholdCount; ++k) {
        r.precision[static_cast<size_t>(k)] *= inv;
        r.recall[static_cast<size_t>(k)] *= inv;
        r.f[static_cast<size_t>(k)] *= inv;
    }
    return r;
}

namespace {

std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

}  // namespace

std::string report_kv(const EvalReport& r) {
    std::string s;
    s += "images=" + std::to_string(r.images) + "\n";
    s += "mae=" + fmt_num(r.mae) + "\n";
    s += "s_measure=" + fmt_num(r.s) + "\n";
    s += "f_max=" + fmt_num(r.f_max) + "\n";
    s += "f_mean=" + fmt_num(r.f_mean) + "\n";
    s += "f_adp=" + fmt_num(r.f_adp) + "\n";
    s += "e_max=" + fmt_num(r.e_max) + "\n";
    s += "e_mean=" + fmt_num(r.e_mean) + "\n";
    s += "e_adp=" + fmt_num(r.e_adp) + "\n";
    return s;
}

std::string report_csv(const EvalReport& r) {
    std::string s = "images,mae,s_measure,f_max,f_mean,f_adp,e_max,e_mean,e_adp\n";
    s += std::to_string(r.images) + "," + fmt_num(r.mae) + "," + fmt_num(r.s) + "," +
         fmt_num(r.f_max) + "," + fmt_num(r.f_mean) + "," + fmt_num(r.f_adp) + "," +
         fmt_num(r.e_max) + "," + fmt_num(r.e_mean) + "," + fmt_num(r.e_adp) + "\n";
    return s;
}

std::string report_curves_csv(const EvalReport& r) {
    std::string s = "threshold,precision,recall,f\n";
    for (int k = 0; k < kThresholdCount; ++k) {
        s += fmt_num(threshold_at(k)) + "," + fmt_num(r.precision[static_cast<size_t>(k)]) + "," +
             fmt_num(r.recall[static_cast<size_t>(k)]) + "," +
             fmt_num(r.f[static_cast<size_t>(k)]) + "\n";
    }
    return s;
}

}  // namespace gcrp
