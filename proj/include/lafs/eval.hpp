#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "lafs/geometry.hpp"
#include "lafs/maps.hpp"

namespace lafs {

struct MatchPair {
    std::size_t pred_index;
    std::size_t gt_index;
    float iou;
};

// One-to-one greedy matching: all (pred, gt) pairs with IoU >= threshold,
// visited in descending IoU (ties: lower pred index, then lower gt index),
// accepted when both sides are still free.
inline std::vector<MatchPair> match(const std::vector<RotatedBox>& preds,
                                    const std::vector<RotatedBox>& gts,
                                    float iou_thresh) {
    std::vector<MatchPair> pairs;
    for (std::size_t p = 0; p < preds.size(); ++p)
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const float iou = quad_iou(preds[p], gts[g]);
            if (iou >= iou_thresh) pairs.push_back({p, g, iou});
        }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const MatchPair& a, const MatchPair& b) {
                         return a.iou > b.iou;
                     });
    std::vector<bool> pred_used(preds.size(), false), gt_used(gts.size(), false);
    std::vector<MatchPair> accepted;
    for (const MatchPair& pr : pairs) {
        if (pred_used[pr.pred_index] || gt_used[pr.gt_index]) continue;
        pred_used[pr.pred_index] = true;
        gt_used[pr.gt_index] = true;
        accepted.push_back(pr);
    }
    return accepted;
}

struct EvalEntry {
    double threshold = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double hmean = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
};

using EvalReport = std::vector<EvalEntry>;

// Empty-set conventions: no preds gives P=0; no gts gives R=1 (vacuous);
// both empty gives R=P=H=1.
inline EvalEntry evaluate_at(const std::vector<RotatedBox>& preds,
                             const std::vector<RotatedBox>& gts,
                             float iou_thresh) {
    EvalEntry e;
    e.threshold = iou_thresh;
    e.tp = static_cast<int>(match(preds, gts, iou_thresh).size());
    e.fp = static_cast<int>(preds.size()) - e.tp;
    e.fn = static_cast<int>(gts.size()) - e.tp;
    if (preds.empty() && gts.empty()) {
        e.recall = e.precision = e.hmean = 1.0;
        return e;
    }
    e.recall = gts.empty() ? 1.0 : static_cast<double>(e.tp) / gts.size();
    e.precision = preds.empty() ? 0.0 : static_cast<double>(e.tp) / preds.size();
    const double pr = e.precision + e.recall;
    e.hmean = pr > 0.0 ? 2.0 * e.precision * e.recall / pr : 0.0;
    return e;
}

inline EvalReport report(const std::vector<RotatedBox>& preds,
                         const std::vector<RotatedBox>& gts,
                         const std::vector<float>& thresholds) {
    EvalReport r;
    r.reserve(thresholds.size());
    for (float t : thresholds) r.push_back(evaluate_at(preds, gts, t));
    return r;
}

inline std::string threshold_key(double t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", t);
    return buf;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j = nlohmann::json::object();
    for (const EvalEntry& e : r) {
        j[threshold_key(e.threshold)] = {{"recall", e.recall},
                                         {"precision", e.precision},
                                         {"hmean", e.hmean},
                                         {"tp", e.tp},
                                         {"fp", e.fp},
                                         {"fn", e.fn}};
    }
    return j;
}

// ---- best-feature-location statistics ----

constexpr int kHistSize = 32;

// Per channel, a 32x32 grid counting where each instance's highest-confidence
// pixel falls in the instance's normalized box frame.
struct LocationHistogram {
    std::array<std::array<int, kHistSize * kHistSize>, 5> cells{};

    int& at(int channel, int row, int col) {
        return cells[channel][row * kHistSize + col];
    }
    int at(int channel, int row, int col) const {
        return cells[channel][row * kHistSize + col];
    }

    int channel_total(int channel) const {
        int n = 0;
        for (int v : cells[channel]) n += v;
        return n;
    }
};

// (col, row) cell of point `p` in the 32x32 normalized frame of `box`.
inline std::pair<int, int> normalized_cell(const Point& p, const RotatedBox& box) {
    const Point q = rotate_point(p, box.center, -box.theta);
    const double u = (q.x - (box.center.x - box.width / 2.0)) / box.width * kHistSize;
    const double v = (q.y - (box.center.y - box.height / 2.0)) / box.height * kHistSize;
    const int col = std::clamp(static_cast<int>(std::floor(u)), 0, kHistSize - 1);
    const int row = std::clamp(static_cast<int>(std::floor(v)), 0, kHistSize - 1);
    return {col, row};
}

// For every instance and channel, find the argmax-confidence masked pixel
// (ties: lowest row-major index) and bin it into the instance's 32x32 frame.
inline LocationHistogram feature_location_stats(
    const std::vector<RotatedBox>& boxes, const DenseMap& conf,
    const DenseMap& mask) {
    if (conf.channels != 5 || mask.channels != 1 ||
        conf.height != mask.height || conf.width != mask.width)
        throw std::invalid_argument("feature_location_stats: shape mismatch");
    LocationHistogram hist;
    for (const RotatedBox& box : boxes) {
        std::array<float, 5> best{};
        std::array<int, 5> best_y{}, best_x{};
        std::array<bool, 5> found{};
        for (int y = 0; y < mask.height; ++y) {
            for (int x = 0; x < mask.width; ++x) {
                if (mask.at(y, x, 0) <= 0.0f || !box.contains(pixel_center(y, x)))
                    continue;
                for (int c = 0; c < 5; ++c) {
                    const float v = conf.at(y, x, c);
                    if (!found[c] || v > best[c]) {
                        found[c] = true;
                        best[c] = v;
                        best_y[c] = y;
                        best_x[c] = x;
                    }
                }
            }
        }
        for (int c = 0; c < 5; ++c) {
            if (!found[c])
                throw std::invalid_argument(
                    "feature_location_stats: instance with empty masked region");
            const auto [col, row] =
                normalized_cell(pixel_center(best_y[c], best_x[c]), box);
            ++hist.at(c, row, col);
        }
    }
    return hist;
}

inline nlohmann::json histogram_to_json(const LocationHistogram& hist) {
    nlohmann::json channels = nlohmann::json::array();
    for (int c = 0; c < 5; ++c) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < kHistSize; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int col = 0; col < kHistSize; ++col) row.push_back(hist.at(c, r, col));
            rows.push_back(std::move(row));
        }
        channels.push_back(std::move(rows));
    }
    return channels;
}

inline std::string histogram_to_csv(const LocationHistogram& hist) {
    std::string out = "channel,row,col,count\n";
    for (int c = 0; c < 5; ++c)
        for (int r = 0; r < kHistSize; ++r)
            for (int col = 0; col < kHistSize; ++col) {
                const int n = hist.at(c, r, col);
                if (n == 0) continue;
                out += std::to_string(c) + "," + std::to_string(r) + "," +
                       std::to_string(col) + "," + std::to_string(n) + "\n";
            }
    return out;
}

} // namespace lafs
