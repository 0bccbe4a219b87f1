#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "lafs/geometry.hpp"
#include "lafs/maps.hpp"

namespace lafs {

// One pixel's decoded box plus the per-component confidences steering the
// merge. Candidates are ordered by descending cls_score, ties by row-major
// pixel index; every downstream tie-break inherits that order.
struct Candidate {
    Point point;
    BoxComponents components;
    std::array<float, 5> comp_conf{};
    float cls_score = 0.0f;
    std::size_t pixel_index = 0;
    RotatedBox box;
};

enum class DecodeMode { lafs, baseline, constrained };

struct DecodeParams {
    float score_thresh = 0.8f;
    float group_iou_thresh = 0.5f;
    int k = 2;
    DecodeMode mode = DecodeMode::lafs;
    float constraint_ratio = 1.0f / 3.0f;
};

inline std::vector<Candidate> extract_candidates(const DenseMap& score,
                                                 const DenseMap& geo,
                                                 const DenseMap& conf,
                                                 const DecodeParams& params) {
    if (score.height != geo.height || score.width != geo.width ||
        !geo.same_shape(conf) || score.channels != 1 || geo.channels != 5)
        throw std::invalid_argument("extract_candidates: map shape mismatch");
    std::vector<Candidate> cands;
    for (int y = 0; y < score.height; ++y) {
        for (int x = 0; x < score.width; ++x) {
            const float s = score.at(y, x, 0);
            if (s < params.score_thresh) continue;
            Candidate c;
            c.point = pixel_center(y, x);
            c.components = {geo.at(y, x, kTop), geo.at(y, x, kBottom),
                            geo.at(y, x, kLeft), geo.at(y, x, kRight),
                            geo.at(y, x, kTheta)};
            for (int ch = 0; ch < 5; ++ch) c.comp_conf[ch] = conf.at(y, x, ch);
            c.cls_score = s;
            c.pixel_index = static_cast<std::size_t>(y) * score.width + x;
            c.box = box_from_components(c.point, c.components);
            cands.push_back(c);
        }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) {
                         return a.cls_score > b.cls_score;
                     });
    return cands;
}

// Greedy IoU clustering: the best-scoring unassigned candidate seeds a group
// and absorbs every unassigned candidate whose box overlaps it above the
// threshold. Each group keeps the input order, seed first.
inline std::vector<std::vector<Candidate>> group_candidates(
    const std::vector<Candidate>& cands, float group_iou_thresh) {
    std::vector<std::vector<Candidate>> groups;
    std::vector<bool> assigned(cands.size(), false);
    for (std::size_t s = 0; s < cands.size(); ++s) {
        if (assigned[s]) continue;
        std::vector<Candidate> group{cands[s]};
        assigned[s] = true;
        for (std::size_t i = s + 1; i < cands.size(); ++i) {
            if (assigned[i]) continue;
            if (quad_iou(cands[s].box, cands[i].box) > group_iou_thresh) {
                group.push_back(cands[i]);
                assigned[i] = true;
            }
        }
        groups.push_back(std::move(group));
    }
    return groups;
}

namespace detail {

// Indices of the k highest-confidence members; ties resolved by group order
// (higher cls_score, then lower pixel index).
inline std::vector<std::size_t> top_k_by_conf(
    const std::vector<Candidate>& group, const std::vector<std::size_t>& pool,
    int channel, int k) {
    std::vector<std::size_t> order = pool;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return group[a].comp_conf[channel] >
                                group[b].comp_conf[channel];
                     });
    if (static_cast<std::size_t>(k) < order.size()) order.resize(k);
    return order;
}

// Eq-style confidence-weighted mean; equal weights when all confidences
// vanish (the weighted form is undefined there).
inline double conf_weighted_mean(const std::vector<double>& preds,
                                 const std::vector<double>& confs) {
    double wsum = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        acc += confs[i] * preds[i];
        wsum += confs[i];
    }
    if (wsum <= 1e-12) {
        acc = 0.0;
        for (double p : preds) acc += p;
        return acc / static_cast<double>(preds.size());
    }
    return acc / wsum;
}

} // namespace detail

// Per-boundary eligibility filter; candidates failing it are not considered
// for that channel's top-k. Returns true to keep.
using BoundaryFilter =
    std::function<bool(const Candidate&, int /*channel*/)>;

// Top-k component selection and confidence-weighted fusion over one group.
// Merges theta first, then realizes each boundary as a line coordinate in
// the frame rotated by -theta* about the seed's point, fuses coordinates,
// and rotates the assembled corners back. Returns nullopt when the merged
// extents collapse.
inline std::optional<RotatedBox> lafs_merge(const std::vector<Candidate>& group,
                                            int k,
                                            const BoundaryFilter& filter = {}) {
    if (group.empty()) throw std::invalid_argument("lafs_merge: empty group");
    if (k < 1) throw std::invalid_argument("lafs_merge: k must be >= 1");
    const Candidate& seed = group.front();

    std::vector<std::size_t> all(group.size());
    std::iota(all.begin(), all.end(), 0);

    // theta is merged unfiltered: the constraint applies to boundaries only.
    std::vector<double> preds, confs;
    for (std::size_t i : detail::top_k_by_conf(group, all, kTheta, k)) {
        preds.push_back(group[i].components.theta);
        confs.push_back(group[i].comp_conf[kTheta]);
    }
    const double theta = detail::conf_weighted_mean(preds, confs);
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);

    // Boundary line coordinate of candidate `c` for `channel`, in the frame
    // rotated by -theta about the seed point. Double precision throughout.
    auto boundary_coord = [&](const Candidate& c, int channel) {
        const double rx = static_cast<double>(c.point.x) - seed.point.x;
        const double ry = static_cast<double>(c.point.y) - seed.point.y;
        const double px = seed.point.x + cos_t * rx + sin_t * ry;
        const double py = seed.point.y - sin_t * rx + cos_t * ry;
        switch (channel) {
            case kTop: return py - c.components.d_t;
            case kBottom: return py + c.components.d_b;
            case kLeft: return px - c.components.d_l;
            default: return px + c.components.d_r;
        }
    };

    std::array<double, 4> merged{};
    for (int channel = kTop; channel <= kRight; ++channel) {
        std::vector<std::size_t> pool;
        if (filter) {
            for (std::size_t i : all)
                if (filter(group[i], channel)) pool.push_back(i);
        }
        if (pool.empty()) pool = all;  // never let the filter starve a channel
        preds.clear();
        confs.clear();
        for (std::size_t i : detail::top_k_by_conf(group, pool, channel, k)) {
            preds.push_back(boundary_coord(group[i], channel));
            confs.push_back(group[i].comp_conf[channel]);
        }
        merged[channel] = detail::conf_weighted_mean(preds, confs);
    }

    const double y_t = merged[kTop], y_b = merged[kBottom];
    const double x_l = merged[kLeft], x_r = merged[kRight];
    if (x_l >= x_r || y_t >= y_b) return std::nullopt;

    const double cx = (x_l + x_r) / 2.0 - seed.point.x;
    const double cy = (y_t + y_b) / 2.0 - seed.point.y;
    const Point center = {static_cast<float>(seed.point.x + cos_t * cx - sin_t * cy),
                          static_cast<float>(seed.point.y + sin_t * cx + cos_t * cy)};
    return RotatedBox(center, static_cast<float>(x_r - x_l),
                      static_cast<float>(y_b - y_t), static_cast<float>(theta));
}

// Filter for constrained mode: a candidate may vote on a boundary only if
// its predicted distance to that boundary is below `ratio` times the seed
// box's extent perpendicular to it.
inline BoundaryFilter make_constraint_filter(const Candidate& seed, float ratio) {
    const float seed_h = seed.components.d_t + seed.components.d_b;
    const float seed_w = seed.components.d_l + seed.components.d_r;
    return [seed_h, seed_w, ratio](const Candidate& c, int channel) {
        switch (channel) {
            case kTop: return c.components.d_t < ratio * seed_h;
            case kBottom: return c.components.d_b < ratio * seed_h;
            case kLeft: return c.components.d_l < ratio * seed_w;
            default: return c.components.d_r < ratio * seed_w;
        }
    };
}

struct DecodeResult {
    std::vector<RotatedBox> boxes;
    int discarded = 0;  // groups whose merged extents collapsed
};

inline DecodeResult decode(const DenseMap& score, const DenseMap& geo,
                           const DenseMap& conf, const DecodeParams& params,
                           int threads = 1) {
    const std::vector<Candidate> cands =
        extract_candidates(score, geo, conf, params);
    const std::vector<std::vector<Candidate>> groups =
        group_candidates(cands, params.group_iou_thresh);

    std::vector<std::optional<RotatedBox>> merged(groups.size());
    auto merge_one = [&](std::size_t g) {
        const std::vector<Candidate>& group = groups[g];
        const int k = std::min<int>(params.k, static_cast<int>(group.size()));
        switch (params.mode) {
            case DecodeMode::baseline:
                merged[g] = group.front().box;
                break;
            case DecodeMode::constrained:
                merged[g] = lafs_merge(
                    group, k,
                    make_constraint_filter(group.front(), params.constraint_ratio));
                break;
            case DecodeMode::lafs:
                merged[g] = lafs_merge(group, k);
                break;
        }
    };

    if (threads <= 1 || groups.size() < 2) {
        for (std::size_t g = 0; g < groups.size(); ++g) merge_one(g);
    } else {
        // Static index partitioning: output slots are fixed per group, so the
        // result is independent of the thread count.
        const int n = std::min<int>(threads, static_cast<int>(groups.size()));
        std::vector<std::thread> pool;
        pool.reserve(n);
        for (int t = 0; t < n; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t g = t; g < groups.size(); g += n) merge_one(g);
            });
        }
        for (std::thread& th : pool) th.join();
    }

    DecodeResult result;
    for (const auto& box : merged) {
        if (box)
            result.boxes.push_back(*box);
        else
            ++result.discarded;
    }
    return result;
}

} // namespace lafs
