#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lafs/geometry.hpp"

namespace lafs {

// Dense per-pixel map, row-major, channel-last float32.
struct DenseMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    DenseMap() = default;
    DenseMap(int h, int w, int c)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, 0.0f) {
        if (h <= 0 || w <= 0 || c <= 0)
            throw std::invalid_argument("DenseMap: non-positive shape");
    }

    float& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool same_shape(const DenseMap& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

// Map channel order, matching BoxComponents.
enum GeoChannel { kTop = 0, kBottom = 1, kLeft = 2, kRight = 3, kTheta = 4 };

inline Point pixel_center(int y, int x) {
    return {static_cast<float>(x) + 0.5f, static_cast<float>(y) + 0.5f};
}

// |a - b| identified modulo pi, wrapped to [0, pi/2]. The metric used for
// the theta channel (boxes are unoriented rectangles).
inline float angle_gap(float a, float b) {
    float d = std::abs(std::fmod(a - b, kPi));
    if (d > kHalfPi) d = kPi - d;
    return d;
}

// Foreground mask of the boxes shrunk by `shrink_ratio` per side: each
// boundary moves inward by shrink_ratio times the perpendicular box extent.
// Overlapping shrunk regions union to 1.
inline DenseMap generate_score_map(const std::vector<RotatedBox>& boxes, int h,
                                   int w, float shrink_ratio = 0.3f) {
    if (shrink_ratio < 0.0f || shrink_ratio >= 0.5f)
        throw std::invalid_argument("generate_score_map: shrink_ratio must be in [0, 0.5)");
    DenseMap score(h, w, 1);
    for (const RotatedBox& box : boxes) {
        const RotatedBox shrunk(box.center, box.width * (1.0f - 2.0f * shrink_ratio),
                                box.height * (1.0f - 2.0f * shrink_ratio), box.theta);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (shrunk.contains(pixel_center(y, x))) score.at(y, x, 0) = 1.0f;
    }
    return score;
}

// Per-pixel components of the owning box at every positive score pixel,
// zeros elsewhere. Pixels claimed by two boxes are an error: synthetic
// scenes must be disjoint.
inline DenseMap generate_geo_map(const std::vector<RotatedBox>& boxes,
                                 const DenseMap& score) {
    if (score.channels != 1)
        throw std::invalid_argument("generate_geo_map: score map must have 1 channel");
    DenseMap geo(score.height, score.width, 5);
    for (int y = 0; y < score.height; ++y) {
        for (int x = 0; x < score.width; ++x) {
            if (score.at(y, x, 0) <= 0.0f) continue;
            const Point p = pixel_center(y, x);
            const RotatedBox* owner = nullptr;
            for (const RotatedBox& box : boxes) {
                if (!box.contains(p)) continue;
                if (owner)
                    throw std::runtime_error("generate_geo_map: pixel inside two boxes");
                owner = &box;
            }
            if (!owner)
                throw std::runtime_error("generate_geo_map: positive pixel outside all boxes");
            // Boundary distances in the frame rotated by -theta about p.
            const Point c = rotate_point(owner->center, p, -owner->theta);
            geo.at(y, x, kTop) = p.y - (c.y - owner->height / 2.0f);
            geo.at(y, x, kBottom) = (c.y + owner->height / 2.0f) - p.y;
            geo.at(y, x, kLeft) = p.x - (c.x - owner->width / 2.0f);
            geo.at(y, x, kRight) = (c.x + owner->width / 2.0f) - p.x;
            geo.at(y, x, kTheta) = owner->theta;
        }
    }
    return geo;
}

// Confidence of each geometry prediction, normalized per text instance and
// channel: conf = 1 - (gap - min) / (max - min) over the instance's masked
// pixels, 0 outside the mask. When every gap in an instance is equal the
// whole instance gets confidence 1.
inline DenseMap generate_conf_map(const DenseMap& pred, const DenseMap& gt,
                                  const DenseMap& mask,
                                  const std::vector<RotatedBox>& boxes) {
    if (!pred.same_shape(gt) || pred.height != mask.height ||
        pred.width != mask.width || pred.channels != 5 || mask.channels != 1)
        throw std::invalid_argument("generate_conf_map: shape mismatch");
    DenseMap conf(pred.height, pred.width, 5);
    std::vector<std::size_t> pixels;
    for (const RotatedBox& box : boxes) {
        pixels.clear();
        for (int y = 0; y < mask.height; ++y)
            for (int x = 0; x < mask.width; ++x)
                if (mask.at(y, x, 0) > 0.0f && box.contains(pixel_center(y, x)))
                    pixels.push_back(static_cast<std::size_t>(y) * mask.width + x);
        if (pixels.empty()) continue;
        for (int c = 0; c < 5; ++c) {
            float lo = std::numeric_limits<float>::infinity();
            float hi = -std::numeric_limits<float>::infinity();
            std::vector<float> gaps(pixels.size());
            for (std::size_t i = 0; i < pixels.size(); ++i) {
                const std::size_t px = pixels[i];
                const float p = pred.data[px * 5 + c];
                const float g = gt.data[px * 5 + c];
                gaps[i] = (c == kTheta) ? angle_gap(p, g) : std::abs(p - g);
                lo = std::min(lo, gaps[i]);
                hi = std::max(hi, gaps[i]);
            }
            const float range = hi - lo;
            for (std::size_t i = 0; i < pixels.size(); ++i) {
                conf.data[pixels[i] * 5 + c] =
                    range > 0.0f ? 1.0f - (gaps[i] - lo) / range : 1.0f;
            }
        }
    }
    return conf;
}

} // namespace lafs
