#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lafs/geometry.hpp"
#include "lafs/maps.hpp"
#include "lafs/rng.hpp"

namespace lafs {

struct SceneConfig {
    int height = 256;
    int width = 256;
    int n_boxes = 5;
    float size_min = 32.0f;   // long side, pixels
    float size_max = 96.0f;
    float aspect_min = 1.5f;  // width / height
    float aspect_max = 4.0f;
    float angle_min = -0.6f;
    float angle_max = 0.6f;
    float min_separation = 8.0f;
    std::uint64_t seed = 0;
};

// Axis-aligned rectangle in an instance's normalized [0,1]^2 box frame.
struct Zone {
    float u0 = 0.0f, v0 = 0.0f, w = 1.0f, h = 1.0f;

    bool contains(float u, float v) const {
        return u >= u0 && u < u0 + w && v >= v0 && v < v0 + h;
    }
    // Cell test against the 32x32 histogram grid, by cell center.
    bool contains_cell(int col, int row, int grid = 32) const {
        return contains((col + 0.5f) / grid, (row + 0.5f) / grid);
    }
    // Chebyshev distance from the zone center, 0 at center, 1 at the edge.
    float radial(float u, float v) const {
        const float ru = std::abs(u - (u0 + w / 2.0f)) / (w / 2.0f);
        const float rv = std::abs(v - (v0 + h / 2.0f)) / (h / 2.0f);
        return std::max(ru, rv);
    }
};

// One low-noise region per channel, planted at a different place each so the
// most reliable feature location differs per component. v grows downward,
// like image y. The shrunk score region spans roughly [0.3, 0.7]^2 of the
// frame at the default shrink ratio; zones cover only part of it.
inline std::array<Zone, 5> default_zones() {
    return {{
        {0.28f, 0.48f, 0.44f, 0.26f},  // d_t: lower half of the text core
        {0.28f, 0.26f, 0.44f, 0.26f},  // d_b: upper half
        {0.48f, 0.28f, 0.26f, 0.44f},  // d_l: right half
        {0.26f, 0.28f, 0.26f, 0.44f},  // d_r: left half
        {0.35f, 0.35f, 0.30f, 0.30f},  // theta: center
    }};
}

enum class NoiseModel { none, uniform, zoned };
enum class ConfidenceMode { oracle, degraded };

struct NoiseConfig {
    NoiseModel model = NoiseModel::none;
    float amplitude_px = 2.0f;      // distance channels, pixels
    float amplitude_theta = 0.05f;  // radians
    float zone_scale = 0.15f;  // jitter multiplier inside a zone
    float zone_ramp = 0.3f;    // in-zone bias (in amplitudes) at the zone edge
    float zone_bias = 0.75f;   // systematic offset (in amplitudes) outside a zone
    std::array<Zone, 5> zones = default_zones();
    ConfidenceMode confidence_mode = ConfidenceMode::oracle;
    float degradation = 0.1f;  // blend weight toward uniform-random confidence
    std::uint64_t seed = 0;
};

struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Packs pairwise-disjoint rotated boxes onto the canvas, deterministically
// for a given seed. Disjointness is enforced with a min_separation margin:
// boxes inflated by half the margin per side must not intersect.
inline std::vector<RotatedBox> generate_scene(const SceneConfig& cfg) {
    if (cfg.size_min <= 0.0f || cfg.size_max < cfg.size_min ||
        cfg.aspect_min < 1.0f || cfg.aspect_max < cfg.aspect_min)
        throw std::invalid_argument("generate_scene: bad size/aspect ranges");
    Rng rng(cfg.seed, /*stream=*/0x5ce4e);
    std::vector<RotatedBox> boxes;
    const float margin = cfg.min_separation / 2.0f;
    for (int i = 0; i < cfg.n_boxes; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            const float w = static_cast<float>(rng.uniform(cfg.size_min, cfg.size_max));
            const float aspect = static_cast<float>(rng.uniform(cfg.aspect_min, cfg.aspect_max));
            const float h = w / aspect;
            const float theta = static_cast<float>(rng.uniform(cfg.angle_min, cfg.angle_max));
            const float reach = std::hypot(w, h) / 2.0f + 1.0f;
            if (2.0f * reach >= cfg.width || 2.0f * reach >= cfg.height) continue;
            const Point c = {static_cast<float>(rng.uniform(reach, cfg.width - reach)),
                             static_cast<float>(rng.uniform(reach, cfg.height - reach))};
            const RotatedBox box(c, w, h, theta);
            const RotatedBox inflated(c, w + 2.0f * margin, h + 2.0f * margin, theta);
            bool clear = true;
            for (const RotatedBox& other : boxes) {
                const RotatedBox other_inflated(other.center, other.width + 2.0f * margin,
                                                other.height + 2.0f * margin, other.theta);
                if (detail::intersection_area(inflated.quad(), other_inflated.quad()) > 0.0) {
                    clear = false;
                    break;
                }
            }
            if (clear) {
                boxes.push_back(box);
                placed = true;
            }
        }
        if (!placed)
            throw capacity_error("generate_scene: packing failed after 1000 retries");
    }
    return boxes;
}

struct Simulated {
    DenseMap score;
    DenseMap geo_gt;
    DenseMap geo_pred;
    DenseMap conf;         // what the decoder consumes (oracle or degraded)
    DenseMap conf_oracle;  // always the exact gap-normalized confidence
};

namespace detail {

// Pure function of (seed, index): uniform in [-1, 1).
inline double noise_unit(std::uint64_t seed, std::uint64_t index) {
    return Rng(seed, index).uniform(-1.0, 1.0);
}

// Normalized (u, v) of point p in the box frame.
inline std::pair<float, float> normalized_uv(const Point& p, const RotatedBox& box) {
    const Point q = rotate_point(p, box.center, -box.theta);
    return {(q.x - (box.center.x - box.width / 2.0f)) / box.width,
            (q.y - (box.center.y - box.height / 2.0f)) / box.height};
}

} // namespace detail

// Simulates a trained network's outputs on a scene: exact ground-truth maps
// plus a noisy geometry prediction and its confidence map. Per-channel noise
// amplitude drops by `zone_scale` inside the channel's planted zone, which
// makes the best feature location channel-dependent.
inline Simulated simulate_predictions(const std::vector<RotatedBox>& boxes,
                                      const NoiseConfig& cfg, int h, int w,
                                      float shrink_ratio = 0.3f) {
    Simulated sim{generate_score_map(boxes, h, w, shrink_ratio),
                  DenseMap(h, w, 5), DenseMap(h, w, 5), DenseMap(h, w, 5),
                  DenseMap(h, w, 5)};
    sim.geo_gt = generate_geo_map(boxes, sim.score);
    sim.geo_pred = sim.geo_gt;

    if (cfg.model != NoiseModel::none) {
        for (const RotatedBox& box : boxes) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (sim.score.at(y, x, 0) <= 0.0f) continue;
                    const Point p = pixel_center(y, x);
                    if (!box.contains(p)) continue;
                    const auto [u, v] = detail::normalized_uv(p, box);
                    const std::uint64_t px =
                        static_cast<std::uint64_t>(y) * w + x;
                    for (int c = 0; c < 5; ++c) {
                        const float amp =
                            (c == kTheta) ? cfg.amplitude_theta : cfg.amplitude_px;
                        float scale = 1.0f;
                        float bias = 0.0f;
                        if (cfg.model == NoiseModel::zoned) {
                            if (cfg.zones[c].contains(u, v)) {
                                // quality decays from the zone center outward
                                scale = cfg.zone_scale;
                                bias = cfg.zone_ramp * cfg.zones[c].radial(u, v);
                            } else {
                                // systematic overestimate, never dead-on
                                scale = 0.5f;
                                bias = cfg.zone_bias;
                            }
                        }
                        const float noise = static_cast<float>(
                            (detail::noise_unit(cfg.seed, px * 5 + c) * scale +
                             bias) *
                            amp);
                        float val = sim.geo_gt.at(y, x, c) + noise;
                        if (c != kTheta && val < 0.0f) val = 0.0f;
                        sim.geo_pred.at(y, x, c) = val;
                    }
                }
            }
        }
    }

    sim.conf_oracle = generate_conf_map(sim.geo_pred, sim.geo_gt, sim.score, boxes);
    sim.conf = sim.conf_oracle;
    if (cfg.confidence_mode == ConfidenceMode::degraded) {
        for (std::size_t i = 0; i < sim.conf.data.size(); ++i) {
            if (sim.score.data[i / 5] <= 0.0f) continue;
            // blend toward an uninformative uniform confidence head
            const float junk = static_cast<float>(
                0.5 +
                0.5 * detail::noise_unit(cfg.seed ^ 0xdeca11edull, i));
            sim.conf.data[i] = (1.0f - cfg.degradation) * sim.conf_oracle.data[i] +
                               cfg.degradation * junk;
        }
    }
    return sim;
}

// ---- JSON config document ----

inline SceneConfig scene_config_from_json(const nlohmann::json& j) {
    SceneConfig c;
    c.height = j.value("height", c.height);
    c.width = j.value("width", c.width);
    c.n_boxes = j.value("n_boxes", c.n_boxes);
    c.size_min = j.value("size_min", c.size_min);
    c.size_max = j.value("size_max", c.size_max);
    c.aspect_min = j.value("aspect_min", c.aspect_min);
    c.aspect_max = j.value("aspect_max", c.aspect_max);
    c.angle_min = j.value("angle_min", c.angle_min);
    c.angle_max = j.value("angle_max", c.angle_max);
    c.min_separation = j.value("min_separation", c.min_separation);
    c.seed = j.value("seed", c.seed);
    return c;
}

inline NoiseConfig noise_config_from_json(const nlohmann::json& j) {
    NoiseConfig c;
    const std::string model = j.value("model", std::string("none"));
    if (model == "none")
        c.model = NoiseModel::none;
    else if (model == "uniform")
        c.model = NoiseModel::uniform;
    else if (model == "zoned")
        c.model = NoiseModel::zoned;
    else
        throw std::invalid_argument("noise config: unknown model '" + model + "'");
    c.amplitude_px = j.value("amplitude_px", c.amplitude_px);
    c.amplitude_theta = j.value("amplitude_theta", c.amplitude_theta);
    c.zone_scale = j.value("zone_scale", c.zone_scale);
    c.zone_ramp = j.value("zone_ramp", c.zone_ramp);
    c.zone_bias = j.value("zone_bias", c.zone_bias);
    if (j.contains("zones")) {
        const auto& zones = j.at("zones");
        if (!zones.is_array() || zones.size() != 5)
            throw std::invalid_argument("noise config: zones must be 5 [u0,v0,w,h] arrays");
        for (int i = 0; i < 5; ++i) {
            const auto& z = zones[i];
            c.zones[i] = {z.at(0).get<float>(), z.at(1).get<float>(),
                          z.at(2).get<float>(), z.at(3).get<float>()};
        }
    }
    const std::string mode = j.value("confidence_mode", std::string("oracle"));
    if (mode == "oracle")
        c.confidence_mode = ConfidenceMode::oracle;
    else if (mode == "degraded")
        c.confidence_mode = ConfidenceMode::degraded;
    else
        throw std::invalid_argument("noise config: unknown confidence_mode '" + mode + "'");
    c.degradation = j.value("degradation", c.degradation);
    c.seed = j.value("seed", c.seed);
    return c;
}

} // namespace lafs
