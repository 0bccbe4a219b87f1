#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "lafs/maps.hpp"

namespace lafs {

struct LossConfig {
    double gamma = 1.0;    // geometry loss weight
    double lambda = 10.0;  // confidence loss weight
    double mu = 10.0;      // angle term weight inside the geometry loss
    double epsilon = 1e-5;
    double smooth_l1_knee = 1.0;
    bool mask_reduction = true;  // reduce map losses over positive-mask pixels only
};

constexpr double kIouClamp = 1e-8;

// ---- dice ----

inline double dice_loss(std::span<const double> pred, std::span<const double> gt,
                        double epsilon) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("dice_loss: size mismatch");
    double inter = 0.0, sp = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        inter += pred[i] * gt[i];
        sp += pred[i];
        sg += gt[i];
    }
    return 1.0 - 2.0 * inter / (sp + sg + epsilon);
}

// d(dice)/d(pred)
inline std::vector<double> dice_loss_grad(std::span<const double> pred,
                                          std::span<const double> gt,
                                          double epsilon) {
    double inter = 0.0, sp = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        inter += pred[i] * gt[i];
        sp += pred[i];
        sg += gt[i];
    }
    const double denom = sp + sg + epsilon;
    std::vector<double> grad(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        grad[i] = -2.0 * (gt[i] * denom - inter) / (denom * denom);
    return grad;
}

// ---- per-pixel RBOX IoU ----

// Distances in channel order (d_t, d_b, d_l, d_r). Intersection is built
// from the elementwise-min extents, the standard realization for
// distance-channel heads sharing a reference point.
inline double rbox_iou(const std::array<double, 4>& pred,
                       const std::array<double, 4>& gt) {
    const double wi = std::min(pred[2], gt[2]) + std::min(pred[3], gt[3]);
    const double hi = std::min(pred[0], gt[0]) + std::min(pred[1], gt[1]);
    const double inter = wi * hi;
    const double area_p = (pred[0] + pred[1]) * (pred[2] + pred[3]);
    const double area_g = (gt[0] + gt[1]) * (gt[2] + gt[3]);
    const double uni = area_p + area_g - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

inline double iou_loss(const std::array<double, 4>& pred,
                       const std::array<double, 4>& gt) {
    const double area_g = (gt[0] + gt[1]) * (gt[2] + gt[3]);
    if (area_g <= 0.0) throw std::invalid_argument("iou_loss: gt area must be > 0");
    return -std::log(std::max(rbox_iou(pred, gt), kIouClamp));
}

// d(iou_loss)/d(pred). Zero where the IoU sits at the clamp (the loss is
// constant there). min() kinks give the one-sided derivative.
inline std::array<double, 4> iou_loss_grad(const std::array<double, 4>& pred,
                                           const std::array<double, 4>& gt) {
    const double wi = std::min(pred[2], gt[2]) + std::min(pred[3], gt[3]);
    const double hi = std::min(pred[0], gt[0]) + std::min(pred[1], gt[1]);
    const double inter = wi * hi;
    const double area_p = (pred[0] + pred[1]) * (pred[2] + pred[3]);
    const double area_g = (gt[0] + gt[1]) * (gt[2] + gt[3]);
    const double uni = area_p + area_g - inter;
    if (uni <= 0.0 || inter / uni <= kIouClamp) return {0.0, 0.0, 0.0, 0.0};

    // dI/dx: vertical channels scale the width of the intersection and
    // vice versa, active only while pred < gt on that side.
    std::array<double, 4> d_inter = {pred[0] < gt[0] ? wi : 0.0,
                                     pred[1] < gt[1] ? wi : 0.0,
                                     pred[2] < gt[2] ? hi : 0.0,
                                     pred[3] < gt[3] ? hi : 0.0};
    std::array<double, 4> d_area = {pred[2] + pred[3], pred[2] + pred[3],
                                    pred[0] + pred[1], pred[0] + pred[1]};
    std::array<double, 4> grad;
    for (int i = 0; i < 4; ++i) {
        const double d_uni = d_area[i] - d_inter[i];
        grad[i] = d_uni / uni - d_inter[i] / inter;
    }
    return grad;
}

// ---- angle ----

inline double angle_loss(double pred_theta, double gt_theta) {
    return 1.0 - std::cos(pred_theta - gt_theta);
}

inline double angle_loss_grad(double pred_theta, double gt_theta) {
    return std::sin(pred_theta - gt_theta);
}

// ---- smooth L1 over confidence maps ----

inline double smooth_l1(double x, double knee) {
    const double a = std::abs(x);
    return a < knee ? 0.5 * x * x / knee : a - 0.5 * knee;
}

inline double smooth_l1_grad(double x, double knee) {
    return std::abs(x) < knee ? x / knee : (x > 0.0 ? 1.0 : -1.0);
}

inline double conf_loss(std::span<const double> pred, std::span<const double> gt,
                        double knee) {
    if (pred.size() != gt.size() || pred.empty())
        throw std::invalid_argument("conf_loss: size mismatch or empty");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        acc += smooth_l1(pred[i] - gt[i], knee);
    return acc / static_cast<double>(pred.size());
}

inline std::vector<double> conf_loss_grad(std::span<const double> pred,
                                          std::span<const double> gt,
                                          double knee) {
    std::vector<double> grad(pred.size());
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        grad[i] = smooth_l1_grad(pred[i] - gt[i], knee) * inv_n;
    return grad;
}

// ---- combination ----

struct LossParts {
    double cls = 0.0;
    double iou = 0.0;
    double angle = 0.0;
    double conf = 0.0;
};

inline double total_loss(const LossParts& parts, const LossConfig& cfg) {
    return parts.cls + cfg.gamma * (parts.iou + cfg.mu * parts.angle) +
           cfg.lambda * parts.conf;
}

// ---- map-level reductions ----

namespace detail {

inline std::vector<double> to_doubles(const DenseMap& m) {
    return std::vector<double>(m.data.begin(), m.data.end());
}

} // namespace detail

inline double dice_loss(const DenseMap& pred, const DenseMap& gt,
                        double epsilon) {
    if (!pred.same_shape(gt))
        throw std::invalid_argument("dice_loss: map shape mismatch");
    const std::vector<double> p = detail::to_doubles(pred);
    const std::vector<double> g = detail::to_doubles(gt);
    return dice_loss(std::span<const double>(p), std::span<const double>(g),
                     epsilon);
}

// Per-pixel IoU + angle losses averaged over the mask's positive pixels.
inline LossParts geo_loss(const DenseMap& pred, const DenseMap& gt,
                          const DenseMap& mask) {
    if (!pred.same_shape(gt) || pred.channels != 5 ||
        pred.height != mask.height || pred.width != mask.width)
        throw std::invalid_argument("geo_loss: map shape mismatch");
    LossParts parts;
    std::size_t n = 0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(y, x, 0) <= 0.0f) continue;
            const std::array<double, 4> p = {pred.at(y, x, kTop), pred.at(y, x, kBottom),
                                             pred.at(y, x, kLeft), pred.at(y, x, kRight)};
            const std::array<double, 4> g = {gt.at(y, x, kTop), gt.at(y, x, kBottom),
                                             gt.at(y, x, kLeft), gt.at(y, x, kRight)};
            parts.iou += iou_loss(p, g);
            parts.angle += angle_loss(pred.at(y, x, kTheta), gt.at(y, x, kTheta));
            ++n;
        }
    }
    if (n > 0) {
        parts.iou /= static_cast<double>(n);
        parts.angle /= static_cast<double>(n);
    }
    return parts;
}

inline double conf_loss(const DenseMap& pred, const DenseMap& gt,
                        const DenseMap* mask, double knee) {
    if (!pred.same_shape(gt))
        throw std::invalid_argument("conf_loss: map shape mismatch");
    std::vector<double> p, g;
    if (mask) {
        for (int y = 0; y < pred.height; ++y) {
            for (int x = 0; x < pred.width; ++x) {
                if (mask->at(y, x, 0) <= 0.0f) continue;
                for (int c = 0; c < pred.channels; ++c) {
                    p.push_back(pred.at(y, x, c));
                    g.push_back(gt.at(y, x, c));
                }
            }
        }
        if (p.empty()) return 0.0;
    } else {
        p = detail::to_doubles(pred);
        g = detail::to_doubles(gt);
    }
    return conf_loss(std::span<const double>(p), std::span<const double>(g), knee);
}

// ---- finite-difference gradient check ----

// Central differences vs the analytic gradient; returns the max over inputs
// of |g_a - g_fd| / max(1, |g_a|, |g_fd|).
template <typename F, typename G>
double grad_check(F&& loss, G&& analytic_grad, std::vector<double> x,
                  double step) {
    const std::vector<double> ga = analytic_grad(x);
    if (ga.size() != x.size())
        throw std::invalid_argument("grad_check: gradient size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + step;
        const double hi = loss(x);
        x[i] = saved - step;
        const double lo = loss(x);
        x[i] = saved;
        const double gfd = (hi - lo) / (2.0 * step);
        const double err = std::abs(ga[i] - gfd) /
                           std::max({1.0, std::abs(ga[i]), std::abs(gfd)});
        worst = std::max(worst, err);
    }
    return worst;
}

} // namespace lafs
