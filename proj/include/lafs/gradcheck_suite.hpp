#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "lafs/losses.hpp"
#include "lafs/rng.hpp"

namespace lafs {

struct GradCheckResult {
    std::string loss;
    double max_rel_error = 0.0;
    int points = 0;
};

// Runs the analytic-vs-finite-difference comparison for every loss at
// `points` seeded random evaluation points each. Points within 1e-2 of a
// min()/knee kink are resampled: central differences straddle the
// non-smoothness there and say nothing about the gradient.
inline std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed,
                                                        int points = 100,
                                                        double step = 1e-3) {
    std::vector<GradCheckResult> results;

    {
        Rng rng(seed, 1);
        GradCheckResult r{"dice", 0.0, points};
        const double eps = 1e-5;
        for (int i = 0; i < points; ++i) {
            std::vector<double> pred(16), gt(16);
            for (double& v : pred) v = rng.uniform(0.05, 0.95);
            for (double& v : gt) v = rng.next_double() < 0.5 ? 0.0 : 1.0;
            const double err = grad_check(
                [&](const std::vector<double>& x) {
                    return dice_loss(std::span<const double>(x),
                                     std::span<const double>(gt), eps);
                },
                [&](const std::vector<double>& x) {
                    return dice_loss_grad(std::span<const double>(x),
                                          std::span<const double>(gt), eps);
                },
                pred, step);
            r.max_rel_error = std::max(r.max_rel_error, err);
        }
        results.push_back(r);
    }

    {
        Rng rng(seed, 2);
        GradCheckResult r{"iou", 0.0, points};
        for (int i = 0; i < points; ++i) {
            std::array<double, 4> pred, gt;
            bool kink = true;
            while (kink) {
                kink = false;
                for (int c = 0; c < 4; ++c) {
                    pred[c] = rng.uniform(0.5, 5.0);
                    gt[c] = rng.uniform(0.5, 5.0);
                    if (std::abs(pred[c] - gt[c]) < 1e-2) kink = true;
                }
            }
            const double err = grad_check(
                [&](const std::vector<double>& x) {
                    return iou_loss({x[0], x[1], x[2], x[3]}, gt);
                },
                [&](const std::vector<double>& x) {
                    const auto g = iou_loss_grad({x[0], x[1], x[2], x[3]}, gt);
                    return std::vector<double>(g.begin(), g.end());
                },
                {pred[0], pred[1], pred[2], pred[3]}, step);
            r.max_rel_error = std::max(r.max_rel_error, err);
        }
        results.push_back(r);
    }

    {
        Rng rng(seed, 3);
        GradCheckResult r{"angle", 0.0, points};
        for (int i = 0; i < points; ++i) {
            const double gt_theta = rng.uniform(-1.5, 1.5);
            const double pred_theta = rng.uniform(-1.5, 1.5);
            const double err = grad_check(
                [&](const std::vector<double>& x) {
                    return angle_loss(x[0], gt_theta);
                },
                [&](const std::vector<double>& x) {
                    return std::vector<double>{angle_loss_grad(x[0], gt_theta)};
                },
                {pred_theta}, step);
            r.max_rel_error = std::max(r.max_rel_error, err);
        }
        results.push_back(r);
    }

    {
        Rng rng(seed, 4);
        GradCheckResult r{"smooth_l1", 0.0, points};
        const double knee = 1.0;
        for (int i = 0; i < points; ++i) {
            std::vector<double> pred(16), gt(16);
            for (std::size_t j = 0; j < pred.size(); ++j) {
                do {
                    pred[j] = rng.next_double();
                    gt[j] = rng.next_double();
                } while (std::abs(pred[j] - gt[j]) > knee - 1e-2);
            }
            const double err = grad_check(
                [&](const std::vector<double>& x) {
                    return conf_loss(std::span<const double>(x),
                                     std::span<const double>(gt), knee);
                },
                [&](const std::vector<double>& x) {
                    return conf_loss_grad(std::span<const double>(x),
                                          std::span<const double>(gt), knee);
                },
                pred, step);
            r.max_rel_error = std::max(r.max_rel_error, err);
        }
        results.push_back(r);
    }

    return results;
}

} // namespace lafs
