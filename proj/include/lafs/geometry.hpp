#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace lafs {

// Image coordinates: x grows right, y grows down. Angles are the rotation of
// the box frame relative to the image axes, applied with the standard
// counter-clockwise rotation matrix [[cos,-sin],[sin,cos]] on (x, y).
// With y pointing down this renders as a clockwise turn on screen.

struct Point {
    float x = 0.0f;
    float y = 0.0f;
};

inline bool is_finite(const Point& p) {
    return std::isfinite(p.x) && std::isfinite(p.y);
}

inline Point rotate_point(const Point& p, const Point& center, float angle) {
    const double c = std::cos(static_cast<double>(angle));
    const double s = std::sin(static_cast<double>(angle));
    const double dx = static_cast<double>(p.x) - center.x;
    const double dy = static_cast<double>(p.y) - center.y;
    return {static_cast<float>(center.x + c * dx - s * dy),
            static_cast<float>(center.y + s * dx + c * dy)};
}

constexpr float kPi = 3.14159265358979323846f;
constexpr float kHalfPi = kPi / 2.0f;

// A rotated rectangle is unoriented: theta and theta + pi describe the same
// box, so theta is kept in [-pi/2, pi/2).
inline float normalize_theta(float theta) {
    float t = std::fmod(theta + kHalfPi, kPi);
    if (t < 0.0f) t += kPi;
    return t - kHalfPi;
}

using Quad = std::array<Point, 4>;

// Per-pixel box parameterization: distances from a point to the four box
// boundaries, measured in the box's rotated frame, plus the rotation angle.
// Channel order everywhere in this library is (d_t, d_b, d_l, d_r, theta).
struct BoxComponents {
    float d_t = 0.0f;
    float d_b = 0.0f;
    float d_l = 0.0f;
    float d_r = 0.0f;
    float theta = 0.0f;

    bool valid() const {
        return std::isfinite(d_t) && std::isfinite(d_b) && std::isfinite(d_l) &&
               std::isfinite(d_r) && std::isfinite(theta) && d_t >= 0.0f &&
               d_b >= 0.0f && d_l >= 0.0f && d_r >= 0.0f;
    }
};

struct RotatedBox {
    Point center;
    float width = 0.0f;   // extent along the box's x axis
    float height = 0.0f;  // extent along the box's y axis
    float theta = 0.0f;   // radians, normalized to [-pi/2, pi/2)

    RotatedBox() = default;
    RotatedBox(Point c, float w, float h, float t)
        : center(c), width(w), height(h), theta(normalize_theta(t)) {}

    float area() const { return width * height; }

    // Vertices clockwise (in image orientation) starting at the box's own
    // top-left corner.
    Quad quad() const {
        const float hw = width / 2.0f;
        const float hh = height / 2.0f;
        return {rotate_point({center.x - hw, center.y - hh}, center, theta),
                rotate_point({center.x + hw, center.y - hh}, center, theta),
                rotate_point({center.x + hw, center.y + hh}, center, theta),
                rotate_point({center.x - hw, center.y + hh}, center, theta)};
    }

    static RotatedBox from_quad(const Quad& q) {
        const Point c = {(q[0].x + q[1].x + q[2].x + q[3].x) / 4.0f,
                         (q[0].y + q[1].y + q[2].y + q[3].y) / 4.0f};
        const float w = 0.5f * (std::hypot(q[1].x - q[0].x, q[1].y - q[0].y) +
                                std::hypot(q[2].x - q[3].x, q[2].y - q[3].y));
        const float h = 0.5f * (std::hypot(q[3].x - q[0].x, q[3].y - q[0].y) +
                                std::hypot(q[2].x - q[1].x, q[2].y - q[1].y));
        const float t = std::atan2(q[1].y - q[0].y, q[1].x - q[0].x);
        return RotatedBox(c, w, h, t);
    }

    // True if the point lies inside the box (boundary inclusive).
    bool contains(const Point& p) const {
        const Point q = rotate_point(p, center, -theta);
        return std::abs(q.x - center.x) <= width / 2.0f &&
               std::abs(q.y - center.y) <= height / 2.0f;
    }
};

// Builds the box seen from point p: in the frame rotated by -theta about p,
// the boundaries sit at p.y - d_t, p.y + d_b, p.x - d_l, p.x + d_r.
inline RotatedBox box_from_components(const Point& p, const BoxComponents& c) {
    if (!is_finite(p) || !c.valid())
        throw std::invalid_argument("box_from_components: non-finite or negative input");
    const Point center_rot = {p.x + (c.d_r - c.d_l) / 2.0f,
                              p.y + (c.d_b - c.d_t) / 2.0f};
    const Point center = rotate_point(center_rot, p, c.theta);
    return RotatedBox(center, c.d_l + c.d_r, c.d_t + c.d_b, c.theta);
}

namespace detail {

inline double polygon_area(const std::vector<Point>& poly) {
    double a = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % n];
        a += static_cast<double>(p.x) * q.y - static_cast<double>(q.x) * p.y;
    }
    return std::abs(a) / 2.0;
}

// Sutherland-Hodgman: clip a convex subject polygon against one directed
// edge (a -> b); keeps points on the left of the edge in shoelace order.
inline std::vector<Point> clip_edge(const std::vector<Point>& subject,
                                    const Point& a, const Point& b) {
    std::vector<Point> out;
    out.reserve(subject.size() + 1);
    const double ex = static_cast<double>(b.x) - a.x;
    const double ey = static_cast<double>(b.y) - a.y;
    auto side = [&](const Point& p) {
        return ex * (static_cast<double>(p.y) - a.y) -
               ey * (static_cast<double>(p.x) - a.x);
    };
    const std::size_t n = subject.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& cur = subject[i];
        const Point& nxt = subject[(i + 1) % n];
        const double sc = side(cur);
        const double sn = side(nxt);
        if (sc >= 0.0) out.push_back(cur);
        if ((sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0)) {
            const double t = sc / (sc - sn);
            out.push_back({static_cast<float>(cur.x + t * (nxt.x - cur.x)),
                           static_cast<float>(cur.y + t * (nxt.y - cur.y))});
        }
    }
    return out;
}

// Winds the quad so its shoelace orientation is positive.
inline std::vector<Point> oriented(const Quad& q) {
    std::vector<Point> poly(q.begin(), q.end());
    double a = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        a += static_cast<double>(poly[i].x) * poly[(i + 1) % 4].y -
             static_cast<double>(poly[(i + 1) % 4].x) * poly[i].y;
    }
    if (a < 0.0) std::swap(poly[1], poly[3]);
    return poly;
}

inline double intersection_area(const Quad& qa, const Quad& qb) {
    std::vector<Point> poly = oriented(qa);
    const std::vector<Point> clip = oriented(qb);
    for (std::size_t i = 0; i < clip.size() && !poly.empty(); ++i) {
        poly = clip_edge(poly, clip[i], clip[(i + 1) % clip.size()]);
    }
    if (poly.size() < 3) return 0.0;
    return polygon_area(poly);
}

} // namespace detail

// Exact rotated-rectangle IoU via convex polygon clipping. Zero-area inputs
// give 0 (degenerate boxes never match anything).
inline float quad_iou(const RotatedBox& a, const RotatedBox& b) {
    const double area_a = static_cast<double>(a.width) * a.height;
    const double area_b = static_cast<double>(b.width) * b.height;
    if (area_a <= 0.0 || area_b <= 0.0) return 0.0f;
    const double inter = detail::intersection_area(a.quad(), b.quad());
    const double uni = area_a + area_b - inter;
    if (uni <= 0.0) return 0.0f;
    const double iou = inter / uni;
    return static_cast<float>(iou < 0.0 ? 0.0 : (iou > 1.0 ? 1.0 : iou));
}

} // namespace lafs
