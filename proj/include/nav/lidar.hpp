#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "nav/world.hpp"

namespace nav {

inline constexpr int kNumBeams = 960;
inline constexpr double kMaxRange = 6.0;
inline constexpr double kMinRange = 1e-6;
inline constexpr double kLidarFov = pi;  // 180 degrees

struct Scan {
    std::vector<double> ranges;  // size kNumBeams, each in (0, max_range]
    double max_range{kMaxRange};
    double fov{kLidarFov};
};

/// Beam j points at phi - fov/2 + j * fov/(n-1); endpoints inclusive.
inline double beam_angle(const Pose2D& pose, int beam, int n_beams = kNumBeams,
                         double fov = kLidarFov) {
    return pose.phi - fov / 2.0 + beam * fov / (n_beams - 1);
}

namespace detail {

/// Nearest positive intersection of ray (origin, dir) with a circle, or +inf.
inline double ray_circle(Vec2 origin, Vec2 dir, Vec2 center, double radius) {
    const Vec2 oc = origin - center;
    const double b = oc.dot(dir);
    const double c = oc.squared_norm() - radius * radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::numeric_limits<double>::infinity();
    const double s = std::sqrt(disc);
    const double t1 = -b - s, t2 = -b + s;
    if (t1 >= 0.0) return t1;
    if (t2 >= 0.0) return t2;
    return std::numeric_limits<double>::infinity();
}

/// Nearest positive intersection of the ray with segment [a, b], or +inf.
inline double ray_segment(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double denom = dir.cross(ab);
    if (std::abs(denom) < 1e-15) return std::numeric_limits<double>::infinity();
    const Vec2 ao = a - origin;
    const double t = ao.cross(ab) / denom;   // along ray
    const double u = ao.cross(dir) / denom;  // along segment
    if (t >= 0.0 && u >= 0.0 && u <= 1.0) return t;
    return std::numeric_limits<double>::infinity();
}

inline double ray_obstacle(Vec2 origin, Vec2 dir, const Obstacle& obs) {
    if (const auto* c = std::get_if<CircleObstacle>(&obs)) {
        return ray_circle(origin, dir, c->center, c->radius);
    }
    const auto& v = std::get<PolygonObstacle>(obs).vertices;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        best = std::min(best, ray_segment(origin, dir, v[i], v[(i + 1) % v.size()]));
    }
    return best;
}

inline double ray_bounds(Vec2 origin, Vec2 dir, const Bounds& b) {
    const Vec2 c00{b.x_min, b.y_min}, c10{b.x_max, b.y_min};
    const Vec2 c11{b.x_max, b.y_max}, c01{b.x_min, b.y_max};
    double best = std::numeric_limits<double>::infinity();
    best = std::min(best, ray_segment(origin, dir, c00, c10));
    best = std::min(best, ray_segment(origin, dir, c10, c11));
    best = std::min(best, ray_segment(origin, dir, c11, c01));
    best = std::min(best, ray_segment(origin, dir, c01, c00));
    return best;
}

}  // namespace detail

/// Casts the 180-degree fan from the robot center. Other active robots are
/// visible as discs; the scanning robot's own body is excluded.
inline Scan raycast_scan(const WorldState& world, const Robot& robot,
                         int n_beams = kNumBeams, double max_range = kMaxRange) {
    Scan scan;
    scan.max_range = max_range;
    scan.ranges.resize(n_beams);
    const Vec2 origin = robot.pose.position();
    const bool bounded = world.bounds.width() > 0.0 && world.bounds.height() > 0.0;
    for (int j = 0; j < n_beams; ++j) {
        const double a = beam_angle(robot.pose, j, n_beams);
        const Vec2 dir{std::cos(a), std::sin(a)};
        double r = max_range;
        for (const auto& obs : world.obstacles) {
            r = std::min(r, detail::ray_obstacle(origin, dir, obs));
        }
        for (const auto& other : world.robots) {
            if (other.id == robot.id || !other.active()) continue;
            r = std::min(r, detail::ray_circle(origin, dir, other.pose.position(), other.radius));
        }
        if (bounded) r = std::min(r, detail::ray_bounds(origin, dir, world.bounds));
        scan.ranges[j] = std::clamp(r, kMinRange, max_range);
    }
    return scan;
}

}  // namespace nav
