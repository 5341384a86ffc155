#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "nav/geometry.hpp"

namespace nav {

inline constexpr double kVMax = 0.6;       // m/s
inline constexpr double kOmegaMax = 0.9;   // rad/s
inline constexpr double kRobotRadius = 0.17;

/// Bounded continuous action (v, omega); clamped on construction.
struct VelocityCommand {
    double v{0.0};
    double omega{0.0};

    VelocityCommand() = default;
    VelocityCommand(double v_, double omega_)
        : v(std::clamp(v_, 0.0, kVMax)), omega(std::clamp(omega_, -kOmegaMax, kOmegaMax)) {}
};

struct CircleObstacle {
    Vec2 center;
    double radius{0.0};
};

/// Strictly convex polygon, vertices CCW.
struct PolygonObstacle {
    std::vector<Vec2> vertices;
};

using Obstacle = std::variant<CircleObstacle, PolygonObstacle>;

inline bool point_in_convex_polygon(const PolygonObstacle& poly, Vec2 p) {
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i], b = v[(i + 1) % v.size()];
        if ((b - a).cross(p - a) < 0.0) return false;
    }
    return true;
}

/// Distance from a point to the obstacle surface; 0 if inside.
inline double distance_to_obstacle(const Obstacle& obs, Vec2 p) {
    if (const auto* c = std::get_if<CircleObstacle>(&obs)) {
        return std::max(0.0, (p - c->center).norm() - c->radius);
    }
    const auto& poly = std::get<PolygonObstacle>(obs);
    if (point_in_convex_polygon(poly, p)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        best = std::min(best, distance_point_segment(p, v[i], v[(i + 1) % v.size()]));
    }
    return best;
}

enum class EpisodeStatus : std::uint8_t { Running, Arrived, Collided, Timeout };

inline const char* to_string(EpisodeStatus s) {
    switch (s) {
        case EpisodeStatus::Running: return "running";
        case EpisodeStatus::Arrived: return "arrived";
        case EpisodeStatus::Collided: return "collided";
        case EpisodeStatus::Timeout: return "timeout";
    }
    return "?";
}

struct Robot {
    int id{0};
    Pose2D pose;
    double radius{kRobotRadius};
    Vec2 goal;
    EpisodeStatus status{EpisodeStatus::Running};

    bool active() const { return status == EpisodeStatus::Running; }
};

struct Bounds {
    double x_min{0.0}, y_min{0.0}, x_max{0.0}, y_max{0.0};

    bool contains(Vec2 p, double margin = 0.0) const {
        return p.x >= x_min + margin && p.x <= x_max - margin &&
               p.y >= y_min + margin && p.y <= y_max - margin;
    }
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
};

struct WorldState {
    std::vector<Robot> robots;
    std::vector<Obstacle> obstacles;
    Bounds bounds;
    double dt{0.1};
    int step_index{0};
};

/// Euler step of the unicycle model.
inline Pose2D step_kinematics(const Pose2D& pose, const VelocityCommand& cmd, double dt) {
    Pose2D out;
    out.x = pose.x + cmd.v * std::cos(pose.phi) * dt;
    out.y = pose.y + cmd.v * std::sin(pose.phi) * dt;
    out.phi = normalize_angle(pose.phi + cmd.omega * dt);
    return out;
}

inline double distance_to_goal(const Robot& robot) {
    return (robot.goal - robot.pose.position()).norm();
}

/// True iff the robot overlaps an obstacle, another active robot, or the
/// inflated world boundary. Terminated robots are ignored.
inline bool check_collision(const WorldState& world, const Robot& robot) {
    const Vec2 p = robot.pose.position();
    if (!world.bounds.contains(p, robot.radius)) return true;
    for (const auto& obs : world.obstacles) {
        if (distance_to_obstacle(obs, p) < robot.radius) return true;
    }
    for (const auto& other : world.robots) {
        if (other.id == robot.id || !other.active()) continue;
        if ((other.pose.position() - p).norm() < robot.radius + other.radius) return true;
    }
    return false;
}

/// Advances all active robots simultaneously from the same pre-step snapshot.
inline void world_step(WorldState& world, const std::vector<VelocityCommand>& cmds) {
    std::size_t n_active = 0;
    for (const auto& r : world.robots)
        if (r.active()) ++n_active;
    if (cmds.size() != n_active) {
        throw std::invalid_argument("world_step: expected one command per active robot");
    }
    std::size_t k = 0;
    for (auto& r : world.robots) {
        if (!r.active()) continue;
        r.pose = step_kinematics(r.pose, cmds[k++], world.dt);
    }
    ++world.step_index;
}

}  // namespace nav
