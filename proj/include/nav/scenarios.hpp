#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nav/rng.hpp"
#include "nav/world.hpp"

namespace nav {

enum class ScenarioFamily { Crowd, Circle, Narrow, Cross, Corridor };

inline const char* to_string(ScenarioFamily f) {
    switch (f) {
        case ScenarioFamily::Crowd: return "crowd";
        case ScenarioFamily::Circle: return "circle";
        case ScenarioFamily::Narrow: return "narrow";
        case ScenarioFamily::Cross: return "cross";
        case ScenarioFamily::Corridor: return "corridor";
    }
    return "?";
}

inline ScenarioFamily scenario_family_from_string(const std::string& s) {
    if (s == "crowd") return ScenarioFamily::Crowd;
    if (s == "circle") return ScenarioFamily::Circle;
    if (s == "narrow") return ScenarioFamily::Narrow;
    if (s == "cross") return ScenarioFamily::Cross;
    if (s == "corridor") return ScenarioFamily::Corridor;
    throw std::invalid_argument("unknown scenario family: " + s);
}

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Geometry and randomization ranges for one scenario family. Values not
/// fixed by the family defaults are tunable via config.
struct ScenarioSpec {
    ScenarioFamily family{ScenarioFamily::Crowd};
    int n_robots{6};
    int n_obstacles{16};
    double extent{10.0};             // square region side (crowd/cross)
    double circle_radius_lo{5.0};    // circle family
    double circle_radius_hi{7.0};
    double channel_width_lo{1.0};    // narrow/corridor family
    double channel_width_hi{1.6};
    double obstacle_circle_r_lo{0.2};
    double obstacle_circle_r_hi{0.6};
    double obstacle_poly_r_lo{0.3};
    double obstacle_poly_r_hi{0.8};
    double goal_dist_lo{0.0};        // 0/0 = unconstrained goal distance
    double goal_dist_hi{0.0};
    int curriculum_stage{0};

    bool goal_dist_constrained() const { return goal_dist_hi > 0.0; }
};

/// Family defaults mirroring the test configurations.
inline ScenarioSpec default_spec(ScenarioFamily family) {
    ScenarioSpec s;
    s.family = family;
    switch (family) {
        case ScenarioFamily::Crowd:
            s.n_robots = 6; s.n_obstacles = 16; s.extent = 10.0;
            break;
        case ScenarioFamily::Circle:
            s.n_robots = 15; s.n_obstacles = 8;
            s.circle_radius_lo = 5.0; s.circle_radius_hi = 7.0;
            break;
        case ScenarioFamily::Narrow:
            s.n_robots = 6; s.n_obstacles = 3; s.extent = 10.0;
            break;
        case ScenarioFamily::Cross:
            s.n_robots = 8; s.n_obstacles = 0; s.extent = 12.0;
            break;
        case ScenarioFamily::Corridor:
            s.n_robots = 6; s.n_obstacles = 0; s.extent = 12.0;
            break;
    }
    return s;
}

namespace detail {

inline constexpr int kMaxAttempts = 1000;
inline constexpr double kClearance = 2.0 * kRobotRadius;

inline Obstacle random_obstacle(Rng& rng, const ScenarioSpec& spec, Vec2 center) {
    if (rng.uniform() < 0.5) {
        return CircleObstacle{center,
                              rng.uniform(spec.obstacle_circle_r_lo, spec.obstacle_circle_r_hi)};
    }
    // Convex polygon: jittered angles on a circumradius, CCW.
    const int n = 3 + static_cast<int>(rng.uniform_int(4));
    const double r = rng.uniform(spec.obstacle_poly_r_lo, spec.obstacle_poly_r_hi);
    const double a0 = rng.uniform(0.0, 2.0 * pi);
    PolygonObstacle poly;
    for (int i = 0; i < n; ++i) {
        const double a = a0 + 2.0 * pi * (i + 0.3 * rng.uniform()) / n;
        poly.vertices.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
    }
    return poly;
}

inline double clearance_to_obstacles(const std::vector<Obstacle>& obstacles, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles) best = std::min(best, distance_to_obstacle(o, p));
    return best;
}

inline bool far_from_all(const std::vector<Vec2>& points, Vec2 p, double min_dist) {
    for (const auto& q : points) {
        if ((q - p).norm() < min_dist) return false;
    }
    return true;
}

/// Samples a point inside `bounds` (with margin) keeping clearance from
/// obstacles and previously placed points.
inline Vec2 place_point(Rng& rng, const Bounds& bounds, const std::vector<Obstacle>& obstacles,
                        const std::vector<Vec2>& taken, double margin) {
    for (int a = 0; a < kMaxAttempts; ++a) {
        Vec2 p{rng.uniform(bounds.x_min + margin, bounds.x_max - margin),
               rng.uniform(bounds.y_min + margin, bounds.y_max - margin)};
        if (clearance_to_obstacles(obstacles, p) < kRobotRadius + 0.05) continue;
        if (!far_from_all(taken, p, kClearance)) continue;
        return p;
    }
    throw ScenarioError("placement failed after rejection-sampling attempts");
}

inline Vec2 place_goal(Rng& rng, const Bounds& bounds, const std::vector<Obstacle>& obstacles,
                       const std::vector<Vec2>& taken_goals, Vec2 start,
                       const ScenarioSpec& spec, double margin) {
    for (int a = 0; a < kMaxAttempts; ++a) {
        Vec2 g;
        if (spec.goal_dist_constrained()) {
            const double d = rng.uniform(spec.goal_dist_lo, spec.goal_dist_hi);
            const double th = rng.uniform(0.0, 2.0 * pi);
            g = {start.x + d * std::cos(th), start.y + d * std::sin(th)};
            if (!bounds.contains(g, margin)) continue;
        } else {
            g = {rng.uniform(bounds.x_min + margin, bounds.x_max - margin),
                 rng.uniform(bounds.y_min + margin, bounds.y_max - margin)};
        }
        if (clearance_to_obstacles(obstacles, g) < kRobotRadius + 0.05) continue;
        if (!far_from_all(taken_goals, g, kClearance)) continue;
        return g;
    }
    throw ScenarioError("goal placement failed after rejection-sampling attempts");
}

inline Robot make_robot(int id, Vec2 start, Vec2 goal, double heading) {
    Robot r;
    r.id = id;
    r.pose = {start.x, start.y, normalize_angle(heading)};
    r.goal = goal;
    return r;
}

inline void verify_collision_free(const WorldState& world) {
    for (const auto& r : world.robots) {
        if (check_collision(world, r)) {
            throw ScenarioError("generated layout has an initial collision");
        }
    }
}

/// Axis-aligned rectangle as a CCW convex polygon.
inline PolygonObstacle rect(double x0, double y0, double x1, double y1) {
    return PolygonObstacle{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

/// True if the channel opening keeps a contiguous free gap wide enough for
/// a robot to pass.
inline bool channel_passable(const std::vector<Obstacle>& obstacles, Vec2 a, Vec2 b) {
    constexpr int kSamples = 64;
    int run = 0, best = 0;
    for (int i = 0; i <= kSamples; ++i) {
        const Vec2 p = a + (static_cast<double>(i) / kSamples) * (b - a);
        if (clearance_to_obstacles(obstacles, p) > kRobotRadius + 0.05) {
            best = std::max(best, ++run);
        } else {
            run = 0;
        }
    }
    const double step = (b - a).norm() / kSamples;
    return best * step >= 2.0 * kRobotRadius;
}

}  // namespace detail

inline WorldState gen_crowd(const ScenarioSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    for (int attempt = 0; attempt < 20; ++attempt) {
        try {
            WorldState world;
            const double h = spec.extent / 2.0;
            world.bounds = {-h, -h, h, h};
            for (int i = 0; i < spec.n_obstacles; ++i) {
                Vec2 c{rng.uniform(-h + 0.5, h - 0.5), rng.uniform(-h + 0.5, h - 0.5)};
                world.obstacles.push_back(detail::random_obstacle(rng, spec, c));
            }
            std::vector<Vec2> starts, goals;
            for (int i = 0; i < spec.n_robots; ++i) {
                starts.push_back(
                    detail::place_point(rng, world.bounds, world.obstacles, starts, 0.3));
            }
            for (int i = 0; i < spec.n_robots; ++i) {
                goals.push_back(detail::place_goal(rng, world.bounds, world.obstacles, goals,
                                                   starts[i], spec, 0.3));
            }
            for (int i = 0; i < spec.n_robots; ++i) {
                world.robots.push_back(
                    detail::make_robot(i, starts[i], goals[i], rng.uniform(-pi, pi)));
            }
            detail::verify_collision_free(world);
            return world;
        } catch (const ScenarioError&) {
            if (attempt == 19) throw;
        }
    }
    throw ScenarioError("unreachable");
}

/// Robots evenly spaced on a circle, goals antipodal, obstacles inside.
inline WorldState gen_circle(const ScenarioSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    for (int attempt = 0; attempt < 20; ++attempt) {
        try {
            WorldState world;
            const double radius = rng.uniform(spec.circle_radius_lo, spec.circle_radius_hi);
            const double h = radius + 1.0;
            world.bounds = {-h, -h, h, h};
            std::vector<Vec2> starts;
            for (int i = 0; i < spec.n_robots; ++i) {
                const double a = 2.0 * pi * i / spec.n_robots;
                starts.push_back({radius * std::cos(a), radius * std::sin(a)});
            }
            for (int i = 0; i < spec.n_obstacles; ++i) {
                for (int a = 0;; ++a) {
                    if (a >= detail::kMaxAttempts)
                        throw ScenarioError("circle obstacle placement failed");
                    const double rr = rng.uniform(0.0, radius - 1.2);
                    const double th = rng.uniform(0.0, 2.0 * pi);
                    const Vec2 c{rr * std::cos(th), rr * std::sin(th)};
                    bool clear = true;
                    for (const auto& s : starts) {
                        if ((s - c).norm() < spec.obstacle_poly_r_hi + 0.5) { clear = false; break; }
                    }
                    if (!clear) continue;
                    world.obstacles.push_back(detail::random_obstacle(rng, spec, c));
                    break;
                }
            }
            for (int i = 0; i < spec.n_robots; ++i) {
                const Vec2 goal = -1.0 * starts[i];  // antipodal, through the center
                const double heading = std::atan2(goal.y - starts[i].y, goal.x - starts[i].x);
                world.robots.push_back(detail::make_robot(i, starts[i], goal, heading));
            }
            detail::verify_collision_free(world);
            return world;
        } catch (const ScenarioError&) {
            if (attempt == 19) throw;
        }
    }
    throw ScenarioError("unreachable");
}

/// Two open regions split by a wall with a channel opening; robots cross it.
inline WorldState gen_narrow(const ScenarioSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    for (int attempt = 0; attempt < 20; ++attempt) {
        try {
            WorldState world;
            const double h = spec.extent / 2.0;
            world.bounds = {-h, -h, h, h};
            const double cw = rng.uniform(spec.channel_width_lo, spec.channel_width_hi);
            const double cx = rng.uniform(-h / 2.0, h / 2.0);  // channel center
            constexpr double wall_t = 0.2;
            world.obstacles.push_back(
                detail::rect(-h, -wall_t / 2.0, cx - cw / 2.0, wall_t / 2.0));
            world.obstacles.push_back(
                detail::rect(cx + cw / 2.0, -wall_t / 2.0, h, wall_t / 2.0));
            for (int i = 0; i < spec.n_obstacles; ++i) {
                for (int a = 0;; ++a) {
                    if (a >= detail::kMaxAttempts)
                        throw ScenarioError("narrow obstacle placement failed");
                    Vec2 c{rng.uniform(-h + 0.5, h - 0.5), rng.uniform(-h + 0.5, h - 0.5)};
                    world.obstacles.push_back(detail::random_obstacle(rng, spec, c));
                    if (!detail::channel_passable(world.obstacles,
                                                  {cx - cw / 2.0, 0.0}, {cx + cw / 2.0, 0.0})) {
                        world.obstacles.pop_back();  // would block the channel
                        continue;
                    }
                    break;
                }
            }
            const Bounds south{-h, -h, h, -wall_t / 2.0 - 0.3};
            const Bounds north{-h, wall_t / 2.0 + 0.3, h, h};
            std::vector<Vec2> starts, goals;
            for (int i = 0; i < spec.n_robots; ++i) {
                starts.push_back(detail::place_point(rng, south, world.obstacles, starts, 0.3));
            }
            for (int i = 0; i < spec.n_robots; ++i) {
                // Stage-1 curriculum goals may be too close to reach across the
                // wall; keep them on the start side in that case.
                const bool near_goal =
                    spec.goal_dist_constrained() &&
                    spec.goal_dist_hi < std::abs(starts[i].y) + 0.5;
                const Bounds& side = near_goal ? south : north;
                goals.push_back(detail::place_goal(rng, side, world.obstacles, goals, starts[i],
                                                   spec, 0.3));
            }
            for (int i = 0; i < spec.n_robots; ++i) {
                world.robots.push_back(
                    detail::make_robot(i, starts[i], goals[i], rng.uniform(-pi, pi)));
            }
            detail::verify_collision_free(world);
            return world;
        } catch (const ScenarioError&) {
            if (attempt == 19) throw;
        }
    }
    throw ScenarioError("unreachable");
}

/// Two orthogonal groups whose straight-line paths intersect in the center.
inline WorldState gen_cross(const ScenarioSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    for (int attempt = 0; attempt < 20; ++attempt) {
        try {
            WorldState world;
            const double h = spec.extent / 2.0;
            world.bounds = {-h, -h, h, h};
            const int per_group = spec.n_robots / 2;
            const double lane = h - 2.0;
            std::vector<Vec2> starts, goals;
            for (int i = 0; i < per_group; ++i) {  // west -> east
                const double y = (i - (per_group - 1) / 2.0) * 0.9 + rng.uniform(-0.2, 0.2);
                starts.push_back({-lane + rng.uniform(-0.3, 0.3), y});
                goals.push_back({lane + rng.uniform(-0.3, 0.3), y + rng.uniform(-0.2, 0.2)});
            }
            for (int i = 0; i < spec.n_robots - per_group; ++i) {  // south -> north
                const double x = (i - (per_group - 1) / 2.0) * 0.9 + rng.uniform(-0.2, 0.2);
                starts.push_back({x, -lane + rng.uniform(-0.3, 0.3)});
                goals.push_back({x + rng.uniform(-0.2, 0.2), lane + rng.uniform(-0.3, 0.3)});
            }
            for (int i = 0; i < spec.n_robots; ++i) {
                const double heading =
                    std::atan2(goals[i].y - starts[i].y, goals[i].x - starts[i].x);
                world.robots.push_back(detail::make_robot(i, starts[i], goals[i], heading));
            }
            detail::verify_collision_free(world);
            return world;
        } catch (const ScenarioError&) {
            if (attempt == 19) throw;
        }
    }
    throw ScenarioError("unreachable");
}

/// Two open rooms joined by a narrow corridor; the groups swap sides.
inline WorldState gen_corridor(const ScenarioSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    for (int attempt = 0; attempt < 20; ++attempt) {
        try {
            WorldState world;
            const double h = spec.extent / 2.0;
            const double room_w = spec.extent / 3.0;       // each room's width
            const double half_h = spec.extent / 4.0;
            world.bounds = {-h, -half_h, h, half_h};
            const double cw = rng.uniform(spec.channel_width_lo, spec.channel_width_hi);
            const double b = h - room_w;                   // corridor spans [-b, b]
            world.obstacles.push_back(detail::rect(-b, cw / 2.0, b, half_h));
            world.obstacles.push_back(detail::rect(-b, -half_h, b, -cw / 2.0));
            const Bounds left{-h, -half_h, -b - 0.3, half_h};
            const Bounds right{b + 0.3, -half_h, h, half_h};
            const int per_group = spec.n_robots / 2;
            std::vector<Vec2> starts, goals;
            for (int i = 0; i < spec.n_robots; ++i) {
                const bool left_group = i < per_group;
                starts.push_back(detail::place_point(rng, left_group ? left : right,
                                                     world.obstacles, starts, 0.3));
            }
            for (int i = 0; i < spec.n_robots; ++i) {
                const bool left_group = i < per_group;
                goals.push_back(detail::place_goal(rng, left_group ? right : left,
                                                   world.obstacles, goals, starts[i], spec, 0.3));
            }
            for (int i = 0; i < spec.n_robots; ++i) {
                const double heading =
                    std::atan2(goals[i].y - starts[i].y, goals[i].x - starts[i].x);
                world.robots.push_back(detail::make_robot(i, starts[i], goals[i], heading));
            }
            detail::verify_collision_free(world);
            return world;
        } catch (const ScenarioError&) {
            if (attempt == 19) throw;
        }
    }
    throw ScenarioError("unreachable");
}

inline WorldState generate_world(const ScenarioSpec& spec, std::uint64_t seed) {
    switch (spec.family) {
        case ScenarioFamily::Crowd: return gen_crowd(spec, seed);
        case ScenarioFamily::Circle: return gen_circle(spec, seed);
        case ScenarioFamily::Narrow: return gen_narrow(spec, seed);
        case ScenarioFamily::Cross: return gen_cross(spec, seed);
        case ScenarioFamily::Corridor: return gen_corridor(spec, seed);
    }
    throw std::invalid_argument("generate_world: bad family");
}

enum class Comb { Comb1, Comb2 };

/// Training mixtures: each parallel env gets one constituent family by
/// index parity (half each).
inline ScenarioSpec comb_sampler(Comb comb, int env_index) {
    const ScenarioFamily family =
        (env_index % 2 == 0) ? ScenarioFamily::Crowd
                             : (comb == Comb::Comb1 ? ScenarioFamily::Circle
                                                    : ScenarioFamily::Narrow);
    return default_spec(family);
}

struct GoalDistRange {
    double lo{0.0};
    double hi{0.0};
};

/// Two-stage curriculum (Comb2 only): near goals first, far goals later.
inline GoalDistRange curriculum_stage(int epoch) {
    return epoch < 200 ? GoalDistRange{1.0, 4.0} : GoalDistRange{4.0, 10.0};
}

}  // namespace nav
