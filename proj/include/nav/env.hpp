#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "nav/encoders.hpp"
#include "nav/scenarios.hpp"

namespace nav {

enum class Encoder { LogMap, GridMap, AngularMap, Raw };

inline const char* to_string(Encoder e) {
    switch (e) {
        case Encoder::LogMap: return "logmap";
        case Encoder::GridMap: return "gridmap";
        case Encoder::AngularMap: return "angularmap";
        case Encoder::Raw: return "raw";
    }
    return "?";
}

inline Encoder encoder_from_string(const std::string& s) {
    if (s == "logmap") return Encoder::LogMap;
    if (s == "gridmap") return Encoder::GridMap;
    if (s == "angularmap") return Encoder::AngularMap;
    if (s == "raw") return Encoder::Raw;
    throw std::invalid_argument("unknown encoder: " + s);
}

/// Per-frame feature length for an encoder.
inline int frame_size(Encoder e) {
    switch (e) {
        case Encoder::LogMap:
        case Encoder::GridMap: return kMapSize * kMapSize;
        case Encoder::AngularMap: return kNumSectors;
        case Encoder::Raw: return kNumBeams;
    }
    return 0;
}

/// True for image-shaped encoders (2D conv trunk), false for 1D ones.
inline bool encoder_is_2d(Encoder e) {
    return e == Encoder::LogMap || e == Encoder::GridMap;
}

struct EnvConfig {
    double r_arrive{500.0};
    double r_collision{-500.0};
    double r_step{-5.0};
    double tau{200.0};
    double d_gmin{0.3};
    int max_steps{400};
    double dt{0.1};
    Encoder encoder{Encoder::LogMap};
};

struct Observation {
    std::vector<float> maps;            // FrameStack::kFrames x frame_size
    std::array<float, 3> rel_goal{};    // (x, y, phi) in the body frame
};

struct RewardBreakdown {
    double r_a{0.0};
    double r_c{0.0};
    double r_d{0.0};
    double r_s{0.0};
    double total{0.0};
};

/// Goal expressed in the robot body frame (x forward, y left);
/// phi = atan2(y, x).
inline std::array<double, 3> relative_goal(const Pose2D& pose, Vec2 goal) {
    const Vec2 b = world_to_body(pose, goal);
    return {b.x, b.y, std::atan2(b.y, b.x)};
}

inline RewardBreakdown compute_reward(double prev_dist, double cur_dist, EpisodeStatus status,
                                      const EnvConfig& cfg) {
    RewardBreakdown r;
    r.r_a = status == EpisodeStatus::Arrived ? cfg.r_arrive : 0.0;
    r.r_c = status == EpisodeStatus::Collided ? cfg.r_collision : 0.0;
    r.r_d = cfg.tau * (prev_dist - cur_dist);
    r.r_s = cfg.r_step;
    r.total = r.r_a + r.r_c + r.r_d + r.r_s;
    return r;
}

struct StepResult {
    int robot_id{0};
    Observation obs;
    RewardBreakdown reward;
    EpisodeStatus status{EpisodeStatus::Running};
};

/// Per-robot POMDP wrapper over one world instance. Single-threaded;
/// independent instances may run concurrently.
class Env {
public:
    Env(EnvConfig cfg, ScenarioSpec spec) : cfg_(cfg), spec_(spec), table_(ring_table()) {}

    const EnvConfig& config() const { return cfg_; }
    const ScenarioSpec& spec() const { return spec_; }
    ScenarioSpec& spec() { return spec_; }
    const WorldState& world() const { return world_; }
    WorldState& world() { return world_; }
    int num_robots() const { return static_cast<int>(world_.robots.size()); }

    bool done() const {
        for (const auto& r : world_.robots) {
            if (r.active()) return false;
        }
        return world_.robots.empty() ? false : true;
    }

    std::vector<Observation> reset(std::uint64_t seed) {
        world_ = generate_world(spec_, seed);
        world_.dt = cfg_.dt;
        const int n = num_robots();
        stacks_.assign(n, FrameStack{});
        prev_dist_.resize(n);
        std::vector<Observation> obs(n);
        for (int i = 0; i < n; ++i) {
            const Robot& r = world_.robots[i];
            prev_dist_[i] = distance_to_goal(r);
            stacks_[i].reset(encode(r));
            obs[i] = observe(i);
        }
        return obs;
    }

    /// Advances all active robots; one command per active robot, in robot
    /// order. Returns one result per robot that was active before the step.
    std::vector<StepResult> step(const std::vector<VelocityCommand>& cmds) {
        if (done()) throw std::logic_error("Env::step: episode already terminated");
        std::vector<int> acting;
        for (int i = 0; i < num_robots(); ++i) {
            if (world_.robots[i].active()) acting.push_back(i);
        }
        world_step(world_, cmds);
        std::vector<StepResult> results;
        results.reserve(acting.size());
        for (int i : acting) {
            Robot& r = world_.robots[i];
            const double cur = distance_to_goal(r);
            if (cur < cfg_.d_gmin) {
                r.status = EpisodeStatus::Arrived;
            } else if (check_collision(world_, r)) {
                r.status = EpisodeStatus::Collided;
            } else if (world_.step_index >= cfg_.max_steps) {
                r.status = EpisodeStatus::Timeout;
            }
            stacks_[i].push(encode(r));
            StepResult res;
            res.robot_id = r.id;
            res.reward = compute_reward(prev_dist_[i], cur, r.status, cfg_);
            res.status = r.status;
            res.obs = observe(i);
            prev_dist_[i] = cur;
            results.push_back(std::move(res));
        }
        return results;
    }

private:
    std::vector<float> encode(const Robot& robot) const {
        const Scan scan = raycast_scan(world_, robot);
        switch (cfg_.encoder) {
            case Encoder::LogMap: return build_logmap(scan, table_).image;
            case Encoder::GridMap: return build_gridmap(scan).image;
            case Encoder::AngularMap: {
                const auto a = build_angularmap(scan);
                return {a.begin(), a.end()};
            }
            case Encoder::Raw: {
                std::vector<float> out(scan.ranges.size());
                for (std::size_t j = 0; j < scan.ranges.size(); ++j) {
                    out[j] = static_cast<float>(scan.ranges[j] / scan.max_range);
                }
                return out;
            }
        }
        throw std::logic_error("bad encoder");
    }

    Observation observe(int i) const {
        Observation o;
        o.maps = stacks_[i].flat();
        const auto rg = relative_goal(world_.robots[i].pose, world_.robots[i].goal);
        o.rel_goal = {static_cast<float>(rg[0]), static_cast<float>(rg[1]),
                      static_cast<float>(rg[2])};
        return o;
    }

    EnvConfig cfg_;
    ScenarioSpec spec_;
    RingTable table_;
    WorldState world_;
    std::vector<FrameStack> stacks_;
    std::vector<double> prev_dist_;
};

}  // namespace nav
