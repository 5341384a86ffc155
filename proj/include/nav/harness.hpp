#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nav/config.hpp"
#include "nav/env.hpp"
#include "nav/policy.hpp"

namespace nav {

/// One line-delimited trajectory record (one per robot per step).
struct TrajectoryRecord {
    int episode{0};
    int step_index{0};
    int robot_id{0};
    Pose2D pose;
    VelocityCommand command;
    double reward{0.0};
    EpisodeStatus status{EpisodeStatus::Running};
};

struct TrajectoryLog {
    std::vector<TrajectoryRecord> records;
};

inline nlohmann::json to_json(const TrajectoryRecord& r) {
    return {{"episode", r.episode},
            {"step", r.step_index},
            {"robot", r.robot_id},
            {"x", r.pose.x},
            {"y", r.pose.y},
            {"phi", r.pose.phi},
            {"v", r.command.v},
            {"omega", r.command.omega},
            {"reward", r.reward},
            {"status", std::string(to_string(r.status))}};
}

inline EpisodeStatus status_from_string(const std::string& s) {
    if (s == "running") return EpisodeStatus::Running;
    if (s == "arrived") return EpisodeStatus::Arrived;
    if (s == "collided") return EpisodeStatus::Collided;
    if (s == "timeout") return EpisodeStatus::Timeout;
    throw std::invalid_argument("unknown status: " + s);
}

inline void write_trajectory_log(std::ostream& os, const TrajectoryLog& log) {
    for (const auto& r : log.records) os << to_json(r).dump() << "\n";
}

inline TrajectoryLog read_trajectory_log(std::istream& is) {
    TrajectoryLog log;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        TrajectoryRecord r;
        r.episode = j.value("episode", 0);
        r.step_index = j.at("step").get<int>();
        r.robot_id = j.at("robot").get<int>();
        r.pose = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("phi").get<double>()};
        r.command = VelocityCommand(j.at("v").get<double>(), j.at("omega").get<double>());
        r.reward = j.at("reward").get<double>();
        r.status = status_from_string(j.at("status").get<std::string>());
        log.records.push_back(r);
    }
    return log;
}

struct EpisodeSummary {
    int episode{0};
    int robots{0};
    int arrived{0};
    int collided{0};
    int timeout{0};
};

/// Evaluation metrics: arrive rate, mean |omega|, mean trajectory length.
struct EvalReport {
    std::string scenario;
    int episodes{0};
    int total_robots{0};
    int arrived_robots{0};
    int collided_robots{0};
    int timeout_robots{0};
    double ar{0.0};           // per-robot arrive rate (primary)
    double ar_episode{0.0};   // episodes where every robot arrived
    double aav{0.0};          // mean |commanded omega| over all steps
    double atd{0.0};          // mean path length over arrived robots
    std::vector<EpisodeSummary> per_episode;
};

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json eps = nlohmann::json::array();
    for (const auto& e : r.per_episode) {
        eps.push_back({{"episode", e.episode},
                       {"robots", e.robots},
                       {"arrived", e.arrived},
                       {"collided", e.collided},
                       {"timeout", e.timeout}});
    }
    return {{"schema", 1},
            {"scenario", r.scenario},
            {"episodes", r.episodes},
            {"total_robots", r.total_robots},
            {"arrived_robots", r.arrived_robots},
            {"collided_robots", r.collided_robots},
            {"timeout_robots", r.timeout_robots},
            {"ar", r.ar},
            {"ar_episode", r.ar_episode},
            {"aav", r.aav},
            {"atd", r.atd},
            {"per_episode", eps}};
}

/// Accumulates the three metrics online, step by step.
class MetricsAccumulator {
public:
    void begin_episode(int n_robots) {
        dist_.assign(n_robots, 0.0);
        prev_.assign(n_robots, Pose2D{});
        has_prev_.assign(n_robots, false);
        summary_ = EpisodeSummary{};
        summary_.episode = episode_index_++;
        summary_.robots = n_robots;
    }

    void record_pose(int robot, const Pose2D& pose) {
        if (has_prev_[robot]) {
            dist_[robot] += (pose.position() - prev_[robot].position()).norm();
        }
        prev_[robot] = pose;
        has_prev_[robot] = true;
    }

    void record_command(const VelocityCommand& cmd) {
        abs_omega_sum_ += std::abs(cmd.omega);
        ++command_count_;
    }

    void record_terminal(int robot, EpisodeStatus status) {
        switch (status) {
            case EpisodeStatus::Arrived:
                ++summary_.arrived;
                arrived_dist_sum_ += dist_[robot];
                ++arrived_count_;
                break;
            case EpisodeStatus::Collided: ++summary_.collided; break;
            case EpisodeStatus::Timeout: ++summary_.timeout; break;
            case EpisodeStatus::Running: break;
        }
    }

    EpisodeSummary end_episode() { return summary_; }

    void finalize(EvalReport& report) const {
        report.ar = report.total_robots ? static_cast<double>(report.arrived_robots) /
                                              report.total_robots
                                        : 0.0;
        int full = 0;
        for (const auto& e : report.per_episode) {
            if (e.arrived == e.robots) ++full;
        }
        report.ar_episode =
            report.episodes ? static_cast<double>(full) / report.episodes : 0.0;
        report.aav = command_count_ ? abs_omega_sum_ / command_count_ : 0.0;
        report.atd = arrived_count_ ? arrived_dist_sum_ / arrived_count_ : 0.0;
    }

private:
    std::vector<double> dist_;
    std::vector<Pose2D> prev_;
    std::vector<char> has_prev_;
    EpisodeSummary summary_;
    int episode_index_{0};
    double abs_omega_sum_{0.0};
    long command_count_{0};
    double arrived_dist_sum_{0.0};
    long arrived_count_{0};
};

/// Recomputes the same metrics from a saved trajectory log.
inline EvalReport metrics_from_log(const TrajectoryLog& log, const std::string& scenario) {
    if (log.records.empty()) throw std::invalid_argument("metrics_from_log: empty log");
    EvalReport report;
    report.scenario = scenario;
    MetricsAccumulator acc;
    int cur_episode = -1;
    // Records are grouped by episode; robots terminate individually.
    int n_robots = 0;
    for (const auto& r : log.records) n_robots = std::max(n_robots, r.robot_id + 1);
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const auto& r = log.records[i];
        if (r.episode != cur_episode) {
            if (cur_episode >= 0) report.per_episode.push_back(acc.end_episode());
            acc.begin_episode(n_robots);
            cur_episode = r.episode;
            ++report.episodes;
            report.total_robots += n_robots;
        }
        if (r.step_index > 0) acc.record_command(r.command);
        acc.record_pose(r.robot_id, r.pose);
        if (r.status != EpisodeStatus::Running) {
            acc.record_terminal(r.robot_id, r.status);
            if (r.status == EpisodeStatus::Arrived) ++report.arrived_robots;
            if (r.status == EpisodeStatus::Collided) ++report.collided_robots;
            if (r.status == EpisodeStatus::Timeout) ++report.timeout_robots;
        }
    }
    report.per_episode.push_back(acc.end_episode());
    acc.finalize(report);
    return report;
}

/// Runs greedy-mean episodes and aggregates the three metrics. When `log`
/// is non-null the full trajectory stream is appended to it.
template <typename T>
EvalReport evaluate(GaussianPolicy<T>& policy, const EnvConfig& env_cfg,
                    const ScenarioSpec& spec, int n_episodes, std::uint64_t seed,
                    TrajectoryLog* log = nullptr) {
    EvalReport report;
    report.scenario = to_string(spec.family);
    MetricsAccumulator acc;
    Rng rng(seed);
    for (int ep = 0; ep < n_episodes; ++ep) {
        Env env(env_cfg, spec);
        auto obs = env.reset(rng.next());
        const int n = env.num_robots();
        acc.begin_episode(n);
        report.total_robots += n;
        ++report.episodes;
        for (int i = 0; i < n; ++i) {
            acc.record_pose(i, env.world().robots[i].pose);
            if (log) {
                log->records.push_back({ep, 0, i, env.world().robots[i].pose, {}, 0.0,
                                        EpisodeStatus::Running});
            }
        }
        while (!env.done()) {
            std::vector<int> acting;
            for (int i = 0; i < n; ++i) {
                if (env.world().robots[i].active()) acting.push_back(i);
            }
            std::vector<VelocityCommand> cmds;
            cmds.reserve(acting.size());
            std::vector<VelocityCommand> cmd_of(n);
            for (int i : acting) {
                std::vector<T> maps(obs[i].maps.begin(), obs[i].maps.end());
                std::array<T, 3> goal{static_cast<T>(obs[i].rel_goal[0]),
                                      static_cast<T>(obs[i].rel_goal[1]),
                                      static_cast<T>(obs[i].rel_goal[2])};
                const auto dist = policy.forward_policy(maps.data(), goal.data());
                const auto cmd = mean_action(dist);
                cmds.push_back(cmd);
                cmd_of[i] = cmd;
                acc.record_command(cmd);
            }
            auto results = env.step(cmds);
            for (std::size_t k = 0; k < acting.size(); ++k) {
                const int i = acting[k];
                const auto& robot = env.world().robots[i];
                acc.record_pose(i, robot.pose);
                if (log) {
                    log->records.push_back({ep, env.world().step_index, i, robot.pose, cmd_of[i],
                                            results[k].reward.total, results[k].status});
                }
                if (results[k].status != EpisodeStatus::Running) {
                    acc.record_terminal(i, results[k].status);
                    if (results[k].status == EpisodeStatus::Arrived) ++report.arrived_robots;
                    if (results[k].status == EpisodeStatus::Collided) ++report.collided_robots;
                    if (results[k].status == EpisodeStatus::Timeout) ++report.timeout_robots;
                }
                obs[i] = std::move(results[k].obs);
            }
        }
        report.per_episode.push_back(acc.end_episode());
    }
    acc.finalize(report);
    return report;
}

}  // namespace nav
