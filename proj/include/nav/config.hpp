#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "nav/checkpoint.hpp"
#include "nav/env.hpp"
#include "nav/policy.hpp"

namespace nav {

/// Training hyper-parameters; the seven published values are the defaults.
struct TrainConfig {
    double lr_policy{0.0003};
    double lr_value{0.001};
    double gamma{0.99};
    int steps_per_epoch{2000};
    double clip_ratio{0.2};
    double gae_lambda{0.95};
    int epochs{800};
    int n_parallel_envs{4};
    int update_epochs{10};
    int minibatch_size{256};
    int eval_every{20};
    int eval_episodes{20};
    double entropy_coef{0.0};
    double max_grad_norm{0.5};  // <= 0 disables clipping
    bool curriculum{false};     // two-stage goal distances (Comb2)
};

/// Everything one run needs; loadable from a single JSON config file.
struct RunConfig {
    int schema{1};
    EnvConfig env;
    ScenarioSpec scenario{default_spec(ScenarioFamily::Crowd)};
    std::optional<Comb> comb;  // set: parallel envs alternate the combo families
    TrainConfig train;
    // network width knobs (architecture shape is fixed)
    int c1{32}, c2{64}, c3{64}, fc{512};
};

inline NetConfig make_net_config(const RunConfig& cfg) {
    NetConfig n;
    n.conv2d = encoder_is_2d(cfg.env.encoder);
    n.in_frames = FrameStack::kFrames;
    n.map_size = n.conv2d ? kMapSize : frame_size(cfg.env.encoder);
    n.c1 = cfg.c1;
    n.c2 = cfg.c2;
    n.c3 = cfg.c3;
    n.fc = cfg.fc;
    return n;
}

/// Hash tying checkpoints to the architecture and encoder they were
/// trained with.
inline std::uint64_t config_hash(const RunConfig& cfg) {
    std::string key = std::string("encoder=") + to_string(cfg.env.encoder) +
                      ";c1=" + std::to_string(cfg.c1) + ";c2=" + std::to_string(cfg.c2) +
                      ";c3=" + std::to_string(cfg.c3) + ";fc=" + std::to_string(cfg.fc);
    return fnv1a64(key);
}

namespace detail {

template <typename T>
void maybe_get(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline void from_json_env(const nlohmann::json& j, EnvConfig& e, ScenarioSpec& s) {
    detail::maybe_get(j, "r_arrive", e.r_arrive);
    detail::maybe_get(j, "r_collision", e.r_collision);
    detail::maybe_get(j, "r_step", e.r_step);
    detail::maybe_get(j, "tau", e.tau);
    detail::maybe_get(j, "d_gmin", e.d_gmin);
    detail::maybe_get(j, "max_steps", e.max_steps);
    detail::maybe_get(j, "dt", e.dt);
    if (j.contains("encoder")) e.encoder = encoder_from_string(j.at("encoder").get<std::string>());
    if (j.contains("scenario")) {
        s = default_spec(scenario_family_from_string(j.at("scenario").get<std::string>()));
    }
}

inline void from_json_scenario(const nlohmann::json& j, ScenarioSpec& s) {
    if (j.contains("family")) {
        const auto fam = scenario_family_from_string(j.at("family").get<std::string>());
        s = default_spec(fam);
    }
    detail::maybe_get(j, "n_robots", s.n_robots);
    detail::maybe_get(j, "n_obstacles", s.n_obstacles);
    detail::maybe_get(j, "extent", s.extent);
    detail::maybe_get(j, "circle_radius_lo", s.circle_radius_lo);
    detail::maybe_get(j, "circle_radius_hi", s.circle_radius_hi);
    detail::maybe_get(j, "channel_width_lo", s.channel_width_lo);
    detail::maybe_get(j, "channel_width_hi", s.channel_width_hi);
    detail::maybe_get(j, "obstacle_circle_r_lo", s.obstacle_circle_r_lo);
    detail::maybe_get(j, "obstacle_circle_r_hi", s.obstacle_circle_r_hi);
    detail::maybe_get(j, "obstacle_poly_r_lo", s.obstacle_poly_r_lo);
    detail::maybe_get(j, "obstacle_poly_r_hi", s.obstacle_poly_r_hi);
    detail::maybe_get(j, "goal_dist_lo", s.goal_dist_lo);
    detail::maybe_get(j, "goal_dist_hi", s.goal_dist_hi);
}

inline void from_json_train(const nlohmann::json& j, TrainConfig& t) {
    detail::maybe_get(j, "lr_policy", t.lr_policy);
    detail::maybe_get(j, "lr_value", t.lr_value);
    detail::maybe_get(j, "gamma", t.gamma);
    detail::maybe_get(j, "steps_per_epoch", t.steps_per_epoch);
    detail::maybe_get(j, "clip_ratio", t.clip_ratio);
    detail::maybe_get(j, "gae_lambda", t.gae_lambda);
    detail::maybe_get(j, "epochs", t.epochs);
    detail::maybe_get(j, "n_parallel_envs", t.n_parallel_envs);
    detail::maybe_get(j, "update_epochs", t.update_epochs);
    detail::maybe_get(j, "minibatch_size", t.minibatch_size);
    detail::maybe_get(j, "eval_every", t.eval_every);
    detail::maybe_get(j, "eval_episodes", t.eval_episodes);
    detail::maybe_get(j, "entropy_coef", t.entropy_coef);
    detail::maybe_get(j, "max_grad_norm", t.max_grad_norm);
    detail::maybe_get(j, "curriculum", t.curriculum);
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig cfg;
    detail::maybe_get(j, "schema", cfg.schema);
    if (cfg.schema != 1) throw std::runtime_error("unsupported config schema version");
    if (j.contains("env")) from_json_env(j.at("env"), cfg.env, cfg.scenario);
    if (j.contains("scenario")) from_json_scenario(j.at("scenario"), cfg.scenario);
    if (j.contains("comb")) {
        const auto c = j.at("comb").get<std::string>();
        if (c == "comb1") cfg.comb = Comb::Comb1;
        else if (c == "comb2") cfg.comb = Comb::Comb2;
        else throw std::runtime_error("comb must be comb1 or comb2");
    }
    if (j.contains("train")) from_json_train(j.at("train"), cfg.train);
    if (j.contains("net")) {
        const auto& n = j.at("net");
        detail::maybe_get(n, "c1", cfg.c1);
        detail::maybe_get(n, "c2", cfg.c2);
        detail::maybe_get(n, "c3", cfg.c3);
        detail::maybe_get(n, "fc", cfg.fc);
    }
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    is >> j;
    return parse_run_config(j);
}

}  // namespace nav
