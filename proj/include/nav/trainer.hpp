#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "nav/harness.hpp"
#include "nav/ppo.hpp"

namespace nav {

struct TrainResult {
    int epochs_run{0};
    double best_reach_rate{-1.0};
    std::string best_checkpoint;
    std::string latest_checkpoint;
};

/// DPPO loop: parallel collection, GAE, clipped-surrogate updates, periodic
/// greedy evaluation, best-model checkpointing. Metrics are appended to
/// <out_dir>/metrics.jsonl, one JSON line per epoch.
/// `stop_at_reach_rate` > 0 stops early once an evaluation reaches it.
template <typename T = float>
TrainResult train_loop(const RunConfig& cfg, std::uint64_t seed, const std::string& out_dir,
                       const std::string& resume_path = "", double stop_at_reach_rate = -1.0) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    Rng master(seed);
    Rng init_rng_policy(master.next());
    Rng init_rng_value(master.next());
    Rng update_rng(master.next());
    Rng eval_rng(master.next());

    const NetConfig net_cfg = make_net_config(cfg);
    GaussianPolicy<T> policy(net_cfg, init_rng_policy);
    ValueNet<T> value(net_cfg, init_rng_value);
    const std::uint64_t hash = config_hash(cfg);
    if (!resume_path.empty()) {
        load_params_file(resume_path, policy.store(), hash);
        load_params_file(resume_path + ".value", value.store(), hash);
    }

    AdamOptimizer<T> policy_opt(policy.store().size(), static_cast<T>(cfg.train.lr_policy));
    AdamOptimizer<T> value_opt(value.store().size(), static_cast<T>(cfg.train.lr_value));

    std::vector<RolloutWorker<T>> workers;
    workers.reserve(cfg.train.n_parallel_envs);
    for (int i = 0; i < cfg.train.n_parallel_envs; ++i) {
        const ScenarioSpec spec = cfg.comb ? comb_sampler(*cfg.comb, i) : cfg.scenario;
        workers.emplace_back(Env(cfg.env, spec), policy.net(), value.net(), master.next());
    }

    std::ofstream metrics(fs::path(out_dir) / "metrics.jsonl", std::ios::app);
    if (!metrics) throw std::runtime_error("cannot open metrics log in " + out_dir);

    TrainResult result;
    result.best_checkpoint = (fs::path(out_dir) / "best.ckpt").string();
    result.latest_checkpoint = (fs::path(out_dir) / "latest.ckpt").string();

    const auto save = [&](const std::string& path) {
        save_params_file(path, policy.store(), hash);
        save_params_file(path + ".value", value.store(), hash);
    };

    for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
        if (cfg.train.curriculum) {
            const GoalDistRange range = curriculum_stage(epoch);
            for (auto& w : workers) {
                w.env().spec().goal_dist_lo = range.lo;
                w.env().spec().goal_dist_hi = range.hi;
            }
        }
        FlatBatch<T> batch =
            collect_rollouts(workers, policy.store(), policy.stddev(), value.store(),
                             cfg.train.steps_per_epoch, cfg.train.gamma, cfg.train.gae_lambda);
        const UpdateDiagnostics diag =
            ppo_update(policy, value, policy_opt, value_opt, batch, cfg.train, update_rng);

        nlohmann::json line{{"epoch", epoch},
                            {"samples", batch.n},
                            {"episodes", batch.episodes.size()},
                            {"pi_loss", diag.policy_loss},
                            {"v_loss", diag.value_loss},
                            {"entropy", diag.entropy},
                            {"clip_frac", diag.clip_fraction},
                            {"ratio_mean", diag.ratio_mean}};
        if (!batch.robot_returns.empty()) {
            double s = 0.0;
            for (double r : batch.robot_returns) s += r;
            line["ep_ret_robot"] = s / batch.robot_returns.size();
        }
        if (!batch.episodes.empty()) {
            double s = 0.0;
            for (const auto& e : batch.episodes) s += e.mean_robot_return;
            line["ep_ret_episode"] = s / batch.episodes.size();
        }

        bool stop = false;
        if ((epoch + 1) % cfg.train.eval_every == 0) {
            int arrived = 0, total = 0;
            const std::uint64_t eval_seed = eval_rng.next();
            for (int ep = 0; ep < cfg.train.eval_episodes; ++ep) {
                ScenarioSpec spec = cfg.comb ? comb_sampler(*cfg.comb, ep) : cfg.scenario;
                if (cfg.train.curriculum) {
                    const GoalDistRange range = curriculum_stage(epoch);
                    spec.goal_dist_lo = range.lo;
                    spec.goal_dist_hi = range.hi;
                }
                const EvalReport rep = evaluate(policy, cfg.env, spec, 1, eval_seed + ep);
                arrived += rep.arrived_robots;
                total += rep.total_robots;
            }
            const double reach_rate = total ? static_cast<double>(arrived) / total : 0.0;
            line["reach_rate"] = reach_rate;
            if (reach_rate > result.best_reach_rate) {
                result.best_reach_rate = reach_rate;
                save(result.best_checkpoint);
            }
            if (stop_at_reach_rate > 0.0 && reach_rate >= stop_at_reach_rate) stop = true;
        }
        save(result.latest_checkpoint);
        metrics << line.dump() << "\n";
        metrics.flush();
        result.epochs_run = epoch + 1;
        if (stop) break;
    }
    return result;
}

}  // namespace nav
