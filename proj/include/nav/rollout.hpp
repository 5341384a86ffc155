#pragma once

#include <array>
#include <cstdint>
#include <thread>
#include <vector>

#include "nav/env.hpp"
#include "nav/gae.hpp"
#include "nav/policy.hpp"

namespace nav {

/// Per-step record stream for one robot slot within one env. Episode
/// boundaries are marked by `dones`; a truncated tail is bootstrapped.
template <typename T>
struct Stream {
    std::vector<std::vector<float>> maps;
    std::vector<std::array<float, 3>> goals;
    std::vector<std::array<T, kActionDim>> actions;  // pre-clip samples
    std::vector<double> logp_old;
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<std::uint8_t> dones;
    double bootstrap{0.0};

    std::size_t size() const { return rewards.size(); }
};

struct EpisodeRecord {
    double mean_robot_return{0.0};
    int robots{0};
    int arrived{0};
};

/// Flattened training batch (advantages already normalized).
template <typename T>
struct FlatBatch {
    int n{0};
    int map_size{0};
    std::vector<T> maps;    // n * map_size
    std::vector<T> goals;   // n * 3
    std::vector<std::array<T, kActionDim>> actions;
    std::vector<double> logp_old;
    std::vector<double> advantages;
    std::vector<double> returns;

    std::vector<double> robot_returns;       // completed episodes, per robot
    std::vector<EpisodeRecord> episodes;     // completed world episodes
};

/// One rollout worker: owns one env and private forward workspaces over
/// read-only parameter snapshots (the DPPO collection contract).
template <typename T>
class RolloutWorker {
public:
    RolloutWorker(Env env, FigNet<T> policy_net, FigNet<T> value_net, std::uint64_t seed)
        : env_(std::move(env)), policy_net_(std::move(policy_net)),
          value_net_(std::move(value_net)), rng_(seed) {}

    Env& env() { return env_; }

    /// Runs `quota` env steps, appending to the per-robot streams. Episodes
    /// auto-reset; running tails get a value bootstrap.
    void collect(const ParamStore<T>& policy_store, const std::array<T, kActionDim>& std_dev,
                 const ParamStore<T>& value_store, int quota) {
        if (!started_) {
            reset_episode();
            started_ = true;
        }
        for (int s = 0; s < quota; ++s) {
            if (env_.done()) reset_episode();
            step_once(policy_store, std_dev, value_store);
        }
        // Bootstrap values for robots still running at the batch boundary.
        for (int i = 0; i < env_.num_robots(); ++i) {
            auto& st = streams_[i];
            if (!st.dones.empty() && !st.dones.back()) {
                st.bootstrap = forward_value(value_store, obs_[i]);
            }
        }
    }

    std::vector<Stream<T>>& streams() { return streams_; }
    std::vector<EpisodeRecord>& episodes() { return episodes_; }
    std::vector<double>& robot_returns() { return robot_returns_; }

    void clear_batch() {
        streams_.assign(env_.num_robots(), Stream<T>{});
        episodes_.clear();
        robot_returns_.clear();
    }

private:
    // step_once records the finished episode; this only starts the next one.
    void reset_episode() {
        obs_ = env_.reset(rng_.next());
        const int n = env_.num_robots();
        if (static_cast<int>(streams_.size()) != n) streams_.assign(n, Stream<T>{});
        ep_returns_.assign(n, 0.0);
        ep_arrived_.assign(n, 0);
    }

    void finish_episode() {
        EpisodeRecord rec;
        rec.robots = static_cast<int>(ep_returns_.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < ep_returns_.size(); ++i) {
            sum += ep_returns_[i];
            robot_returns_.push_back(ep_returns_[i]);
            rec.arrived += ep_arrived_[i];
        }
        rec.mean_robot_return = rec.robots ? sum / rec.robots : 0.0;
        episodes_.push_back(rec);
    }

    double forward_value(const ParamStore<T>& store, const Observation& o) {
        std::vector<T> m(o.maps.begin(), o.maps.end());
        std::array<T, 3> g{static_cast<T>(o.rel_goal[0]), static_cast<T>(o.rel_goal[1]),
                           static_cast<T>(o.rel_goal[2])};
        return static_cast<double>(value_net_.forward(store, m.data(), g.data(), 1)[0]);
    }

    void step_once(const ParamStore<T>& policy_store, const std::array<T, kActionDim>& std_dev,
                   const ParamStore<T>& value_store) {
        std::vector<int> acting;
        for (int i = 0; i < env_.num_robots(); ++i) {
            if (env_.world().robots[i].active()) acting.push_back(i);
        }
        const int n = static_cast<int>(acting.size());
        const int msize = static_cast<int>(obs_[acting[0]].maps.size());
        std::vector<T> maps(static_cast<std::size_t>(n) * msize);
        std::vector<T> goals(static_cast<std::size_t>(n) * 3);
        for (int k = 0; k < n; ++k) {
            const auto& o = obs_[acting[k]];
            std::copy(o.maps.begin(), o.maps.end(), maps.begin() + static_cast<std::size_t>(k) * msize);
            for (int d = 0; d < 3; ++d) goals[k * 3 + d] = static_cast<T>(o.rel_goal[d]);
        }
        const T* means = policy_net_.forward(policy_store, maps.data(), goals.data(), n);
        std::vector<std::array<T, kActionDim>> raw(n);
        std::vector<double> logps(n);
        std::vector<VelocityCommand> cmds(n);
        for (int k = 0; k < n; ++k) {
            ActionDistribution<T> dist;
            dist.mean = {means[k * kActionDim], means[k * kActionDim + 1]};
            dist.std = std_dev;
            auto sa = sample_action(dist, rng_);
            raw[k] = sa.raw;
            logps[k] = static_cast<double>(sa.log_prob);
            cmds[k] = sa.command;
        }
        const T* vals = value_net_.forward(value_store, maps.data(), goals.data(), n);
        std::vector<double> values(n);
        for (int k = 0; k < n; ++k) values[k] = static_cast<double>(vals[k]);

        auto results = env_.step(cmds);
        for (int k = 0; k < n; ++k) {
            const int i = acting[k];
            auto& st = streams_[i];
            const auto& o = obs_[i];
            st.maps.push_back(o.maps);
            st.goals.push_back(o.rel_goal);
            st.actions.push_back(raw[k]);
            st.logp_old.push_back(logps[k]);
            st.rewards.push_back(results[k].reward.total);
            st.values.push_back(values[k]);
            st.dones.push_back(results[k].status != EpisodeStatus::Running ? 1 : 0);
            ep_returns_[i] += results[k].reward.total;
            if (results[k].status == EpisodeStatus::Arrived) ep_arrived_[i] = 1;
            obs_[i] = std::move(results[k].obs);
        }
        if (env_.done()) finish_episode();
    }

    Env env_;
    FigNet<T> policy_net_;
    FigNet<T> value_net_;
    Rng rng_;
    bool started_{false};
    std::vector<Observation> obs_;
    std::vector<Stream<T>> streams_;
    std::vector<double> ep_returns_;
    std::vector<int> ep_arrived_;
    std::vector<EpisodeRecord> episodes_;
    std::vector<double> robot_returns_;
};

/// Collects exactly `steps_per_epoch` env steps split across the workers,
/// runs GAE per stream, and flattens into one normalized batch. Workers
/// run in parallel threads; the merge order is fixed, so the result is
/// independent of scheduling.
template <typename T>
FlatBatch<T> collect_rollouts(std::vector<RolloutWorker<T>>& workers,
                              const ParamStore<T>& policy_store,
                              const std::array<T, kActionDim>& std_dev,
                              const ParamStore<T>& value_store, int steps_per_epoch, double gamma,
                              double lambda) {
    const int n_workers = static_cast<int>(workers.size());
    const int quota = steps_per_epoch / n_workers;
    for (auto& w : workers) w.clear_batch();
    {
        std::vector<std::thread> threads;
        threads.reserve(n_workers);
        for (auto& w : workers) {
            threads.emplace_back([&] { w.collect(policy_store, std_dev, value_store, quota); });
        }
        for (auto& t : threads) t.join();
    }

    FlatBatch<T> batch;
    for (auto& w : workers) {
        for (auto& st : w.streams()) {
            if (st.size() == 0) continue;
            std::vector<double> values = st.values;
            values.push_back(st.dones.back() ? 0.0 : st.bootstrap);
            const AdvantageEstimate gae =
                compute_gae(st.rewards, values, st.dones, gamma, lambda);
            if (batch.map_size == 0) batch.map_size = static_cast<int>(st.maps[0].size());
            for (std::size_t i = 0; i < st.size(); ++i) {
                batch.maps.insert(batch.maps.end(), st.maps[i].begin(), st.maps[i].end());
                for (int d = 0; d < 3; ++d) batch.goals.push_back(static_cast<T>(st.goals[i][d]));
                batch.actions.push_back(st.actions[i]);
                batch.logp_old.push_back(st.logp_old[i]);
                batch.advantages.push_back(gae.advantages[i]);
                batch.returns.push_back(gae.returns[i]);
                ++batch.n;
            }
        }
        auto& eps = w.episodes();
        batch.episodes.insert(batch.episodes.end(), eps.begin(), eps.end());
        auto& rr = w.robot_returns();
        batch.robot_returns.insert(batch.robot_returns.end(), rr.begin(), rr.end());
    }

    // Per-batch advantage normalization.
    if (batch.n > 0) {
        double mean = 0.0;
        for (double a : batch.advantages) mean += a;
        mean /= batch.n;
        double var = 0.0;
        for (double a : batch.advantages) var += (a - mean) * (a - mean);
        const double sd = std::sqrt(var / batch.n);
        for (double& a : batch.advantages) a = (a - mean) / (sd + 1e-8);
    }
    return batch;
}

}  // namespace nav
