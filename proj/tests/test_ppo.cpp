#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nav/ppo.hpp"

using namespace nav;

namespace {

NetConfig tiny_cfg() {
    NetConfig cfg;
    cfg.in_frames = 2;
    cfg.map_size = 8;
    cfg.c1 = 3;
    cfg.c2 = 4;
    cfg.c3 = 4;
    cfg.fc = 16;
    return cfg;
}

NetConfig angular_cfg() {
    NetConfig cfg;
    cfg.conv2d = false;
    cfg.map_size = 48;
    cfg.c1 = 4;
    cfg.c2 = 4;
    cfg.c3 = 4;
    cfg.fc = 16;
    return cfg;
}

/// Direct double sum A_t = sum_l (gamma*lambda)^l delta_{t+l}, truncated at
/// episode boundaries. Independent of the recursive implementation.
AdvantageEstimate gae_direct(const std::vector<double>& rewards, const std::vector<double>& values,
                             const std::vector<std::uint8_t>& terminals, double gamma,
                             double lambda) {
    const std::size_t n = rewards.size();
    AdvantageEstimate out;
    out.advantages.resize(n);
    out.returns.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        double a = 0.0, w = 1.0;
        for (std::size_t l = t; l < n; ++l) {
            const double nonterminal = terminals[l] ? 0.0 : 1.0;
            const double delta = rewards[l] + gamma * values[l + 1] * nonterminal - values[l];
            a += w * delta;
            if (terminals[l]) break;
            w *= gamma * lambda;
        }
        out.advantages[t] = a;
        out.returns[t] = a + values[t];
    }
    return out;
}

FlatBatch<float> random_batch(Rng& rng, const NetConfig& cfg, int n) {
    FlatBatch<float> b;
    b.n = n;
    b.map_size = cfg.input_size();
    b.maps.resize(static_cast<std::size_t>(n) * b.map_size);
    b.goals.resize(static_cast<std::size_t>(n) * 3);
    for (auto& v : b.maps) v = static_cast<float>(rng.uniform());
    for (auto& v : b.goals) v = static_cast<float>(rng.uniform(-2.0, 2.0));
    b.actions.resize(n);
    b.logp_old.resize(n);
    b.advantages.resize(n);
    b.returns.resize(n);
    for (int i = 0; i < n; ++i) {
        b.actions[i] = {static_cast<float>(rng.normal()), static_cast<float>(rng.normal())};
        b.advantages[i] = rng.normal();
        b.returns[i] = rng.normal();
    }
    return b;
}

/// logp_old recomputed from the policy's current parameters, so the very
/// first ratio is 1.
template <typename T>
void fill_logp_from(GaussianPolicy<T>& policy, FlatBatch<T>& b) {
    const auto sd = policy.stddev();
    const T* means = policy.forward_mean(b.maps.data(), b.goals.data(), b.n);
    for (int i = 0; i < b.n; ++i) {
        const std::array<T, kActionDim> mean{means[i * kActionDim], means[i * kActionDim + 1]};
        b.logp_old[i] = static_cast<double>(gaussian_log_prob(mean, sd, b.actions[i]));
    }
}

}  // namespace

TEST_CASE("gae handles single terminal steps and the lambda=0 limit") {
    {
        const auto g = compute_gae({10.0}, {3.0, 99.0}, {1}, 0.99, 0.95);
        CHECK(g.advantages[0] == Catch::Approx(7.0));  // bootstrap ignored at terminal
        CHECK(g.returns[0] == Catch::Approx(10.0));
    }
    {
        // lambda = 0 reduces to one-step TD errors.
        const std::vector<double> r{1.0, 2.0, 3.0}, v{0.5, 1.5, 2.5, 3.5};
        const std::vector<std::uint8_t> d{0, 0, 0};
        const auto g = compute_gae(r, v, d, 0.9, 0.0);
        for (int t = 0; t < 3; ++t) {
            CHECK(g.advantages[t] == Catch::Approx(r[t] + 0.9 * v[t + 1] - v[t]).margin(1e-12));
        }
    }
    {
        // gamma = lambda = 1 with zero values: advantage is the reward-to-go.
        const std::vector<double> r{1.0, 2.0, 3.0}, v{0.0, 0.0, 0.0, 0.0};
        const std::vector<std::uint8_t> d{0, 0, 1};
        const auto g = compute_gae(r, v, d, 1.0, 1.0);
        CHECK(g.advantages[0] == Catch::Approx(6.0));
        CHECK(g.advantages[1] == Catch::Approx(5.0));
        CHECK(g.advantages[2] == Catch::Approx(3.0));
    }
    CHECK_THROWS_AS(compute_gae({1.0}, {1.0}, {0}, 0.99, 0.95), std::invalid_argument);
    CHECK_THROWS_AS(compute_gae({1.0}, {1.0, 2.0}, {0, 1}, 0.99, 0.95), std::invalid_argument);
}

TEST_CASE("recursive gae equals the direct discounted sum") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 50;
        std::vector<double> rewards(n), values(n + 1);
        std::vector<std::uint8_t> terminals(n, 0);
        for (auto& r : rewards) r = rng.uniform(-10.0, 10.0);
        for (auto& v : values) v = rng.uniform(-5.0, 5.0);
        for (int i = 0; i < n; ++i) terminals[i] = rng.uniform() < 0.1 ? 1 : 0;

        const auto rec = compute_gae(rewards, values, terminals, 0.99, 0.95);
        const auto dir = gae_direct(rewards, values, terminals, 0.99, 0.95);
        for (int t = 0; t < n; ++t) {
            CHECK(rec.advantages[t] == Catch::Approx(dir.advantages[t]).margin(1e-10));
            CHECK(rec.returns[t] == Catch::Approx(dir.returns[t]).margin(1e-10));
        }
    }
}

TEST_CASE("clipped surrogate is pessimistic on both sides") {
    CHECK(clipped_surrogate(1.5, 2.0, 0.2) == Catch::Approx(2.4));    // clipped at 1.2
    CHECK(clipped_surrogate(0.5, -2.0, 0.2) == Catch::Approx(-1.6));  // clipped at 0.8
    CHECK(clipped_surrogate(1.1, 1.0, 0.2) == Catch::Approx(1.1));    // inside the trust region
    CHECK(clipped_surrogate(0.9, -1.0, 0.2) == Catch::Approx(-0.9));
    CHECK(clipped_surrogate(0.5, 2.0, 0.2) == Catch::Approx(1.0));    // min picks the raw side
}

TEST_CASE("zero learning rate leaves parameters bitwise unchanged") {
    Rng rng(5);
    GaussianPolicy<float> policy(tiny_cfg(), rng);
    ValueNet<float> value(tiny_cfg(), rng);
    FlatBatch<float> batch = random_batch(rng, tiny_cfg(), 24);
    fill_logp_from(policy, batch);

    const auto p0 = policy.store().values;
    const auto v0 = value.store().values;
    AdamOptimizer<float> popt(policy.store().size(), 0.0f);
    AdamOptimizer<float> vopt(value.store().size(), 0.0f);
    TrainConfig cfg;
    cfg.update_epochs = 2;
    cfg.minibatch_size = 8;
    Rng urng(6);
    const auto diag = ppo_update(policy, value, popt, vopt, batch, cfg, urng);
    CHECK(policy.store().values == p0);
    CHECK(value.store().values == v0);
    // With frozen parameters every ratio stays at 1 and nothing clips.
    CHECK(diag.ratio_mean == Catch::Approx(1.0).margin(1e-5));
    CHECK(diag.clip_fraction == 0.0);
}

TEST_CASE("ppo update is deterministic") {
    auto run = [] {
        Rng rng(5);
        GaussianPolicy<float> policy(tiny_cfg(), rng);
        ValueNet<float> value(tiny_cfg(), rng);
        FlatBatch<float> batch = random_batch(rng, tiny_cfg(), 24);
        fill_logp_from(policy, batch);
        AdamOptimizer<float> popt(policy.store().size(), 3e-4f);
        AdamOptimizer<float> vopt(value.store().size(), 1e-3f);
        TrainConfig cfg;
        cfg.update_epochs = 3;
        cfg.minibatch_size = 8;
        Rng urng(6);
        ppo_update(policy, value, popt, vopt, batch, cfg, urng);
        return std::make_pair(policy.store().values, value.store().values);
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}

TEST_CASE("value head regresses onto constant returns") {
    Rng rng(7);
    GaussianPolicy<float> policy(tiny_cfg(), rng);
    ValueNet<float> value(tiny_cfg(), rng);
    FlatBatch<float> batch = random_batch(rng, tiny_cfg(), 32);
    fill_logp_from(policy, batch);
    std::fill(batch.returns.begin(), batch.returns.end(), 2.5);
    std::fill(batch.advantages.begin(), batch.advantages.end(), 0.0);

    AdamOptimizer<float> popt(policy.store().size(), 0.0f);
    AdamOptimizer<float> vopt(value.store().size(), 1e-2f);
    TrainConfig cfg;
    cfg.update_epochs = 5;
    cfg.minibatch_size = 32;
    Rng urng(8);
    double last = 0.0;
    for (int it = 0; it < 30; ++it) {
        last = ppo_update(policy, value, popt, vopt, batch, cfg, urng).value_loss;
    }
    CHECK(last < 0.05);
}

TEST_CASE("non-finite inputs abort the update") {
    Rng rng(9);
    GaussianPolicy<float> policy(tiny_cfg(), rng);
    ValueNet<float> value(tiny_cfg(), rng);
    FlatBatch<float> batch = random_batch(rng, tiny_cfg(), 8);
    fill_logp_from(policy, batch);
    batch.returns[3] = std::numeric_limits<double>::quiet_NaN();
    AdamOptimizer<float> popt(policy.store().size(), 3e-4f);
    AdamOptimizer<float> vopt(value.store().size(), 1e-3f);
    TrainConfig cfg;
    cfg.update_epochs = 1;
    cfg.minibatch_size = 8;
    Rng urng(10);
    CHECK_THROWS_AS(ppo_update(policy, value, popt, vopt, batch, cfg, urng), TrainAbort);
}

namespace {

std::vector<RolloutWorker<float>> make_workers(GaussianPolicy<float>& policy,
                                               ValueNet<float>& value, int n_workers) {
    EnvConfig ecfg;
    ecfg.encoder = Encoder::AngularMap;
    ecfg.max_steps = 30;
    ScenarioSpec spec = default_spec(ScenarioFamily::Crowd);
    spec.n_robots = 1;
    spec.n_obstacles = 2;
    spec.extent = 8.0;
    std::vector<RolloutWorker<float>> workers;
    for (int i = 0; i < n_workers; ++i) {
        workers.emplace_back(Env(ecfg, spec), policy.net(), value.net(),
                             static_cast<std::uint64_t>(100 + i));
    }
    return workers;
}

}  // namespace

TEST_CASE("rollout collection fills the exact sample quota") {
    Rng rng(11);
    GaussianPolicy<float> policy(angular_cfg(), rng);
    ValueNet<float> value(angular_cfg(), rng);
    auto workers = make_workers(policy, value, 2);
    const auto batch = collect_rollouts(workers, policy.store(), policy.stddev(), value.store(),
                                        40, 0.99, 0.95);
    CHECK(batch.n == 40);  // one robot per env, always acting
    CHECK(batch.maps.size() == static_cast<std::size_t>(40) * angular_cfg().input_size());
    CHECK(batch.goals.size() == 120);
    CHECK(batch.logp_old.size() == 40);

    double mean = 0.0, var = 0.0;
    for (double a : batch.advantages) mean += a;
    mean /= batch.n;
    for (double a : batch.advantages) var += (a - mean) * (a - mean);
    CHECK(mean == Catch::Approx(0.0).margin(1e-9));
    CHECK(std::sqrt(var / batch.n) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("rollout collection is deterministic across runs") {
    auto run = [] {
        Rng rng(11);
        GaussianPolicy<float> policy(angular_cfg(), rng);
        ValueNet<float> value(angular_cfg(), rng);
        auto workers = make_workers(policy, value, 2);
        return collect_rollouts(workers, policy.store(), policy.stddev(), value.store(), 30,
                                0.99, 0.95);
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.n == b.n);
    CHECK(a.maps == b.maps);
    CHECK(a.logp_old == b.logp_old);
    CHECK(a.advantages == b.advantages);
    CHECK(a.returns == b.returns);
}
