// Acceptance suite: each criterion prints exactly one [PASS]/[FAIL] line.
// Criteria that need multi-hour training runs live in acceptance_learning
// and acceptance_ablation.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nav/trainer.hpp"

using namespace nav;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name, detail.empty() ? "" : " - ",
                detail.c_str());
    if (!ok) ++g_failures;
}

// ---- criterion 1: ring boundaries ------------------------------------------

void criterion_ring_table() {
    constexpr double kTol = 1e-12;
    const RingTable t = ring_table();
    const double g = std::log(7.0) / 48.0;
    bool ok = std::abs(t.g - g) <= kTol;
    for (int k = 0; k < 48 && ok; ++k) {
        ok = std::abs(t.bounds[k].first - (std::exp(g * k) - 1.0)) <= kTol &&
             std::abs(t.bounds[k].second - (std::exp(g * (k + 1)) - 1.0)) <= kTol;
    }
    ok = ok && std::abs(t.bounds[47].second - 6.0) <= kTol;
    report("ring boundaries match e^(gk)-1 with g=ln(7)/48 (tol 1e-12)", ok);
}

// ---- criterion 2: encoder equals a frozen pixel-wise oracle ----------------

LogMap oracle_logmap(const Scan& scan) {
    const double g = std::log(kMaxRange + 1.0) / kNumSectors;
    std::array<double, kNumSectors> sector_min;
    const int per = kNumBeams / kNumSectors;
    for (int k = 0; k < kNumSectors; ++k) {
        double m = kMaxRange;
        for (int j = 0; j < per; ++j) m = std::min(m, scan.ranges[k * per + j]);
        sector_min[k] = m;
    }
    LogMap map;
    for (int r = 0; r < kMapSize; ++r) {
        for (int c = 0; c < kMapSize; ++c) {
            const double dy = kMapSize - (r + 0.5);
            const double dx = (c + 0.5) - kMapSize / 2.0;
            const double rho = std::hypot(dx, dy);
            const double theta = std::atan2(dy, dx);
            if (rho >= kMapSize || theta < 0.0 || theta > pi) continue;
            const int ring = static_cast<int>(rho / kMapSize * kNumSectors);
            const int sector =
                std::min(static_cast<int>(theta / pi * kNumSectors), kNumSectors - 1);
            const double lo = std::expm1(g * ring);
            const double hi = std::expm1(g * (ring + 1));
            const double d = sector_min[sector];
            map.at(r, c) = (d >= kMaxRange || d >= hi) ? kFree : (d >= lo) ? kOccupied : kUnknown;
        }
    }
    return map;
}

void criterion_encoder_oracle() {
    Rng rng(2024);
    const RingTable t = ring_table();
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Scan s;
        s.ranges.resize(kNumBeams);
        for (auto& r : s.ranges) {
            r = (rng.uniform() < 0.2) ? kMaxRange : rng.uniform(0.01, kMaxRange);
        }
        const LogMap got = build_logmap(s, t);
        const LogMap want = oracle_logmap(s);
        if (got.image != want.image) ++mismatches;
    }
    report("log-polar encoder bitwise-equal to independent oracle on 1000 scans",
           mismatches == 0, mismatches ? std::to_string(mismatches) + " mismatching scans" : "");
}

// ---- criterion 3: near-field resolution ------------------------------------

void criterion_near_field() {
    const RingTable t = ring_table();
    int log_rings = 0;
    for (int k = 0; k < 48; ++k) {
        if (t.bounds[k].first < 1.0) ++log_rings;
    }
    const int linear_rings = static_cast<int>(std::ceil(1.0 / (6.0 / 48.0)));
    report("18 of 48 log rings cover [0,1] m versus 8 linear cells",
           log_rings == 18 && linear_rings == 8,
           "log=" + std::to_string(log_rings) + " linear=" + std::to_string(linear_rings));
}

// ---- criterion 4: reward telescoping ---------------------------------------

void criterion_reward_telescoping() {
    constexpr double kTol = 1e-6;
    const EnvConfig cfg;
    ScenarioSpec spec = default_spec(ScenarioFamily::Crowd);
    spec.n_robots = 3;
    spec.n_obstacles = 6;
    Rng rng(7);
    double worst = 0.0;
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        Env env(cfg, spec);
        env.reset(seed);
        std::vector<double> d0(spec.n_robots), total(spec.n_robots, 0.0);
        std::vector<int> steps(spec.n_robots, 0);
        std::vector<EpisodeStatus> status(spec.n_robots, EpisodeStatus::Running);
        for (int i = 0; i < spec.n_robots; ++i) d0[i] = distance_to_goal(env.world().robots[i]);
        while (!env.done()) {
            int active = 0;
            for (const auto& r : env.world().robots) active += r.active();
            std::vector<VelocityCommand> cmds;
            for (int i = 0; i < active; ++i) {
                cmds.push_back({rng.uniform(0.0, 0.6), rng.uniform(-0.9, 0.9)});
            }
            for (const auto& res : env.step(cmds)) {
                total[res.robot_id] += res.reward.total;
                steps[res.robot_id] += 1;
                status[res.robot_id] = res.status;
            }
        }
        for (int i = 0; i < spec.n_robots; ++i) {
            const double d_T = distance_to_goal(env.world().robots[i]);
            double terminal = 0.0;
            if (status[i] == EpisodeStatus::Arrived) terminal = cfg.r_arrive;
            if (status[i] == EpisodeStatus::Collided) terminal = cfg.r_collision;
            const double want = terminal + cfg.r_step * steps[i] + cfg.tau * (d0[i] - d_T);
            worst = std::max(worst, std::abs(total[i] - want));
        }
    }
    std::ostringstream os;
    os << "max |error| " << worst;
    report("episode returns telescope to R_T - 5T + tau(d0 - dT) (tol 1e-6)", worst <= kTol,
           os.str());
}

// ---- criterion 5: GAE against a direct discounted sum ----------------------

void criterion_gae() {
    constexpr double kTol = 1e-10;
    Rng rng(41);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 50;
        std::vector<double> rewards(n), values(n + 1);
        std::vector<std::uint8_t> terminals(n, 0);
        for (auto& r : rewards) r = rng.uniform(-10.0, 10.0);
        for (auto& v : values) v = rng.uniform(-5.0, 5.0);
        for (int i = 0; i < n; ++i) terminals[i] = rng.uniform() < 0.1 ? 1 : 0;
        const auto rec = compute_gae(rewards, values, terminals, 0.99, 0.95);
        for (int t = 0; t < n; ++t) {
            double a = 0.0, w = 1.0;
            for (int l = t; l < n; ++l) {
                const double nonterminal = terminals[l] ? 0.0 : 1.0;
                a += w * (rewards[l] + 0.99 * values[l + 1] * nonterminal - values[l]);
                if (terminals[l]) break;
                w *= 0.99 * 0.95;
            }
            worst = std::max(worst, std::abs(rec.advantages[t] - a));
        }
    }
    std::ostringstream os;
    os << "max |error| " << worst;
    report("recursive GAE equals the direct sum on 100x50-step segments (tol 1e-10)",
           worst <= kTol, os.str());
}

// ---- criterion 6: gradient finite-difference check -------------------------

void criterion_gradients() {
    constexpr double kTol = 1e-4;
    NetConfig cfg;
    cfg.in_frames = 3;
    cfg.map_size = 8;
    cfg.c1 = 4;
    cfg.c2 = 4;
    cfg.c3 = 4;
    cfg.fc = 16;
    Rng rng(11);
    ParamStore<double> store;
    FigNet<double> net(cfg, store, rng, 0.5);
    const int n = 3;
    std::vector<double> maps(n * cfg.input_size()), goal(n * 3), dout(n * cfg.out_dim);
    for (auto& v : maps) v = rng.uniform(-1.0, 1.0);
    for (auto& v : goal) v = rng.uniform(-2.0, 2.0);
    for (auto& v : dout) v = rng.uniform(-1.0, 1.0);

    const auto loss = [&] {
        const double* out = net.forward(store, maps.data(), goal.data(), n);
        double l = 0.0;
        for (int i = 0; i < n * cfg.out_dim; ++i) l += dout[i] * out[i];
        return l;
    };
    store.zero_grad();
    loss();
    net.backward(store, dout.data(), n);
    const auto grads = store.grads;

    const double h = 1e-6;
    Rng pick(99);
    double worst = 0.0;
    int checked = 0;
    while (checked < 100) {
        const std::size_t i = pick.uniform_int(store.size());
        const double saved = store.values[i];
        store.values[i] = saved + h;
        const double up = loss();
        store.values[i] = saved - h;
        const double dn = loss();
        store.values[i] = saved;
        const double fd = (up - dn) / (2.0 * h);
        if (std::abs(fd) < 1e-8 && std::abs(grads[i]) < 1e-8) continue;
        worst = std::max(worst, std::abs(fd - grads[i]) /
                                    std::max({std::abs(fd), std::abs(grads[i]), 1e-8}));
        ++checked;
    }
    std::ostringstream os;
    os << "max rel err " << worst;
    report("backprop matches central differences on the conv trunk (tol 1e-4)", worst < kTol,
           os.str());
}

// ---- criterion 7: end-to-end determinism -----------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

RunConfig tiny_train_config() {
    RunConfig cfg;
    cfg.env.encoder = Encoder::AngularMap;
    cfg.env.max_steps = 40;
    cfg.scenario = default_spec(ScenarioFamily::Crowd);
    cfg.scenario.n_robots = 1;
    cfg.scenario.n_obstacles = 2;
    cfg.scenario.extent = 8.0;
    cfg.train.epochs = 5;
    cfg.train.steps_per_epoch = 200;
    cfg.train.n_parallel_envs = 2;
    cfg.train.update_epochs = 2;
    cfg.train.minibatch_size = 64;
    cfg.train.eval_every = 5;
    cfg.train.eval_episodes = 2;
    cfg.c1 = 4;
    cfg.c2 = 4;
    cfg.c3 = 4;
    cfg.fc = 16;
    return cfg;
}

void criterion_determinism() {
    namespace fs = std::filesystem;
    const RunConfig cfg = tiny_train_config();
    const fs::path base = fs::temp_directory_path() / "nav_acceptance_det";
    fs::remove_all(base);
    train_loop<float>(cfg, 12345, (base / "a").string());
    train_loop<float>(cfg, 12345, (base / "b").string());

    const bool metrics_equal =
        slurp(base / "a" / "metrics.jsonl") == slurp(base / "b" / "metrics.jsonl") &&
        !slurp(base / "a" / "metrics.jsonl").empty();
    const bool ckpt_equal =
        slurp(base / "a" / "latest.ckpt") == slurp(base / "b" / "latest.ckpt") &&
        slurp(base / "a" / "latest.ckpt.value") == slurp(base / "b" / "latest.ckpt.value");

    // Eval reports from the trained weights must also be identical.
    Rng r1(1), r2(1);
    GaussianPolicy<float> p1(make_net_config(cfg), r1), p2(make_net_config(cfg), r2);
    load_params_file((base / "a" / "latest.ckpt").string(), p1.store(), config_hash(cfg));
    load_params_file((base / "b" / "latest.ckpt").string(), p2.store(), config_hash(cfg));
    const std::string e1 = to_json(evaluate(p1, cfg.env, cfg.scenario, 3, 99)).dump();
    const std::string e2 = to_json(evaluate(p2, cfg.env, cfg.scenario, 3, 99)).dump();
    fs::remove_all(base);

    report("5-epoch training runs and eval reports are bit-identical across reruns",
           metrics_equal && ckpt_equal && e1 == e2);
}

// ---- criterion 10: scripted straight-run metrics ---------------------------

void criterion_scripted_metrics() {
    constexpr double kTol = 1e-6;
    TrajectoryLog log;
    log.records.push_back({0, 0, 0, {0.0, 0.0, 0.0}, {}, 0.0, EpisodeStatus::Running});
    for (int k = 1; k <= 100; ++k) {
        log.records.push_back({0, k, 0, {0.05 * k, 0.0, 0.0}, VelocityCommand(0.5, 0.0), -5.0,
                               k == 100 ? EpisodeStatus::Arrived : EpisodeStatus::Running});
    }
    const EvalReport r = metrics_from_log(log, "scripted");
    const bool ok = std::abs(r.ar - 1.0) <= kTol && std::abs(r.aav) <= kTol &&
                    std::abs(r.atd - 5.0) <= kTol;
    std::ostringstream os;
    os << "ar=" << r.ar << " aav=" << r.aav << " atd=" << r.atd;
    report("scripted 5 m run scores Ar=1.0, Aav=0.0, Atd=5.0 (tol 1e-6)", ok, os.str());
}

}  // namespace

int main() {
    criterion_ring_table();
    criterion_encoder_oracle();
    criterion_near_field();
    criterion_reward_telescoping();
    criterion_gae();
    criterion_gradients();
    criterion_determinism();
    criterion_scripted_metrics();
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
