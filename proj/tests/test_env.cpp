#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nav/env.hpp"
#include "nav/rng.hpp"

using namespace nav;

namespace {

ScenarioSpec solo_spec(int n_obstacles = 0) {
    ScenarioSpec spec = default_spec(ScenarioFamily::Crowd);
    spec.n_robots = 1;
    spec.n_obstacles = n_obstacles;
    spec.extent = 8.0;
    return spec;
}

}  // namespace

TEST_CASE("relative goal is expressed in the body frame") {
    {
        const auto rg = relative_goal({0.0, 0.0, 0.0}, {3.0, 4.0});
        CHECK(rg[0] == Catch::Approx(3.0));
        CHECK(rg[1] == Catch::Approx(4.0));
        CHECK(rg[2] == Catch::Approx(std::atan2(4.0, 3.0)));
    }
    {
        // Facing +y, goal straight ahead.
        const auto rg = relative_goal({0.0, 0.0, pi / 2.0}, {0.0, 2.0});
        CHECK(rg[0] == Catch::Approx(2.0).margin(1e-12));
        CHECK(rg[1] == Catch::Approx(0.0).margin(1e-12));
        CHECK(rg[2] == Catch::Approx(0.0).margin(1e-12));
    }
    {
        const auto rg = relative_goal({1.0, 1.0, pi}, {0.0, 1.0});
        CHECK(rg[0] == Catch::Approx(1.0).margin(1e-12));
        CHECK(rg[1] == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("reward terms compose as documented") {
    const EnvConfig cfg;
    {
        const auto r = compute_reward(2.0, 1.94, EpisodeStatus::Running, cfg);
        CHECK(r.r_d == Catch::Approx(12.0));
        CHECK(r.r_s == -5.0);
        CHECK(r.r_a == 0.0);
        CHECK(r.r_c == 0.0);
        CHECK(r.total == Catch::Approx(7.0));
    }
    {
        const auto r = compute_reward(0.25, 0.25, EpisodeStatus::Arrived, cfg);
        CHECK(r.total == Catch::Approx(495.0));
    }
    {
        const auto r = compute_reward(1.0, 1.0, EpisodeStatus::Collided, cfg);
        CHECK(r.total == Catch::Approx(-505.0));
    }
    {
        // Moving away from the goal is penalized by the same slope.
        const auto r = compute_reward(1.0, 1.05, EpisodeStatus::Running, cfg);
        CHECK(r.r_d == Catch::Approx(-10.0));
    }
}

TEST_CASE("arrival triggers when distance drops below d_gmin") {
    Env env(EnvConfig{}, solo_spec());
    env.reset(1);
    Robot& r = env.world().robots[0];
    r.pose = {0.0, 0.0, 0.0};
    r.goal = {0.35, 0.0};
    const auto results = env.step({VelocityCommand{0.6, 0.0}});
    REQUIRE(results.size() == 1);
    CHECK(results[0].status == EpisodeStatus::Arrived);     // 0.29 < 0.30
    CHECK(results[0].reward.r_a == 500.0);
    CHECK(env.done());
    CHECK_THROWS_AS(env.step({VelocityCommand{0.0, 0.0}}), std::logic_error);
}

TEST_CASE("standing still costs exactly the step penalty") {
    Env env(EnvConfig{}, solo_spec());
    env.reset(2);
    const auto results = env.step({VelocityCommand{0.0, 0.0}});
    REQUIRE(results.size() == 1);
    CHECK(results[0].reward.r_d == 0.0);
    CHECK(results[0].reward.total == -5.0);
    CHECK(results[0].status == EpisodeStatus::Running);
}

TEST_CASE("episodes time out at max_steps") {
    EnvConfig cfg;
    cfg.max_steps = 3;
    Env env(cfg, solo_spec());
    env.reset(3);
    env.world().robots[0].goal = {100.0, 100.0};  // unreachable, avoids early arrival
    env.world().bounds = {-1000, -1000, 1000, 1000};
    for (int i = 0; i < 2; ++i) {
        const auto r = env.step({VelocityCommand{0.0, 0.0}});
        CHECK(r[0].status == EpisodeStatus::Running);
    }
    const auto r = env.step({VelocityCommand{0.0, 0.0}});
    CHECK(r[0].status == EpisodeStatus::Timeout);
    CHECK(env.done());
}

TEST_CASE("reset is bitwise deterministic and shapes match the encoder") {
    for (Encoder enc : {Encoder::LogMap, Encoder::GridMap, Encoder::AngularMap, Encoder::Raw}) {
        EnvConfig cfg;
        cfg.encoder = enc;
        ScenarioSpec spec = default_spec(ScenarioFamily::Crowd);
        spec.n_robots = 2;
        spec.n_obstacles = 4;
        Env a(cfg, spec), b(cfg, spec);
        const auto oa = a.reset(77);
        const auto ob = b.reset(77);
        REQUIRE(oa.size() == 2);
        CAPTURE(to_string(enc));
        for (size_t i = 0; i < oa.size(); ++i) {
            REQUIRE(oa[i].maps.size() == static_cast<size_t>(3 * frame_size(enc)));
            CHECK(oa[i].maps == ob[i].maps);
            CHECK(oa[i].rel_goal == ob[i].rel_goal);
        }
    }
}

TEST_CASE("frame stack repeats the first frame on reset and shifts on step") {
    Env env(EnvConfig{}, solo_spec(4));
    const auto obs0 = env.reset(5);
    const int fs = frame_size(Encoder::LogMap);
    const std::vector<float>& m = obs0[0].maps;
    CHECK(std::equal(m.begin(), m.begin() + fs, m.begin() + fs));
    CHECK(std::equal(m.begin(), m.begin() + fs, m.begin() + 2 * fs));

    const auto r1 = env.step({VelocityCommand{0.6, 0.3}});
    const std::vector<float>& m1 = r1[0].obs.maps;
    // Old frames shift toward the front; slot 0 now holds the reset frame.
    CHECK(std::equal(m1.begin(), m1.begin() + fs, m.begin()));
    CHECK(std::equal(m1.begin() + fs, m1.begin() + 2 * fs, m.begin() + fs));
}

TEST_CASE("raw observations are normalized ranges") {
    EnvConfig cfg;
    cfg.encoder = Encoder::Raw;
    Env env(cfg, solo_spec(6));
    const auto obs = env.reset(8);
    for (float v : obs[0].maps) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("episode return telescopes to the closed form") {
    // Sum of per-step rewards must equal
    //   R_terminal - r_step * T + tau * (d_0 - d_T)
    // because the shaping term telescopes.
    const EnvConfig cfg;
    ScenarioSpec spec = default_spec(ScenarioFamily::Crowd);
    spec.n_robots = 3;
    spec.n_obstacles = 6;
    Rng rng(91);
    for (std::uint64_t seed = 10; seed < 15; ++seed) {
        Env env(cfg, spec);
        env.reset(seed);
        std::vector<double> d0(spec.n_robots), total(spec.n_robots, 0.0);
        std::vector<int> steps(spec.n_robots, 0);
        std::vector<EpisodeStatus> final_status(spec.n_robots, EpisodeStatus::Running);
        for (int i = 0; i < spec.n_robots; ++i) d0[i] = distance_to_goal(env.world().robots[i]);

        while (!env.done()) {
            int n_active = 0;
            for (const auto& r : env.world().robots) n_active += r.active();
            std::vector<VelocityCommand> cmds;
            for (int i = 0; i < n_active; ++i) {
                cmds.push_back({rng.uniform(0.0, 0.6), rng.uniform(-0.9, 0.9)});
            }
            for (const auto& res : env.step(cmds)) {
                total[res.robot_id] += res.reward.total;
                steps[res.robot_id] += 1;
                final_status[res.robot_id] = res.status;
            }
        }
        for (int i = 0; i < spec.n_robots; ++i) {
            const double d_T = distance_to_goal(env.world().robots[i]);
            double terminal = 0.0;
            if (final_status[i] == EpisodeStatus::Arrived) terminal = cfg.r_arrive;
            if (final_status[i] == EpisodeStatus::Collided) terminal = cfg.r_collision;
            const double want = terminal + cfg.r_step * steps[i] + cfg.tau * (d0[i] - d_T);
            CAPTURE(seed, i, steps[i]);
            CHECK(total[i] == Catch::Approx(want).margin(1e-6));
        }
    }
}

TEST_CASE("encoder and frame size tables are consistent") {
    CHECK(frame_size(Encoder::LogMap) == 2304);
    CHECK(frame_size(Encoder::GridMap) == 2304);
    CHECK(frame_size(Encoder::AngularMap) == 48);
    CHECK(frame_size(Encoder::Raw) == 960);
    CHECK(encoder_is_2d(Encoder::LogMap));
    CHECK(encoder_is_2d(Encoder::GridMap));
    CHECK_FALSE(encoder_is_2d(Encoder::AngularMap));
    CHECK_FALSE(encoder_is_2d(Encoder::Raw));
    for (Encoder e : {Encoder::LogMap, Encoder::GridMap, Encoder::AngularMap, Encoder::Raw}) {
        CHECK(encoder_from_string(to_string(e)) == e);
    }
    CHECK_THROWS_AS(encoder_from_string("voxel"), std::invalid_argument);
}
