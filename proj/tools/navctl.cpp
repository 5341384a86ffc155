// Command-line front end: train / eval / render / encode.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nav/render.hpp"
#include "nav/trainer.hpp"

namespace {

nav::ScenarioSpec scenario_by_name(const std::string& name) {
    using nav::ScenarioFamily;
    if (name == "circle1") return nav::default_spec(ScenarioFamily::Circle);
    if (name == "circle2") {
        auto s = nav::default_spec(ScenarioFamily::Circle);
        s.n_robots = 20;
        s.n_obstacles = 16;
        s.circle_radius_lo = 4.0;
        s.circle_radius_hi = 6.0;
        return s;
    }
    return nav::default_spec(nav::scenario_family_from_string(name));
}

nav::Scan read_scan_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open scan file: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty scan file: " + path);
    nav::Scan scan;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) scan.ranges.push_back(std::stod(cell));
    if (scan.ranges.size() != nav::kNumBeams) {
        throw std::runtime_error("expected " + std::to_string(nav::kNumBeams) +
                                 " ranges, got " + std::to_string(scan.ranges.size()));
    }
    return scan;
}

int run_train(const std::string& config_path, std::uint64_t seed, const std::string& resume,
              const std::string& out_dir) {
    const nav::RunConfig cfg = nav::load_run_config(config_path);
    const nav::TrainResult res = nav::train_loop<float>(cfg, seed, out_dir, resume);
    std::cout << "epochs_run=" << res.epochs_run
              << " best_reach_rate=" << res.best_reach_rate << "\n";
    return 0;
}

int run_eval(const std::string& ckpt, const std::string& scenario, int episodes,
             std::uint64_t seed, const std::string& out, const std::string& config_path,
             const std::string& log_path) {
    nav::RunConfig cfg;
    if (!config_path.empty()) cfg = nav::load_run_config(config_path);
    const nav::ScenarioSpec spec = scenario_by_name(scenario);
    nav::Rng init(0);
    nav::GaussianPolicy<float> policy(nav::make_net_config(cfg), init);
    nav::load_params_file(ckpt, policy.store(), nav::config_hash(cfg));
    nav::TrajectoryLog log;
    const nav::EvalReport report =
        nav::evaluate(policy, cfg.env, spec, episodes, seed, log_path.empty() ? nullptr : &log);
    const std::string text = nav::to_json(report).dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot open report file: " + out);
        os << text;
    }
    if (!log_path.empty()) {
        std::ofstream os(log_path);
        if (!os) throw std::runtime_error("cannot open log file: " + log_path);
        nav::write_trajectory_log(os, log);
    }
    return 0;
}

int run_render(const std::string& log_path, const std::string& scenario, std::uint64_t seed,
               const std::string& out) {
    std::ifstream is(log_path);
    if (!is) throw std::runtime_error("cannot open log file: " + log_path);
    const nav::TrajectoryLog log = nav::read_trajectory_log(is);
    const nav::ScenarioSpec spec = scenario_by_name(scenario);
    // Same world-seed derivation the evaluator uses for its first episode.
    nav::Rng rng(seed);
    const nav::WorldState world = nav::generate_world(spec, rng.next());
    nav::render_trajectories(log, world, out);
    return 0;
}

int run_encode(const std::string& scan_path, const std::string& out) {
    const nav::Scan scan = read_scan_csv(scan_path);
    nav::write_pgm(nav::build_logmap(scan), out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"logarithmic-map multi-robot navigation"};
    app.require_subcommand(1);

    std::string config_path, resume, out_dir = "runs/default";
    std::uint64_t seed = 0;
    auto* train = app.add_subcommand("train", "train a policy");
    train->add_option("--config", config_path, "run config (JSON)")->required();
    train->add_option("--seed", seed, "global seed");
    train->add_option("--resume", resume, "checkpoint to resume from");
    train->add_option("--out", out_dir, "output directory");

    std::string ckpt, scenario = "crowd", report_out, eval_config, eval_log;
    int episodes = 50;
    std::uint64_t eval_seed = 0;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    eval->add_option("--ckpt", ckpt, "policy checkpoint")->required();
    eval->add_option("--scenario", scenario, "scenario name")->required();
    eval->add_option("--episodes", episodes, "episode count");
    eval->add_option("--seed", eval_seed, "evaluation seed");
    eval->add_option("--out", report_out, "report file (JSON)");
    eval->add_option("--config", eval_config, "run config (JSON)");
    eval->add_option("--log", eval_log, "trajectory log output (JSONL)");

    std::string render_log, render_scenario, render_out;
    std::uint64_t render_seed = 0;
    auto* render = app.add_subcommand("render", "render trajectories to an image");
    render->add_option("--log", render_log, "trajectory log (JSONL)")->required();
    render->add_option("--scenario", render_scenario, "scenario name")->required();
    render->add_option("--seed", render_seed, "seed used at eval time");
    render->add_option("--out", render_out, "output image (PPM)")->required();

    std::string scan_path, encode_out;
    auto* encode = app.add_subcommand("encode", "encode a scan CSV row to a log-map image");
    encode->add_option("--scan", scan_path, "scan CSV (one row of 960 ranges)")->required();
    encode->add_option("--out", encode_out, "output image (PGM)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return run_train(config_path, seed, resume, out_dir);
        if (eval->parsed())
            return run_eval(ckpt, scenario, episodes, eval_seed, report_out, eval_config, eval_log);
        if (render->parsed())
            return run_render(render_log, render_scenario, render_seed, render_out);
        if (encode->parsed()) return run_encode(scan_path, encode_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
