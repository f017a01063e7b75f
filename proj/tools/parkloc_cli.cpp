// parkloc: simulate, replay, calibrate, evaluate and ablate the parking-number
// positioning pipeline. Exit codes: 0 ok, 1 input error, 2 internal error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parkloc/config.hpp"
#include "parkloc/detection.hpp"
#include "parkloc/error.hpp"
#include "parkloc/geometry.hpp"
#include "parkloc/map.hpp"
#include "parkloc/metrics.hpp"
#include "parkloc/pipeline.hpp"
#include "parkloc/rig.hpp"
#include "parkloc/sim.hpp"

namespace fs = std::filesystem;
using namespace parkloc;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

PipelineConfig build_config(const std::string& config_path, const std::vector<std::string>& sets) {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path, cfg);
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::InvalidConfig, "--set expects key=value, got '" + kv + "'");
        }
        apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

struct SimArgs {
    std::string scenario;
    int rows = 2;
    int spots = 50;
    double pitch = 2.5;
    double aisle = 6.0;
    double noise_px = 0.0;
    double misread = 0.0;
    double ghost = 0.0;
    double dropout = 0.0;
    std::uint64_t seed = 42;
    std::string pattern = "straight-aisle";
    double speed = 2.0;
    double duration = 0.0;
    std::string out;
};

int cmd_sim(const SimArgs& a, const CLI::App& app) {
    sim::Scenario s = a.scenario.empty() ? sim::Scenario{} : sim::load_scenario(a.scenario);
    const auto given = [&](const char* name) { return app.count(name) > 0; };
    if (a.scenario.empty() || given("--rows")) s.lot.rows = a.rows;
    if (a.scenario.empty() || given("--spots")) s.lot.spots_per_row = a.spots;
    if (a.scenario.empty() || given("--pitch")) s.lot.spot_pitch = a.pitch;
    if (a.scenario.empty() || given("--aisle")) s.lot.aisle_width = a.aisle;
    if (a.scenario.empty() || given("--noise-px")) s.noise.pixel_sigma = a.noise_px;
    if (a.scenario.empty() || given("--misread-rate")) s.noise.misread_rate = a.misread;
    if (a.scenario.empty() || given("--ghost-rate")) s.noise.ghost_rate = a.ghost;
    if (a.scenario.empty() || given("--dropout")) s.noise.dropout_rate = a.dropout;
    if (a.scenario.empty() || given("--seed")) s.noise.seed = a.seed;
    if (a.scenario.empty() || given("--pattern")) s.trajectory.pattern = sim::pattern_from_string(a.pattern);
    if (a.scenario.empty() || given("--speed")) s.trajectory.speed = a.speed;
    if (a.scenario.empty() || given("--duration")) s.trajectory.duration_s = a.duration;
    s.noise.validate();

    const sim::Simulation simulation = sim::simulate(s);
    const fs::path dir(a.out);
    ensure_dir(dir);
    save_map(simulation.world.map(), (dir / "map.json").string());
    save_rig(simulation.rig, (dir / "rig.json").string());
    write_log((dir / "log.ndjson").string(), simulation.run.bundles);
    sim::write_truth((dir / "log.ndjson.truth").string(), simulation.run.truth);
    write_text(dir / "scenario.json", sim::dump_scenario(s));
    std::cout << "wrote " << simulation.run.bundles.size() << " frames, "
              << simulation.world.map().size() << " spots to " << dir.string() << '\n';
    return 0;
}

struct ReplayArgs {
    std::string map;
    std::string rig;
    std::string log;
    std::string config;
    std::vector<std::string> sets;
    bool no_timing = false;
    std::string out;
};

int cmd_replay(const ReplayArgs& a) {
    PipelineConfig cfg = build_config(a.config, a.sets);
    if (!a.map.empty()) cfg.map_path = a.map;
    if (!a.rig.empty()) cfg.rig_path = a.rig;
    if (a.no_timing) cfg.measure_latency = false;
    Pipeline pipeline = Pipeline::from_config(cfg);

    LogReader reader(a.log);
    const std::vector<FrameOutcome> outcomes = run(pipeline, reader);

    const fs::path dir(a.out);
    ensure_dir(dir);
    write_outcomes((dir / "run.ndjson").string(), outcomes);

    const fs::path truth_path = a.log + ".truth";
    std::size_t with_pose = 0;
    for (const auto& o : outcomes) with_pose += o.pose ? 1 : 0;
    std::cout << "replayed " << outcomes.size() << " frames, " << with_pose << " with pose\n";
    if (fs::exists(truth_path)) {
        const auto truth = sim::read_truth(truth_path.string());
        const AblationRow row{cfg.afm, cfg.mcrp, cfg.mcap, evaluate(outcomes, truth)};
        write_text(dir / "metrics.csv", metrics_csv({&row, 1}));
        std::cout << metrics_table({&row, 1});
    }
    return 0;
}

int cmd_calib(const std::string& pairs, const std::string& camera, const std::string& out) {
    if (!camera.empty() && !camera_from_string(camera)) {
        throw Error(ErrorKind::InvalidConfig, "unknown camera '" + camera + "'");
    }
    const auto corr = read_correspondences_csv(pairs);
    const Homography h = solve_homography(corr);
    double sq = 0.0;
    for (const auto& c : corr) {
        const Point2Image q = project(h, c.ground);
        sq += (q.u - c.image.u) * (q.u - c.image.u) + (q.v - c.image.v) * (q.v - c.image.v);
    }
    const std::string text = dump_homography(h, camera);
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    std::cerr << "pairs: " << corr.size()
              << "  reprojection rms [px]: " << std::sqrt(sq / static_cast<double>(corr.size())) << '\n';
    return 0;
}

int cmd_eval(const std::string& run_path, const std::string& truth_path, const std::string& config,
             const std::string& out) {
    const PipelineConfig cfg = build_config(config, {});
    const auto outcomes = read_outcomes(run_path);
    const auto truth = sim::read_truth(truth_path);
    const AblationRow row{cfg.afm, cfg.mcrp, cfg.mcap, evaluate(outcomes, truth)};
    if (!out.empty()) write_text(out, metrics_csv({&row, 1}));
    std::cout << metrics_table({&row, 1});
    const RunMetrics& m = row.metrics;
    std::cout << "median |ex| " << m.ex.median << " m, p95 |ex| " << m.ex.p95 << " m; median |ey| "
              << m.ey.median << " m, p95 |ey| " << m.ey.p95 << " m\n";
    return 0;
}

int cmd_ablate(const std::string& scenario, const std::string& config, std::uint64_t seed,
               bool seed_given, const std::string& out) {
    sim::Scenario s = sim::load_scenario(scenario);
    if (seed_given) s.noise.seed = seed;
    PipelineConfig cfg = build_config(config, {});
    cfg.measure_latency = true;
    const auto rows = ablation_sweep(cfg, s);
    if (!out.empty()) write_text(out, metrics_csv(rows));
    std::cout << "scenario " << s.name << ", seed " << s.noise.seed << '\n' << metrics_table(rows);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parking-number positioning pipeline tools"};
    app.require_subcommand(1);

    SimArgs sim_args;
    auto* sim_cmd = app.add_subcommand("sim", "generate a lot, trajectory and detection log");
    sim_cmd->add_option("--scenario", sim_args.scenario, "built-in scenario or JSON file");
    sim_cmd->add_option("--rows", sim_args.rows, "rows of spots")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--spots", sim_args.spots, "spots per row")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--pitch", sim_args.pitch, "spot pitch [m]")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--aisle", sim_args.aisle, "aisle width [m]")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--noise-px", sim_args.noise_px, "corner noise sigma [px]")->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--misread-rate", sim_args.misread)->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--ghost-rate", sim_args.ghost)->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--dropout", sim_args.dropout)->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--seed", sim_args.seed);
    sim_cmd->add_option("--pattern", sim_args.pattern, "straight-aisle or serpentine");
    sim_cmd->add_option("--speed", sim_args.speed, "m/s")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--duration", sim_args.duration, "seconds, 0 = whole path")->check(CLI::NonNegativeNumber);
    sim_cmd->add_option("--out", sim_args.out, "output directory")->required();

    ReplayArgs rp;
    auto* replay_cmd = app.add_subcommand("replay", "run the pipeline over a detection log");
    replay_cmd->add_option("--map", rp.map);
    replay_cmd->add_option("--rig", rp.rig);
    replay_cmd->add_option("--log", rp.log)->required();
    replay_cmd->add_option("--config", rp.config);
    replay_cmd->add_option("--set", rp.sets, "override a config key: key=value");
    replay_cmd->add_flag("--no-timing", rp.no_timing, "record zero latency (byte-stable output)");
    replay_cmd->add_option("--out", rp.out, "output directory")->required();

    std::string pairs, camera, calib_out;
    auto* calib_cmd = app.add_subcommand("calib", "solve a homography from correspondences");
    calib_cmd->add_option("--pairs", pairs, "CSV ground_x,ground_y,image_u,image_v")->required();
    calib_cmd->add_option("--camera", camera, "emit as a rig entry for this camera");
    calib_cmd->add_option("--out", calib_out, "output file (default stdout)");

    std::string run_path, truth_path, eval_config, eval_out;
    auto* eval_cmd = app.add_subcommand("eval", "score a replay against ground truth");
    eval_cmd->add_option("--run", run_path)->required();
    eval_cmd->add_option("--truth", truth_path)->required();
    eval_cmd->add_option("--config", eval_config, "config the run used (module flags)");
    eval_cmd->add_option("--out", eval_out, "metrics CSV");

    std::string scenario = "standard", ablate_config, ablate_out;
    std::uint64_t ablate_seed = 42;
    auto* ablate_cmd = app.add_subcommand("ablate", "sweep the 8 module combinations");
    ablate_cmd->add_option("--scenario", scenario, "built-in scenario or JSON file");
    ablate_cmd->add_option("--seed", ablate_seed);
    ablate_cmd->add_option("--config", ablate_config);
    ablate_cmd->add_option("--out", ablate_out, "metrics CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim_cmd->parsed()) return cmd_sim(sim_args, *sim_cmd);
        if (replay_cmd->parsed()) return cmd_replay(rp);
        if (calib_cmd->parsed()) return cmd_calib(pairs, camera, calib_out);
        if (eval_cmd->parsed()) return cmd_eval(run_path, truth_path, eval_config, eval_out);
        if (ablate_cmd->parsed()) {
            return cmd_ablate(scenario, ablate_config, ablate_seed, ablate_cmd->count("--seed") > 0,
                              ablate_out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_input_error() ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
