// Serial reference loops vs their OpenMP counterparts.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "parkloc/kernels.hpp"
#include "parkloc/metrics.hpp"
#include "parkloc/sim.hpp"

using namespace parkloc;

namespace {

struct Points {
    Homography h;
    std::vector<Point2Ground> in;
    std::vector<Point2Image> out;

    explicit Points(std::size_t n) : in(n), out(n) {
        Eigen::Matrix3d m;
        m << 1.2, 0.1, 640, -0.05, 0.9, 480, 0.001, 0.002, 1;
        h = Homography(m);
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> d(-20.0, 20.0);
        for (auto& p : in) p = {d(rng), d(rng)};
    }
};

template <auto Fn>
void BM_ProjectPoints(benchmark::State& state) {
    Points pts(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(Fn(pts.h, pts.in, pts.out));
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_ProjectPoints<project_points_serial>)->Name("project_points/serial")->Range(1 << 10, 1 << 20);
BENCHMARK(BM_ProjectPoints<project_points>)->Name("project_points/omp")->Range(1 << 10, 1 << 20);

struct RunInputs {
    sim::World world;
    sim::Trajectory trajectory;
    sim::NoiseSpec noise;
};

const RunInputs& run_inputs() {
    static const RunInputs in = [] {
        const sim::Scenario s = sim::standard_scenario();
        sim::World world(sim::generate_lot(s.lot), sim::default_mounts());
        sim::Trajectory t = sim::generate_trajectory(world.map(), s.trajectory);
        return RunInputs{std::move(world), std::move(t), s.noise};
    }();
    return in;
}

template <auto Fn>
void BM_SynthesizeRun(benchmark::State& state) {
    const RunInputs& in = run_inputs();
    for (auto _ : state) benchmark::DoNotOptimize(Fn(in.world, in.trajectory, in.noise));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.trajectory.size()));
}

BENCHMARK(BM_SynthesizeRun<sim::synthesize_run_serial>)->Name("synthesize_run/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SynthesizeRun<sim::synthesize_run>)->Name("synthesize_run/omp")->Unit(benchmark::kMillisecond);

const sim::Simulation& simulation() {
    static const sim::Simulation s = sim::simulate(sim::standard_scenario());
    return s;
}

template <bool Parallel>
void BM_AblationSweep(benchmark::State& state) {
    const sim::Simulation& s = simulation();
    PipelineConfig cfg;
    cfg.measure_latency = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(Parallel ? ablation_sweep(cfg, s) : ablation_sweep_serial(cfg, s));
    }
}

BENCHMARK(BM_AblationSweep<false>)->Name("ablation_sweep/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AblationSweep<true>)->Name("ablation_sweep/omp")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
