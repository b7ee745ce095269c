#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "riscrlb/beamforming.hpp"
#include "riscrlb/fim.hpp"

using namespace riscrlb;

namespace {

struct BenchInstance {
    ScenarioGeometry geometry;
    ArrayConfig array;
    PathGains gains;
    PhaseVector phases;
    PilotMatrix pilot;
    KappaTensor kappa;
};

BenchInstance make_instance(int side, int slots) {
    RisLayout layout;
    layout.rows = side;
    layout.cols = side;
    layout.element_spacing = 0.1;
    layout.reference = {-20.0, 50.0, 20.0};
    ScenarioGeometry geometry{{0.0, 0.0, 0.0}, {50.0, 100.0, 0.0}, expand_layout(layout)};
    const ArrayConfig array{10, 10, 0.003, 0.006};
    const int n = geometry.num_paths();

    std::mt19937_64 gen(12345);
    std::normal_distribution<double> comp(0.0, std::sqrt(0.5));
    Eigen::VectorXcd h(n);
    for (int i = 0; i < n; ++i) {
        h[i] = {comp(gen), comp(gen)};
    }
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) {
        p[i] = uni(gen);
    }

    PathGains gains{std::move(h)};
    PhaseVector phases{p};
    PilotMatrix pilot = make_pilot(array, slots, 1.0, 777);
    KappaTensor kappa =
        kappa_tensor(varpi(geometry, gains, pilot, array), transform_matrix(geometry));
    return {std::move(geometry), array, std::move(gains), std::move(phases), std::move(pilot),
            std::move(kappa)};
}

void bm_kappa_tensor(benchmark::State& state) {
    const BenchInstance inst = make_instance(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            kappa_tensor(varpi(inst.geometry, inst.gains, inst.pilot, inst.array),
                         transform_matrix(inst.geometry)));
    }
}
BENCHMARK(bm_kappa_tensor)->Arg(3)->Arg(5)->Arg(8);

void bm_assemble_channel(benchmark::State& state) {
    const BenchInstance inst = make_instance(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            assemble_channel(inst.geometry, inst.gains, inst.phases, inst.array));
    }
}
BENCHMARK(bm_assemble_channel)->Arg(3)->Arg(5)->Arg(8);

void bm_position_fim(benchmark::State& state) {
    const BenchInstance inst = make_instance(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(position_fim(inst.kappa, inst.phases, 1.0));
    }
}
BENCHMARK(bm_position_fim)->Arg(3)->Arg(5)->Arg(8);

void bm_crlb_gradient(benchmark::State& state) {
    const BenchInstance inst = make_instance(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(crlb_gradient(inst.kappa, inst.phases, 1.0));
    }
}
BENCHMARK(bm_crlb_gradient)->Arg(3)->Arg(5)->Arg(8);

void bm_gdm_10_iterations(benchmark::State& state) {
    const BenchInstance inst = make_instance(static_cast<int>(state.range(0)), 1);
    GdmConfig cfg;
    cfg.max_iterations = 10;
    cfg.rel_tolerance = 1e-300; // effectively disabled: measure 10 full steps
    for (auto _ : state) {
        benchmark::DoNotOptimize(gdm_optimize(inst.kappa, inst.phases, 1.0, cfg));
    }
}
BENCHMARK(bm_gdm_10_iterations)->Arg(3)->Arg(5);

} // namespace

BENCHMARK_MAIN();
