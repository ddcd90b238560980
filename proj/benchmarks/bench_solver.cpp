#include <benchmark/benchmark.h>

#include "mfemskin/condensed_solver.hpp"
#include "mfemskin/demo_beam.hpp"
#include "mfemskin/scene.hpp"

namespace mfemskin {
namespace {

// Beam sizes by cells along the length; cross-section is a quarter of that.
BeamSpec beam(int cells) { return {cells, cells / 4, cells / 4, 8.0, 2.0, 2.0}; }

Scene make_scene(int cells) {
    const BeamSpec spec = beam(cells);
    return Scene(make_beam_mesh(spec), make_beam_skeleton(spec.length), MaterialParams{});
}

void BM_Assemble(benchmark::State& state) {
    const Scene scene = make_scene(static_cast<int>(state.range(0)));
    const PoseFrame pose = make_bend_animation(1, 90.0)[0];
    for (auto _ : state) {
        CondensedSystem sys = assemble_condensed(scene.defgrad(), scene.rest_positions(),
                                                 scene.rotations_for(pose), scene.material_derivatives(),
                                                 scene.constraints_for(pose));
        benchmark::DoNotOptimize(sys.rhs.data());
    }
    state.counters["tets"] = scene.mesh().num_tets();
}

void BM_Factorize(benchmark::State& state) {
    const Scene scene = make_scene(static_cast<int>(state.range(0)));
    const PoseFrame pose = make_bend_animation(1, 90.0)[0];
    const CondensedSystem sys = assemble_condensed(scene.defgrad(), scene.rest_positions(),
                                                   scene.rotations_for(pose), scene.material_derivatives(),
                                                   scene.constraints_for(pose));
    SpdFactorization fact;
    fact.factorize(sys.matrix);
    for (auto _ : state) fact.factorize(sys.matrix);  // numeric only; pattern is cached
    state.counters["tets"] = scene.mesh().num_tets();
}

void BM_SolveFrame(benchmark::State& state) {
    Scene scene = make_scene(static_cast<int>(state.range(0)));
    const auto frames = make_bend_animation(8, 90.0);
    std::size_t i = 0;
    for (auto _ : state) {
        FrameSolution sol = scene.solve(frames[i++ % frames.size()]);
        benchmark::DoNotOptimize(sol.positions.data());
    }
    state.counters["tets"] = scene.mesh().num_tets();
}

BENCHMARK(BM_Assemble)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Factorize)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveFrame)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace mfemskin

BENCHMARK_MAIN();
