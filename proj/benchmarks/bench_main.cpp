#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "modpulse/calibration.hpp"
#include "modpulse/compiler.hpp"
#include "modpulse/device.hpp"
#include "modpulse/qfa.hpp"

namespace {

using namespace modpulse;

const CalibrationTable& table() {
    static const CalibrationTable t = [] {
        RabiScanConfig scan = default_rabi_scan();
        scan.shots_per_point = 0;
        return calibrate(noiseless(jakarta_average()), scan).table;
    }();
    return t;
}

Schedule compiled_word(std::int64_t w, PulsePath path) {
    const DeviceModel device = jakarta_average();
    const CompilationOptions options{0, path};
    const auto gates = word_to_gates(ModpSpec{11, 1}, w, options);
    return lower_to_schedule(gates, default_calibration_set(table(), device), device, options);
}

void BM_EvolveSquareWord(benchmark::State& state) {
    const DeviceModel device = jakarta_average();
    const Schedule schedule = compiled_word(state.range(0), PulsePath::kCustomSquare);
    for (auto _ : state) {
        benchmark::DoNotOptimize(evolve(device, schedule, DensityMatrix::ground()));
    }
    state.SetItemsProcessed(state.iterations() * total_duration(schedule).dt_count);
}
BENCHMARK(BM_EvolveSquareWord)->Arg(10)->Arg(100)->Arg(1000);

void BM_EvolveDragWord(benchmark::State& state) {
    const DeviceModel device = jakarta_average();
    const Schedule schedule = compiled_word(state.range(0), PulsePath::kDefaultDrag);
    for (auto _ : state) {
        benchmark::DoNotOptimize(evolve(device, schedule, DensityMatrix::ground()));
    }
    state.SetItemsProcessed(state.iterations() * total_duration(schedule).dt_count);
}
BENCHMARK(BM_EvolveDragWord)->Arg(10)->Arg(100)->Arg(1000);

void BM_CompileAndLower(benchmark::State& state) {
    const DeviceModel device = jakarta_average();
    const GateCalibrationSet calset = default_calibration_set(table(), device);
    const CompilationOptions options{0, PulsePath::kDefaultDrag};
    for (auto _ : state) {
        const auto gates = word_to_gates(ModpSpec{11, 1}, state.range(0), options);
        benchmark::DoNotOptimize(lower_to_schedule(gates, calset, device, options));
    }
}
BENCHMARK(BM_CompileAndLower)->Arg(100)->Arg(1000);

void BM_ResolvePhaseFrames(benchmark::State& state) {
    const Schedule schedule = compiled_word(state.range(0), PulsePath::kDefaultDrag);
    for (auto _ : state) {
        benchmark::DoNotOptimize(resolve_phase_frames(schedule));
    }
}
BENCHMARK(BM_ResolvePhaseFrames)->Arg(100)->Arg(1000);

void BM_FitRabi(benchmark::State& state) {
    const double dt_s = jakarta_average().sample_time.dt_ns * 1e-9;
    std::vector<RabiPoint> series;
    for (std::int64_t d = 80; d <= 2000; d += 16) {
        const double x = static_cast<double>(d) * dt_s;
        const double c = std::cos(2.0 * std::numbers::pi * 8.0e6 * x + 0.3);
        series.push_back({x, 0.95 * c * c});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_rabi(series));
    }
}
BENCHMARK(BM_FitRabi);

void BM_AcceptanceProbability(benchmark::State& state) {
    const Mo1Qfa qfa = make_modp_qfa({11, 1});
    const std::string word(static_cast<std::size_t>(state.range(0)), 'a');
    for (auto _ : state) {
        benchmark::DoNotOptimize(acceptance_probability(qfa, word));
    }
}
BENCHMARK(BM_AcceptanceProbability)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
