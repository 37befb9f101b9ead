#include <benchmark/benchmark.h>

#include <numbers>
#include <vector>

#include "snipcorr/hydro.hpp"
#include "snipcorr/lstm.hpp"
#include "snipcorr/random.hpp"
#include "snipcorr/seaway.hpp"
#include "snipcorr/snippets.hpp"

using namespace snipcorr;

namespace {

const seaway::SeaStateConfig kSS5{4.0, 15.0, std::numbers::pi, 5.144};

TimeSeries ss5_wave(std::size_t n) {
    const auto disc = seaway::discretize(kSS5, 400, seaway::default_range(kSS5), 1);
    return seaway::realize_elevation(seaway::to_encounter_frame(disc, kSS5), n, 0.1);
}

std::vector<lstm::Sequence> snippet_batch(const lstm::LstmNetwork& net, std::size_t count, std::size_t len) {
    Rng rng(3);
    std::vector<lstm::Sequence> out;
    for (std::size_t i = 0; i < count; ++i) {
        lstm::Sample s;
        s.inputs.assign(3, std::vector<double>(len));
        s.targets.assign(1, std::vector<double>(len));
        for (auto& ch : s.inputs)
            for (auto& v : ch) v = rng.normal();
        for (auto& v : s.targets[0]) v = rng.normal();
        out.push_back(net.prepare(s));
    }
    return out;
}

}  // namespace

static void BM_RealizeElevation(benchmark::State& state) {
    const auto disc = seaway::discretize(kSS5, 400, seaway::default_range(kSS5), 1);
    for (auto _ : state) benchmark::DoNotOptimize(seaway::realize_elevation(disc, 7000, 0.1));
    state.SetItemsProcessed(state.iterations() * 7000);
}
BENCHMARK(BM_RealizeElevation);

static void BM_SimulateHigh(benchmark::State& state) {
    const auto eta = ss5_wave(7000);
    const hydro::HullConfig hull;
    for (auto _ : state) benchmark::DoNotOptimize(hydro::simulate_high_fidelity(eta, hull, kSS5));
    state.SetItemsProcessed(state.iterations() * 7000);
}
BENCHMARK(BM_SimulateHigh);

static void BM_SimulateLow(benchmark::State& state) {
    const auto eta = ss5_wave(7000);
    const hydro::HullConfig hull;
    for (auto _ : state) benchmark::DoNotOptimize(hydro::simulate_low_fidelity(eta, hull, kSS5));
    state.SetItemsProcessed(state.iterations() * 7000);
}
BENCHMARK(BM_SimulateLow);

static void BM_DetectPeaks(benchmark::State& state) {
    const auto lf = hydro::simulate_low_fidelity(ss5_wave(7000), hydro::HullConfig{}, kSS5);
    const snippets::PeakOptions po{snippets::default_separation(kSS5, 0.1), 1000};
    for (auto _ : state) benchmark::DoNotOptimize(snippets::detect_peaks(lf.pitch, po));
}
BENCHMARK(BM_DetectPeaks);

// One training batch of 32 snippet windows (501 samples, 55 steps at tau 9).
static void BM_LossAndGradients(benchmark::State& state) {
    lstm::NetworkConfig cfg;
    cfg.hidden_size = static_cast<int>(state.range(0));
    const auto net = lstm::LstmNetwork::initialize(cfg);
    const auto seqs = snippet_batch(net, 32, 501);
    std::vector<const lstm::Sequence*> batch;
    for (const auto& s : seqs) batch.push_back(&s);
    auto grads = lstm::Gradients::zeros_like(net);
    for (auto _ : state) benchmark::DoNotOptimize(lstm::loss_and_gradients(net, batch, &grads));
    state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_LossAndGradients)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

static void BM_ForwardBatch(benchmark::State& state) {
    const auto net = lstm::LstmNetwork::initialize(lstm::NetworkConfig{});
    Rng rng(4);
    std::vector<std::vector<std::vector<double>>> inputs(8, std::vector<std::vector<double>>(3, std::vector<double>(501)));
    for (auto& w : inputs)
        for (auto& ch : w)
            for (auto& v : ch) v = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(inputs));
    state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_ForwardBatch)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
