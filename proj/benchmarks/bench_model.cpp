#include <benchmark/benchmark.h>

#include "viewgraph/evalmetrics.hpp"
#include "viewgraph/trainer.hpp"

using namespace viewgraph;

namespace {

struct Setup {
    Dataset data;
    TrainConfig config;
    ModelParams params;
};

// Full-size model dimensions on a small synthetic set.
Setup make_setup(std::size_t views, std::size_t patterns, std::size_t features) {
    Setup s;
    s.data = generate_synthetic(4, 4, views, 64, 0.1, 1);
    s.config.patterns = patterns;
    s.config.features = features;
    s.config = bind_to_dataset(s.config, s.data);
    s.params = ModelParams::initialize(s.config, 1);
    return s;
}

void BM_Forward(benchmark::State& state) {
    const Setup s = make_setup(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 256);
    for (auto _ : state) benchmark::DoNotOptimize(forward(s.data.samples[0], s.params, s.config));
}
BENCHMARK(BM_Forward)->Args({12, 32})->Args({20, 64})->Args({20, 128})->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
    const Setup s = make_setup(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)), 256);
    const ShapeSample& shape = s.data.samples[0];
    for (auto _ : state) {
        const ForwardTrace t = forward(shape, s.params, s.config);
        benchmark::DoNotOptimize(backward(t, shape, s.params, s.config));
    }
}
BENCHMARK(BM_ForwardBackward)->Args({12, 32})->Args({20, 64})->Args({20, 128})->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
    Setup s = make_setup(20, 64, 256);
    s.config.threads = static_cast<std::size_t>(state.range(0));
    std::vector<const ShapeSample*> batch;
    for (const auto& shape : s.data.samples) batch.push_back(&shape);
    for (auto _ : state) {
        const Gradients g = batch_gradients(batch, s.params, s.config);
        sgd_step(s.params, g, s.config.learning_rate);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(batch.size()));
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_MeanAveragePrecision(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Dataset ds = generate_synthetic(8, n / 8, 1, 16, 1.0, 2);
    Matrix f(ds.size(), 16);
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t k = 0; k < 16; ++k) f(i, k) = ds.samples[i].features(0, k);
        labels.push_back(ds.samples[i].label);
    }
    const RetrievalRun run = self_retrieval(f, labels, Distance::euclidean, RetrievalRange::test_test);
    for (auto _ : state) benchmark::DoNotOptimize(mean_average_precision(run));
}
BENCHMARK(BM_MeanAveragePrecision)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
