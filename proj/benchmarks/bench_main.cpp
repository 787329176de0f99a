#include <benchmark/benchmark.h>

#include "obtree/baselines.hpp"
#include "obtree/leaf_fit.hpp"
#include "obtree/softgrad.hpp"
#include "obtree/synth.hpp"
#include "obtree/train.hpp"
#include "obtree/tree.hpp"

namespace {

using namespace obtree;

SynthData bench_data(int depth, std::size_t n) {
    SynthSpec spec;
    spec.depth = depth;
    spec.p = 5;
    spec.n = n;
    spec.noise_sigma = 0.05;
    spec.seed = 7;
    return make_oblique_data(spec);
}

// Forward + backward pass of the relaxed loss, the training inner loop.
void BM_SoftLossAndGrad(benchmark::State& state) {
    const int depth = static_cast<int>(state.range(0));
    SynthData synth = bench_data(depth, 1000);
    SoftEvaluator eval(synth.ds.features, synth.ds.targets);
    SoftEvaluation out;
    for (auto _ : state) {
        double loss = eval.loss_and_grad(synth.tree, 20.0, {}, out);
        benchmark::DoNotOptimize(loss);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(synth.ds.size()));
}
BENCHMARK(BM_SoftLossAndGrad)->DenseRange(1, 5);

// Forward pass only (candidate evaluation between phases).
void BM_SoftLoss(benchmark::State& state) {
    const int depth = static_cast<int>(state.range(0));
    SynthData synth = bench_data(depth, 1000);
    SoftEvaluator eval(synth.ds.features, synth.ds.targets);
    for (auto _ : state) {
        double loss = eval.loss(synth.tree, 20.0, {});
        benchmark::DoNotOptimize(loss);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(synth.ds.size()));
}
BENCHMARK(BM_SoftLoss)->DenseRange(1, 5);

// Hard routing + prediction throughput.
void BM_HardPredict(benchmark::State& state) {
    const int depth = static_cast<int>(state.range(0));
    SynthData synth = bench_data(depth, 10000);
    for (auto _ : state) {
        std::vector<double> pred = predict(synth.tree, synth.ds.features);
        benchmark::DoNotOptimize(pred.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(synth.ds.size()));
}
BENCHMARK(BM_HardPredict)->DenseRange(1, 5);

void BM_LeafRefitConstant(benchmark::State& state) {
    SynthData synth = bench_data(3, 2000);
    for (auto _ : state) {
        ObliqueTree tree = synth.tree;
        LeafFitReport rep = refit_constant(tree, synth.ds);
        benchmark::DoNotOptimize(rep.leaf_intercepts.data());
    }
}
BENCHMARK(BM_LeafRefitConstant);

void BM_LeafRefitLinear(benchmark::State& state) {
    SynthSpec spec;
    spec.depth = 3;
    spec.p = 5;
    spec.n = 2000;
    spec.noise_sigma = 0.05;
    spec.leaf_mode = LeafMode::linear;
    spec.seed = 7;
    SynthData synth = make_oblique_data(spec);
    for (auto _ : state) {
        ObliqueTree tree = synth.tree;
        LeafFitReport rep = refit_linear(tree, synth.ds);
        benchmark::DoNotOptimize(rep.leaf_intercepts.data());
    }
}
BENCHMARK(BM_LeafRefitLinear);

// One gradient phase at fixed scale: range(0) epochs on a depth-2 tree.
void BM_DescentPhase(benchmark::State& state) {
    SynthData synth = bench_data(2, 1000);
    TrainConfig cfg;
    cfg.depth = 2;
    cfg.n_epoch = static_cast<int>(state.range(0));
    for (auto _ : state) {
        ObliqueTree tree = init_tree(cfg.depth, synth.ds.num_features(), synth.ds, 11);
        PhaseResult out = gradient_descent_phase(tree, synth.ds, 20.0, cfg);
        benchmark::DoNotOptimize(out.soft_loss);
    }
}
BENCHMARK(BM_DescentPhase)->Arg(10)->Arg(50);

void BM_CartFit(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    SynthData synth = bench_data(3, n);
    for (auto _ : state) {
        AxisTree tree = fit_cart(synth.ds, 6);
        benchmark::DoNotOptimize(tree.nodes.data());
    }
}
BENCHMARK(BM_CartFit)->Arg(250)->Arg(1000)->Arg(4000);

void BM_ForestFit(benchmark::State& state) {
    const int trees = static_cast<int>(state.range(0));
    SynthData synth = bench_data(3, 1000);
    for (auto _ : state) {
        Forest forest = fit_forest(synth.ds, trees, 10, 0, 3);
        benchmark::DoNotOptimize(forest.trees.data());
    }
}
BENCHMARK(BM_ForestFit)->Arg(10)->Arg(50);

void BM_ForestPredict(benchmark::State& state) {
    SynthData synth = bench_data(3, 5000);
    Forest forest = fit_forest(synth.ds, 100, 10, 0, 3);
    for (auto _ : state) {
        std::vector<double> pred = predict_baseline(forest, synth.ds.features);
        benchmark::DoNotOptimize(pred.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(synth.ds.size()));
}
BENCHMARK(BM_ForestPredict);

} // namespace

BENCHMARK_MAIN();
