// Microbenchmarks for the hot paths: the discrete W1 solver, the coupling
// segment decomposition, operator applications, full fixed-point solves and
// single-draw estimator throughput.
#include <benchmark/benchmark.h>

#include <utility>
#include <vector>

#include "bisimlab/coupling.hpp"
#include "bisimlab/estimators.hpp"
#include "bisimlab/mdp.hpp"
#include "bisimlab/metric.hpp"
#include "bisimlab/operators.hpp"
#include "bisimlab/rng.hpp"
#include "bisimlab/similarity.hpp"
#include "bisimlab/transport.hpp"

using namespace bisimlab;

namespace {

DiscreteDistribution random_distribution(std::size_t n, SplitMix64& gen) {
    Vec w(n);
    double total = 0.0;
    for (double& x : w) total += (x = gen.uniform01());
    for (double& x : w) x /= total;
    return DiscreteDistribution{std::move(w)};
}

Matrix random_cost(std::size_t n, SplitMix64& gen) {
    Matrix cost(n, n);
    StateMetric d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, gen.uniform(0.0, 4.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost(i, j) = d.at(i, j);
    return cost;
}

StateMetric random_metric(std::size_t n, std::uint64_t seed) {
    SplitMix64 gen(seed);
    StateMetric d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, gen.uniform(0.0, 2.0));
    return d;
}

void bench_w1_discrete(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    SplitMix64 gen(1);
    const DiscreteDistribution p = random_distribution(n, gen);
    const DiscreteDistribution q = random_distribution(n, gen);
    const Matrix cost = random_cost(n, gen);
    for (auto _ : state) benchmark::DoNotOptimize(w1_discrete(p, q, cost));
}

void bench_w1_bruteforce(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    SplitMix64 gen(2);
    const DiscreteDistribution p = random_distribution(n, gen);
    const DiscreteDistribution q = random_distribution(n, gen);
    const Matrix cost = random_cost(n, gen);
    for (auto _ : state) benchmark::DoNotOptimize(w1_discrete_bruteforce(p, q, cost));
}

void bench_entangled_segments(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    SplitMix64 gen(3);
    const DiscreteDistribution p = random_distribution(n, gen);
    const DiscreteDistribution q = random_distribution(n, gen);
    for (auto _ : state) benchmark::DoNotOptimize(entangled_segments(p, q));
}

void bench_apply_operator(benchmark::State& state, OperatorTag tag) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const FiniteMdp mdp = random_mdp(n, 3, 0.0, 1.0, 4);
    const TabularPolicy policy = random_policy(n, 3, 5);
    OperatorKind kind;
    kind.tag = tag;
    kind.c = 0.9;
    if (tag == OperatorTag::Eps || tag == OperatorTag::EpsBar)
        kind.similarity = SimilarityG::reward_diff(mdp);
    const StateMetric d = random_metric(n, 6);
    for (auto _ : state) benchmark::DoNotOptimize(apply_operator(kind, mdp, policy, d));
}

void bench_apply_pi(benchmark::State& state) { bench_apply_operator(state, OperatorTag::Pi); }
void bench_apply_eps_bar(benchmark::State& state) {
    bench_apply_operator(state, OperatorTag::EpsBar);
}

void bench_fixed_point(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const FiniteMdp mdp = random_mdp(n, 2, 0.0, 1.0, 7);
    const TabularPolicy policy = random_policy(n, 2, 8);
    OperatorKind kind;
    kind.tag = OperatorTag::EpsBar;
    kind.c = 0.9;
    kind.similarity = SimilarityG::reward_diff(mdp);
    for (auto _ : state) {
        const FixedPointResult r = fixed_point(kind, mdp, policy, 1e-9, 100000);
        benchmark::DoNotOptimize(r.metric.at(0, 1));
    }
}

void bench_entangled_draw(benchmark::State& state) {
    const FiniteMdp mdp = random_mdp(8, 3, 0.0, 1.0, 9);
    const TabularPolicy policy = random_policy(8, 3, 10);
    const SimilarityG g = SimilarityG::reward_diff(mdp);
    const StateMetric d = random_metric(8, 11);
    std::uint64_t k = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            sample_F_hat_eps(mdp, policy, g, 0.9, d, 2, 5, derive_stream(12, k++)));
}

void bench_bias_audit(benchmark::State& state) {
    const FiniteMdp mdp = random_mdp(6, 2, 0.0, 1.0, 13);
    const TabularPolicy policy = random_policy(6, 2, 14);
    EstimatorMethod method;
    method.tag = OperatorTag::Eps;
    method.mode = SamplingMode::Entangled;
    method.c = 0.9;
    method.similarity = SimilarityG::reward_diff(mdp);
    const StateMetric d = random_metric(6, 15);
    const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 1}, {2, 3}, {4, 5}};
    for (auto _ : state)
        benchmark::DoNotOptimize(bias_audit(method, mdp, policy, d, pairs, 1000, 16));
}

}  // namespace

BENCHMARK(bench_w1_discrete)->Arg(4)->Arg(16)->Arg(64);
BENCHMARK(bench_w1_bruteforce)->Arg(3)->Arg(4);
BENCHMARK(bench_entangled_segments)->Arg(4)->Arg(16)->Arg(64);
BENCHMARK(bench_apply_pi)->Arg(8)->Arg(16);
BENCHMARK(bench_apply_eps_bar)->Arg(8)->Arg(16);
BENCHMARK(bench_fixed_point)->Arg(8)->Arg(16);
BENCHMARK(bench_entangled_draw);
BENCHMARK(bench_bias_audit);

BENCHMARK_MAIN();
