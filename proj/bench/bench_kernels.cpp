#include <benchmark/benchmark.h>

#include <random>

#include "oscgrid/kernels.hpp"
#include "oscgrid/sim.hpp"

using namespace oscgrid;

namespace {

// Ring with chords every 7 nodes, unit-ish weights, small random angles.
FieldContext make_context(Index n) {
  std::vector<Edge> edges;
  for (Index k = 0; k < n; ++k) edges.push_back({k, (k + 1) % n, 1.0 + 0.01 * static_cast<double>(k % 5)});
  for (Index k = 0; k + 7 < n; k += 7) edges.push_back({k, k + 7, 0.5});
  const Graph graph(n, edges);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, 0.2);
  Vec theta(n - 1);
  for (Index i = 0; i < n - 1; ++i) theta(i) = angle(rng);
  return FieldContext::from_graph(graph, Vec::Ones(n), theta, GainSet{0.5, 0.1, 314.159});
}

Vec random_state(Index n) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Vec v(2 * n);
  for (Index i = 0; i < v.size(); ++i) v(i) = g(rng);
  return v;
}

void BM_FieldSerial(benchmark::State& state) {
  const Index n = state.range(0);
  const FieldContext ctx = make_context(n);
  const Vec v = random_state(n);
  Vec out;
  for (auto _ : state) {
    kernels::closed_loop_serial(ctx, v, true, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_FieldParallel(benchmark::State& state) {
  const Index n = state.range(0);
  const FieldContext ctx = make_context(n);
  const Vec v = random_state(n);
  Vec out;
  for (auto _ : state) {
    kernels::closed_loop_parallel(ctx, v, true, out);
    benchmark::DoNotOptimize(out.data());
  }
}

std::vector<Scenario> short_case_studies(int count) {
  std::vector<Scenario> out;
  for (int i = 0; i < count; ++i) {
    Scenario s = case_study(Frame::Rotating);
    s.integrator.t_end = 6.0;
    s.events.pop_back();
    s.initial_state *= 1.0 + 0.1 * i;
    out.push_back(s);
  }
  return out;
}

void BM_BatchSerial(benchmark::State& state) {
  const auto scenarios = short_case_studies(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_batch_serial(scenarios));
}

void BM_BatchParallel(benchmark::State& state) {
  const auto scenarios = short_case_studies(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_batch(scenarios));
}

}  // namespace

BENCHMARK(BM_FieldSerial)->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(BM_FieldParallel)->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(BM_BatchSerial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
