// Microbenchmarks for the planning hot paths: tail estimation, channel
// moment sampling, the assignment and allocation stages, and a short
// end-to-end simulation.

#include <benchmark/benchmark.h>

#include <vector>

#include "edgeplan/channel.hpp"
#include "edgeplan/planner.hpp"
#include "edgeplan/queueing.hpp"
#include "edgeplan/rng.hpp"
#include "edgeplan/risk.hpp"
#include "edgeplan/scenario.hpp"
#include "edgeplan/simulator.hpp"

using namespace edgeplan;

namespace {

std::vector<double> tail_samples(std::size_t n) {
  auto g = rng::make_stream(7, rng::kAnalytics);
  std::vector<double> v(n);
  for (auto& x : v) x = rng::lognormal(g, 0.0, 1.0);
  return v;
}

void BM_CvarSort(benchmark::State& state) {
  const auto v = tail_samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(risk::cvar_empirical(v, 0.99));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CvarSort)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_CvarLp(benchmark::State& state) {
  const auto v = tail_samples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(risk::cvar_lp(v, 0.99).value);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CvarLp)->Arg(1000)->Arg(10000);

void BM_TxStats(benchmark::State& state) {
  ChannelSpec ch;
  ch.bandwidth_hz = 1e7;
  ch.noise_power_w = 1e-9;
  ch.path_loss = 1e7;
  ch.fading.rayleigh_scale = 0.8;
  ch.fading.lognormal_location = 1.5;
  ch.fading.lognormal_scale = 1.0;
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(channel::estimate_tx_stats(ch, 5e5, 1.0, n, 99));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TxStats)->Arg(1000)->Arg(100000);

void BM_AnalyzeLinks(benchmark::State& state) {
  const Scenario s = generate_scenario(21, static_cast<int>(state.range(0)), 4);
  for (auto _ : state)
    benchmark::DoNotOptimize(queueing::analyze_links(s));
}
BENCHMARK(BM_AnalyzeLinks)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Assignment(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  auto g = rng::make_stream(13, rng::kAnalytics);
  planner::AssignCost costs;
  costs.value.assign(m, std::vector<double>(4));
  costs.feasible.assign(m, std::vector<char>(4, 1));
  for (auto& row : costs.value)
    for (auto& x : row) x = rng::uniform(g, 0.1, 10.0);
  const std::vector<int> caps(4, (m + 3) / 4);
  for (auto _ : state)
    benchmark::DoNotOptimize(planner::solve_bottleneck_assignment(costs, caps));
}
BENCHMARK(BM_Assignment)->Arg(8)->Arg(32)->Arg(128);

void BM_AllocateServer(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto g = rng::make_stream(17, rng::kAnalytics);
  std::vector<planner::DeviceLoad> loads(n);
  for (auto& l : loads) {
    l.constant = rng::uniform(g, 0.01, 0.5);
    l.weight = rng::uniform(g, 1e7, 4e7);
    l.floor = rng::uniform(g, 1e8, 4e8);
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(planner::allocate_server(loads, 1e10));
}
BENCHMARK(BM_AllocateServer)->Arg(2)->Arg(8)->Arg(32);

void BM_SolveHeuristic(benchmark::State& state) {
  const Scenario s = generate_scenario(29, static_cast<int>(state.range(0)), 4);
  const auto links = queueing::analyze_links(s);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        planner::solve(s, planner::StrategyKind::q_r, links));
}
BENCHMARK(BM_SolveHeuristic)->Arg(8)->Arg(16);

void BM_Simulate(benchmark::State& state) {
  const Scenario s = generate_scenario(31, 4, 2);
  const auto links = queueing::analyze_links(s);
  const auto plan = planner::solve(s, planner::StrategyKind::q_r, links);
  sim::SimOptions opts;
  opts.horizon = static_cast<double>(state.range(0));
  opts.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(sim::run(s, plan, opts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
