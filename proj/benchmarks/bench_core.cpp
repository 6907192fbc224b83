#include <benchmark/benchmark.h>

#include <random>

#include "saber/analytics.hpp"
#include "saber/engine.hpp"
#include "saber/selection.hpp"
#include "saber/statistics.hpp"
#include "saber/timing.hpp"
#include "synthetic.hpp"

using namespace saber;

namespace {

std::vector<double> curve(std::size_t n) {
  std::mt19937_64 rng(1);
  return saber::testing::random_walk(rng, n, 1e5, 0.015, 0.0003);
}

void BM_MaxDrawdown(benchmark::State& state) {
  const auto eq = curve(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(max_drawdown(eq));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MaxDrawdown)->RangeMultiplier(4)->Range(64, 1 << 16)->Complexity(benchmark::oN);

void BM_ComputeMetrics(benchmark::State& state) {
  const auto eq = curve(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(eq, 0.03));
}
BENCHMARK(BM_ComputeMetrics)->Arg(252)->Arg(2520);

void BM_Backtest(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto dates = saber::testing::business_days(Date(2010, 1, 4), 1000);
  const MarketData data({PriceSeries("T", saber::testing::bars_from_closes(dates, saber::testing::random_walk(rng, dates.size())))},
                        Universe{});
  const Window w{dates[0], dates[500], dates[751]};
  const auto name = builtin_strategy_names()[static_cast<std::size_t>(state.range(0))];
  const auto factory = builtin_strategy_factory(name);
  for (auto _ : state) {
    auto strat = factory();
    benchmark::DoNotOptimize(run_backtest(data, "T", w, *strat, ExecutionConfig{}));
  }
  state.SetLabel(name);
}
BENCHMARK(BM_Backtest)->DenseRange(0, 7);

void BM_ArimaFit(benchmark::State& state) {
  const auto prices = curve(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(arima_fit(prices));
}
BENCHMARK(BM_ArimaFit)->Arg(504)->Arg(5040);

void BM_RankTopK(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::map<std::string, double> scores;
  for (int i = 0; i < state.range(0); ++i) scores["S" + std::to_string(i)] = static_cast<double>(rng() % 1000);
  for (auto _ : state) benchmark::DoNotOptimize(rank_top_k(scores, 10, true));
}
BENCHMARK(BM_RankTopK)->Arg(100)->Arg(500);

void BM_StudentT(benchmark::State& state) {
  double t = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(student_t_two_sided_p(t, 29));
    t = t < 8 ? t + 0.37 : 0.1;
  }
}
BENCHMARK(BM_StudentT);

}  // namespace
BENCHMARK_MAIN();
