// Serial reference against the indexed, OpenMP-parallel evaluator.

#include <benchmark/benchmark.h>

#include "ubkde/density_model.hpp"
#include "ubkde/kde.hpp"
#include "ubkde/kernel.hpp"

namespace {

using namespace ubkde;

PointSet eval_points(std::size_t m) {
  std::vector<double> c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = -4.0 + 8.0 * double(i) / double(m - 1);
  return PointSet(1, std::move(c));
}

void BM_kde_brute(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Sample s = draw_sample(DensityModel::gaussian(), n, StreamId{7, 0, 0});
  const Kernel k = make_kernel("epanechnikov");
  const PointSet ts = eval_points(1000);
  for (auto _ : state) benchmark::DoNotOptimize(kde_brute(s.points, k, 0.05, ts));
  state.SetItemsProcessed(state.iterations() * std::int64_t(n) * 1000);
}

void BM_kde_fast(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Sample s = draw_sample(DensityModel::gaussian(), n, StreamId{7, 0, 0});
  const Kernel k = make_kernel("epanechnikov");
  const PointSet ts = eval_points(1000);
  for (auto _ : state) benchmark::DoNotOptimize(kde_fast(s.points, k, 0.05, ts));
  state.SetItemsProcessed(state.iterations() * std::int64_t(n) * 1000);
}

void BM_kde_fast_2d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Sample s = draw_sample(DensityModel::gaussian(2), n, StreamId{7, 0, 0});
  const Kernel k = make_kernel("epanechnikov", 2);
  const Sample ts = draw_sample(DensityModel::gaussian(2), 1000, StreamId{8, 0, 0});
  for (auto _ : state) benchmark::DoNotOptimize(kde_fast(s.points, k, 0.01, ts.points));
}

}  // namespace

BENCHMARK(BM_kde_brute)->RangeMultiplier(8)->Range(1 << 10, 1 << 16);
BENCHMARK(BM_kde_fast)->RangeMultiplier(8)->Range(1 << 10, 1 << 16);
BENCHMARK(BM_kde_fast_2d)->RangeMultiplier(8)->Range(1 << 10, 1 << 16);

BENCHMARK_MAIN();
