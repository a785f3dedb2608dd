#include "momkde/datagen.hpp"
#include "momkde/density.hpp"
#include "momkde/gram.hpp"
#include "momkde/mom.hpp"
#include "momkde/rkde.hpp"
#include "momkde/spkde.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace momkde;

namespace {

const KernelSpec gauss1d(KernelFamily::gaussian, 1);

PointMatrix queries(std::size_t m)
{
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-3.0, 9.0);
  PointMatrix q(static_cast<Eigen::Index>(m), 1);
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    q(i, 0) = u(rng);
  return q;
}

void BM_KdeEvaluate(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto est = WeightedDensityEstimate::uniform(sample_inliers(n, 1).points, 0.3, gauss1d);
  const auto q = queries(256);
  for (auto _ : state)
    benchmark::DoNotOptimize(kde_evaluate(est, q));
  state.SetItemsProcessed(state.iterations() * q.rows());
  state.SetComplexityN(state.range(0));
}

void BM_MomEvaluate(benchmark::State& state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto est = mom_fit(sample_inliers(n, 1), 11, 0.3, gauss1d, 2);
  const auto q = queries(256);
  for (auto _ : state)
    benchmark::DoNotOptimize(mom_evaluate(est, q));
  state.SetItemsProcessed(state.iterations() * q.rows());
  state.SetComplexityN(state.range(0));
}

void BM_MomFit(benchmark::State& state)
{
  const auto data = sample_inliers(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(mom_fit(data, 11, 0.3, gauss1d, 2));
  state.SetComplexityN(state.range(0));
}

void BM_RkhsGram(benchmark::State& state)
{
  const auto pts = sample_inliers(static_cast<std::size_t>(state.range(0)), 1).points;
  for (auto _ : state)
    benchmark::DoNotOptimize(rkhs_gram(pts, 0.3, gauss1d));
  state.SetComplexityN(state.range(0));
}

void BM_FitRkde(benchmark::State& state)
{
  const auto data = make_contaminated(OutlierScheme::uniform,
                                      static_cast<std::size_t>(state.range(0)), state.range(0) / 4, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_rkde(data, 0.3, gauss1d, LossFamily::hampel));
}

void BM_FitSpkde(benchmark::State& state)
{
  const auto data = make_contaminated(OutlierScheme::uniform,
                                      static_cast<std::size_t>(state.range(0)), state.range(0) / 4, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_spkde(data, 0.3, gauss1d, 0.2));
}

} // namespace

BENCHMARK(BM_KdeEvaluate)->Arg(1000)->Arg(4000)->Arg(16000)->Complexity(benchmark::oN);
BENCHMARK(BM_MomEvaluate)->Arg(1000)->Arg(4000)->Arg(16000)->Complexity(benchmark::oN);
BENCHMARK(BM_MomFit)->Arg(1000)->Arg(4000)->Arg(16000)->Complexity(benchmark::oN);
BENCHMARK(BM_RkhsGram)->Arg(500)->Arg(1000)->Arg(2000)->Arg(4000)->Complexity(benchmark::oNSquared)
  ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitRkde)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitSpkde)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
