#include <benchmark/benchmark.h>

#include "etdann/etdann.hpp"

using namespace etdann;

namespace {

FoldData benchmark_fold(std::size_t sites, std::size_t days) {
  SynthConfig sc;
  sc.n_sites = sites;
  sc.days_per_site = days;
  sc.shift_strength = 1.5;
  sc.seed = 7;
  const auto ds = generate(sc);
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return gather_sites(ds, all);
}

void BM_Kge(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> sim(n), obs(n);
  for (std::size_t i = 0; i < n; ++i) {
    obs[i] = uniform(rng, 0.1, 5.0);
    sim[i] = obs[i] + 0.3 * standard_normal(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(kge(sim, obs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Kge)->Arg(365)->Arg(7300);

void BM_ForestFit(benchmark::State& state) {
  const auto fold = benchmark_fold(static_cast<std::size_t>(state.range(0)), 365);
  ForestConfig cfg;
  cfg.n_trees = 10;
  for (auto _ : state) benchmark::DoNotOptimize(fit_forest(fold.x, fold.y, cfg));
}
BENCHMARK(BM_ForestFit)->Arg(5)->Arg(19)->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
  const auto fold = benchmark_fold(19, 365);
  ForestConfig cfg;
  cfg.n_trees = 50;
  const auto model = fit_forest(fold.x, fold.y, cfg);
  const Matrix rows = fold.x.topRows(365);
  for (auto _ : state) benchmark::DoNotOptimize(predict_forest(model, rows));
}
BENCHMARK(BM_ForestPredict)->Unit(benchmark::kMicrosecond);

// One mini-batch forward + backward through all three networks at the
// default widths.
void BM_DannBatchGradients(benchmark::State& state) {
  const auto fold = benchmark_fold(4, 365);
  const DannConfig cfg;
  const auto model = init_dann(static_cast<std::size_t>(fold.x.cols()), cfg);
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  const Matrix xs = fold.x.topRows(batch);
  const Vector ys = fold.y.head(batch);
  const Matrix xt = fold.x.bottomRows(batch);
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradients(model, xs, ys, xt, 0.5, true));
}
BENCHMARK(BM_DannBatchGradients)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_DannEpoch(benchmark::State& state) {
  const auto fold = benchmark_fold(20, 365);
  const Matrix sx = fold.x.topRows(19 * 365);
  const Vector sy = fold.y.head(19 * 365);
  const Matrix tx = fold.x.bottomRows(365);
  DannConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_dann(sx, sy, tx, cfg));
}
BENCHMARK(BM_DannEpoch)->Unit(benchmark::kMillisecond);

void BM_SelectDonors(benchmark::State& state) {
  SynthConfig sc;
  sc.n_sites = 200;
  sc.days_per_site = 2;
  const auto ds = generate(sc);
  for (auto _ : state) benchmark::DoNotOptimize(select_donors(ds, ds.site(0).site_id));
}
BENCHMARK(BM_SelectDonors)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
