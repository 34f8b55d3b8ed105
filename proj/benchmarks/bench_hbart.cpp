#include <benchmark/benchmark.h>

#include "sentrisk/design.hpp"
#include "sentrisk/hbart.hpp"
#include "sentrisk/rng.hpp"

namespace {

// Small nonlinear heteroscedastic regression problem.
void make_problem(std::size_t n, sentrisk::DesignMatrix& X, std::vector<double>& y) {
  sentrisk::Rng rng(17);
  X.n_rows = n;
  X.n_cols = 3;
  X.column_names = {"a", "b", "c"};
  X.column_groups = X.column_names;
  X.values.resize(n * 3);
  X.row_ids.resize(n);
  X.split.assign(n, sentrisk::SplitPart::train);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    X.row_ids[i] = static_cast<std::int64_t>(i);
    const double a = rng.uniform() * 10.0;
    const double b = rng.uniform() * 4.0;
    const double c = rng.uniform();
    X.values[i * 3 + 0] = a;
    X.values[i * 3 + 1] = b;
    X.values[i * 3 + 2] = c;
    const double f = 5.0 + 3.0 * a + (b > 2.0 ? 8.0 : 0.0);
    const double s = 1.0 + 0.5 * a;
    y[i] = f + s * rng.normal();
  }
}

void BM_fit(benchmark::State& state) {
  sentrisk::DesignMatrix X;
  std::vector<double> y;
  make_problem(static_cast<std::size_t>(state.range(0)), X, y);
  sentrisk::HbartConfig cfg;
  cfg.mean_trees = 20;
  cfg.scale_trees = 10;
  cfg.iterations = 60;
  cfg.burn_in = 40;
  cfg.thin = 1;
  for (auto _ : state) {
    auto model = sentrisk::fit(X, y, cfg, 3);
    benchmark::DoNotOptimize(model.train_summary.f_bar.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_fit)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_predict(benchmark::State& state) {
  sentrisk::DesignMatrix X;
  std::vector<double> y;
  make_problem(static_cast<std::size_t>(state.range(0)), X, y);
  sentrisk::HbartConfig cfg;
  cfg.mean_trees = 20;
  cfg.scale_trees = 10;
  cfg.iterations = 60;
  cfg.burn_in = 40;
  cfg.thin = 1;
  const auto model = sentrisk::fit(X, y, cfg, 3);
  for (auto _ : state) {
    auto pred = sentrisk::predict(model, X);
    benchmark::DoNotOptimize(pred.f_bar.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_predict)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
