#include <benchmark/benchmark.h>

#include "sentrisk/design.hpp"
#include "sentrisk/rng.hpp"
#include "sentrisk/sparse_logit.hpp"

namespace {

void make_problem(std::size_t n, std::size_t p, sentrisk::DesignMatrix& X,
                  std::vector<std::uint8_t>& y) {
  sentrisk::Rng rng(29);
  X.n_rows = n;
  X.n_cols = p;
  X.values.resize(n * p);
  X.row_ids.resize(n);
  X.split.assign(n, sentrisk::SplitPart::train);
  for (std::size_t j = 0; j < p; ++j) {
    X.column_names.push_back("x" + std::to_string(j));
    X.column_groups.push_back(X.column_names.back());
  }
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    X.row_ids[i] = static_cast<std::int64_t>(i);
    double eta = -0.5;
    for (std::size_t j = 0; j < p; ++j) {
      const double v = rng.normal();
      X.values[i * p + j] = v;
      if (j < 3) eta += 0.8 * v;  // only the first few columns carry signal
    }
    y[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
  }
}

void BM_path(benchmark::State& state) {
  sentrisk::DesignMatrix X;
  std::vector<std::uint8_t> y;
  make_problem(static_cast<std::size_t>(state.range(0)), 30, X, y);
  sentrisk::SparseLogitOptions opt;
  for (auto _ : state) {
    auto path = sentrisk::fit_path(X, y, 50, opt);
    benchmark::DoNotOptimize(path.lambdas.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_path)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_cv_select(benchmark::State& state) {
  sentrisk::DesignMatrix X;
  std::vector<std::uint8_t> y;
  make_problem(2000, 30, X, y);
  sentrisk::SparseLogitOptions opt;
  opt.cv_folds = static_cast<std::size_t>(state.range(0));
  auto path = sentrisk::fit_path(X, y, 50, opt);
  for (auto _ : state) {
    auto model = sentrisk::select_lambda(path, X, y, 7, opt);
    benchmark::DoNotOptimize(model.lambda);
  }
}
BENCHMARK(BM_cv_select)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
