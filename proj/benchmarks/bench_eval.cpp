#include <benchmark/benchmark.h>

#include "sentrisk/eval.hpp"
#include "sentrisk/rng.hpp"

namespace {

void make_scores(std::size_t n, std::vector<double>& s, std::vector<std::uint8_t>& y) {
  sentrisk::Rng rng(41);
  s.resize(n);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.uniform() < 0.3 ? 1 : 0;
    s[i] = rng.uniform() + (y[i] ? 0.2 : 0.0);
    if (i % 7 == 0) s[i] = 0.5;  // inject ties
  }
}

void BM_auc(benchmark::State& state) {
  std::vector<double> s;
  std::vector<std::uint8_t> y;
  make_scores(static_cast<std::size_t>(state.range(0)), s, y);
  for (auto _ : state) {
    auto roc = sentrisk::auc(s, y);
    benchmark::DoNotOptimize(roc.auc);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_auc)->Arg(10000)->Arg(100000);

void BM_risk_bins(benchmark::State& state) {
  std::vector<double> s;
  std::vector<std::uint8_t> y;
  make_scores(static_cast<std::size_t>(state.range(0)), s, y);
  for (auto _ : state) {
    auto table = sentrisk::risk_bins(s, y, 5);
    benchmark::DoNotOptimize(table.bins.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_risk_bins)->Arg(100000);

void BM_geweke(benchmark::State& state) {
  sentrisk::Rng rng(5);
  std::vector<double> chain(static_cast<std::size_t>(state.range(0)));
  for (auto& v : chain) v = rng.normal();
  for (auto _ : state) {
    auto g = sentrisk::geweke(chain);
    benchmark::DoNotOptimize(g.z);
  }
}
BENCHMARK(BM_geweke)->Arg(1000)->Arg(10000);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
