// Microbenchmarks for the hot paths. The L=10 table is taken from the
// default cache (see UNIFLUCT_CACHE_DIR) and built on first use.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "unifluct/alpha_scan.hpp"
#include "unifluct/bhp.hpp"
#include "unifluct/ks.hpp"
#include "unifluct/pipeline.hpp"

namespace {

using namespace unifluct;

const BhpTable& table() {
  static const BhpTable t =
      load_or_build_table(default_table_path(10), BhpParams::for_lattice(10)).table;
  return t;
}

std::vector<double> magnitudes(std::size_t n) {
  return simulate_magnitudes(n, 1, 0.55, 0.063, 0.032, table());
}

void BM_PdfRaw(benchmark::State& state) {
  const auto p = BhpParams::for_lattice(10);
  const double mu = static_cast<double>(state.range(0)) / 4.0;
  for (auto _ : state) benchmark::DoNotOptimize(bhp_pdf_raw(mu, p));
}
BENCHMARK(BM_PdfRaw)->Arg(-16)->Arg(0)->Arg(12);

void BM_TableQuery(benchmark::State& state) {
  const auto& t = table();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pick(-8.0, 6.0);
  std::vector<double> xs(4096);
  for (auto& x : xs) x = pick(rng);
  std::size_t i = 0;
  for (auto _ : state) {
    const double x = xs[i++ & 4095];
    benchmark::DoNotOptimize(t.pdf(x) + t.cdf(x));
  }
}
BENCHMARK(BM_TableQuery);

void BM_Quantile(benchmark::State& state) {
  const auto& t = table();
  double p = 0.0;
  for (auto _ : state) {
    p = p + 0.618033988749895;
    p -= static_cast<double>(static_cast<long>(p));
    benchmark::DoNotOptimize(t.quantile(p));
  }
}
BENCHMARK(BM_Quantile);

void BM_KsTest(benchmark::State& state) {
  const auto set = fluctuations(magnitudes(static_cast<std::size_t>(state.range(0))), 0.55);
  const auto tr = truncate(table(), set.l_min, set.r_max);
  const ModelCdf model = [&tr](double x) { return tr.cdf(x); };
  for (auto _ : state) benchmark::DoNotOptimize(ks_test(set.values, model));
}
BENCHMARK(BM_KsTest)->Arg(3000)->Arg(100000);

void BM_EvaluateAlpha(benchmark::State& state) {
  const auto m = magnitudes(3000);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_alpha(m, 0.55, table()));
}
BENCHMARK(BM_EvaluateAlpha);

void BM_ScanAndRefine(benchmark::State& state) {
  const auto m = magnitudes(3000);
  ScanOptions options;
  options.workers = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(refine(m, scan(m, options, table()), table(), 0.001, options));
  }
}
BENCHMARK(BM_ScanAndRefine)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
