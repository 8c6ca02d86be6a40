// Serial reference vs OpenMP kernels on a simulated pattern of n points.
#include <benchmark/benchmark.h>

#include <vector>

#include "fmark/estimators.hpp"
#include "fmark/inference.hpp"
#include "fmark/kernels.hpp"
#include "fmark/simulate.hpp"

namespace {

struct Fixture {
  fmark::PointPattern pattern;
  fmark::FunctionalMarkSet marks;
  fmark::ResolvedConfig cfg;
  fmark::PairTable table;
  std::vector<double> values;

  explicit Fixture(double lambda)
      : pattern(make_pattern(lambda)),
        marks(fmark::simulate_growth_marks(pattern, growth())),
        cfg(fmark::resolve({}, pattern)),
        table(pattern, cfg),
        values(table.num_pairs()) {
    for (std::size_t p = 0; p < values.size(); ++p) values[p] = 1.0 + 0.001 * static_cast<double>(p % 97);
  }

  static fmark::PointPattern make_pattern(double lambda) {
    fmark::SimulationSpec spec;
    spec.lambda = lambda;
    spec.seed = 7;
    return fmark::simulate_pattern(spec);
  }
  static fmark::GrowthParams growth() {
    fmark::GrowthParams g;
    g.mode = fmark::GrowthMode::positive;
    g.c = 0.5;
    return g;
  }
};

const Fixture& fixture(double lambda) {
  static const Fixture small(200.0);
  static const Fixture large(1000.0);
  return lambda < 500.0 ? small : large;
}

template <bool Omp>
void BM_binned_sum(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<double>(state.range(0)));
  std::vector<double> out(f.table.kernel_bins().bins());
  for (auto _ : state) {
    if constexpr (Omp) {
      fmark::kernels::omp::binned_sum(f.table.kernel_bins(), f.values, out);
    } else {
      fmark::kernels::serial::binned_sum(f.table.kernel_bins(), f.values, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Omp>
void BM_fill_rows(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<double>(state.range(0)));
  const std::size_t n = f.pattern.size();
  std::vector<double> out(n * n);
  const auto& grid = f.marks.grid();
  auto fill = [&](std::size_t i, std::span<double> row) {
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = fmark::eval_testfn_integrated(fmark::TestFunction::t1_halfsqdiff, f.marks.curve(i, 0),
                                             f.marks.curve(j, 1), grid);
    }
  };
  for (auto _ : state) {
    if constexpr (Omp) {
      fmark::kernels::omp::fill_rows(n, n, out, fill);
    } else {
      fmark::kernels::serial::fill_rows(n, n, out, fill);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

// 199 random-labelling envelopes of gamma_hl, the fan-out used by the CLI
void BM_envelope(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<double>(state.range(0)));
  fmark::set_thread_count(static_cast<int>(state.range(1)));
  const fmark::EstimationContext ctx(f.pattern, &f.marks, {});
  fmark::StatisticRequest req;
  req.statistic = fmark::Statistic::gamma_hl;
  for (auto _ : state) {
    auto bands = fmark::random_label_envelopes(ctx, {req}, {});
    benchmark::DoNotOptimize(bands.data());
  }
  fmark::set_thread_count(0);
}

}  // namespace

BENCHMARK(BM_binned_sum<false>)->Arg(200)->Arg(1000);
BENCHMARK(BM_binned_sum<true>)->Arg(200)->Arg(1000);
BENCHMARK(BM_fill_rows<false>)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fill_rows<true>)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_envelope)->Args({200, 1})->Args({200, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
