#include <doctest.h>

#include "oracle_suite.hpp"

namespace {

void run_case(const fixtures::Case& c, const fmark::EstimationConfig& cfg) {
  for (const auto& cmp : fixtures::compare_with_oracle(c, cfg, 1e-10)) {
    INFO(cmp.what << " worst relative error " << cmp.worst);
    CHECK(cmp.ok);
  }
}

fmark::EstimationConfig base_config(double b = 0.12) {
  fmark::EstimationConfig cfg;
  cfg.bandwidth = b;
  cfg.grid = fmark::DistanceGrid::uniform(0.4, 16);
  return cfg;
}

}  // namespace

TEST_CASE("estimators match the oracle on the torus") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto c = fixtures::random_case(seed, 8, 2, 4, true, true);
    run_case(c, base_config());
  }
}

TEST_CASE("estimators match the oracle with translation edge correction") {
  const auto c = fixtures::random_case(11, 9, 2, 5, false, true, 1.5, 1.0);
  run_case(c, base_config());
}

TEST_CASE("estimators match the oracle for every kernel") {
  const auto c = fixtures::random_case(21, 7, 2, 3, true, true);
  for (auto k : {fmark::KernelShape::epanechnikov, fmark::KernelShape::box,
                 fmark::KernelShape::gaussian_truncated}) {
    auto cfg = base_config(0.15);
    cfg.kernel = k;
    run_case(c, cfg);
  }
}

TEST_CASE("estimators match the oracle with time lag, distinct pairs and pointwise means") {
  const auto c = fixtures::random_case(31, 8, 2, 5, true, true);
  auto cfg = base_config();
  cfg.time_lag = 2;
  cfg.chat = fmark::CHatDenominator::distinct_pairs;
  run_case(c, cfg);
  cfg.mean_norm = fmark::MeanNormalization::pointwise;
  run_case(c, cfg);
  cfg.time_lag = 0;
  run_case(c, cfg);
}

TEST_CASE("single-sample marks reduce to scalar marks") {
  const auto c = fixtures::random_case(41, 6, 2, 1, true, false);
  run_case(c, base_config(0.2));
}

TEST_CASE("multi-function test functions match the oracle") {
  const auto c = fixtures::random_case(51, 7, 3, 4, true, false);
  run_case(c, base_config());
}

TEST_CASE("Isham correlation matches the oracle where it is defined") {
  // marks that vary smoothly in space give positive r-covariances
  auto c = fixtures::random_case(61, 10, 2, 4, true, false);
  for (std::size_t i = 0; i < c.data.n(); ++i) {
    for (std::size_t k = 0; k < c.data.T(); ++k) {
      const double tk = c.data.t[k];
      c.data.f[(i * 2 + 0) * c.data.T() + k] = 1.0 + std::sin(6.0 * c.data.x[i]) + 0.1 * tk;
      c.data.f[(i * 2 + 1) * c.data.T() + k] = 2.0 + std::cos(6.0 * c.data.x[i]) * (1.0 + 0.2 * tk);
    }
  }
  c.marks = fmark::FunctionalMarkSet(fmark::TimeGrid(c.data.t), c.data.n(), 2, c.data.f);
  const auto cfg = base_config(0.2);
  const fmark::EstimationContext ctx(c.pattern, &c.marks, cfg);
  fmark::StatisticRequest req;
  req.statistic = fmark::Statistic::corr_ish;
  const auto got = ctx.evaluate(req).values;
  const auto want = oracle::mark_stat(c.data, fixtures::settings_for(ctx.config()), "corr_ish", 0, 1);
  std::size_t defined = 0;
  for (double v : got) defined += std::isnan(v) ? 0 : 1;
  CHECK(defined >= 4);
  CHECK(fixtures::close(got, want, 1e-10));
}
