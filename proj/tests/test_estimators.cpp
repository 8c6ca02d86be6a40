#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "fmark/estimators.hpp"
#include "fmark/simulate.hpp"

using namespace fmark;

namespace {

StatisticRequest request(Statistic s, std::size_t h = 0, std::size_t l = 1) {
  StatisticRequest r;
  r.statistic = s;
  r.h = h;
  r.l = l;
  return r;
}

}  // namespace

TEST_CASE("estimation needs two points") {
  const PointPattern one(Window::unit_square(), {{0.5, 0.5}});
  CHECK_THROWS_AS(EstimationContext(one, nullptr, EstimationConfig{}), domain_error);
  FunctionalMarkSet m(TimeGrid::uniform(0, 1, 3), 1, 2);
  CHECK_THROWS_AS(estimate_nn_indices(one, m, 0, 1, EstimationConfig{}), domain_error);
}

TEST_CASE("configuration errors") {
  const fixtures::Case c = fixtures::random_case(31, 12, 2, 4, false, false);
  EstimationConfig cfg;
  cfg.bandwidth = -1.0;
  CHECK_THROWS_AS(EstimationContext(c.pattern, &c.marks, cfg), domain_error);
  cfg.bandwidth = 0.05;
  cfg.edge = EdgeRule::none_torus;
  CHECK_THROWS_AS(EstimationContext(c.pattern, &c.marks, cfg), domain_error);
  cfg.edge.reset();
  cfg.time_lag = 4;
  CHECK_THROWS_AS(EstimationContext(c.pattern, &c.marks, cfg), domain_error);
  cfg.time_lag = 3;
  CHECK_NOTHROW(EstimationContext(c.pattern, &c.marks, cfg));
  cfg.time_lag = 1;
  CHECK_THROWS_AS(EstimationContext(c.pattern, nullptr, cfg), domain_error);
  cfg.time_lag = 0;
  cfg.grid = DistanceGrid::uniform(0.6, 10);
  CHECK_THROWS_AS(EstimationContext(c.pattern, &c.marks, cfg), domain_error);

  const fixtures::Case t = fixtures::random_case(31, 12, 2, 4, true, false);
  cfg.grid.reset();
  cfg.edge = EdgeRule::translation;
  CHECK_THROWS_AS(EstimationContext(t.pattern, &t.marks, cfg), domain_error);
}

TEST_CASE("request errors") {
  const fixtures::Case c = fixtures::random_case(32, 15, 2, 4, true, false);
  EstimationConfig cfg;
  cfg.bandwidth = 0.1;
  const EstimationContext ctx(c.pattern, &c.marks, cfg);
  CHECK_THROWS_AS(ctx.evaluate(request(Statistic::kappa_hl, 0, 2)), domain_error);
  CHECK_THROWS_AS(ctx.evaluate(request(Statistic::gamma_hl, 5, 0)), domain_error);

  StatisticRequest typed = request(Statistic::K_tf);
  typed.types = TypeSelection{1, 2};
  CHECK_THROWS_AS(ctx.evaluate(typed), domain_error);

  StatisticRequest local = request(Statistic::g_tf);
  local.local_point = 0;
  CHECK_THROWS_AS(ctx.evaluate(local), domain_error);
  local.statistic = Statistic::K_tf;
  local.local_point = 15;
  CHECK_THROWS_AS(ctx.evaluate(local), domain_error);

  StatisticRequest u = request(Statistic::U);
  u.u_base = Statistic::cov_sto;
  CHECK_THROWS_AS(ctx.evaluate(u), domain_error);

  StatisticRequest multi = request(Statistic::kappa_tf);
  multi.multi = MultiTestFunctionSpec{TestFunction::t1_halfsqdiff,
                                      MultiCombine::mean_of_others, 0, {1}};
  multi.normalization = KappaNormalization::mean_left;
  CHECK_THROWS_AS(ctx.evaluate(multi), domain_error);

  const EstimationContext bare(c.pattern, nullptr, cfg);
  CHECK_THROWS_AS(bare.evaluate(request(Statistic::kappa_hl)), domain_error);
  CHECK_NOTHROW(bare.evaluate(request(Statistic::K_ground)));
  CHECK_THROWS_AS(statistic_from_string("mark_entropy"), domain_error);
}

TEST_CASE("Isham correlation needs nonconstant channels") {
  fixtures::Case c = fixtures::random_case(33, 15, 2, 3, true, false);
  for (std::size_t i = 0; i < c.marks.num_points(); ++i) {
    for (double& v : c.marks.curve(i, 1)) v = 2.0;
  }
  EstimationConfig cfg;
  cfg.bandwidth = 0.1;
  const EstimationContext ctx(c.pattern, &c.marks, cfg);
  CHECK_THROWS_AS(ctx.evaluate(request(Statistic::corr_ish)), domain_error);
  CHECK_NOTHROW(ctx.evaluate(request(Statistic::cov_cre)));
}

TEST_CASE("multitype errors") {
  const fixtures::Case c = fixtures::random_case(34, 15, 2, 3, true, true);
  EstimationConfig cfg;
  cfg.bandwidth = 0.1;
  const EstimationContext ctx(c.pattern, &c.marks, cfg);
  StatisticRequest req = request(Statistic::K_tf);
  req.types = TypeSelection{1, 3};
  CHECK_THROWS_AS(ctx.evaluate(req), domain_error);
  req.types = TypeSelection{1, 2};
  CHECK_NOTHROW(ctx.evaluate(req));
  req.local_point = 0;
  CHECK_THROWS_AS(ctx.evaluate(req), domain_error);
  req.local_point.reset();
  req.statistic = Statistic::kappa_hl;
  CHECK_THROWS_AS(ctx.evaluate(req), domain_error);
}

TEST_CASE("knn errors") {
  const fixtures::Case c = fixtures::random_case(35, 5, 2, 3, true, false);
  CHECK_THROWS_AS(estimate_knn_indices(c.pattern, c.marks, 0, 1, 0, EstimationConfig{}), domain_error);
  CHECK_THROWS_AS(estimate_knn_indices(c.pattern, c.marks, 0, 1, 5, EstimationConfig{}), domain_error);
  CHECK_NOTHROW(estimate_knn_indices(c.pattern, c.marks, 0, 1, 4, EstimationConfig{}));
  CHECK_THROWS_AS(estimate_nn_indices(c.pattern, c.marks, 0, 2, EstimationConfig{}), domain_error);
}

TEST_CASE("poisson K is close to pi r^2") {
  SimulationSpec spec;
  spec.lambda = 400;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    spec.seed = seed;
    const PointPattern p = simulate_pattern(spec);
    const EstimationContext ctx(p, nullptr, EstimationConfig{});
    const auto k = ctx.evaluate(request(Statistic::K_ground));
    REQUIRE(k.theoretical.size() == k.r.size());
    const std::size_t last = k.r.size() - 1;
    const double target = std::numbers::pi * k.r[last] * k.r[last];
    CHECK(k.theoretical[last] == doctest::Approx(target));
    worst = std::max(worst, std::fabs(k.values[last] / target - 1.0));
  }
  CHECK(worst < 0.15);
}

TEST_CASE("pointwise curves are exposed for mark characteristics") {
  const fixtures::Case c = fixtures::random_case(36, 20, 2, 4, true, false);
  EstimationConfig cfg;
  cfg.bandwidth = 0.1;
  cfg.mean_norm = MeanNormalization::pointwise;
  const EstimationContext ctx(c.pattern, &c.marks, cfg);
  const SummaryCurve k = ctx.evaluate(request(Statistic::kappa_hl));
  CHECK(k.pointwise_width == 4);
  CHECK(k.pointwise.size() == 4 * k.r.size());
  CHECK(request_label(request(Statistic::kappa_hl)) == "kappa_hl_1_2");
}
