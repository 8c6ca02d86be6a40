#include <doctest.h>

#include <cmath>
#include <random>

#include "fmark/kernels.hpp"
#include "fmark/smoothing.hpp"
#include "fmark/testfn.hpp"

using namespace fmark;

TEST_CASE("pointwise test functions") {
  CHECK(eval_testfn(TestFunction::t1_halfsqdiff, 3.0, 1.0) == 2.0);
  CHECK(eval_testfn(TestFunction::t2_ratio, 2.0, 4.0) == 0.5);
  CHECK(eval_testfn(TestFunction::t2_ratio, 4.0, 2.0) == 0.5);
  CHECK(eval_testfn(TestFunction::t3_product, 2.0, 4.0) == 8.0);
  CHECK(eval_testfn(TestFunction::t4_left, 2.0, 4.0) == 2.0);
  CHECK(eval_testfn(TestFunction::t5_right, 2.0, 4.0) == 4.0);
  CHECK_THROWS_AS(eval_testfn(TestFunction::t2_ratio, 0.0, 1.0), domain_error);
  CHECK_THROWS_AS(eval_testfn(TestFunction::t2_ratio, 1.0, -2.0), domain_error);
  CHECK(test_function_from_string("T3") == TestFunction::t3_product);
  CHECK_THROWS_AS(test_function_from_string("T9"), domain_error);
  CHECK(is_symmetric(TestFunction::t1_halfsqdiff));
  CHECK_FALSE(is_symmetric(TestFunction::t4_left));
}

TEST_CASE("integrated test functions") {
  const TimeGrid g = TimeGrid::uniform(0.0, 2.0, 5);
  const std::vector<double> a{1, 1, 1, 1, 1}, b{3, 3, 3, 3, 3};
  CHECK(eval_testfn_integrated(TestFunction::t1_halfsqdiff, a, b, g) == doctest::Approx(4.0));
  CHECK(eval_testfn_integrated(TestFunction::t3_product, a, b, g) == doctest::Approx(6.0));
  // lag 1: left read at t_1..t_4, right at t_0..t_3, over [0.5, 2]
  const std::vector<double> ramp{0, 1, 2, 3, 4};
  CHECK(eval_testfn_integrated(TestFunction::t4_left, ramp, b, g, 1) == doctest::Approx(3.75));
  CHECK(eval_testfn_integrated(TestFunction::t5_right, b, ramp, g, 1) == doctest::Approx(2.25));
  CHECK_THROWS_AS(eval_testfn_integrated(TestFunction::t3_product, a, b, g, 5), domain_error);
  CHECK_THROWS_AS(eval_testfn_integrated(TestFunction::t3_product, ramp, std::vector<double>{1, 2}, g),
                  domain_error);
}

TEST_CASE("multi-function test functions") {
  MultiTestFunctionSpec spec;
  spec.base = TestFunction::t3_product;
  spec.left = 0;
  spec.right = {1, 2};
  const std::vector<double> o{2, 0, 0}, d{0, 3, 5};
  CHECK(eval_multifunction_testfn(spec, o, d) == 8.0);
  spec.combine = MultiCombine::pairwise_sum;
  CHECK(eval_multifunction_testfn(spec, o, d) == 16.0);
  spec.base = TestFunction::t2_ratio;
  CHECK_THROWS_AS(validate(spec, 3), domain_error);
  spec.base = TestFunction::t1_halfsqdiff;
  CHECK_THROWS_AS(validate(spec, 2), domain_error);
  spec.right = {1, 1};
  CHECK_THROWS_AS(validate(spec, 3), domain_error);
  spec.right = {};
  CHECK_THROWS_AS(validate(spec, 3), domain_error);

  FunctionalMarkSet m(TimeGrid::uniform(0.0, 1.0, 2), 2, 3, {1, 1, 2, 2, 4, 4, 1, 1, 3, 3, 5, 5});
  spec = MultiTestFunctionSpec{TestFunction::t3_product, MultiCombine::mean_of_others, 0, {1, 2}};
  CHECK(eval_multifunction_integrated(spec, m, 0, 1) == doctest::Approx(4.0));
}

TEST_CASE("kernels integrate to one") {
  for (auto k : {KernelShape::epanechnikov, KernelShape::box, KernelShape::gaussian_truncated}) {
    for (double b : {0.01, 0.3, 2.0}) {
      const std::size_t m = 20000;
      double s = 0.0;
      for (std::size_t i = 0; i <= m; ++i) {
        const double u = -b + 2.0 * b * static_cast<double>(i) / m;
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * kernel_value(k, u, b);
      }
      s *= 2.0 * b / (3.0 * m);
      INFO(to_string(k) << " b=" << b);
      CHECK(std::fabs(s - 1.0) < 1e-8);
      CHECK(kernel_value(k, 1.01 * b, b) == 0.0);
      CHECK(kernel_value(k, 0.3 * b, b) == kernel_value(k, -0.3 * b, b));
    }
  }
  CHECK(kernel_shape_from_string("box") == KernelShape::box);
  CHECK_THROWS_AS(kernel_shape_from_string("tri"), domain_error);
}

TEST_CASE("serial and OpenMP kernels are bit-identical") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  kernels::BinnedWeights bins;
  const std::size_t pairs = 5000, nbins = 40;
  for (std::size_t k = 0; k < nbins; ++k) {
    for (std::size_t p = k; p < pairs; p += 7 + k) {
      bins.pair.push_back(static_cast<std::uint32_t>(p));
      bins.weight.push_back(u(rng));
    }
    bins.offsets.push_back(bins.pair.size());
  }
  std::vector<double> values(pairs);
  for (double& v : values) v = u(rng);

  std::vector<double> a(nbins), b(nbins);
  kernels::serial::binned_sum(bins, values, a);
  kernels::omp::binned_sum(bins, values, b);
  CHECK(a == b);

  const std::size_t width = 6;
  std::vector<double> pv(pairs * width);
  for (double& v : pv) v = u(rng);
  std::vector<double> pa(nbins * width), pb(nbins * width);
  kernels::serial::binned_sum_pointwise(bins, pv, width, pa);
  kernels::omp::binned_sum_pointwise(bins, pv, width, pb);
  CHECK(pa == pb);

  const std::size_t n = 60;
  auto fill = [](std::size_t r, std::span<double> row) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::sin(static_cast<double>(r * 31 + j));
  };
  std::vector<double> ma(n * n), mb(n * n);
  kernels::serial::fill_rows(n, n, ma, fill);
  kernels::omp::fill_rows(n, n, mb, fill);
  CHECK(ma == mb);

  std::vector<std::uint32_t> first, second;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (i != j) {
        first.push_back(i);
        second.push_back(j);
      }
    }
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = (n - 1 - i);
  std::vector<double> ga(first.size()), gb(first.size());
  kernels::serial::gather_pairs(first, second, ma, n, perm, ga);
  kernels::omp::gather_pairs(first, second, ma, n, perm, gb);
  CHECK(ga == gb);
  CHECK(ga[0] == ma[perm[0] * n + perm[1]]);

  std::vector<double> ta(300), tb(300);
  kernels::serial::for_each_index(300, [&](std::size_t i) { ta[i] = std::exp(-0.01 * i); });
  kernels::omp::for_each_index(300, [&](std::size_t i) { tb[i] = std::exp(-0.01 * i); });
  CHECK(ta == tb);
}

TEST_CASE("OpenMP fan-out rethrows the lowest failing index") {
  try {
    kernels::omp::for_each_index(100, [](std::size_t i) {
      if (i == 40 || i == 70) throw std::runtime_error("task " + std::to_string(i));
    });
    FAIL("no exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "task 40");
  }
}

TEST_CASE("thread count settings") {
  set_thread_count(3);
  if (env_thread_cap() == 0) CHECK(thread_count() == 3);
  set_thread_count(0);
  CHECK(thread_count() >= 1);
}
