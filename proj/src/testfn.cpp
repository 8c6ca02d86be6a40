#include "fmark/testfn.hpp"

#include <algorithm>
#include <cmath>

namespace fmark {

std::string_view to_string(TestFunction tf) {
  switch (tf) {
    case TestFunction::t1_halfsqdiff: return "T1";
    case TestFunction::t2_ratio: return "T2";
    case TestFunction::t3_product: return "T3";
    case TestFunction::t4_left: return "T4";
    case TestFunction::t5_right: return "T5";
  }
  return "?";
}

TestFunction test_function_from_string(std::string_view name) {
  if (name == "T1" || name == "t1") return TestFunction::t1_halfsqdiff;
  if (name == "T2" || name == "t2") return TestFunction::t2_ratio;
  if (name == "T3" || name == "t3") return TestFunction::t3_product;
  if (name == "T4" || name == "t4") return TestFunction::t4_left;
  if (name == "T5" || name == "t5") return TestFunction::t5_right;
  throw domain_error("unknown test function '" + std::string(name) + "'");
}

bool is_symmetric(TestFunction tf) {
  return tf == TestFunction::t1_halfsqdiff || tf == TestFunction::t2_ratio ||
         tf == TestFunction::t3_product;
}

double eval_testfn(TestFunction tf, double a, double b) {
  switch (tf) {
    case TestFunction::t1_halfsqdiff: {
      const double d = a - b;
      return 0.5 * d * d;
    }
    case TestFunction::t2_ratio:
      if (!(a > 0.0) || !(b > 0.0)) {
        throw domain_error("ratio test requires strictly positive marks");
      }
      return std::min(a, b) / std::max(a, b);
    case TestFunction::t3_product: return a * b;
    case TestFunction::t4_left: return a;
    case TestFunction::t5_right: return b;
  }
  return 0.0;
}

double eval_testfn_integrated(TestFunction tf, std::span<const double> fa,
                              std::span<const double> fb, const TimeGrid& grid,
                              std::size_t lag) {
  const std::size_t t = grid.size();
  if (fa.size() != t || fb.size() != t) {
    throw domain_error("curves must be sampled on the time grid");
  }
  if (lag >= t) throw domain_error("time lag must be smaller than the grid length");
  if (lag == 0) return detail::integrated_testfn(tf, fa, fb, grid.weights(), 0);
  const TimeGrid sub = grid.slice(lag, t - lag);
  return detail::integrated_testfn(tf, fa, fb, sub.weights(), lag);
}

namespace detail {

double integrated_testfn(TestFunction tf, std::span<const double> fa,
                         std::span<const double> fb, std::span<const double> weights,
                         std::size_t lag) {
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    sum += weights[k] * eval_testfn(tf, fa[k + lag], fb[k]);
  }
  return sum;
}

}  // namespace detail

void validate(const MultiTestFunctionSpec& spec, std::size_t num_channels) {
  if (num_channels < 3) throw domain_error("multi-function test functions need p >= 3");
  if (spec.base != TestFunction::t1_halfsqdiff && spec.base != TestFunction::t3_product) {
    throw domain_error("multi-function test functions support T1 and T3 only");
  }
  if (spec.left >= num_channels) throw domain_error("left channel out of range");
  if (spec.right.empty()) throw domain_error("right channel set is empty");
  for (std::size_t k = 0; k < spec.right.size(); ++k) {
    if (spec.right[k] >= num_channels) throw domain_error("right channel out of range");
    for (std::size_t m = 0; m < k; ++m) {
      if (spec.right[m] == spec.right[k]) throw domain_error("duplicate channel in right set");
    }
  }
}

double eval_multifunction_testfn(const MultiTestFunctionSpec& spec,
                                 std::span<const double> origin,
                                 std::span<const double> displaced) {
  if (origin.size() != displaced.size()) {
    throw domain_error("origin and displaced marks need the same channel count");
  }
  validate(spec, origin.size());
  const double a = origin[spec.left];
  if (spec.combine == MultiCombine::mean_of_others) {
    double mean = 0.0;
    for (std::size_t ch : spec.right) mean += displaced[ch];
    mean /= static_cast<double>(spec.right.size());
    return eval_testfn(spec.base, a, mean);
  }
  double sum = 0.0;
  for (std::size_t ch : spec.right) sum += eval_testfn(spec.base, a, displaced[ch]);
  return sum;
}

double eval_multifunction_integrated(const MultiTestFunctionSpec& spec,
                                     const FunctionalMarkSet& marks, std::size_t i,
                                     std::size_t j) {
  const std::size_t p = marks.num_channels();
  validate(spec, p);
  const std::size_t t = marks.num_times();
  std::vector<double> origin(p), displaced(p), pointwise(t);
  for (std::size_t k = 0; k < t; ++k) {
    for (std::size_t ch = 0; ch < p; ++ch) {
      origin[ch] = marks.at(i, ch, k);
      displaced[ch] = marks.at(j, ch, k);
    }
    pointwise[k] = eval_multifunction_testfn(spec, origin, displaced);
  }
  return integrate_over_T(pointwise, marks.grid());
}

}  // namespace fmark
