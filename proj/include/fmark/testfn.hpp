#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fmark/core.hpp"

namespace fmark {

/// Pointwise test functions on a pair of mark values (a at the origin point,
/// b at the displaced point).
enum class TestFunction {
  t1_halfsqdiff,  // (a - b)^2 / 2
  t2_ratio,       // min(a, b) / max(a, b), strictly positive marks only
  t3_product,     // a * b
  t4_left,        // a
  t5_right,       // b
};

/// Which point supplies the second argument. Evaluation is identical; the
/// variant only records whether the partner is an arbitrary point at distance r
/// or the nearest neighbour.
enum class PairVariant { pair, nearest_neighbour };

struct TestFunctionKind {
  TestFunction tag{TestFunction::t3_product};
  PairVariant variant{PairVariant::pair};
};

std::string_view to_string(TestFunction tf);
TestFunction test_function_from_string(std::string_view name);

/// True for t1, t2, t3.
bool is_symmetric(TestFunction tf);

double eval_testfn(TestFunction tf, double a, double b);
inline double eval_testfn(const TestFunctionKind& kind, double a, double b) {
  return eval_testfn(kind.tag, a, b);
}

/// The integrated form: integral over the grid of tf(fa(t), fb(t - lag)).
/// With lag > 0 the left curve is read at samples lag..T-1 and the right one at
/// 0..T-1-lag, integrated on the corresponding sub-grid.
double eval_testfn_integrated(TestFunction tf, std::span<const double> fa,
                              std::span<const double> fb, const TimeGrid& grid,
                              std::size_t lag = 0);
inline double eval_testfn_integrated(const TestFunctionKind& kind, std::span<const double> fa,
                                     std::span<const double> fb, const TimeGrid& grid,
                                     std::size_t lag = 0) {
  return eval_testfn_integrated(kind.tag, fa, fb, grid, lag);
}

namespace detail {
/// Unchecked kernel of eval_testfn_integrated: `weights` are the trapezoid
/// weights of the (possibly lag-shifted) sub-grid.
double integrated_testfn(TestFunction tf, std::span<const double> fa,
                         std::span<const double> fb, std::span<const double> weights,
                         std::size_t lag);
}  // namespace detail

enum class MultiCombine { mean_of_others, pairwise_sum };

/// Test function relating channel `left` at the origin to a set of channels at
/// the displaced point (p >= 3).
struct MultiTestFunctionSpec {
  TestFunction base{TestFunction::t1_halfsqdiff};
  MultiCombine combine{MultiCombine::mean_of_others};
  std::size_t left{0};
  std::vector<std::size_t> right;
};

/// Throws domain_error unless p >= 3, base is t1 or t3, channels are in range
/// and the right-hand set is nonempty without duplicates.
void validate(const MultiTestFunctionSpec& spec, std::size_t num_channels);

/// Pointwise evaluation. `origin` and `displaced` hold one value per channel.
double eval_multifunction_testfn(const MultiTestFunctionSpec& spec,
                                 std::span<const double> origin,
                                 std::span<const double> displaced);

/// Integrated over the grid for the marks of points i (origin) and j (displaced).
double eval_multifunction_integrated(const MultiTestFunctionSpec& spec,
                                     const FunctionalMarkSet& marks, std::size_t i,
                                     std::size_t j);

}  // namespace fmark
