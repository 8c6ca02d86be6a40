#pragma once

// Second-order characteristics of patterns with function-valued marks.
//
// Every mark characteristic is built from two kernel sums over ordered pairs of
// distinct points,
//
//   rho_t(r) = 1/(2 pi r |W|) sum_{x != x'} l(x, x') k_b(|x - x'| - r) e(x, x')
//   rho(r)   = 1/(2 pi r |W|) sum_{x != x'}           k_b(|x - x'| - r) e(x, x')
//
// where l(x, x') is the test function integrated over the time grid. Their
// ratio is the conditional mean of the test function at distance r; the
// individual characteristics differ only in the test function and in the
// normaliser applied to that ratio. The n x n matrix of l-values is computed
// once per (test function, channels) and reused for every r and every label
// permutation.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "fmark/core.hpp"
#include "fmark/kernels.hpp"
#include "fmark/smoothing.hpp"
#include "fmark/testfn.hpp"

namespace fmark {

enum class EdgeRule { none_torus, translation };

/// Denominator of c-hat: n^2 over all ordered pairs including i == j, or
/// n(n - 1) over distinct pairs.
enum class CHatDenominator { all_pairs, distinct_pairs };

/// How mean-based normalisers enter: as the scalar integral of the mean
/// curves, or pointwise in t before integrating.
enum class MeanNormalization { integrated, pointwise };

std::string_view to_string(EdgeRule rule);
EdgeRule edge_rule_from_string(std::string_view name);

struct EstimationConfig {
  KernelShape kernel{KernelShape::epanechnikov};
  /// Default 0.15 / sqrt(lambda-hat).
  std::optional<double> bandwidth;
  /// Default: none_torus on a torus, translation on a plane rectangle.
  std::optional<EdgeRule> edge;
  /// Default: DistanceGrid::default_for(window).
  std::optional<DistanceGrid> grid;
  /// Grid shift pairing f_h(t) with f_l(t - lag).
  std::size_t time_lag{0};
  CHatDenominator chat{CHatDenominator::all_pairs};
  MeanNormalization mean_norm{MeanNormalization::integrated};
};

/// EstimationConfig with every default filled in for a given pattern.
struct ResolvedConfig {
  KernelShape kernel;
  double bandwidth;
  EdgeRule edge;
  DistanceGrid grid;
  std::size_t time_lag;
  CHatDenominator chat;
  MeanNormalization mean_norm;
};

ResolvedConfig resolve(const EstimationConfig& cfg, const PointPattern& pattern);

/// Ordered pairs of distinct points within reach of the distance grid, with
/// precomputed kernel and indicator weights per r bin.
class PairTable {
 public:
  PairTable(const PointPattern& pattern, const ResolvedConfig& cfg);

  std::size_t num_points() const { return n_; }
  std::size_t num_pairs() const { return first_.size(); }
  std::span<const std::uint32_t> first() const { return first_; }
  std::span<const std::uint32_t> second() const { return second_; }
  std::span<const double> distance() const { return distance_; }
  std::span<const double> edge() const { return edge_; }

  /// weight = k_b(d - r_k) e / (2 pi r_k |W|).
  const kernels::BinnedWeights& kernel_bins() const { return kernel_bins_; }
  /// Pairs with r_{k-1} < d <= r_k in bin k, weight e / |W|; prefix sums give
  /// the cumulative indicator sums.
  const kernels::BinnedWeights& indicator_bins() const { return indicator_bins_; }

 private:
  std::size_t n_;
  std::vector<std::uint32_t> first_;
  std::vector<std::uint32_t> second_;
  std::vector<double> distance_;
  std::vector<double> edge_;
  kernels::BinnedWeights kernel_bins_;
  kernels::BinnedWeights indicator_bins_;
};

enum class Statistic {
  rho_ground,    // rho-hat(r)
  g_ground,      // pair correlation function
  K_ground,      // Ripley's K
  L_ground,      // sqrt(K / pi)
  rho_tf,        // test-function product density
  kappa_tf,      // generic ratio form with a selectable normaliser
  gamma_hl,      // mark variogram, normalised by c-hat(T1)
  gamma_hl_raw,  // mark variogram without normalisation
  kappa_hl,      // mark correlation
  c_hl,          // conditional mean product
  tau_hl,        // mark differentiation
  cov_sto,       // Stoyan's covariance
  cov_cre,       // Cressie's covariance
  corr_ish,      // Isham's correlation
  kappa_bei,     // Beisbart's sum-based correlation
  kappa_hdot,    // r-mark correlation of the origin mark
  kappa_dotl,    // r-mark correlation of the partner mark
  c_hdot,        // r-mark function of the origin mark
  c_dotl,        // r-mark function of the partner mark
  U,             // lambda^2 g(r) times a base characteristic
  g_tf,          // mark-weighted pair correlation function
  K_tf,          // mark-weighted K
  L_tf,          // mark-weighted L
};

std::string_view to_string(Statistic s);
Statistic statistic_from_string(std::string_view name);
/// True for the statistics that only use point locations.
bool is_points_only(Statistic s);

enum class KappaNormalization { c_hat, mean_product, mean_left, mean_right, unit };
std::string_view to_string(KappaNormalization n);
KappaNormalization kappa_normalization_from_string(std::string_view name);

/// Type restriction for multitype statistics. `second` empty means dot-type
/// (partner of any type).
struct TypeSelection {
  int first{1};
  std::optional<int> second;
};

struct StatisticRequest {
  Statistic statistic{Statistic::kappa_hl};
  /// 0-based channels of the origin and partner marks.
  std::size_t h{0};
  std::size_t l{1};
  /// Test function of rho_tf, kappa_tf, g_tf, K_tf, L_tf.
  TestFunction test_function{TestFunction::t3_product};
  /// Unit pair weights for g_tf / K_tf / L_tf (reduces them to g / K / L).
  bool unit_weight{false};
  KappaNormalization normalization{KappaNormalization::c_hat};
  /// Base characteristic of U.
  Statistic u_base{Statistic::kappa_hl};
  /// Replaces (test_function, h, l) by a multi-function test function.
  std::optional<MultiTestFunctionSpec> multi;
  /// Cross-type or dot-type restriction (g_tf, K_tf, L_tf).
  std::optional<TypeSelection> types;
  /// Local version for point u (K_tf, L_tf).
  std::optional<std::size_t> local_point;
};

/// Human-readable identifier such as "kappa_hl_1_2" (1-based channels).
std::string request_label(const StatisticRequest& request);

struct SummaryCurve {
  std::string kind;
  std::vector<double> r;
  /// NaN marks an undefined entry (e.g. rho-hat(r) == 0).
  std::vector<double> values;
  /// Reference value under the null; empty when none applies.
  std::vector<double> theoretical;
  std::size_t h{0};
  std::size_t l{0};
  std::optional<TypeSelection> types;
  /// Pre-integration values, R x T row-major, for characteristics that are
  /// computed pointwise in t; empty otherwise.
  std::vector<double> pointwise;
  std::size_t pointwise_width{0};
};

/// Shared state for estimating many characteristics of one pattern: the pair
/// table, ground density, mean curves, and a cache of l-matrices. `evaluate`
/// is safe to call concurrently.
class EstimationContext {
 public:
  EstimationContext(const PointPattern& pattern, const FunctionalMarkSet* marks,
                    const EstimationConfig& cfg);

  const PointPattern& pattern() const { return pattern_; }
  const FunctionalMarkSet* marks() const { return marks_; }
  const ResolvedConfig& config() const { return cfg_; }
  const PairTable& pairs() const { return table_; }
  const std::vector<double>& r() const { return cfg_.grid.values(); }
  double intensity() const { return lambda_; }

  /// Estimates the requested curve. With a nonempty `perm`, point i carries
  /// the marks of point perm[i] (joint permutation of all channels).
  SummaryCurve evaluate(const StatisticRequest& request,
                        std::span<const std::size_t> perm = {}) const;

  /// c-hat of a test function: the average of l over all ordered pairs.
  double chat(TestFunction tf, std::size_t h, std::size_t l) const;

  struct MatrixKey {
    int kind;  // 0 = test function, 1 = multi-function
    TestFunction tf;
    std::size_t h;
    std::size_t l;
    std::size_t lag;
    std::size_t left;
    std::vector<std::size_t> right;
    int base;
    int combine;
    auto operator<=>(const MatrixKey&) const = default;
  };

  struct PairMatrix {
    std::vector<double> values;  // n x n, row = origin point
    double chat{0.0};
  };

 private:
  const FunctionalMarkSet& require_marks() const;
  void check_channels(std::size_t h, std::size_t l) const;
  MatrixKey tf_key(TestFunction tf, std::size_t h, std::size_t l) const;
  MatrixKey multi_key(const MultiTestFunctionSpec& spec) const;
  MatrixKey key_for(const StatisticRequest& request) const;
  std::shared_ptr<const PairMatrix> build_matrix(const MatrixKey& key) const;
  std::shared_ptr<const PairMatrix> matrix(const MatrixKey& key) const;

  /// l-values of the tabulated pairs, after relabelling by perm.
  std::vector<double> pair_values(const MatrixKey& key, std::span<const std::size_t> perm) const;
  /// Pointwise test-function values, pairs x T' row-major.
  std::vector<double> pointwise_pair_values(TestFunction tf, std::size_t h, std::size_t l,
                                            std::span<const std::size_t> perm) const;
  std::vector<double> kernel_sum(std::span<const double> values) const;
  std::vector<double> cumulative_sum(std::span<const double> values) const;
  /// Kernel sum divided by the ground density; NaN where that density is 0.
  std::vector<double> conditional(std::span<const double> values) const;
  /// Same pointwise in t, R x T'.
  std::vector<double> conditional_pointwise(TestFunction tf, std::size_t h, std::size_t l,
                                            std::span<const std::size_t> perm) const;
  /// E_r[a b] - E_r[a] E_r[b] pointwise in t (R x T') for origin channel h and
  /// partner channel l, accumulated from curves shifted by their mean curves.
  std::vector<double> conditional_covariance(std::size_t h, std::size_t l,
                                             std::span<const std::size_t> perm) const;

  std::vector<double> normaliser_curve(KappaNormalization norm, std::size_t h,
                                       std::size_t l) const;
  double normaliser_integral(KappaNormalization norm, std::size_t h, std::size_t l) const;
  double integrate_aligned(std::span<const double> samples) const;
  double span_length() const;
  const TimeGrid& aligned_grid() const { return *aligned_grid_; }

  SummaryCurve ratio_curve(const MatrixKey& key, KappaNormalization norm,
                           std::span<const std::size_t> perm) const;
  SummaryCurve evaluate_ground(const StatisticRequest& request) const;
  SummaryCurve evaluate_mark(const StatisticRequest& request,
                             std::span<const std::size_t> perm) const;
  SummaryCurve evaluate_weighted(const StatisticRequest& request,
                                 std::span<const std::size_t> perm) const;

  PointPattern pattern_;
  const FunctionalMarkSet* marks_;
  ResolvedConfig cfg_;
  PairTable table_;
  double lambda_;
  std::vector<double> rho_ground_;
  std::vector<double> cumulative_ground_;
  std::optional<TimeGrid> aligned_grid_;
  std::vector<std::vector<double>> means_;

  mutable std::mutex cache_mutex_;
  mutable std::map<MatrixKey, std::shared_ptr<const PairMatrix>> cache_;
};

// Convenience entry points, one per characteristic family. Channels are 0-based.

SummaryCurve estimate_ground_product_density(const PointPattern& pattern,
                                             const EstimationConfig& cfg);

SummaryCurve estimate_tf_product_density(const PointPattern& pattern,
                                         const FunctionalMarkSet& marks, std::size_t h,
                                         std::size_t l, TestFunction tf,
                                         const EstimationConfig& cfg);

/// Ratio form (rho_t / rho) / normaliser for a test function.
SummaryCurve estimate_kappa_generic(const PointPattern& pattern, const FunctionalMarkSet& marks,
                                    std::size_t h, std::size_t l, TestFunction tf,
                                    KappaNormalization normalization,
                                    const EstimationConfig& cfg);

/// Any of the named mark characteristics (gamma_hl, kappa_hl, tau_hl, ...).
SummaryCurve estimate_mark_characteristic(const PointPattern& pattern,
                                          const FunctionalMarkSet& marks, Statistic statistic,
                                          std::size_t h, std::size_t l,
                                          const EstimationConfig& cfg);

/// U(r) = lambda^2 g(r) * base(r); base is one of kappa_hl, kappa_hdot,
/// kappa_dotl, gamma_hl, tau_hl.
SummaryCurve estimate_U(const PointPattern& pattern, const FunctionalMarkSet& marks,
                        std::size_t h, std::size_t l, Statistic base,
                        const EstimationConfig& cfg);

/// Mark-weighted K (statistic K_tf) and L (L_tf) curves.
struct KLCurves {
  SummaryCurve K;
  SummaryCurve L;
};

struct WeightSpec {
  /// Empty means unit weights.
  std::optional<TestFunction> tf;
  std::optional<TypeSelection> types;
  std::optional<std::size_t> local_point;
};

KLCurves estimate_markweighted_K(const PointPattern& pattern, const FunctionalMarkSet* marks,
                                 std::size_t h, std::size_t l, const WeightSpec& weight,
                                 const EstimationConfig& cfg);

SummaryCurve estimate_markweighted_pcf(const PointPattern& pattern,
                                       const FunctionalMarkSet* marks, std::size_t h,
                                       std::size_t l, const WeightSpec& weight,
                                       const EstimationConfig& cfg);

/// Ripley's K with lambda-hat^2 = (n / |W|)^2 and the configured edge rule.
SummaryCurve estimate_ripley_K(const PointPattern& pattern, const EstimationConfig& cfg);

struct IndexReport {
  double gamma_nn{0.0};
  double gamma_nn_raw{0.0};
  double kappa_nn{0.0};
  double c_nn{0.0};
  /// NaN when some compared mark value is not strictly positive.
  double tau_nn{0.0};
  double c_dotl_nn{0.0};
  double kappa_dotl_nn{0.0};
  /// Indexed by k - 1. K_k is normalised pointwise in t by the mean product,
  /// D_k is a time average and lies in [0, 1].
  std::vector<double> K_k;
  std::vector<double> Gamma_k;
  std::vector<double> D_k;
};

/// Nearest neighbour z(i) of every point; ties go to the lowest index.
std::vector<std::size_t> nearest_neighbours(const PointPattern& pattern);

/// The k nearest neighbours of every point ordered by (distance, index).
std::vector<std::vector<std::size_t>> k_nearest_neighbours(const PointPattern& pattern,
                                                           std::size_t k);

IndexReport estimate_nn_indices(const PointPattern& pattern, const FunctionalMarkSet& marks,
                                std::size_t h, std::size_t l, const EstimationConfig& cfg);

IndexReport estimate_knn_indices(const PointPattern& pattern, const FunctionalMarkSet& marks,
                                 std::size_t h, std::size_t l, std::size_t k_max,
                                 const EstimationConfig& cfg);

}  // namespace fmark
