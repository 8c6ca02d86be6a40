#include "fmark/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>

namespace fmark {
namespace {

constexpr double not_a_value = std::numeric_limits<double>::quiet_NaN();

/// v / c, with 0 / 0 reported as 0 (all pair values vanish).
double guarded_ratio(double v, double c) {
  if (c != 0.0) return v / c;
  if (v == 0.0) return 0.0;
  return not_a_value;
}

const PointPattern& require_two(const PointPattern& pattern) {
  if (pattern.size() < 2) throw domain_error("estimation needs at least two points");
  return pattern;
}

void check_perm(std::span<const std::size_t> perm, std::size_t n) {
  if (perm.empty()) return;
  if (perm.size() != n) throw domain_error("permutation length differs from the point count");
  std::vector<char> seen(n, 0);
  for (std::size_t v : perm) {
    if (v >= n || seen[v]) throw domain_error("invalid permutation of point indices");
    seen[v] = 1;
  }
}

bool channel_is_constant(const FunctionalMarkSet& marks, std::size_t ch) {
  const auto ref = marks.curve(0, ch);
  for (std::size_t i = 1; i < marks.num_points(); ++i) {
    const auto c = marks.curve(i, ch);
    if (!std::equal(ref.begin(), ref.end(), c.begin())) return false;
  }
  return true;
}

SummaryCurve make_curve(Statistic s, const std::vector<double>& r, std::size_t h, std::size_t l) {
  SummaryCurve c;
  c.kind = std::string(to_string(s));
  c.r = r;
  c.h = h;
  c.l = l;
  return c;
}

}  // namespace

std::string_view to_string(EdgeRule rule) {
  switch (rule) {
    case EdgeRule::none_torus: return "none_torus";
    case EdgeRule::translation: return "translation";
  }
  return "?";
}

EdgeRule edge_rule_from_string(std::string_view name) {
  if (name == "none_torus" || name == "none") return EdgeRule::none_torus;
  if (name == "translation") return EdgeRule::translation;
  throw domain_error("unknown edge rule '" + std::string(name) + "'");
}

namespace {
constexpr std::pair<Statistic, std::string_view> statistic_names[] = {
    {Statistic::rho_ground, "rho_ground"},   {Statistic::g_ground, "g_ground"},
    {Statistic::K_ground, "K_ground"},       {Statistic::L_ground, "L_ground"},
    {Statistic::rho_tf, "rho_tf"},           {Statistic::kappa_tf, "kappa_tf"},
    {Statistic::gamma_hl, "gamma_hl"},       {Statistic::gamma_hl_raw, "gamma_hl_raw"},
    {Statistic::kappa_hl, "kappa_hl"},       {Statistic::c_hl, "c_hl"},
    {Statistic::tau_hl, "tau_hl"},           {Statistic::cov_sto, "cov_sto"},
    {Statistic::cov_cre, "cov_cre"},         {Statistic::corr_ish, "corr_ish"},
    {Statistic::kappa_bei, "kappa_bei"},     {Statistic::kappa_hdot, "kappa_hdot"},
    {Statistic::kappa_dotl, "kappa_dotl"},   {Statistic::c_hdot, "c_hdot"},
    {Statistic::c_dotl, "c_dotl"},           {Statistic::U, "U"},
    {Statistic::g_tf, "g_tf"},               {Statistic::K_tf, "K_tf"},
    {Statistic::L_tf, "L_tf"},
};

constexpr std::pair<KappaNormalization, std::string_view> normalization_names[] = {
    {KappaNormalization::c_hat, "c_hat"},
    {KappaNormalization::mean_product, "mean_product"},
    {KappaNormalization::mean_left, "mean_left"},
    {KappaNormalization::mean_right, "mean_right"},
    {KappaNormalization::unit, "unit"},
};
}  // namespace

std::string_view to_string(Statistic s) {
  for (const auto& [v, name] : statistic_names) {
    if (v == s) return name;
  }
  return "?";
}

Statistic statistic_from_string(std::string_view name) {
  for (const auto& [v, n] : statistic_names) {
    if (n == name) return v;
  }
  throw domain_error("unknown statistic '" + std::string(name) + "'");
}

bool is_points_only(Statistic s) {
  return s == Statistic::rho_ground || s == Statistic::g_ground || s == Statistic::K_ground ||
         s == Statistic::L_ground;
}

std::string_view to_string(KappaNormalization n) {
  for (const auto& [v, name] : normalization_names) {
    if (v == n) return name;
  }
  return "?";
}

KappaNormalization kappa_normalization_from_string(std::string_view name) {
  for (const auto& [v, n] : normalization_names) {
    if (n == name) return v;
  }
  throw domain_error("unknown normalization '" + std::string(name) + "'");
}

std::string request_label(const StatisticRequest& request) {
  std::string label(to_string(request.statistic));
  if (is_points_only(request.statistic)) return label;
  const bool weighted = request.statistic == Statistic::g_tf ||
                        request.statistic == Statistic::K_tf ||
                        request.statistic == Statistic::L_tf;
  const bool uses_tf = weighted || request.statistic == Statistic::rho_tf ||
                       request.statistic == Statistic::kappa_tf;
  if (weighted && request.unit_weight) {
    label += "_unit";
  } else if (uses_tf) {
    label += request.multi ? std::string("_multi") : "_" + std::string(to_string(request.test_function));
  }
  if (request.statistic == Statistic::kappa_tf) {
    label += "_" + std::string(to_string(request.normalization));
  }
  if (request.statistic == Statistic::U) {
    label += "_" + std::string(to_string(request.u_base));
  }
  if (request.multi) {
    label += "_" + std::to_string(request.multi->left + 1);
    for (std::size_t ch : request.multi->right) label += "_" + std::to_string(ch + 1);
  } else if (!(weighted && request.unit_weight)) {
    label += "_" + std::to_string(request.h + 1) + "_" + std::to_string(request.l + 1);
  }
  if (request.types) {
    label += "_type" + std::to_string(request.types->first) + "_" +
             (request.types->second ? std::to_string(*request.types->second) : "dot");
  }
  if (request.local_point) label += "_u" + std::to_string(*request.local_point + 1);
  return label;
}

ResolvedConfig resolve(const EstimationConfig& cfg, const PointPattern& pattern) {
  const Window& window = pattern.window();
  double b = 0.0;
  if (cfg.bandwidth) {
    b = *cfg.bandwidth;
    if (!(b > 0.0) || !std::isfinite(b)) throw domain_error("bandwidth must be positive and finite");
  } else {
    if (pattern.empty()) throw domain_error("default bandwidth needs a nonempty pattern");
    b = 0.15 / std::sqrt(pattern.intensity());
  }
  const EdgeRule edge =
      cfg.edge.value_or(window.is_torus() ? EdgeRule::none_torus : EdgeRule::translation);
  if (edge == EdgeRule::none_torus && !window.is_torus()) {
    throw domain_error("edge rule none_torus requires a torus window");
  }
  if (edge == EdgeRule::translation && window.is_torus()) {
    throw domain_error("translation edge correction applies to plane windows only");
  }
  DistanceGrid grid = cfg.grid.value_or(DistanceGrid::default_for(window));
  grid.validate_for(window);
  return ResolvedConfig{cfg.kernel, b, edge, std::move(grid), cfg.time_lag, cfg.chat, cfg.mean_norm};
}

PairTable::PairTable(const PointPattern& pattern, const ResolvedConfig& cfg) : n_(pattern.size()) {
  if (n_ > std::numeric_limits<std::uint32_t>::max()) throw domain_error("too many points");
  const Window& window = pattern.window();
  const auto& r = cfg.grid.values();
  const double b = cfg.bandwidth;
  const double reach = r.back() + b;
  const double area = window.area();

  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (i == j) continue;
      const double d = window_distance(window, pattern[i], pattern[j]);
      if (d > reach) continue;
      double e = 1.0;
      if (cfg.edge == EdgeRule::translation) {
        const double overlap =
            window.translated_overlap(pattern[j].x - pattern[i].x, pattern[j].y - pattern[i].y);
        if (!(overlap > 0.0)) {
          throw domain_error("bandwidth too large for the window (empty translation overlap)");
        }
        e = area / overlap;
      }
      first_.push_back(static_cast<std::uint32_t>(i));
      second_.push_back(static_cast<std::uint32_t>(j));
      distance_.push_back(d);
      edge_.push_back(e);
    }
  }

  const std::size_t bins = r.size();
  const std::size_t pairs = first_.size();

  // kernel bins: every r_k with |d - r_k| <= b
  std::vector<std::size_t> lo(pairs), hi(pairs);
  std::vector<std::size_t> count(bins + 1, 0);
  for (std::size_t p = 0; p < pairs; ++p) {
    lo[p] = static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), distance_[p] - b) - r.begin());
    hi[p] = static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), distance_[p] + b) - r.begin());
    for (std::size_t k = lo[p]; k < hi[p]; ++k) ++count[k + 1];
  }
  kernel_bins_.offsets.assign(bins + 1, 0);
  for (std::size_t k = 0; k < bins; ++k) kernel_bins_.offsets[k + 1] = kernel_bins_.offsets[k] + count[k + 1];
  kernel_bins_.pair.resize(kernel_bins_.offsets.back());
  kernel_bins_.weight.resize(kernel_bins_.offsets.back());
  std::vector<std::size_t> cursor(kernel_bins_.offsets.begin(), kernel_bins_.offsets.end() - 1);
  for (std::size_t p = 0; p < pairs; ++p) {
    for (std::size_t k = lo[p]; k < hi[p]; ++k) {
      const std::size_t at = cursor[k]++;
      kernel_bins_.pair[at] = static_cast<std::uint32_t>(p);
      kernel_bins_.weight[at] = kernel_value(cfg.kernel, distance_[p] - r[k], b) * edge_[p] /
                                (2.0 * std::numbers::pi * r[k] * area);
    }
  }

  // indicator bins: first r_k >= d
  std::vector<std::size_t> bin_of(pairs, bins);
  std::fill(count.begin(), count.end(), 0);
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto k = static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), distance_[p]) - r.begin());
    if (k == bins) continue;
    bin_of[p] = k;
    ++count[k + 1];
  }
  indicator_bins_.offsets.assign(bins + 1, 0);
  for (std::size_t k = 0; k < bins; ++k) {
    indicator_bins_.offsets[k + 1] = indicator_bins_.offsets[k] + count[k + 1];
  }
  indicator_bins_.pair.resize(indicator_bins_.offsets.back());
  indicator_bins_.weight.resize(indicator_bins_.offsets.back());
  cursor.assign(indicator_bins_.offsets.begin(), indicator_bins_.offsets.end() - 1);
  for (std::size_t p = 0; p < pairs; ++p) {
    if (bin_of[p] == bins) continue;
    const std::size_t at = cursor[bin_of[p]]++;
    indicator_bins_.pair[at] = static_cast<std::uint32_t>(p);
    indicator_bins_.weight[at] = edge_[p] / area;
  }
}

EstimationContext::EstimationContext(const PointPattern& pattern, const FunctionalMarkSet* marks,
                                     const EstimationConfig& cfg)
    : pattern_(require_two(pattern)),
      marks_(marks),
      cfg_(resolve(cfg, pattern)),
      table_(pattern_, cfg_),
      lambda_(pattern.intensity()) {
  const std::vector<double> ones(table_.num_pairs(), 1.0);
  rho_ground_ = kernel_sum(ones);
  cumulative_ground_ = cumulative_sum(ones);

  if (marks_ == nullptr) {
    if (cfg_.time_lag != 0) throw domain_error("time lag needs function-valued marks");
    return;
  }
  if (marks_->num_points() != pattern_.size()) {
    throw domain_error("marks describe " + std::to_string(marks_->num_points()) +
                       " points but the pattern has " + std::to_string(pattern_.size()));
  }
  marks_->validate_finite();
  const std::size_t t = marks_->num_times();
  if (cfg_.time_lag >= t) throw domain_error("time lag must be smaller than the grid length");
  aligned_grid_ = cfg_.time_lag == 0 ? marks_->grid() : marks_->grid().slice(cfg_.time_lag, t - cfg_.time_lag);
  for (std::size_t ch = 0; ch < marks_->num_channels(); ++ch) {
    means_.push_back(functional_mean(*marks_, ch));
  }
}

const FunctionalMarkSet& EstimationContext::require_marks() const {
  if (marks_ == nullptr) throw domain_error("this statistic needs function-valued marks");
  return *marks_;
}

void EstimationContext::check_channels(std::size_t h, std::size_t l) const {
  const std::size_t p = require_marks().num_channels();
  if (h >= p || l >= p) {
    throw domain_error("channel out of range: marks have " + std::to_string(p) + " channels");
  }
}

EstimationContext::MatrixKey EstimationContext::tf_key(TestFunction tf, std::size_t h,
                                                       std::size_t l) const {
  check_channels(h, l);
  return MatrixKey{0, tf, h, l, cfg_.time_lag, 0, {}, 0, 0};
}

EstimationContext::MatrixKey EstimationContext::multi_key(const MultiTestFunctionSpec& spec) const {
  validate(spec, require_marks().num_channels());
  return MatrixKey{1,         spec.base,  0, 0, cfg_.time_lag, spec.left, spec.right,
                   static_cast<int>(spec.base), static_cast<int>(spec.combine)};
}

EstimationContext::MatrixKey EstimationContext::key_for(const StatisticRequest& request) const {
  if (request.multi) return multi_key(*request.multi);
  return tf_key(request.test_function, request.h, request.l);
}

std::shared_ptr<const EstimationContext::PairMatrix> EstimationContext::build_matrix(
    const MatrixKey& key) const {
  const FunctionalMarkSet& m = require_marks();
  const std::size_t n = m.num_points();
  const std::size_t lag = key.lag;
  const auto& w = aligned_grid().weights();
  auto out = std::make_shared<PairMatrix>();
  out->values.resize(n * n);

  if (key.kind == 0) {
    kernels::fill_rows(n, n, out->values, [&](std::size_t i, std::span<double> row) {
      const auto fa = m.curve(i, key.h);
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = detail::integrated_testfn(key.tf, fa, m.curve(j, key.l), w, lag);
      }
    });
  } else {
    const auto base = static_cast<TestFunction>(key.base);
    const bool mean = static_cast<MultiCombine>(key.combine) == MultiCombine::mean_of_others;
    const double count = static_cast<double>(key.right.size());
    kernels::fill_rows(n, n, out->values, [&](std::size_t i, std::span<double> row) {
      const auto fa = m.curve(i, key.left);
      for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
          const double a = fa[k + lag];
          double v = 0.0;
          if (mean) {
            double avg = 0.0;
            for (std::size_t ch : key.right) avg += m.at(j, ch, k);
            v = eval_testfn(base, a, avg / count);
          } else {
            for (std::size_t ch : key.right) v += eval_testfn(base, a, m.at(j, ch, k));
          }
          sum += w[k] * v;
        }
        row[j] = sum;
      }
    });
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (cfg_.chat == CHatDenominator::distinct_pairs && i == j) continue;
      total += out->values[i * n + j];
    }
  }
  const double nd = static_cast<double>(n);
  out->chat = cfg_.chat == CHatDenominator::all_pairs ? total / (nd * nd) : total / (nd * (nd - 1.0));
  return out;
}

std::shared_ptr<const EstimationContext::PairMatrix> EstimationContext::matrix(
    const MatrixKey& key) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto built = build_matrix(key);
  std::lock_guard lock(cache_mutex_);
  return cache_.emplace(key, std::move(built)).first->second;
}

double EstimationContext::chat(TestFunction tf, std::size_t h, std::size_t l) const {
  return matrix(tf_key(tf, h, l))->chat;
}

std::vector<double> EstimationContext::pair_values(const MatrixKey& key,
                                                   std::span<const std::size_t> perm) const {
  const auto mat = matrix(key);
  std::vector<double> out(table_.num_pairs());
  kernels::gather_pairs(table_.first(), table_.second(), mat->values, table_.num_points(), perm,
                        out);
  return out;
}

std::vector<double> EstimationContext::pointwise_pair_values(
    TestFunction tf, std::size_t h, std::size_t l, std::span<const std::size_t> perm) const {
  check_channels(h, l);
  const FunctionalMarkSet& m = *marks_;
  const std::size_t width = aligned_grid().size();
  const std::size_t lag = cfg_.time_lag;
  const auto first = table_.first();
  const auto second = table_.second();
  std::vector<double> out(table_.num_pairs() * width);
  kernels::fill_rows(table_.num_pairs(), width, out, [&](std::size_t p, std::span<double> row) {
    std::size_t i = first[p];
    std::size_t j = second[p];
    if (!perm.empty()) {
      i = perm[i];
      j = perm[j];
    }
    const auto fa = m.curve(i, h);
    const auto fb = m.curve(j, l);
    for (std::size_t k = 0; k < width; ++k) row[k] = eval_testfn(tf, fa[k + lag], fb[k]);
  });
  return out;
}

std::vector<double> EstimationContext::kernel_sum(std::span<const double> values) const {
  std::vector<double> out(table_.kernel_bins().bins());
  kernels::binned_sum(table_.kernel_bins(), values, out);
  return out;
}

std::vector<double> EstimationContext::cumulative_sum(std::span<const double> values) const {
  std::vector<double> out(table_.indicator_bins().bins());
  kernels::binned_sum(table_.indicator_bins(), values, out);
  std::partial_sum(out.begin(), out.end(), out.begin());
  return out;
}

std::vector<double> EstimationContext::conditional(std::span<const double> values) const {
  std::vector<double> out = kernel_sum(values);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = rho_ground_[k] > 0.0 ? out[k] / rho_ground_[k] : not_a_value;
  }
  return out;
}

std::vector<double> EstimationContext::conditional_pointwise(
    TestFunction tf, std::size_t h, std::size_t l, std::span<const std::size_t> perm) const {
  const std::size_t width = aligned_grid().size();
  const std::vector<double> values = pointwise_pair_values(tf, h, l, perm);
  std::vector<double> out(table_.kernel_bins().bins() * width);
  kernels::binned_sum_pointwise(table_.kernel_bins(), values, width, out);
  for (std::size_t k = 0; k < rho_ground_.size(); ++k) {
    for (std::size_t t = 0; t < width; ++t) {
      double& v = out[k * width + t];
      v = rho_ground_[k] > 0.0 ? v / rho_ground_[k] : not_a_value;
    }
  }
  return out;
}

std::vector<double> EstimationContext::conditional_covariance(
    std::size_t h, std::size_t l, std::span<const std::size_t> perm) const {
  check_channels(h, l);
  const FunctionalMarkSet& m = *marks_;
  const std::size_t n = m.num_points();
  const std::size_t width = aligned_grid().size();
  const std::size_t lag = cfg_.time_lag;
  // curves shifted by the mean curve, in point order after the permutation;
  // the shift keeps E[ab] - E[a]E[b] free of cancellation
  std::vector<double> left(n * width), right(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = perm.empty() ? i : perm[i];
    const auto fa = m.curve(src, h);
    const auto fb = m.curve(src, l);
    for (std::size_t t = 0; t < width; ++t) {
      left[i * width + t] = fa[t + lag] - means_[h][t + lag];
      right[i * width + t] = fb[t] - means_[l][t];
    }
  }
  const kernels::BinnedWeights& bins = table_.kernel_bins();
  const auto first = table_.first();
  const auto second = table_.second();
  std::vector<double> out(bins.bins() * width);
  kernels::fill_rows(bins.bins(), width, out, [&](std::size_t k, std::span<double> row) {
    const double rho = rho_ground_[k];
    if (!(rho > 0.0)) {
      std::fill(row.begin(), row.end(), not_a_value);
      return;
    }
    std::vector<double> sa(width, 0.0), sb(width, 0.0);
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t e = bins.offsets[k]; e < bins.offsets[k + 1]; ++e) {
      const double w = bins.weight[e];
      const double* va = left.data() + static_cast<std::size_t>(first[bins.pair[e]]) * width;
      const double* vb = right.data() + static_cast<std::size_t>(second[bins.pair[e]]) * width;
      for (std::size_t t = 0; t < width; ++t) {
        sa[t] += w * va[t];
        sb[t] += w * vb[t];
        row[t] += w * va[t] * vb[t];
      }
    }
    for (std::size_t t = 0; t < width; ++t) row[t] = row[t] / rho - (sa[t] / rho) * (sb[t] / rho);
  });
  return out;
}

std::vector<double> EstimationContext::normaliser_curve(KappaNormalization norm, std::size_t h,
                                                        std::size_t l) const {
  check_channels(h, l);
  const std::size_t width = aligned_grid().size();
  const std::size_t lag = cfg_.time_lag;
  std::vector<double> out(width, 1.0);
  for (std::size_t k = 0; k < width; ++k) {
    const double left = means_[h][k + lag];
    const double right = means_[l][k];
    switch (norm) {
      case KappaNormalization::mean_product: out[k] = left * right; break;
      case KappaNormalization::mean_left: out[k] = left; break;
      case KappaNormalization::mean_right: out[k] = right; break;
      case KappaNormalization::c_hat:
      case KappaNormalization::unit: break;
    }
  }
  return out;
}

double EstimationContext::integrate_aligned(std::span<const double> samples) const {
  const auto& w = aligned_grid().weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * samples[k];
  return sum;
}

double EstimationContext::span_length() const {
  const auto& w = aligned_grid().weights();
  return std::accumulate(w.begin(), w.end(), 0.0);
}

double EstimationContext::normaliser_integral(KappaNormalization norm, std::size_t h,
                                              std::size_t l) const {
  const double value = integrate_aligned(normaliser_curve(norm, h, l));
  if (value == 0.0) throw domain_error("mean-based normaliser is zero");
  return value;
}

SummaryCurve EstimationContext::ratio_curve(const MatrixKey& key, KappaNormalization norm,
                                            std::span<const std::size_t> perm) const {
  SummaryCurve c;
  c.r = r();
  c.h = key.h;
  c.l = key.l;
  const std::size_t bins = c.r.size();
  const bool mean_based = norm == KappaNormalization::mean_product ||
                          norm == KappaNormalization::mean_left ||
                          norm == KappaNormalization::mean_right;

  if (mean_based && key.kind == 0 && cfg_.mean_norm == MeanNormalization::pointwise) {
    const std::size_t width = aligned_grid().size();
    const std::vector<double> mu = normaliser_curve(norm, key.h, key.l);
    c.pointwise = conditional_pointwise(key.tf, key.h, key.l, perm);
    c.pointwise_width = width;
    c.values.assign(bins, 0.0);
    for (std::size_t k = 0; k < bins; ++k) {
      std::span<double> row(c.pointwise.data() + k * width, width);
      for (std::size_t t = 0; t < width; ++t) row[t] /= mu[t];
      c.values[k] = integrate_aligned(row);
    }
    c.theoretical.assign(bins, span_length());
    return c;
  }
  if (mean_based && key.kind != 0) {
    throw domain_error("multi-function test functions support c_hat and unit normalisation only");
  }

  c.values = conditional(pair_values(key, perm));
  double theo = 1.0;
  if (norm == KappaNormalization::c_hat) {
    const double ch = matrix(key)->chat;
    for (double& v : c.values) v = guarded_ratio(v, ch);
  } else if (mean_based) {
    const double z = normaliser_integral(norm, key.h, key.l);
    for (double& v : c.values) v /= z;
  } else {
    theo = matrix(key)->chat;
  }
  c.theoretical.assign(bins, theo);
  return c;
}

SummaryCurve EstimationContext::evaluate(const StatisticRequest& request,
                                         std::span<const std::size_t> perm) const {
  check_perm(perm, pattern_.size());
  if (is_points_only(request.statistic)) return evaluate_ground(request);
  switch (request.statistic) {
    case Statistic::g_tf:
    case Statistic::K_tf:
    case Statistic::L_tf: return evaluate_weighted(request, perm);
    default: return evaluate_mark(request, perm);
  }
}

SummaryCurve EstimationContext::evaluate_ground(const StatisticRequest& request) const {
  SummaryCurve c = make_curve(request.statistic, r(), 0, 0);
  const std::size_t bins = c.r.size();
  const double lam2 = lambda_ * lambda_;
  c.values.resize(bins);
  c.theoretical.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double rk = c.r[k];
    switch (request.statistic) {
      case Statistic::rho_ground:
        c.values[k] = rho_ground_[k];
        c.theoretical[k] = lam2;
        break;
      case Statistic::g_ground:
        c.values[k] = rho_ground_[k] / lam2;
        c.theoretical[k] = 1.0;
        break;
      case Statistic::K_ground:
        c.values[k] = cumulative_ground_[k] / lam2;
        c.theoretical[k] = std::numbers::pi * rk * rk;
        break;
      default:
        c.values[k] = std::sqrt(cumulative_ground_[k] / lam2 / std::numbers::pi);
        c.theoretical[k] = rk;
        break;
    }
  }
  return c;
}

SummaryCurve EstimationContext::evaluate_mark(const StatisticRequest& request,
                                              std::span<const std::size_t> perm) const {
  require_marks();
  const Statistic s = request.statistic;
  const std::size_t h = request.h;
  const std::size_t l = request.l;
  if (request.types || request.local_point) {
    throw domain_error(std::string(to_string(s)) + " has no multitype or local version");
  }
  if (request.multi && s != Statistic::rho_tf && s != Statistic::kappa_tf) {
    throw domain_error(std::string(to_string(s)) + " does not take a multi-function test function");
  }
  check_channels(h, l);
  const std::size_t bins = r().size();

  auto finish = [&](SummaryCurve c) {
    c.kind = std::string(to_string(s));
    c.h = request.multi ? request.multi->left : h;
    c.l = request.multi ? 0 : l;
    return c;
  };

  switch (s) {
    case Statistic::rho_tf: {
      const MatrixKey key = key_for(request);
      SummaryCurve c;
      c.r = r();
      c.values = kernel_sum(pair_values(key, perm));
      c.theoretical.assign(bins, lambda_ * lambda_ * matrix(key)->chat);
      return finish(std::move(c));
    }
    case Statistic::kappa_tf:
      return finish(ratio_curve(key_for(request), request.normalization, perm));
    case Statistic::gamma_hl:
      return finish(ratio_curve(tf_key(TestFunction::t1_halfsqdiff, h, l),
                                KappaNormalization::c_hat, perm));
    case Statistic::gamma_hl_raw:
      return finish(ratio_curve(tf_key(TestFunction::t1_halfsqdiff, h, l),
                                KappaNormalization::unit, perm));
    case Statistic::kappa_hl:
      return finish(ratio_curve(tf_key(TestFunction::t3_product, h, l),
                                KappaNormalization::mean_product, perm));
    case Statistic::kappa_hdot:
      return finish(ratio_curve(tf_key(TestFunction::t4_left, h, l),
                                KappaNormalization::mean_left, perm));
    case Statistic::kappa_dotl:
      return finish(ratio_curve(tf_key(TestFunction::t5_right, h, l),
                                KappaNormalization::mean_right, perm));
    case Statistic::c_hl:
    case Statistic::c_hdot:
    case Statistic::c_dotl:
    case Statistic::cov_sto: {
      const TestFunction tf = s == Statistic::c_hdot   ? TestFunction::t4_left
                              : s == Statistic::c_dotl ? TestFunction::t5_right
                                                       : TestFunction::t3_product;
      const KappaNormalization norm = s == Statistic::c_hdot   ? KappaNormalization::mean_left
                                      : s == Statistic::c_dotl ? KappaNormalization::mean_right
                                                               : KappaNormalization::mean_product;
      SummaryCurve c = ratio_curve(tf_key(tf, h, l), KappaNormalization::unit, perm);
      const double mean = integrate_aligned(normaliser_curve(norm, h, l));
      if (s == Statistic::cov_sto) {
        for (double& v : c.values) v -= mean;
        c.theoretical.assign(bins, 0.0);
      } else {
        c.theoretical.assign(bins, mean);
      }
      return finish(std::move(c));
    }
    case Statistic::tau_hl: {
      SummaryCurve c = ratio_curve(tf_key(TestFunction::t2_ratio, h, l), KappaNormalization::unit, perm);
      const double span = span_length();
      for (double& v : c.values) v = span - v;
      for (double& v : c.theoretical) v = span - v;
      return finish(std::move(c));
    }
    case Statistic::kappa_bei: {
      SummaryCurve c;
      c.r = r();
      const std::vector<double> sum_mean = [&] {
        std::vector<double> a = normaliser_curve(KappaNormalization::mean_left, h, l);
        const std::vector<double> b = normaliser_curve(KappaNormalization::mean_right, h, l);
        for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
        return a;
      }();
      if (cfg_.mean_norm == MeanNormalization::pointwise) {
        const std::size_t width = aligned_grid().size();
        c.pointwise = conditional_pointwise(TestFunction::t4_left, h, l, perm);
        const std::vector<double> right = conditional_pointwise(TestFunction::t5_right, h, l, perm);
        c.pointwise_width = width;
        c.values.assign(bins, 0.0);
        for (std::size_t k = 0; k < bins; ++k) {
          std::span<double> row(c.pointwise.data() + k * width, width);
          for (std::size_t t = 0; t < width; ++t) row[t] = (row[t] + right[k * width + t]) / sum_mean[t];
          c.values[k] = integrate_aligned(row);
        }
        c.theoretical.assign(bins, span_length());
        return finish(std::move(c));
      }
      std::vector<double> values = pair_values(tf_key(TestFunction::t4_left, h, l), perm);
      const std::vector<double> right = pair_values(tf_key(TestFunction::t5_right, h, l), perm);
      for (std::size_t p = 0; p < values.size(); ++p) values[p] += right[p];
      const double z = integrate_aligned(sum_mean);
      if (z == 0.0) throw domain_error("mean-based normaliser is zero");
      c.values = conditional(values);
      for (double& v : c.values) v /= z;
      c.theoretical.assign(bins, 1.0);
      return finish(std::move(c));
    }
    case Statistic::cov_cre:
    case Statistic::corr_ish: {
      const FunctionalMarkSet& m = *marks_;
      if (s == Statistic::corr_ish) {
        for (std::size_t ch : {h, l}) {
          if (channel_is_constant(m, ch)) {
            throw domain_error("Isham correlation is undefined: channel " + std::to_string(ch + 1) +
                               " is constant across points");
          }
        }
      }
      const std::size_t width = aligned_grid().size();
      const auto cov = conditional_covariance(h, l, perm);
      std::vector<double> var_h, var_l;
      if (s == Statistic::corr_ish) {
        var_h = conditional_covariance(h, h, perm);
        var_l = conditional_covariance(l, l, perm);
      }
      SummaryCurve c;
      c.r = r();
      c.values.assign(bins, 0.0);
      c.pointwise.assign(bins * width, 0.0);
      c.pointwise_width = width;
      for (std::size_t k = 0; k < bins; ++k) {
        std::span<double> row(c.pointwise.data() + k * width, width);
        bool undefined = false;
        for (std::size_t t = 0; t < width; ++t) {
          const std::size_t at = k * width + t;
          if (s == Statistic::cov_cre) {
            row[t] = cov[at];
            continue;
          }
          const double denom = var_h[at] * var_l[at];
          if (!(denom > 0.0)) {
            undefined = true;
            row[t] = not_a_value;
          } else {
            row[t] = cov[at] / std::sqrt(denom);
          }
        }
        c.values[k] = undefined ? not_a_value : integrate_aligned(row);
      }
      c.theoretical.assign(bins, 0.0);
      return finish(std::move(c));
    }
    case Statistic::U: {
      const Statistic base = request.u_base;
      if (base != Statistic::kappa_hl && base != Statistic::kappa_hdot &&
          base != Statistic::kappa_dotl && base != Statistic::gamma_hl && base != Statistic::tau_hl) {
        throw domain_error("U accepts kappa_hl, kappa_hdot, kappa_dotl, gamma_hl or tau_hl as base");
      }
      StatisticRequest inner = request;
      inner.statistic = base;
      SummaryCurve c = evaluate_mark(inner, perm);
      for (std::size_t k = 0; k < bins; ++k) {
        c.values[k] *= rho_ground_[k];
        c.theoretical[k] *= lambda_ * lambda_;
      }
      c.pointwise.clear();
      c.pointwise_width = 0;
      return finish(std::move(c));
    }
    default: break;
  }
  throw domain_error("unsupported statistic " + std::string(to_string(s)));
}

SummaryCurve EstimationContext::evaluate_weighted(const StatisticRequest& request,
                                                  std::span<const std::size_t> perm) const {
  const Statistic s = request.statistic;
  const bool unit = request.unit_weight;
  if (request.local_point && request.types) {
    throw domain_error("local and multitype versions cannot be combined");
  }
  if (request.local_point && s == Statistic::g_tf) {
    throw domain_error("the local version is defined for K and L only");
  }
  const std::size_t n = pattern_.size();
  const double area = pattern_.window().area();
  const std::size_t bins = r().size();
  const auto first = table_.first();
  const auto second = table_.second();

  // pair mask and intensity factor
  std::vector<char> keep(table_.num_pairs(), 1);
  double lam_factor = lambda_ * lambda_;
  double scale = 1.0;
  if (request.types) {
    if (!pattern_.has_labels()) throw domain_error("multitype statistics need type labels");
    const auto& labels = pattern_.labels();
    const int ti = request.types->first;
    const double lam_i = static_cast<double>(pattern_.count_of_type(ti)) / area;
    if (lam_i == 0.0) throw domain_error("no points of type " + std::to_string(ti));
    double lam_j = lambda_;
    if (request.types->second) {
      const int tj = *request.types->second;
      lam_j = static_cast<double>(pattern_.count_of_type(tj)) / area;
      if (lam_j == 0.0) throw domain_error("no points of type " + std::to_string(tj));
    }
    for (std::size_t p = 0; p < keep.size(); ++p) {
      keep[p] = labels[first[p]] == ti &&
                (!request.types->second || labels[second[p]] == *request.types->second);
    }
    lam_factor = lam_i * lam_j;
  }
  if (request.local_point) {
    const std::size_t u = *request.local_point;
    if (u >= n) throw domain_error("local point index out of range");
    for (std::size_t p = 0; p < keep.size(); ++p) keep[p] = first[p] == u;
    lam_factor = lambda_;
    scale = area;
  }

  SummaryCurve c = make_curve(s, r(), request.h, request.l);
  c.types = request.types;
  const bool pointwise = !unit && !request.multi && cfg_.mean_norm == MeanNormalization::pointwise &&
                         (request.test_function == TestFunction::t3_product ||
                          request.test_function == TestFunction::t4_left ||
                          request.test_function == TestFunction::t5_right);

  double span = 1.0;
  if (pointwise) {
    const KappaNormalization norm = request.test_function == TestFunction::t3_product
                                        ? KappaNormalization::mean_product
                                    : request.test_function == TestFunction::t4_left
                                        ? KappaNormalization::mean_left
                                        : KappaNormalization::mean_right;
    const std::vector<double> mu = normaliser_curve(norm, request.h, request.l);
    const std::size_t width = mu.size();
    std::vector<double> values =
        pointwise_pair_values(request.test_function, request.h, request.l, perm);
    for (std::size_t p = 0; p < keep.size(); ++p) {
      if (!keep[p]) std::fill_n(values.begin() + static_cast<std::ptrdiff_t>(p * width), width, 0.0);
    }
    const auto& binned = s == Statistic::g_tf ? table_.kernel_bins() : table_.indicator_bins();
    c.pointwise.assign(bins * width, 0.0);
    c.pointwise_width = width;
    kernels::binned_sum_pointwise(binned, values, width, c.pointwise);
    if (s != Statistic::g_tf) {
      for (std::size_t k = 1; k < bins; ++k) {
        for (std::size_t t = 0; t < width; ++t) {
          c.pointwise[k * width + t] += c.pointwise[(k - 1) * width + t];
        }
      }
    }
    c.values.assign(bins, 0.0);
    for (std::size_t k = 0; k < bins; ++k) {
      std::span<double> row(c.pointwise.data() + k * width, width);
      for (std::size_t t = 0; t < width; ++t) row[t] = row[t] * scale / (lam_factor * mu[t]);
      c.values[k] = integrate_aligned(row);
    }
    span = span_length();
  } else {
    std::vector<double> values;
    double chat_value = 1.0;
    if (unit) {
      values.assign(table_.num_pairs(), 1.0);
    } else {
      const MatrixKey key = key_for(request);
      values = pair_values(key, perm);
      switch (request.multi ? TestFunction::t1_halfsqdiff : request.test_function) {
        case TestFunction::t3_product:
          chat_value = integrate_aligned(
              normaliser_curve(KappaNormalization::mean_product, request.h, request.l));
          break;
        case TestFunction::t4_left:
          chat_value = integrate_aligned(
              normaliser_curve(KappaNormalization::mean_left, request.h, request.l));
          break;
        case TestFunction::t5_right:
          chat_value = integrate_aligned(
              normaliser_curve(KappaNormalization::mean_right, request.h, request.l));
          break;
        default: chat_value = matrix(key)->chat; break;
      }
    }
    for (std::size_t p = 0; p < keep.size(); ++p) {
      if (!keep[p]) values[p] = 0.0;
    }
    c.values = s == Statistic::g_tf ? kernel_sum(values) : cumulative_sum(values);
    for (double& v : c.values) v = guarded_ratio(v * scale, lam_factor * chat_value);
  }

  c.theoretical.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double rk = c.r[k];
    c.theoretical[k] = s == Statistic::g_tf ? span : std::numbers::pi * rk * rk * span;
  }
  if (s == Statistic::L_tf) {
    for (double& v : c.values) v = std::sqrt(v / std::numbers::pi);
    for (double& v : c.theoretical) v = std::sqrt(v / std::numbers::pi);
  }
  if (request.multi) {
    c.h = request.multi->left;
    c.l = 0;
  }
  return c;
}

// Convenience wrappers

SummaryCurve estimate_ground_product_density(const PointPattern& pattern,
                                             const EstimationConfig& cfg) {
  StatisticRequest req;
  req.statistic = Statistic::rho_ground;
  return EstimationContext(pattern, nullptr, cfg).evaluate(req);
}

SummaryCurve estimate_ripley_K(const PointPattern& pattern, const EstimationConfig& cfg) {
  StatisticRequest req;
  req.statistic = Statistic::K_ground;
  return EstimationContext(pattern, nullptr, cfg).evaluate(req);
}

SummaryCurve estimate_tf_product_density(const PointPattern& pattern,
                                         const FunctionalMarkSet& marks, std::size_t h,
                                         std::size_t l, TestFunction tf,
                                         const EstimationConfig& cfg) {
  StatisticRequest req;
  req.statistic = Statistic::rho_tf;
  req.h = h;
  req.l = l;
  req.test_function = tf;
  return EstimationContext(pattern, &marks, cfg).evaluate(req);
}

SummaryCurve estimate_kappa_generic(const PointPattern& pattern, const FunctionalMarkSet& marks,
                                    std::size_t h, std::size_t l, TestFunction tf,
                                    KappaNormalization normalization,
                                    const EstimationConfig& cfg) {
  StatisticRequest req;
  req.statistic = Statistic::kappa_tf;
  req.h = h;
  req.l = l;
  req.test_function = tf;
  req.normalization = normalization;
  return EstimationContext(pattern, &marks, cfg).evaluate(req);
}

SummaryCurve estimate_mark_characteristic(const PointPattern& pattern,
                                          const FunctionalMarkSet& marks, Statistic statistic,
                                          std::size_t h, std::size_t l,
                                          const EstimationConfig& cfg) {
  StatisticRequest req;
  req.statistic = statistic;
  req.h = h;
  req.l = l;
  return EstimationContext(pattern, &marks, cfg).evaluate(req);
}

SummaryCurve estimate_U(const PointPattern& pattern, const FunctionalMarkSet& marks,
                        std::size_t h, std::size_t l, Statistic base,
                        const EstimationConfig& cfg) {
  StatisticRequest req;
  req.statistic = Statistic::U;
  req.h = h;
  req.l = l;
  req.u_base = base;
  return EstimationContext(pattern, &marks, cfg).evaluate(req);
}

namespace {
StatisticRequest weighted_request(Statistic s, std::size_t h, std::size_t l,
                                  const WeightSpec& weight) {
  StatisticRequest req;
  req.statistic = s;
  req.h = h;
  req.l = l;
  req.unit_weight = !weight.tf.has_value();
  if (weight.tf) req.test_function = *weight.tf;
  req.types = weight.types;
  req.local_point = weight.local_point;
  return req;
}
}  // namespace

KLCurves estimate_markweighted_K(const PointPattern& pattern, const FunctionalMarkSet* marks,
                                 std::size_t h, std::size_t l, const WeightSpec& weight,
                                 const EstimationConfig& cfg) {
  const EstimationContext ctx(pattern, marks, cfg);
  return KLCurves{ctx.evaluate(weighted_request(Statistic::K_tf, h, l, weight)),
                  ctx.evaluate(weighted_request(Statistic::L_tf, h, l, weight))};
}

SummaryCurve estimate_markweighted_pcf(const PointPattern& pattern,
                                       const FunctionalMarkSet* marks, std::size_t h,
                                       std::size_t l, const WeightSpec& weight,
                                       const EstimationConfig& cfg) {
  return EstimationContext(pattern, marks, cfg)
      .evaluate(weighted_request(Statistic::g_tf, h, l, weight));
}

// Nearest-neighbour indices

std::vector<std::size_t> nearest_neighbours(const PointPattern& pattern) {
  const std::size_t n = pattern.size();
  if (n < 2) throw domain_error("nearest neighbours need at least two points");
  std::vector<std::size_t> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = window_distance(pattern.window(), pattern[i], pattern[j]);
      if (d < best) {
        best = d;
        z[i] = j;
      }
    }
  }
  return z;
}

std::vector<std::vector<std::size_t>> k_nearest_neighbours(const PointPattern& pattern,
                                                           std::size_t k) {
  const std::size_t n = pattern.size();
  if (k == 0) throw domain_error("k must be at least 1");
  if (n < k + 1) {
    throw domain_error("k nearest neighbours need at least k + 1 = " + std::to_string(k + 1) +
                       " points");
  }
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < n; ++i) {
    all.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) all.emplace_back(window_distance(pattern.window(), pattern[i], pattern[j]), j);
    }
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
    out[i].reserve(k);
    for (std::size_t v = 0; v < k; ++v) out[i].push_back(all[v].second);
  }
  return out;
}

namespace {

struct AlignedMarks {
  const FunctionalMarkSet& marks;
  std::size_t lag;
  TimeGrid grid;
  std::vector<double> mean_h;  // aligned
  std::vector<double> mean_l;
};

AlignedMarks align(const PointPattern& pattern, const FunctionalMarkSet& marks, std::size_t h,
                   std::size_t l, std::size_t lag) {
  if (marks.num_points() != pattern.size()) {
    throw domain_error("marks describe " + std::to_string(marks.num_points()) +
                       " points but the pattern has " + std::to_string(pattern.size()));
  }
  if (h >= marks.num_channels() || l >= marks.num_channels()) {
    throw domain_error("channel out of range");
  }
  marks.validate_finite();
  const std::size_t t = marks.num_times();
  if (lag >= t) throw domain_error("time lag must be smaller than the grid length");
  TimeGrid grid = lag == 0 ? marks.grid() : marks.grid().slice(lag, t - lag);
  const auto mh = functional_mean(marks, h);
  const auto ml = functional_mean(marks, l);
  std::vector<double> left(grid.size()), right(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    left[k] = mh[k + lag];
    right[k] = ml[k];
  }
  return AlignedMarks{marks, lag, std::move(grid), std::move(left), std::move(right)};
}

double weighted_sum(const std::vector<double>& w, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * v[k];
  return s;
}

}  // namespace

IndexReport estimate_nn_indices(const PointPattern& pattern, const FunctionalMarkSet& marks,
                                std::size_t h, std::size_t l, const EstimationConfig& cfg) {
  const std::vector<std::size_t> z = nearest_neighbours(pattern);
  const AlignedMarks am = align(pattern, marks, h, l, cfg.time_lag);
  const auto& w = am.grid.weights();
  const std::size_t n = pattern.size();
  const std::size_t width = w.size();
  const double nd = static_cast<double>(n);

  double chat_t1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (cfg.chat == CHatDenominator::distinct_pairs && i == j) continue;
      chat_t1 += detail::integrated_testfn(TestFunction::t1_halfsqdiff, marks.curve(i, h),
                                           marks.curve(j, l), w, am.lag);
    }
  }
  chat_t1 /= cfg.chat == CHatDenominator::all_pairs ? nd * nd : nd * (nd - 1.0);

  double sum_t1 = 0.0, sum_t2 = 0.0, sum_t3 = 0.0, sum_t5 = 0.0;
  bool positive = true;
  std::vector<double> prod_t(width, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto fa = marks.curve(i, h);
    const auto fb = marks.curve(z[i], l);
    sum_t1 += detail::integrated_testfn(TestFunction::t1_halfsqdiff, fa, fb, w, am.lag);
    sum_t3 += detail::integrated_testfn(TestFunction::t3_product, fa, fb, w, am.lag);
    sum_t5 += detail::integrated_testfn(TestFunction::t5_right, fa, fb, w, am.lag);
    for (std::size_t k = 0; k < width; ++k) {
      prod_t[k] += fa[k + am.lag] * fb[k];
      if (!(fa[k + am.lag] > 0.0) || !(fb[k] > 0.0)) positive = false;
    }
    if (positive) sum_t2 += detail::integrated_testfn(TestFunction::t2_ratio, fa, fb, w, am.lag);
  }

  IndexReport out;
  const double span = std::accumulate(w.begin(), w.end(), 0.0);
  out.gamma_nn_raw = sum_t1 / nd;
  out.gamma_nn = guarded_ratio(out.gamma_nn_raw, chat_t1);
  out.c_nn = sum_t3 / nd;
  if (cfg.mean_norm == MeanNormalization::pointwise) {
    double s = 0.0;
    for (std::size_t k = 0; k < width; ++k) s += w[k] * (prod_t[k] / nd) / (am.mean_h[k] * am.mean_l[k]);
    out.kappa_nn = s;
  } else {
    std::vector<double> mp(width);
    for (std::size_t k = 0; k < width; ++k) mp[k] = am.mean_h[k] * am.mean_l[k];
    out.kappa_nn = out.c_nn / weighted_sum(w, mp);
  }
  out.tau_nn = positive ? span - sum_t2 / nd : not_a_value;
  out.c_dotl_nn = sum_t5 / nd;
  out.kappa_dotl_nn = out.c_dotl_nn / weighted_sum(w, am.mean_l);
  return out;
}

IndexReport estimate_knn_indices(const PointPattern& pattern, const FunctionalMarkSet& marks,
                                 std::size_t h, std::size_t l, std::size_t k_max,
                                 const EstimationConfig& cfg) {
  const auto z = k_nearest_neighbours(pattern, k_max);
  IndexReport out = estimate_nn_indices(pattern, marks, h, l, cfg);
  const AlignedMarks am = align(pattern, marks, h, l, cfg.time_lag);
  const auto& w = am.grid.weights();
  const std::size_t n = pattern.size();
  const std::size_t width = w.size();
  const double nd = static_cast<double>(n);
  const double span = std::accumulate(w.begin(), w.end(), 0.0);

  // per-k pointwise averages over points
  std::vector<double> prod(k_max * width, 0.0), sq(k_max * width, 0.0), dom(k_max * width, 0.0);
  std::vector<double> run_prod(width), run_sq(width), run_dom(width);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(run_prod.begin(), run_prod.end(), 0.0);
    std::fill(run_sq.begin(), run_sq.end(), 0.0);
    std::fill(run_dom.begin(), run_dom.end(), 0.0);
    const auto fa = marks.curve(i, h);
    for (std::size_t v = 0; v < k_max; ++v) {
      const auto fb = marks.curve(z[i][v], l);
      const double kd = static_cast<double>(v + 1);
      for (std::size_t t = 0; t < width; ++t) {
        const double a = fa[t + am.lag];
        const double b = fb[t];
        run_prod[t] += a * b;
        run_sq[t] += 0.5 * (a - b) * (a - b);
        run_dom[t] += a > b ? 1.0 : 0.0;
        prod[v * width + t] += run_prod[t] / kd;
        sq[v * width + t] += run_sq[t] / kd;
        dom[v * width + t] += run_dom[t] / kd;
      }
    }
  }
  out.K_k.assign(k_max, 0.0);
  out.Gamma_k.assign(k_max, 0.0);
  out.D_k.assign(k_max, 0.0);
  for (std::size_t v = 0; v < k_max; ++v) {
    double kk = 0.0, gg = 0.0, dd = 0.0;
    for (std::size_t t = 0; t < width; ++t) {
      const std::size_t at = v * width + t;
      kk += w[t] * (prod[at] / nd) / (am.mean_h[t] * am.mean_l[t]);
      gg += w[t] * sq[at] / nd;
      dd += w[t] * dom[at] / nd;
    }
    out.K_k[v] = kk;
    out.Gamma_k[v] = gg;
    out.D_k[v] = dd / span;
  }
  return out;
}

}  // namespace fmark
