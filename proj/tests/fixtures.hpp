#pragma once

// Random small patterns shared by the unit and acceptance tests, with a
// matching copy in the oracle's plain layout.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "fmark/core.hpp"
#include "fmark/estimators.hpp"
#include "oracle.hpp"

namespace fixtures {

struct Case {
  fmark::PointPattern pattern;
  fmark::FunctionalMarkSet marks;
  oracle::Data data;
};

inline Case random_case(std::uint64_t seed, std::size_t n, std::size_t p, std::size_t T, bool torus,
                        bool labels, double width = 1.0, double height = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, width), uy(0.0, height), um(0.5, 3.0),
      step(0.2, 1.0);
  std::uniform_int_distribution<int> ut(1, 2);

  oracle::Data d;
  d.x1 = width;
  d.y1 = height;
  d.torus = torus;
  d.p = p;
  std::vector<fmark::Point> pts;
  std::vector<int> types;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng), y = uy(rng);
    d.x.push_back(x);
    d.y.push_back(y);
    pts.push_back({x, y});
    if (labels) types.push_back(ut(rng));
  }
  // make sure both types occur
  if (labels && n >= 2) {
    types[0] = 1;
    types[1] = 2;
  }
  d.type = types;
  double t = 0.0;
  for (std::size_t k = 0; k < T; ++k) {
    d.t.push_back(t);
    t += step(rng);
  }
  d.f.resize(n * p * T);
  for (double& v : d.f) v = um(rng);

  const fmark::Window w(0.0, width, 0.0, height, torus ? fmark::Topology::torus : fmark::Topology::plane);
  fmark::PointPattern pattern(w, pts, labels ? std::optional<std::vector<int>>(types) : std::nullopt);
  fmark::FunctionalMarkSet marks(fmark::TimeGrid(d.t), n, p, d.f);
  return Case{std::move(pattern), std::move(marks), std::move(d)};
}

inline oracle::Settings settings_for(const fmark::ResolvedConfig& cfg) {
  oracle::Settings s;
  s.kernel = cfg.kernel == fmark::KernelShape::epanechnikov ? 0
             : cfg.kernel == fmark::KernelShape::box        ? 1
                                                            : 2;
  s.b = cfg.bandwidth;
  s.r = cfg.grid.values();
  s.lag = cfg.time_lag;
  s.distinct = cfg.chat == fmark::CHatDenominator::distinct_pairs;
  s.pointwise = cfg.mean_norm == fmark::MeanNormalization::pointwise;
  return s;
}

/// |a - b| <= rel max(|b|, 1) elementwise, with NaN only where the other is NaN.
inline bool close(std::span<const double> a, std::span<const double> b, double rel,
                  double* worst = nullptr) {
  if (a.size() != b.size()) return false;
  double w = 0.0;
  bool ok = true;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::isnan(a[k]) || std::isnan(b[k])) {
      if (std::isnan(a[k]) != std::isnan(b[k])) ok = false;
      continue;
    }
    const double err = std::fabs(a[k] - b[k]) / std::max(std::fabs(b[k]), 1.0);
    w = std::max(w, err);
    if (!(err <= rel)) ok = false;
  }
  if (worst) *worst = w;
  return ok;
}

inline bool close(double a, double b, double rel) {
  return close(std::span<const double>(&a, 1), std::span<const double>(&b, 1), rel);
}

}  // namespace fixtures
