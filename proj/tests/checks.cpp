#include "checks.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "fmark/estimators.hpp"
#include "fmark/simulate.hpp"
#include "fmark/smoothing.hpp"

namespace checks {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void note(Result& res, const std::string& what, double err, double tol) {
  if (std::isnan(err) || err > res.worst) res.worst = std::isnan(err) ? inf : err;
  if (!(err <= tol)) {
    res.ok = false;
    if (!res.detail.empty()) res.detail += "; ";
    std::ostringstream ss;
    ss << what << " off by " << err;
    res.detail += ss.str();
  }
}

// worst |v - target| over defined entries; defined must follow rho > 0
double deviation(const std::vector<double>& v, double target, const std::vector<double>& rho) {
  double w = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if ((rho[k] > 0.0) == std::isnan(v[k])) return std::numeric_limits<double>::quiet_NaN();
    if (!std::isnan(v[k])) w = std::max(w, std::fabs(v[k] - target));
  }
  return w;
}

fmark::PointPattern poisson(std::uint64_t seed, double lambda) {
  fmark::SimulationSpec spec;
  spec.lambda = lambda;
  spec.seed = seed;
  return fmark::simulate_pattern(spec);
}

fmark::FunctionalMarkSet constants(std::size_t n, double a, double b) {
  fmark::FunctionalMarkSet m(fmark::TimeGrid::uniform(0.0, 1.0, 6), n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : m.curve(i, 0)) v = a;
    for (double& v : m.curve(i, 1)) v = b;
  }
  return m;
}

}  // namespace

Result constant_marks(double tol) {
  using fmark::Statistic;
  Result res;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const fmark::PointPattern pattern = poisson(seed, 60.0);
    const fmark::FunctionalMarkSet marks = constants(pattern.size(), 2.0, 3.0);
    for (auto mean_norm : {fmark::MeanNormalization::integrated, fmark::MeanNormalization::pointwise}) {
      fmark::EstimationConfig cfg;
      cfg.mean_norm = mean_norm;
      const fmark::EstimationContext ctx(pattern, &marks, cfg);
      fmark::StatisticRequest ground;
      ground.statistic = Statistic::rho_ground;
      const std::vector<double> rho = ctx.evaluate(ground).values;
      auto eval = [&](Statistic s, std::size_t h, std::size_t l) {
        fmark::StatisticRequest req;
        req.statistic = s;
        req.h = h;
        req.l = l;
        return ctx.evaluate(req).values;
      };
      const std::string tag = mean_norm == fmark::MeanNormalization::pointwise ? " (pointwise)" : "";
      note(res, "kappa_hl" + tag, deviation(eval(Statistic::kappa_hl, 0, 1), 1.0, rho), tol);
      note(res, "kappa_bei" + tag, deviation(eval(Statistic::kappa_bei, 0, 1), 1.0, rho), tol);
      note(res, "kappa_hdot" + tag, deviation(eval(Statistic::kappa_hdot, 0, 1), 1.0, rho), tol);
      note(res, "kappa_dotl" + tag, deviation(eval(Statistic::kappa_dotl, 0, 1), 1.0, rho), tol);
      note(res, "gamma_hh", deviation(eval(Statistic::gamma_hl, 0, 0), 0.0, rho), tol);
      note(res, "gamma_ll", deviation(eval(Statistic::gamma_hl, 1, 1), 0.0, rho), tol);
      note(res, "tau_hl", deviation(eval(Statistic::tau_hl, 0, 1), 1.0 / 3.0, rho), tol);
      note(res, "tau_lh", deviation(eval(Statistic::tau_hl, 1, 0), 1.0 / 3.0, rho), tol);

      const fmark::IndexReport nn = fmark::estimate_nn_indices(pattern, marks, 0, 1, cfg);
      note(res, "kappa_nn" + tag, std::fabs(nn.kappa_nn - 1.0), tol);
      note(res, "tau_nn", std::fabs(nn.tau_nn - 1.0 / 3.0), tol);
      note(res, "gamma_nn_hh",
           std::fabs(fmark::estimate_nn_indices(pattern, marks, 0, 0, cfg).gamma_nn), tol);

      // h = 2 < l = 3: origin never dominates; reversed channels always do
      const auto low = fmark::estimate_knn_indices(pattern, marks, 0, 1, 5, cfg);
      const auto high = fmark::estimate_knn_indices(pattern, marks, 1, 0, 5, cfg);
      for (std::size_t k = 0; k < 5; ++k) {
        note(res, "D_k low", std::fabs(low.D_k[k]), tol);
        note(res, "D_k high", std::fabs(high.D_k[k] - 1.0), tol);
        note(res, "K_k", std::fabs(low.K_k[k] - 1.0), tol);
      }

      fmark::StatisticRequest unit;
      unit.statistic = Statistic::K_tf;
      unit.unit_weight = true;
      fmark::StatisticRequest ripley;
      ripley.statistic = Statistic::K_ground;
      const auto a = ctx.evaluate(unit).values;
      const auto b = ctx.evaluate(ripley).values;
      double w = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) w = std::max(w, std::fabs(a[k] - b[k]));
      note(res, "unit-weight K vs Ripley K", w, tol);
      note(res, "unit-weight K vs Ripley K (bitwise)", a == b ? 0.0 : inf, tol);
    }
  }
  return res;
}

Result kernel_mass(double tol) {
  Result res;
  for (auto k : {fmark::KernelShape::epanechnikov, fmark::KernelShape::box,
                 fmark::KernelShape::gaussian_truncated}) {
    for (double b : {0.005, 0.05, 0.5, 3.0}) {
      // composite Simpson over the support
      const std::size_t m = 20000;
      double s = 0.0;
      for (std::size_t i = 0; i <= m; ++i) {
        const double u = -b + 2.0 * b * static_cast<double>(i) / static_cast<double>(m);
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * fmark::kernel_value(k, u, b);
      }
      s *= 2.0 * b / (3.0 * static_cast<double>(m));
      note(res, std::string(fmark::to_string(k)), std::fabs(s - 1.0), tol);
    }
  }
  return res;
}

Result trapezoid_linear(double tol) {
  Result res;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> step(0.01, 1.0), coef(-5.0, 5.0);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t T = 2 + static_cast<std::size_t>(rep % 40);
    std::vector<double> t{coef(rng)};
    for (std::size_t k = 1; k < T; ++k) t.push_back(t.back() + step(rng));
    const double a = coef(rng), c = coef(rng);
    std::vector<double> v(T);
    for (std::size_t k = 0; k < T; ++k) v[k] = a * t[k] + c;
    const double exact = 0.5 * a * (t.back() * t.back() - t[0] * t[0]) + c * (t.back() - t[0]);
    const double got = fmark::integrate_over_T(v, fmark::TimeGrid(t));
    note(res, "trapezoid", std::fabs(got - exact) / std::max(std::fabs(exact), 1.0), tol);
  }
  return res;
}

Result mark_scale_equivariance(double tol) {
  using fmark::Statistic;
  Result res;
  const double alpha = 3.7;
  for (std::uint64_t seed : {5u, 6u}) {
    fixtures::Case c = fixtures::random_case(seed, 40, 2, 5, true, false);
    fmark::FunctionalMarkSet scaled = c.marks;
    for (std::size_t i = 0; i < scaled.num_points(); ++i) {
      for (std::size_t ch = 0; ch < 2; ++ch) {
        for (double& v : scaled.curve(i, ch)) v *= alpha;
      }
    }
    fmark::EstimationConfig cfg;
    cfg.bandwidth = 0.08;
    const fmark::EstimationContext a(c.pattern, &c.marks, cfg);
    const fmark::EstimationContext b(c.pattern, &scaled, cfg);

    // (statistic, power of alpha)
    const std::vector<std::pair<Statistic, int>> cases = {
        {Statistic::gamma_hl, 0},   {Statistic::kappa_hl, 0},  {Statistic::tau_hl, 0},
        {Statistic::kappa_bei, 0},  {Statistic::kappa_hdot, 0}, {Statistic::kappa_dotl, 0},
        {Statistic::corr_ish, 0},   {Statistic::gamma_hl_raw, 2}, {Statistic::c_hl, 2},
        {Statistic::cov_sto, 2},    {Statistic::cov_cre, 2},   {Statistic::c_hdot, 1},
        {Statistic::c_dotl, 1},
    };
    for (const auto& [s, power] : cases) {
      fmark::StatisticRequest req;
      req.statistic = s;
      const auto va = a.evaluate(req).values;
      const auto vb = b.evaluate(req).values;
      const double f = std::pow(alpha, power);
      std::vector<double> expect(va);
      for (double& v : expect) v *= f;
      double worst = 0.0;
      const bool ok = fixtures::close(vb, expect, tol, &worst);
      note(res, std::string(fmark::to_string(s)), ok ? worst : inf, tol);
    }
    for (int tf : {1, 3}) {
      fmark::StatisticRequest req;
      req.statistic = Statistic::K_tf;
      req.test_function = static_cast<fmark::TestFunction>(tf - 1);
      double worst = 0.0;
      const bool ok = fixtures::close(b.evaluate(req).values, a.evaluate(req).values, tol, &worst);
      note(res, "K_tf T" + std::to_string(tf), ok ? worst : inf, tol);
    }
    const auto na = fmark::estimate_knn_indices(c.pattern, c.marks, 0, 1, 4, cfg);
    const auto nb = fmark::estimate_knn_indices(c.pattern, scaled, 0, 1, 4, cfg);
    note(res, "gamma_nn", std::fabs(nb.gamma_nn - na.gamma_nn) / std::max(1.0, std::fabs(na.gamma_nn)), tol);
    note(res, "kappa_nn", std::fabs(nb.kappa_nn - na.kappa_nn) / std::max(1.0, std::fabs(na.kappa_nn)), tol);
    note(res, "tau_nn", std::fabs(nb.tau_nn - na.tau_nn) / std::max(1.0, std::fabs(na.tau_nn)), tol);
    for (std::size_t k = 0; k < 4; ++k) {
      note(res, "K_k", std::fabs(nb.K_k[k] - na.K_k[k]) / std::max(1.0, std::fabs(na.K_k[k])), tol);
      note(res, "D_k", std::fabs(nb.D_k[k] - na.D_k[k]), tol);
    }
  }
  return res;
}

}  // namespace checks
