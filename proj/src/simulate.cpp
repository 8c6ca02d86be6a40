#include "fmark/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fmark {

std::string_view to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::poisson: return "poisson";
    case ProcessKind::thomas: return "thomas";
    case ProcessKind::strauss: return "strauss";
  }
  return "?";
}

ProcessKind process_kind_from_string(std::string_view name) {
  if (name == "poisson") return ProcessKind::poisson;
  if (name == "thomas") return ProcessKind::thomas;
  if (name == "strauss") return ProcessKind::strauss;
  throw domain_error("unknown process '" + std::string(name) + "'");
}

std::string_view to_string(GrowthMode mode) {
  switch (mode) {
    case GrowthMode::independent: return "independent";
    case GrowthMode::positive: return "positive";
    case GrowthMode::negative: return "negative";
  }
  return "?";
}

GrowthMode growth_mode_from_string(std::string_view name) {
  if (name == "independent") return GrowthMode::independent;
  if (name == "positive") return GrowthMode::positive;
  if (name == "negative") return GrowthMode::negative;
  throw domain_error("unknown growth mode '" + std::string(name) + "'");
}

std::string_view to_string(InitialRule rule) {
  return rule == InitialRule::constant ? "constant" : "uniform";
}

InitialRule initial_rule_from_string(std::string_view name) {
  if (name == "constant") return InitialRule::constant;
  if (name == "uniform") return InitialRule::uniform;
  throw domain_error("unknown initial rule '" + std::string(name) + "'");
}

namespace {

Point uniform_point(const Window& w, Rng& rng) {
  std::uniform_real_distribution<double> ux(w.x_min(), w.x_max());
  std::uniform_real_distribution<double> uy(w.y_min(), w.y_max());
  const double x = ux(rng);
  const double y = uy(rng);
  return Point{x, y};
}

std::size_t close_pairs_with(const Window& w, const std::vector<Point>& pts, const Point& p,
                             double r_int, std::size_t skip) {
  std::size_t s = 0;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j != skip && window_distance(w, p, pts[j]) < r_int) ++s;
  }
  return s;
}

void check_strauss(const Window& window, const StraussParams& params) {
  if (!(params.q > 0.0) || params.q > 1.0) throw domain_error("Strauss q must lie in (0, 1]");
  if (!(params.r_int > 0.0)) throw domain_error("Strauss interaction radius must be positive");
  if (params.beta && !(*params.beta > 0.0)) throw domain_error("Strauss beta must be positive");
  if (!(params.target_n > 0.0)) throw domain_error("Strauss target count must be positive");
  (void)window;
}

// Birth-death-shift sampler state; `beta` may change between proposals.
class StraussChain {
 public:
  StraussChain(const Window& window, double q, double r_int)
      : window_(window), q_(q), r_int_(r_int), area_(window.area()) {}

  void step(double beta, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double move = unit(rng);
    const std::size_t n = pts_.size();
    if (move < 1.0 / 3.0) {
      if (n == 0) return;
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      const std::size_t i = pick(rng);
      const Point cand = uniform_point(window_, rng);
      const double ds = static_cast<double>(close_pairs_with(window_, pts_, cand, r_int_, i)) -
                        static_cast<double>(close_pairs_with(window_, pts_, pts_[i], r_int_, i));
      if (unit(rng) < std::pow(q_, ds)) pts_[i] = cand;
    } else if (move < 2.0 / 3.0) {
      const Point cand = uniform_point(window_, rng);
      const double s = static_cast<double>(close_pairs_with(window_, pts_, cand, r_int_, n));
      const double ratio = area_ * beta * std::pow(q_, s) / static_cast<double>(n + 1);
      if (unit(rng) < ratio) pts_.push_back(cand);
    } else {
      if (n == 0) return;
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      const std::size_t i = pick(rng);
      const double s = static_cast<double>(close_pairs_with(window_, pts_, pts_[i], r_int_, i));
      const double ratio = static_cast<double>(n) / (area_ * beta * std::pow(q_, s));
      if (unit(rng) < ratio) {
        pts_[i] = pts_.back();
        pts_.pop_back();
      }
    }
  }

  std::size_t size() const { return pts_.size(); }
  std::vector<Point> take() { return std::move(pts_); }

 private:
  Window window_;
  double q_;
  double r_int_;
  double area_;
  std::vector<Point> pts_;
};

}  // namespace

PointPattern sim_poisson(const Window& window, double lambda, Rng& rng) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw domain_error("Poisson intensity must be positive");
  std::poisson_distribution<long long> count(lambda * window.area());
  const long long n = count(rng);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) pts.push_back(uniform_point(window, rng));
  return PointPattern(window, std::move(pts));
}

PointPattern sim_thomas(const Window& window, const ThomasParams& params, Rng& rng) {
  if (!(params.lambda_parent > 0.0) || !(params.mu > 0.0) || !(params.sigma > 0.0)) {
    throw domain_error("Thomas parameters must be positive");
  }
  std::poisson_distribution<long long> parents(params.lambda_parent * window.area());
  std::poisson_distribution<long long> offspring(params.mu);
  std::normal_distribution<double> shift(0.0, params.sigma);
  const long long np = parents(rng);
  std::vector<Point> pts;
  for (long long k = 0; k < np; ++k) {
    const Point parent = uniform_point(window, rng);
    const long long m = offspring(rng);
    for (long long c = 0; c < m; ++c) {
      const double dx = shift(rng);
      const double dy = shift(rng);
      Point p{parent.x + dx, parent.y + dy};
      if (window.is_torus()) {
        p = window.wrap(p);
      } else if (!window.contains(p)) {
        continue;
      }
      pts.push_back(p);
    }
  }
  return PointPattern(window, std::move(pts));
}

double calibrate_strauss_beta(const Window& window, const StraussParams& params, Rng& rng) {
  check_strauss(window, params);
  constexpr std::size_t batch = 1000;
  const std::size_t batches = std::max<std::size_t>(params.pilot_steps / batch, 2);
  StraussChain chain(window, params.q, params.r_int);
  double log_beta = std::log(params.target_n / window.area());
  double avg = 0.0;
  std::size_t averaged = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    double mean_n = 0.0;
    const double beta = std::exp(log_beta);
    for (std::size_t s = 0; s < batch; ++s) {
      chain.step(beta, rng);
      mean_n += static_cast<double>(chain.size());
    }
    mean_n /= static_cast<double>(batch);
    const double gain = 0.5 / std::pow(static_cast<double>(b + 1), 0.6);
    log_beta += gain * (params.target_n - mean_n) / params.target_n;
    if (2 * b >= batches) {
      avg += log_beta;
      ++averaged;
    }
  }
  return std::exp(avg / static_cast<double>(averaged));
}

PointPattern sim_strauss(const Window& window, const StraussParams& params, Rng& rng) {
  check_strauss(window, params);
  const double beta = params.beta ? *params.beta : calibrate_strauss_beta(window, params, rng);
  StraussChain chain(window, params.q, params.r_int);
  for (std::size_t s = 0; s < params.mcmc_steps; ++s) chain.step(beta, rng);
  return PointPattern(window, chain.take());
}

PointPattern simulate_pattern(const SimulationSpec& spec) {
  Rng rng(derive_seed(spec.seed, streams::pattern));
  switch (spec.process) {
    case ProcessKind::poisson: return sim_poisson(spec.window, spec.lambda, rng);
    case ProcessKind::thomas: return sim_thomas(spec.window, spec.thomas, rng);
    case ProcessKind::strauss: return sim_strauss(spec.window, spec.strauss, rng);
  }
  throw domain_error("unknown process");
}

void validate(const GrowthParams& p) {
  if (!(p.S_h > 0.0) || !(p.S_l > 0.0)) throw domain_error("carrying capacities must be positive");
  if (!(p.beta_h > 0.0) || !(p.beta_l > 0.0)) throw domain_error("growth rates must be positive");
  if (!(p.dt > 0.0)) throw domain_error("dt must be positive");
  if (!(p.D > 0.0)) throw domain_error("interaction distance D must be positive");
  if (p.c < 0.0) throw domain_error("interaction constant c must be nonnegative");
  if (p.steps < 1) throw domain_error("steps must be at least 1");
  if (p.init == InitialRule::constant) {
    if (!(p.init_h > 0.0) || !(p.init_l > 0.0)) throw domain_error("initial values must be positive");
  } else if (!(p.init_low > 0.0) || !(p.init_high > p.init_low)) {
    throw domain_error("uniform initial range needs 0 < init_low < init_high");
  }
}

std::vector<std::size_t> neighbour_counts(const PointPattern& pattern, double D) {
  const std::size_t n = pattern.size();
  std::vector<std::size_t> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (window_distance(pattern.window(), pattern[i], pattern[j]) < D) {
        ++out[i];
        ++out[j];
      }
    }
  }
  return out;
}

FunctionalMarkSet simulate_growth_marks(const PointPattern& pattern, const GrowthParams& params,
                                        std::uint64_t seed) {
  validate(params);
  const std::size_t n = pattern.size();
  if (n == 0) throw domain_error("growth marks need a nonempty pattern");

  std::vector<double> times(params.steps + 1);
  for (std::size_t k = 0; k <= params.steps; ++k) times[k] = static_cast<double>(k) * params.dt;
  FunctionalMarkSet marks(TimeGrid(std::move(times)), n, 2);

  const std::vector<std::size_t> nb = neighbour_counts(pattern, params.D);
  const double c = params.mode == GrowthMode::independent ? 0.0 : params.c;
  const double c_l = params.mode == GrowthMode::positive ? params.c : 0.0;

  Rng rng(derive_seed(seed, streams::marks));
  std::uniform_real_distribution<double> init(params.init_low, params.init_high);
  const double dt = params.dt;
  for (std::size_t i = 0; i < n; ++i) {
    auto fh = marks.curve(i, 0);
    auto fl = marks.curve(i, 1);
    if (params.init == InitialRule::uniform) {
      fh[0] = init(rng);
      fl[0] = init(rng);
    } else {
      fh[0] = params.init_h;
      fl[0] = params.init_l;
    }
    const double count = static_cast<double>(nb[i]);
    for (std::size_t k = 0; k < params.steps; ++k) {
      const double h = fh[k];
      const double l = fl[k];
      fh[k + 1] = h + params.beta_h * h * (1.0 - h / params.S_h) * dt + c * count * dt;
      fl[k + 1] = l + params.beta_l * (1.0 - l / params.S_l) * dt + c_l * count * dt;
      if (!(fh[k + 1] > 0.0) || !(fl[k + 1] > 0.0) || !std::isfinite(fh[k + 1]) ||
          !std::isfinite(fl[k + 1])) {
        throw domain_error("growth step left the positive range at point " + std::to_string(i) +
                           "; reduce dt below 1/beta_h and S_l/beta_l");
      }
    }
  }
  return marks;
}

}  // namespace fmark
