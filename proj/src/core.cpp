#include "fmark/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fmark {

namespace {

double wrap_delta(double delta, double side) {
  delta = std::fabs(delta);
  return std::min(delta, side - delta);
}

std::string point_str(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

}  // namespace

Window::Window(double x_min, double x_max, double y_min, double y_max, Topology topology)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), topology_(topology) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) ||
      !std::isfinite(y_max)) {
    throw domain_error("window extents must be finite");
  }
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw domain_error("window requires x_min < x_max and y_min < y_max");
  }
}

double Window::shortest_side() const { return std::min(width(), height()); }

bool Window::contains(const Point& p) const {
  return p.x >= x_min_ && p.x <= x_max_ && p.y >= y_min_ && p.y <= y_max_;
}

Point Window::wrap(const Point& p) const {
  auto wrap1 = [](double v, double lo, double side) {
    double u = std::fmod(v - lo, side);
    if (u < 0.0) u += side;
    // fmod can return `side` after the addition for tiny negative u
    if (u >= side) u = 0.0;
    return lo + u;
  };
  return {wrap1(p.x, x_min_, width()), wrap1(p.y, y_min_, height())};
}

double Window::translated_overlap(double dx, double dy) const {
  const double w = width() - std::fabs(dx);
  const double h = height() - std::fabs(dy);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double window_distance(const Window& window, const Point& a, const Point& b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  if (window.is_torus()) {
    dx = wrap_delta(dx, window.width());
    dy = wrap_delta(dy, window.height());
  }
  return std::hypot(dx, dy);
}

double pairwise_distance(const Window& window, const Point& a, const Point& b) {
  if (!window.contains(a)) throw domain_error("point " + point_str(a) + " outside window");
  if (!window.contains(b)) throw domain_error("point " + point_str(b) + " outside window");
  return window_distance(window, a, b);
}

PointPattern::PointPattern(Window window, std::vector<Point> points,
                           std::optional<std::vector<int>> labels)
    : window_(window), points_(std::move(points)), labels_(std::move(labels)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!window_.contains(points_[i])) {
      throw domain_error("point " + std::to_string(i) + " " + point_str(points_[i]) +
                         " outside window");
    }
  }
  if (labels_) {
    if (labels_->size() != points_.size()) {
      throw domain_error("labels length " + std::to_string(labels_->size()) +
                         " differs from point count " + std::to_string(points_.size()));
    }
    for (int t : *labels_) {
      if (t < 1) throw domain_error("type labels must be integers >= 1");
    }
  }
}

const std::vector<int>& PointPattern::labels() const {
  if (!labels_) throw domain_error("pattern has no type labels");
  return *labels_;
}

std::size_t PointPattern::count_of_type(int type) const {
  const auto& l = labels();
  return static_cast<std::size_t>(std::count(l.begin(), l.end(), type));
}

TimeGrid::TimeGrid(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw domain_error("time grid needs at least one sample");
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    if (!std::isfinite(samples_[k])) throw domain_error("time grid samples must be finite");
    if (k > 0 && !(samples_[k] > samples_[k - 1])) {
      throw domain_error("time grid must be strictly increasing");
    }
  }
  const std::size_t t = samples_.size();
  weights_.assign(t, 0.0);
  if (t == 1) {
    weights_[0] = 1.0;
    return;
  }
  for (std::size_t k = 0; k + 1 < t; ++k) {
    const double half = 0.5 * (samples_[k + 1] - samples_[k]);
    weights_[k] += half;
    weights_[k + 1] += half;
  }
}

TimeGrid TimeGrid::uniform(double a, double b, std::size_t count) {
  if (count == 0) throw domain_error("time grid needs at least one sample");
  std::vector<double> s(count);
  if (count == 1) {
    s[0] = a;
  } else {
    const double step = (b - a) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) s[k] = a + step * static_cast<double>(k);
    s.back() = b;
  }
  return TimeGrid(std::move(s));
}

TimeGrid TimeGrid::slice(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > samples_.size()) {
    throw domain_error("time grid slice out of range");
  }
  return TimeGrid(std::vector<double>(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                                      samples_.begin() +
                                          static_cast<std::ptrdiff_t>(first + count)));
}

double integrate_over_T(std::span<const double> samples, const TimeGrid& grid) {
  if (samples.size() != grid.size()) {
    throw domain_error("integrate_over_T: " + std::to_string(samples.size()) +
                       " samples for a grid of " + std::to_string(grid.size()));
  }
  const auto& w = grid.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) sum += w[k] * samples[k];
  return sum;
}

FunctionalMarkSet::FunctionalMarkSet(TimeGrid grid, std::size_t num_points,
                                     std::size_t num_channels, std::vector<double> values)
    : grid_(std::move(grid)),
      num_points_(num_points),
      num_channels_(num_channels),
      values_(std::move(values)) {
  if (num_channels_ == 0) throw domain_error("mark set needs at least one channel");
  if (values_.size() != num_points_ * num_channels_ * grid_.size()) {
    throw domain_error("mark values size does not match n x p x T");
  }
}

FunctionalMarkSet::FunctionalMarkSet(TimeGrid grid, std::size_t num_points,
                                     std::size_t num_channels)
    : FunctionalMarkSet(grid, num_points, num_channels,
                        std::vector<double>(num_points * num_channels * grid.size(), 0.0)) {}

std::span<const double> FunctionalMarkSet::curve(std::size_t point, std::size_t channel) const {
  return {values_.data() + index(point, channel, 0), grid_.size()};
}

std::span<double> FunctionalMarkSet::curve(std::size_t point, std::size_t channel) {
  return {values_.data() + index(point, channel, 0), grid_.size()};
}

FunctionalMarkSet FunctionalMarkSet::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != num_points_) throw domain_error("permutation length mismatch");
  const std::size_t block = num_channels_ * grid_.size();
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < num_points_; ++i) {
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(perm[i] * block), block,
                out.begin() + static_cast<std::ptrdiff_t>(i * block));
  }
  return FunctionalMarkSet(grid_, num_points_, num_channels_, std::move(out));
}

void FunctionalMarkSet::validate_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      const std::size_t t = grid_.size();
      throw domain_error("non-finite mark value at point " +
                         std::to_string(i / (num_channels_ * t)) + ", channel " +
                         std::to_string((i / t) % num_channels_) + ", time index " +
                         std::to_string(i % t));
    }
  }
}

std::vector<double> functional_mean(const FunctionalMarkSet& marks, std::size_t channel) {
  if (channel >= marks.num_channels()) {
    throw domain_error("channel " + std::to_string(channel) + " out of range");
  }
  if (marks.num_points() == 0) throw domain_error("functional mean of an empty pattern");
  std::vector<double> mean(marks.num_times(), 0.0);
  for (std::size_t i = 0; i < marks.num_points(); ++i) {
    const auto c = marks.curve(i, channel);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += c[k];
  }
  const double n = static_cast<double>(marks.num_points());
  for (double& m : mean) m /= n;
  return mean;
}

DistanceGrid::DistanceGrid(std::vector<double> r_values) : r_(std::move(r_values)) {
  if (r_.empty()) throw domain_error("distance grid is empty");
  for (std::size_t k = 0; k < r_.size(); ++k) {
    if (!(r_[k] > 0.0) || !std::isfinite(r_[k])) {
      throw domain_error("distance grid values must be positive and finite");
    }
    if (k > 0 && !(r_[k] > r_[k - 1])) {
      throw domain_error("distance grid must be strictly increasing");
    }
  }
}

DistanceGrid DistanceGrid::uniform(double r_max, std::size_t count) {
  if (count == 0 || !(r_max > 0.0)) throw domain_error("distance grid needs r_max > 0, count > 0");
  std::vector<double> r(count);
  const double step = r_max / static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) r[k] = step * static_cast<double>(k + 1);
  r.back() = r_max;
  return DistanceGrid(std::move(r));
}

DistanceGrid DistanceGrid::default_for(const Window& window) {
  return uniform(window.shortest_side() / 4.0, 100);
}

void DistanceGrid::validate_for(const Window& window) const {
  if (max() > 0.5 * window.shortest_side()) {
    throw domain_error("largest r exceeds half the shortest window side");
  }
}

}  // namespace fmark
