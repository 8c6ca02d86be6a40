#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmark {

/// Base for every error caused by bad input (exit code 2 at the CLI).
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation.
class domain_error : public validation_error {
 public:
  using validation_error::validation_error;
};

/// Malformed file structure (headers, missing rows).
class schema_error : public validation_error {
 public:
  using validation_error::validation_error;
};

/// Unparseable cell or value.
class parse_error : public validation_error {
 public:
  using validation_error::validation_error;
};

struct Point {
  double x{0.0};
  double y{0.0};
};

enum class Topology { plane, torus };

/// Axis-aligned rectangular observation window, optionally periodic.
class Window {
 public:
  Window(double x_min, double x_max, double y_min, double y_max,
         Topology topology = Topology::plane);

  static Window unit_square(Topology topology = Topology::plane) {
    return Window(0.0, 1.0, 0.0, 1.0, topology);
  }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  double width() const { return x_max_ - x_min_; }
  double height() const { return y_max_ - y_min_; }
  double area() const { return width() * height(); }
  double shortest_side() const;
  Topology topology() const { return topology_; }
  bool is_torus() const { return topology_ == Topology::torus; }

  bool contains(const Point& p) const;

  /// Maps a point into the window by periodic wrapping (torus coordinates).
  Point wrap(const Point& p) const;

  /// Area of the window intersected with its translate by (dx, dy).
  double translated_overlap(double dx, double dy) const;

 private:
  double x_min_;
  double x_max_;
  double y_min_;
  double y_max_;
  Topology topology_;
};

/// Distance under the window metric; throws domain_error if either point is outside.
double pairwise_distance(const Window& window, const Point& a, const Point& b);

/// Same metric without the containment check (callers guarantee validity).
double window_distance(const Window& window, const Point& a, const Point& b);

/// Point locations in a window with optional multitype labels (1..m).
class PointPattern {
 public:
  explicit PointPattern(Window window, std::vector<Point> points = {},
                        std::optional<std::vector<int>> labels = std::nullopt);

  const Window& window() const { return window_; }
  const std::vector<Point>& points() const { return points_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const;
  std::size_t count_of_type(int type) const;

  /// lambda-hat = n / area(W).
  double intensity() const { return static_cast<double>(size()) / window_.area(); }

 private:
  Window window_;
  std::vector<Point> points_;
  std::optional<std::vector<int>> labels_;
};

/// Shared sampling grid of the mark curves.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> samples);

  /// `count` equally spaced samples on [a, b]; count == 1 yields {a}.
  static TimeGrid uniform(double a, double b, std::size_t count);

  std::size_t size() const { return samples_.size(); }
  const std::vector<double>& samples() const { return samples_; }
  double operator[](std::size_t k) const { return samples_[k]; }

  /// Trapezoid weights; a single-sample grid has weight 1.
  const std::vector<double>& weights() const { return weights_; }

  /// Sub-grid of samples [first, first + count).
  TimeGrid slice(std::size_t first, std::size_t count) const;

 private:
  std::vector<double> samples_;
  std::vector<double> weights_;
};

/// Trapezoidal integral of `samples` over the grid. T == 1 returns the sample.
double integrate_over_T(std::span<const double> samples, const TimeGrid& grid);

/// n x p x T array of curve samples on one shared grid.
class FunctionalMarkSet {
 public:
  FunctionalMarkSet(TimeGrid grid, std::size_t num_points, std::size_t num_channels,
                    std::vector<double> values);
  FunctionalMarkSet(TimeGrid grid, std::size_t num_points, std::size_t num_channels);

  const TimeGrid& grid() const { return grid_; }
  std::size_t num_points() const { return num_points_; }
  std::size_t num_channels() const { return num_channels_; }
  std::size_t num_times() const { return grid_.size(); }

  std::span<const double> curve(std::size_t point, std::size_t channel) const;
  std::span<double> curve(std::size_t point, std::size_t channel);
  double at(std::size_t point, std::size_t channel, std::size_t time) const {
    return values_[index(point, channel, time)];
  }
  const std::vector<double>& values() const { return values_; }

  /// Copy with point i carrying the marks of point perm[i] (all channels jointly).
  FunctionalMarkSet permuted(std::span<const std::size_t> perm) const;

  /// Throws domain_error if any value is non-finite.
  void validate_finite() const;

 private:
  std::size_t index(std::size_t point, std::size_t channel, std::size_t time) const {
    return (point * num_channels_ + channel) * grid_.size() + time;
  }

  TimeGrid grid_;
  std::size_t num_points_;
  std::size_t num_channels_;
  std::vector<double> values_;
};

/// Pointwise mean over points of channel h (0-based).
std::vector<double> functional_mean(const FunctionalMarkSet& marks, std::size_t channel);

/// Strictly increasing positive distances at which curves are evaluated.
class DistanceGrid {
 public:
  explicit DistanceGrid(std::vector<double> r_values);

  /// count equally spaced values r_max/count, 2 r_max/count, ..., r_max.
  static DistanceGrid uniform(double r_max, std::size_t count);

  /// 100 values up to a quarter of the shortest side.
  static DistanceGrid default_for(const Window& window);

  std::size_t size() const { return r_.size(); }
  const std::vector<double>& values() const { return r_; }
  double operator[](std::size_t k) const { return r_[k]; }
  double max() const { return r_.back(); }

  /// Throws domain_error when max r exceeds half the shortest side.
  void validate_for(const Window& window) const;

 private:
  std::vector<double> r_;
};

}  // namespace fmark
