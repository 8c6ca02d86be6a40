#include "fmark/smoothing.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fmark/core.hpp"

namespace fmark {

std::string_view to_string(KernelShape shape) {
  switch (shape) {
    case KernelShape::epanechnikov: return "epanechnikov";
    case KernelShape::box: return "box";
    case KernelShape::gaussian_truncated: return "gaussian_truncated";
  }
  return "?";
}

KernelShape kernel_shape_from_string(std::string_view name) {
  if (name == "epanechnikov") return KernelShape::epanechnikov;
  if (name == "box") return KernelShape::box;
  if (name == "gaussian_truncated" || name == "gaussian") return KernelShape::gaussian_truncated;
  throw domain_error("unknown kernel '" + std::string(name) + "'");
}

double kernel_value(KernelShape shape, double u, double bandwidth) {
  const double x = std::fabs(u) / bandwidth;
  if (x > 1.0) return 0.0;
  switch (shape) {
    case KernelShape::epanechnikov: return 0.75 * (1.0 - x * x) / bandwidth;
    case KernelShape::box: return 0.5 / bandwidth;
    case KernelShape::gaussian_truncated: {
      // mass of N(0, 1) on [-3, 3]
      static const double mass = std::erf(3.0 / std::numbers::sqrt2);
      const double z = 3.0 * x;
      const double sigma = bandwidth / 3.0;
      return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi) * mass);
    }
  }
  return 0.0;
}

}  // namespace fmark
