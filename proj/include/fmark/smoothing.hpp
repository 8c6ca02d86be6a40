#pragma once

#include <string_view>

namespace fmark {

/// Smoothing kernels with support [-b, b] and unit mass.
enum class KernelShape { epanechnikov, box, gaussian_truncated };

std::string_view to_string(KernelShape shape);
KernelShape kernel_shape_from_string(std::string_view name);

/// kappa_b(u). The truncated Gaussian uses sigma = b / 3, renormalised to unit
/// mass on [-b, b].
double kernel_value(KernelShape shape, double u, double bandwidth);

}  // namespace fmark
