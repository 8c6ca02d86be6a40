#include <exception>

#include "fmark/kernels.hpp"

namespace fmark::kernels::serial {

void fill_rows(std::size_t rows, std::size_t cols, std::span<double> out, const RowFiller& fill) {
  for (std::size_t r = 0; r < rows; ++r) fill(r, out.subspan(r * cols, cols));
}

void gather_pairs(std::span<const std::uint32_t> first, std::span<const std::uint32_t> second,
                  std::span<const double> matrix, std::size_t n,
                  std::span<const std::size_t> perm, std::span<double> out) {
  const std::size_t count = first.size();
  if (perm.empty()) {
    for (std::size_t p = 0; p < count; ++p) out[p] = matrix[first[p] * n + second[p]];
  } else {
    for (std::size_t p = 0; p < count; ++p) {
      out[p] = matrix[perm[first[p]] * n + perm[second[p]]];
    }
  }
}

void binned_sum(const BinnedWeights& bins, std::span<const double> values,
                std::span<double> out) {
  for (std::size_t k = 0; k < bins.bins(); ++k) {
    double acc = 0.0;
    for (std::size_t e = bins.offsets[k]; e < bins.offsets[k + 1]; ++e) {
      acc += bins.weight[e] * values[bins.pair[e]];
    }
    out[k] = acc;
  }
}

void binned_sum_pointwise(const BinnedWeights& bins, std::span<const double> values,
                          std::size_t width, std::span<double> out) {
  for (std::size_t k = 0; k < bins.bins(); ++k) {
    double* row = out.data() + k * width;
    for (std::size_t t = 0; t < width; ++t) row[t] = 0.0;
    for (std::size_t e = bins.offsets[k]; e < bins.offsets[k + 1]; ++e) {
      const double w = bins.weight[e];
      const double* v = values.data() + static_cast<std::size_t>(bins.pair[e]) * width;
      for (std::size_t t = 0; t < width; ++t) row[t] += w * v[t];
    }
  }
}

void for_each_index(std::size_t count, const IndexTask& task) {
  for (std::size_t i = 0; i < count; ++i) task(i);
}

}  // namespace fmark::kernels::serial
