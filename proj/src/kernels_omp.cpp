#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fmark/kernels.hpp"

namespace fmark::kernels::omp {

namespace {

// Keeps the exception of the lowest failing index so the rethrown error does
// not depend on scheduling.
class FirstError {
 public:
  void record(std::size_t index, std::exception_ptr error) {
#pragma omp critical(fmark_first_error)
    {
      if (index < index_) {
        index_ = index;
        error_ = std::move(error);
      }
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::size_t index_{std::numeric_limits<std::size_t>::max()};
  std::exception_ptr error_;
};

int workers() { return thread_count(); }

}  // namespace

void fill_rows(std::size_t rows, std::size_t cols, std::span<double> out, const RowFiller& fill) {
  FirstError error;
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(dynamic, 4) num_threads(workers())
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const auto row = static_cast<std::size_t>(r);
    try {
      fill(row, out.subspan(row * cols, cols));
    } catch (...) {
      error.record(row, std::current_exception());
    }
  }
  error.rethrow();
}

void gather_pairs(std::span<const std::uint32_t> first, std::span<const std::uint32_t> second,
                  std::span<const double> matrix, std::size_t n,
                  std::span<const std::size_t> perm, std::span<double> out) {
  const auto count = static_cast<std::ptrdiff_t>(first.size());
  if (perm.empty()) {
#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::ptrdiff_t p = 0; p < count; ++p) out[p] = matrix[first[p] * n + second[p]];
  } else {
#pragma omp parallel for schedule(static) num_threads(workers())
    for (std::ptrdiff_t p = 0; p < count; ++p) {
      out[p] = matrix[perm[first[p]] * n + perm[second[p]]];
    }
  }
}

void binned_sum(const BinnedWeights& bins, std::span<const double> values,
                std::span<double> out) {
  const auto nbins = static_cast<std::ptrdiff_t>(bins.bins());
#pragma omp parallel for schedule(dynamic, 8) num_threads(workers())
  for (std::ptrdiff_t k = 0; k < nbins; ++k) {
    double acc = 0.0;
    for (std::size_t e = bins.offsets[k]; e < bins.offsets[k + 1]; ++e) {
      acc += bins.weight[e] * values[bins.pair[e]];
    }
    out[k] = acc;
  }
}

void binned_sum_pointwise(const BinnedWeights& bins, std::span<const double> values,
                          std::size_t width, std::span<double> out) {
  const auto nbins = static_cast<std::ptrdiff_t>(bins.bins());
#pragma omp parallel for schedule(dynamic, 4) num_threads(workers())
  for (std::ptrdiff_t k = 0; k < nbins; ++k) {
    double* row = out.data() + static_cast<std::size_t>(k) * width;
    for (std::size_t t = 0; t < width; ++t) row[t] = 0.0;
    for (std::size_t e = bins.offsets[k]; e < bins.offsets[k + 1]; ++e) {
      const double w = bins.weight[e];
      const double* v = values.data() + static_cast<std::size_t>(bins.pair[e]) * width;
      for (std::size_t t = 0; t < width; ++t) row[t] += w * v[t];
    }
  }
}

void for_each_index(std::size_t count, const IndexTask& task) {
  FirstError error;
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto index = static_cast<std::size_t>(i);
    try {
      task(index);
    } catch (...) {
      error.record(index, std::current_exception());
    }
  }
  error.rethrow();
}

}  // namespace fmark::kernels::omp
