#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fmark/kernels.hpp"

namespace fmark {

namespace {
std::atomic<int> requested_threads{0};
}  // namespace

int env_thread_cap() {
  const char* value = std::getenv("FMARK_THREADS");
  if (value == nullptr) return 0;
  try {
    const int n = std::stoi(value);
    return n > 0 ? n : 0;
  } catch (...) {
    return 0;
  }
}

int thread_count() {
  const int cap = env_thread_cap();
  int n = requested_threads.load();
  if (n == 0) {
#ifdef _OPENMP
    n = omp_get_max_threads();
#else
    n = 1;
#endif
  }
  return cap > 0 && cap < n ? cap : n;
}

void set_thread_count(int threads) { requested_threads.store(threads > 0 ? threads : 0); }

namespace kernels {

namespace {
bool parallel() {
#ifdef _OPENMP
  return thread_count() > 1 && !omp_in_parallel();
#else
  return false;
#endif
}
}  // namespace

void fill_rows(std::size_t rows, std::size_t cols, std::span<double> out, const RowFiller& fill) {
  parallel() ? omp::fill_rows(rows, cols, out, fill) : serial::fill_rows(rows, cols, out, fill);
}

void gather_pairs(std::span<const std::uint32_t> first, std::span<const std::uint32_t> second,
                  std::span<const double> matrix, std::size_t n,
                  std::span<const std::size_t> perm, std::span<double> out) {
  parallel() ? omp::gather_pairs(first, second, matrix, n, perm, out)
             : serial::gather_pairs(first, second, matrix, n, perm, out);
}

void binned_sum(const BinnedWeights& bins, std::span<const double> values, std::span<double> out) {
  parallel() ? omp::binned_sum(bins, values, out) : serial::binned_sum(bins, values, out);
}

void binned_sum_pointwise(const BinnedWeights& bins, std::span<const double> values,
                          std::size_t width, std::span<double> out) {
  parallel() ? omp::binned_sum_pointwise(bins, values, width, out)
             : serial::binned_sum_pointwise(bins, values, width, out);
}

void for_each_index(std::size_t count, const IndexTask& task) {
  parallel() ? omp::for_each_index(count, task) : serial::for_each_index(count, task);
}

}  // namespace kernels
}  // namespace fmark
