#pragma once

// Data-parallel inner loops. Every loop exists twice: `serial` is the reference
// implementation, `omp` the OpenMP version. Both iterate over independent
// outputs in the same order, so their results are bit-identical for any thread
// count. The unqualified functions dispatch on thread_count().

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fmark {

/// Effective worker count: set_thread_count() if nonzero, else the OpenMP
/// default, in both cases capped by FMARK_THREADS when that is set.
int thread_count();

/// 0 restores the OpenMP default.
void set_thread_count(int threads);

/// Cap from FMARK_THREADS, or 0 when unset or invalid.
int env_thread_cap();

namespace kernels {

/// Sparse (bin -> pair, weight) table in compressed-row form. Entries of bin k
/// are [offsets[k], offsets[k + 1]) and are sorted by pair index.
struct BinnedWeights {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> pair;
  std::vector<double> weight;

  std::size_t bins() const { return offsets.size() - 1; }
};

using RowFiller = std::function<void(std::size_t row, std::span<double> out)>;
using IndexTask = std::function<void(std::size_t index)>;

namespace serial {
/// out (rows x cols, row-major): row r is filled by fill(r, row span).
void fill_rows(std::size_t rows, std::size_t cols, std::span<double> out, const RowFiller& fill);
/// out[p] = matrix[perm[i_p] * n + perm[j_p]]; identity when perm is empty.
void gather_pairs(std::span<const std::uint32_t> first, std::span<const std::uint32_t> second,
                  std::span<const double> matrix, std::size_t n,
                  std::span<const std::size_t> perm, std::span<double> out);
/// out[k] = sum over entries e of bin k of weight[e] * values[pair[e]].
void binned_sum(const BinnedWeights& bins, std::span<const double> values,
                std::span<double> out);
/// Same with a T-vector per pair: values is pairs x T, out is bins x T.
void binned_sum_pointwise(const BinnedWeights& bins, std::span<const double> values,
                          std::size_t width, std::span<double> out);
/// Runs task(i) for i in [0, count); exceptions are rethrown after the loop.
void for_each_index(std::size_t count, const IndexTask& task);
}  // namespace serial

namespace omp {
void fill_rows(std::size_t rows, std::size_t cols, std::span<double> out, const RowFiller& fill);
void gather_pairs(std::span<const std::uint32_t> first, std::span<const std::uint32_t> second,
                  std::span<const double> matrix, std::size_t n,
                  std::span<const std::size_t> perm, std::span<double> out);
void binned_sum(const BinnedWeights& bins, std::span<const double> values,
                std::span<double> out);
void binned_sum_pointwise(const BinnedWeights& bins, std::span<const double> values,
                          std::size_t width, std::span<double> out);
/// Exceptions from tasks are captured; the one with the lowest index is rethrown.
void for_each_index(std::size_t count, const IndexTask& task);
}  // namespace omp

void fill_rows(std::size_t rows, std::size_t cols, std::span<double> out, const RowFiller& fill);
void gather_pairs(std::span<const std::uint32_t> first, std::span<const std::uint32_t> second,
                  std::span<const double> matrix, std::size_t n,
                  std::span<const std::size_t> perm, std::span<double> out);
void binned_sum(const BinnedWeights& bins, std::span<const double> values, std::span<double> out);
void binned_sum_pointwise(const BinnedWeights& bins, std::span<const double> values,
                          std::size_t width, std::span<double> out);
void for_each_index(std::size_t count, const IndexTask& task);

}  // namespace kernels
}  // namespace fmark
