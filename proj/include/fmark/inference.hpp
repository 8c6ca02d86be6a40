#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fmark/core.hpp"
#include "fmark/estimators.hpp"
#include "fmark/rng.hpp"

namespace fmark {

enum class NullModel { random_labeling, csr };

std::string_view to_string(NullModel null);
NullModel null_model_from_string(std::string_view name);

struct EnvelopeSettings {
  std::size_t nsim{199};
  std::size_t k_env{5};
  std::uint64_t seed{1};
};

/// Pointwise rank envelope. lower/upper are NaN where the observed value is
/// undefined or fewer than 2 k_env simulated values are defined.
struct EnvelopeBand {
  std::string kind;
  std::string label;
  std::vector<double> r;
  std::vector<double> observed;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> theoretical;
  std::size_t nsim{0};
  std::size_t k_env{0};
  NullModel null{NullModel::random_labeling};

  /// Fraction of grid points with a defined band where observed lies outside.
  double fraction_outside() const;
};

/// Throws domain_error unless nsim >= 2 k_env and k_env >= 1.
void validate(const EnvelopeSettings& settings);

/// Builds the band from the observed curve and nsim simulated value vectors.
EnvelopeBand assemble_envelope(const SummaryCurve& observed,
                               const std::vector<std::vector<double>>& simulated,
                               std::size_t k_env);

/// Uniform random permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

/// Random-labelling envelopes for several statistics of one marked pattern.
/// Simulation i applies one joint permutation of the mark tuples, drawn from
/// sub-seed derive_seed(envelope stream of seed, i), to every statistic.
std::vector<EnvelopeBand> random_label_envelopes(const EstimationContext& ctx,
                                                 const std::vector<StatisticRequest>& requests,
                                                 const EnvelopeSettings& settings);

EnvelopeBand random_label_envelope(const PointPattern& pattern, const FunctionalMarkSet& marks,
                                   const StatisticRequest& request, const EstimationConfig& cfg,
                                   const EnvelopeSettings& settings);

/// CSR envelope for g_ground or K_ground (reported as K(r) - pi r^2). Each
/// simulation is a Poisson pattern with the observed intensity in the same
/// window, analysed with the observed bandwidth, edge rule and grid.
EnvelopeBand csr_envelope(const PointPattern& pattern, Statistic statistic,
                          const EstimationConfig& cfg, const EnvelopeSettings& settings);

}  // namespace fmark
