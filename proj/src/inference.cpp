#include "fmark/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fmark/kernels.hpp"
#include "fmark/simulate.hpp"

namespace fmark {

std::string_view to_string(NullModel null) {
  return null == NullModel::random_labeling ? "random_labeling" : "csr";
}

NullModel null_model_from_string(std::string_view name) {
  if (name == "random_labeling" || name == "random_labelling") return NullModel::random_labeling;
  if (name == "csr") return NullModel::csr;
  throw domain_error("unknown null model '" + std::string(name) + "'");
}

double EnvelopeBand::fraction_outside() const {
  std::size_t defined = 0, outside = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (std::isnan(lower[k]) || std::isnan(upper[k]) || std::isnan(observed[k])) continue;
    ++defined;
    if (observed[k] < lower[k] || observed[k] > upper[k]) ++outside;
  }
  return defined == 0 ? 0.0 : static_cast<double>(outside) / static_cast<double>(defined);
}

void validate(const EnvelopeSettings& settings) {
  if (settings.k_env < 1) throw domain_error("envelope rank must be at least 1");
  if (settings.nsim < 2 * settings.k_env) {
    throw domain_error("nsim = " + std::to_string(settings.nsim) + " is below 2 * k_env = " +
                       std::to_string(2 * settings.k_env));
  }
}

EnvelopeBand assemble_envelope(const SummaryCurve& observed,
                               const std::vector<std::vector<double>>& simulated,
                               std::size_t k_env) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t bins = observed.r.size();
  EnvelopeBand band;
  band.kind = observed.kind;
  band.r = observed.r;
  band.observed = observed.values;
  band.theoretical = observed.theoretical;
  if (band.theoretical.empty()) band.theoretical.assign(bins, nan);
  band.nsim = simulated.size();
  band.k_env = k_env;
  band.lower.assign(bins, nan);
  band.upper.assign(bins, nan);
  std::vector<double> column;
  for (std::size_t k = 0; k < bins; ++k) {
    if (std::isnan(observed.values[k])) continue;
    column.clear();
    for (const auto& sim : simulated) {
      if (!std::isnan(sim[k])) column.push_back(sim[k]);
    }
    if (column.size() < 2 * k_env) continue;
    std::sort(column.begin(), column.end());
    band.lower[k] = column[k_env - 1];
    band.upper[k] = column[column.size() - k_env];
  }
  return band;
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  // Fisher-Yates, written out so the sequence does not depend on std::shuffle
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  return perm;
}

std::vector<EnvelopeBand> random_label_envelopes(const EstimationContext& ctx,
                                                 const std::vector<StatisticRequest>& requests,
                                                 const EnvelopeSettings& settings) {
  validate(settings);
  if (ctx.marks() == nullptr) throw domain_error("random labelling needs function-valued marks");
  const std::size_t n = ctx.pattern().size();

  // the observed pass also fills the l-matrix cache before the fan-out
  std::vector<SummaryCurve> observed;
  observed.reserve(requests.size());
  for (const auto& req : requests) observed.push_back(ctx.evaluate(req));

  std::vector<std::vector<std::vector<double>>> sims(
      requests.size(), std::vector<std::vector<double>>(settings.nsim));
  const std::uint64_t base = derive_seed(settings.seed, streams::envelope);
  kernels::for_each_index(settings.nsim, [&](std::size_t i) {
    Rng rng(derive_seed(base, i));
    const std::vector<std::size_t> perm = random_permutation(n, rng);
    for (std::size_t q = 0; q < requests.size(); ++q) {
      sims[q][i] = ctx.evaluate(requests[q], perm).values;
    }
  });

  std::vector<EnvelopeBand> out;
  for (std::size_t q = 0; q < requests.size(); ++q) {
    EnvelopeBand band = assemble_envelope(observed[q], sims[q], settings.k_env);
    band.label = request_label(requests[q]);
    band.null = NullModel::random_labeling;
    out.push_back(std::move(band));
  }
  return out;
}

EnvelopeBand random_label_envelope(const PointPattern& pattern, const FunctionalMarkSet& marks,
                                   const StatisticRequest& request, const EstimationConfig& cfg,
                                   const EnvelopeSettings& settings) {
  const EstimationContext ctx(pattern, &marks, cfg);
  return random_label_envelopes(ctx, {request}, settings).front();
}

EnvelopeBand csr_envelope(const PointPattern& pattern, Statistic statistic,
                          const EstimationConfig& cfg, const EnvelopeSettings& settings) {
  validate(settings);
  if (statistic != Statistic::g_ground && statistic != Statistic::K_ground) {
    throw domain_error("CSR envelopes support g_ground and K_ground");
  }
  const EstimationContext ctx(pattern, nullptr, cfg);
  const ResolvedConfig& resolved = ctx.config();
  EstimationConfig fixed;
  fixed.kernel = resolved.kernel;
  fixed.bandwidth = resolved.bandwidth;
  fixed.edge = resolved.edge;
  fixed.grid = resolved.grid;

  StatisticRequest req;
  req.statistic = statistic;
  SummaryCurve observed = ctx.evaluate(req);
  const std::size_t bins = observed.r.size();
  const bool centred = statistic == Statistic::K_ground;
  auto centre = [&](std::vector<double>& v) {
    if (!centred) return;
    for (std::size_t k = 0; k < bins; ++k) {
      v[k] -= std::numbers::pi * observed.r[k] * observed.r[k];
    }
  };

  const double lambda = pattern.intensity();
  std::vector<std::vector<double>> sims(settings.nsim);
  const std::uint64_t base = derive_seed(settings.seed, streams::envelope);
  kernels::for_each_index(settings.nsim, [&](std::size_t i) {
    Rng rng(derive_seed(base, i));
    const PointPattern sim = sim_poisson(pattern.window(), lambda, rng);
    if (sim.size() < 2) {
      sims[i].assign(bins, std::numeric_limits<double>::quiet_NaN());
      return;
    }
    sims[i] = EstimationContext(sim, nullptr, fixed).evaluate(req).values;
    centre(sims[i]);
  });

  centre(observed.values);
  if (centred) {
    observed.kind = "K_ground_centred";
    observed.theoretical.assign(bins, 0.0);
  }
  EnvelopeBand band = assemble_envelope(observed, sims, settings.k_env);
  band.label = observed.kind;
  band.null = NullModel::csr;
  return band;
}

}  // namespace fmark
