#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "fmark/core.hpp"
#include "fmark/rng.hpp"

namespace fmark {

enum class ProcessKind { poisson, thomas, strauss };

std::string_view to_string(ProcessKind kind);
ProcessKind process_kind_from_string(std::string_view name);

struct ThomasParams {
  double lambda_parent{40.0};
  double mu{5.0};
  double sigma{0.04};
};

struct StraussParams {
  /// Activity; calibrated to target_n by a pilot run when empty.
  std::optional<double> beta;
  double target_n{200.0};
  double q{0.05};
  double r_int{0.025};
  std::size_t mcmc_steps{100000};
  std::size_t pilot_steps{200000};
};

struct SimulationSpec {
  ProcessKind process{ProcessKind::poisson};
  Window window{Window::unit_square(Topology::torus)};
  double lambda{200.0};
  ThomasParams thomas;
  StraussParams strauss;
  std::uint64_t seed{1};
};

/// Homogeneous Poisson process: Poisson(lambda |W|) uniform points.
PointPattern sim_poisson(const Window& window, double lambda, Rng& rng);

/// Thomas cluster process. Offspring are wrapped on a torus and discarded
/// outside a plane window; parents are not retained.
PointPattern sim_thomas(const Window& window, const ThomasParams& params, Rng& rng);

/// Robbins-Monro calibration of the Strauss activity so that the stationary
/// mean count is close to target_n.
double calibrate_strauss_beta(const Window& window, const StraussParams& params, Rng& rng);

/// Strauss process by birth-death-shift Metropolis-Hastings started from the
/// empty pattern; returns the state after mcmc_steps proposals. Density is
/// proportional to beta^n q^s with s the number of pairs closer than r_int.
PointPattern sim_strauss(const Window& window, const StraussParams& params, Rng& rng);

/// Dispatches on spec.process with an Rng seeded from the pattern stream of
/// spec.seed.
PointPattern simulate_pattern(const SimulationSpec& spec);

enum class GrowthMode { independent, positive, negative };
enum class InitialRule { constant, uniform };

std::string_view to_string(GrowthMode mode);
GrowthMode growth_mode_from_string(std::string_view name);
std::string_view to_string(InitialRule rule);
InitialRule initial_rule_from_string(std::string_view name);

struct GrowthParams {
  double S_h{5.0};
  double S_l{5.0};
  double beta_h{0.05};
  double beta_l{0.2};
  double D{0.05};
  double c{0.0};
  GrowthMode mode{GrowthMode::independent};
  double dt{0.1};
  std::size_t steps{100};
  InitialRule init{InitialRule::constant};
  double init_h{0.1};
  double init_l{0.1};
  /// Range of the uniform initial rule.
  double init_low{0.05};
  double init_high{0.15};
};

void validate(const GrowthParams& params);

/// Number of other points strictly closer than D to each point.
std::vector<std::size_t> neighbour_counts(const PointPattern& pattern, double D);

/// Two growth curves per point (channel 0 = h, logistic; channel 1 = l,
/// immigration-death) by explicit Euler on t_k = k dt, k = 0..steps. The
/// interaction adds c dt per neighbour within D: to both channels in positive
/// mode, to h only in negative mode, to neither in independent mode. `seed`
/// is used only by the uniform initial rule.
FunctionalMarkSet simulate_growth_marks(const PointPattern& pattern, const GrowthParams& params,
                                        std::uint64_t seed = 0);

}  // namespace fmark
