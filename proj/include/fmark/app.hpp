#pragma once

// Command pipeline behind the fmark executable: turns a Config into inputs,
// estimator settings and output files.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fmark/config.hpp"
#include "fmark/core.hpp"
#include "fmark/estimators.hpp"
#include "fmark/inference.hpp"
#include "fmark/simulate.hpp"

namespace fmark::app {

enum class Command { simulate, estimate, envelope, report };

std::string_view to_string(Command command);
Command command_from_string(std::string_view name);

Window window_from_config(const Config& cfg, bool simulated);
SimulationSpec simulation_spec(const Config& cfg);
GrowthParams growth_params(const Config& cfg);
EstimationConfig estimation_config(const Config& cfg);
EnvelopeSettings envelope_settings(const Config& cfg);

struct StatisticPlan {
  std::vector<StatisticRequest> requests;
  bool nn_indices{false};
  bool knn_indices{false};
  bool empty() const { return requests.empty() && !nn_indices && !knn_indices; }
};

StatisticPlan statistic_plan(const Config& cfg);

struct Input {
  std::vector<std::string> ids;
  PointPattern pattern;
  std::optional<FunctionalMarkSet> marks;
};

/// Loads the pattern/marks files or simulates pattern and growth marks from
/// the master seed; exactly one of `pattern` and `process` must be set.
Input acquire_input(const Config& cfg);

/// Sorted `key = value` lines for every key except `out`, preceded by the
/// library version and the command as comments. Feeding it back through
/// --config reproduces the run.
std::string manifest_text(const Config& cfg, Command command);

/// Runs one command and writes its files under cfg "out".
void run(Command command, const Config& cfg);

}  // namespace fmark::app
