#include "fmark/app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "fmark/io.hpp"
#include "fmark/smoothing.hpp"
#include "fmark/testfn.hpp"

#ifndef FMARK_VERSION
#define FMARK_VERSION "unknown"
#endif

namespace fmark::app {
namespace {

std::size_t channel(const Config& cfg, std::string_view key) {
  const std::size_t v = cfg.get_size(key);
  if (v < 1) throw domain_error("key '" + std::string(key) + "' is a 1-based channel, got 0");
  return v - 1;
}

bool torus_for(const Config& cfg, bool simulated) {
  return cfg.is_set("torus") ? cfg.get_bool("torus") : simulated;
}

bool simulated_input(const Config& cfg) { return cfg.is_set("process"); }

int parse_type(std::string_view text) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || v < 1) {
    throw parse_error("key 'types': '" + std::string(text) + "' is not a type label >= 1");
  }
  return v;
}

void write_manifest(const Config& cfg, Command command) {
  const std::filesystem::path out = cfg.get_string("out");
  io::write_text(out / "manifest.txt", manifest_text(cfg, command));
}

std::vector<EnvelopeBand> envelopes(const Config& cfg, const Input& input,
                                    const StatisticPlan& plan) {
  if (plan.nn_indices || plan.knn_indices) {
    throw validation_error("nn_indices and knn_indices have no envelopes");
  }
  const EstimationConfig est = estimation_config(cfg);
  const EnvelopeSettings settings = envelope_settings(cfg);
  const NullModel null = null_model_from_string(cfg.get_string("null"));
  if (null == NullModel::csr) {
    std::vector<EnvelopeBand> bands;
    for (const auto& req : plan.requests) {
      bands.push_back(csr_envelope(input.pattern, req.statistic, est, settings));
    }
    return bands;
  }
  if (!input.marks) throw validation_error("random labelling needs marks");
  const EstimationContext ctx(input.pattern, &*input.marks, est);
  return random_label_envelopes(ctx, plan.requests, settings);
}

void write_summary(const std::filesystem::path& path, const std::vector<EnvelopeBand>& bands) {
  std::ostringstream ss;
  ss << "statistic,null,nsim,k_env,defined,fraction_outside,first_r_below,first_r_above\n";
  for (const auto& b : bands) {
    std::size_t defined = 0;
    double below = std::nan(""), above = std::nan("");
    for (std::size_t k = 0; k < b.r.size(); ++k) {
      if (std::isnan(b.lower[k]) || std::isnan(b.upper[k]) || std::isnan(b.observed[k])) continue;
      ++defined;
      if (b.observed[k] < b.lower[k] && std::isnan(below)) below = b.r[k];
      if (b.observed[k] > b.upper[k] && std::isnan(above)) above = b.r[k];
    }
    ss << b.label << ',' << to_string(b.null) << ',' << b.nsim << ',' << b.k_env << ',' << defined
       << ',' << io::format_number(b.fraction_outside()) << ',' << io::format_number(below) << ','
       << io::format_number(above) << '\n';
  }
  io::write_text(path, ss.str());
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::simulate: return "simulate";
    case Command::estimate: return "estimate";
    case Command::envelope: return "envelope";
    case Command::report: return "report";
  }
  return "?";
}

Command command_from_string(std::string_view name) {
  if (name == "simulate") return Command::simulate;
  if (name == "estimate") return Command::estimate;
  if (name == "envelope") return Command::envelope;
  if (name == "report") return Command::report;
  throw validation_error("unknown command '" + std::string(name) + "'");
}

Window window_from_config(const Config& cfg, bool simulated) {
  const std::vector<double> w = cfg.get_double_list("window");
  if (w.size() != 4) throw parse_error("key 'window' needs x_min,x_max,y_min,y_max");
  return Window(w[0], w[1], w[2], w[3], torus_for(cfg, simulated) ? Topology::torus : Topology::plane);
}

SimulationSpec simulation_spec(const Config& cfg) {
  SimulationSpec spec;
  spec.process = process_kind_from_string(cfg.get_string("process"));
  spec.window = window_from_config(cfg, true);
  spec.lambda = cfg.get_double("lambda");
  spec.thomas.lambda_parent = cfg.get_double("lambda_parent");
  spec.thomas.mu = cfg.get_double("mu");
  spec.thomas.sigma = cfg.get_double("sigma");
  spec.strauss.beta = cfg.get_optional_double("beta");
  spec.strauss.target_n = cfg.get_double("target_n");
  spec.strauss.q = cfg.get_double("q");
  spec.strauss.r_int = cfg.get_double("r_int");
  spec.strauss.mcmc_steps = cfg.get_size("mcmc_steps");
  spec.strauss.pilot_steps = cfg.get_size("pilot_steps");
  spec.seed = cfg.get_u64("seed");
  return spec;
}

GrowthParams growth_params(const Config& cfg) {
  GrowthParams p;
  p.mode = growth_mode_from_string(cfg.get_string("mode"));
  p.c = cfg.get_double("c");
  p.D = cfg.get_double("D");
  p.S_h = cfg.get_double("S_h");
  p.S_l = cfg.get_double("S_l");
  p.beta_h = cfg.get_double("beta_h");
  p.beta_l = cfg.get_double("beta_l");
  p.dt = cfg.get_double("dt");
  p.steps = cfg.get_size("steps");
  p.init = initial_rule_from_string(cfg.get_string("init"));
  p.init_h = cfg.get_double("init_h");
  p.init_l = cfg.get_double("init_l");
  p.init_low = cfg.get_double("init_low");
  p.init_high = cfg.get_double("init_high");
  validate(p);
  return p;
}

EstimationConfig estimation_config(const Config& cfg) {
  EstimationConfig e;
  e.kernel = kernel_shape_from_string(cfg.get_string("kernel"));
  e.bandwidth = cfg.get_optional_double("bandwidth");
  if (cfg.is_set("edge")) e.edge = edge_rule_from_string(cfg.get_string("edge"));
  if (const auto r_max = cfg.get_optional_double("r_max")) {
    e.grid = DistanceGrid::uniform(*r_max, cfg.get_size("n_r"));
  } else if (cfg.get_size("n_r") != 100) {
    const Window w = window_from_config(cfg, simulated_input(cfg));
    e.grid = DistanceGrid::uniform(w.shortest_side() / 4.0, cfg.get_size("n_r"));
  }
  e.time_lag = cfg.get_size("lag");
  const std::string chat = cfg.get_string("chat");
  if (chat == "all_pairs") {
    e.chat = CHatDenominator::all_pairs;
  } else if (chat == "distinct_pairs") {
    e.chat = CHatDenominator::distinct_pairs;
  } else {
    throw parse_error("key 'chat': expected all_pairs or distinct_pairs, got '" + chat + "'");
  }
  const std::string mean_norm = cfg.get_string("mean_norm");
  if (mean_norm == "integrated") {
    e.mean_norm = MeanNormalization::integrated;
  } else if (mean_norm == "pointwise") {
    e.mean_norm = MeanNormalization::pointwise;
  } else {
    throw parse_error("key 'mean_norm': expected integrated or pointwise, got '" + mean_norm + "'");
  }
  return e;
}

EnvelopeSettings envelope_settings(const Config& cfg) {
  EnvelopeSettings s;
  s.nsim = cfg.get_size("nsim");
  s.k_env = cfg.get_size("k_env");
  s.seed = cfg.get_u64("seed");
  validate(s);
  return s;
}

StatisticPlan statistic_plan(const Config& cfg) {
  StatisticPlan plan;
  StatisticRequest proto;
  proto.h = channel(cfg, "h");
  proto.l = channel(cfg, "l");
  proto.test_function = test_function_from_string(cfg.get_string("test_function"));
  proto.unit_weight = cfg.get_bool("unit_weight");
  proto.normalization = kappa_normalization_from_string(cfg.get_string("normalization"));
  proto.u_base = statistic_from_string(cfg.get_string("base"));
  if (cfg.is_set("multi_base")) {
    MultiTestFunctionSpec m;
    m.base = test_function_from_string(cfg.get_string("multi_base"));
    const std::string combine = cfg.get_string("multi_combine");
    if (combine == "mean_of_others") {
      m.combine = MultiCombine::mean_of_others;
    } else if (combine == "pairwise_sum") {
      m.combine = MultiCombine::pairwise_sum;
    } else {
      throw parse_error("key 'multi_combine': unknown value '" + combine + "'");
    }
    m.left = channel(cfg, "multi_left");
    for (const auto& item : cfg.get_list("multi_right")) {
      std::size_t ch = 0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), ch);
      if (res.ec != std::errc() || res.ptr != item.data() + item.size() || ch < 1) {
        throw parse_error("key 'multi_right': '" + item + "' is not a 1-based channel");
      }
      m.right.push_back(ch - 1);
    }
    proto.multi = m;
  }
  if (cfg.is_set("types")) {
    const auto items = cfg.get_list("types");
    if (items.size() != 2) throw parse_error("key 'types' needs two entries, e.g. 1,2 or 1,dot");
    TypeSelection sel;
    sel.first = parse_type(items[0]);
    if (items[1] != "dot") sel.second = parse_type(items[1]);
    proto.types = sel;
  }
  if (const auto u = cfg.get_optional_size("local_point")) {
    if (*u < 1) throw domain_error("key 'local_point' is 1-based, got 0");
    proto.local_point = *u - 1;
  }
  for (const auto& name : cfg.get_list("statistics")) {
    if (name == "nn_indices") {
      plan.nn_indices = true;
    } else if (name == "knn_indices") {
      plan.knn_indices = true;
    } else {
      StatisticRequest req = proto;
      req.statistic = statistic_from_string(name);
      plan.requests.push_back(req);
    }
  }
  return plan;
}

Input acquire_input(const Config& cfg) {
  const bool from_file = cfg.is_set("pattern");
  const bool from_sim = cfg.is_set("process");
  if (from_file == from_sim) {
    throw validation_error("set exactly one of 'pattern' and 'process'");
  }
  if (from_sim) {
    if (cfg.is_set("marks")) throw validation_error("'marks' cannot be combined with 'process'");
    const SimulationSpec spec = simulation_spec(cfg);
    PointPattern pattern = simulate_pattern(spec);
    FunctionalMarkSet marks = simulate_growth_marks(pattern, growth_params(cfg), spec.seed);
    std::vector<std::string> ids = io::default_ids(pattern.size());
    return Input{std::move(ids), std::move(pattern), std::move(marks)};
  }
  std::vector<std::filesystem::path> marks;
  for (const auto& m : cfg.get_list("marks")) marks.emplace_back(m);
  io::LoadedData data =
      io::load_pattern(cfg.get_string("pattern"), marks, window_from_config(cfg, false));
  return Input{std::move(data.ids), std::move(data.pattern), std::move(data.marks)};
}

std::string manifest_text(const Config& cfg, Command command) {
  std::vector<std::pair<std::string, std::string>> lines;
  for (const auto& key : config_keys()) {
    if (key.name == "out") continue;
    std::string value = cfg.raw(key.name);
    if (key.name == "torus") value = torus_for(cfg, simulated_input(cfg)) ? "true" : "false";
    lines.emplace_back(key.name, value);
  }
  std::sort(lines.begin(), lines.end());
  std::ostringstream ss;
  ss << "# fmark " << FMARK_VERSION << "\n# command: " << to_string(command) << '\n';
  for (const auto& [k, v] : lines) ss << k << " = " << v << '\n';
  return ss.str();
}

void run(Command command, const Config& cfg) {
  const std::filesystem::path out = cfg.get_string("out");
  if (command == Command::simulate) {
    if (!cfg.is_set("process")) throw validation_error("simulate needs 'process'");
    if (cfg.is_set("pattern")) throw validation_error("simulate does not read 'pattern'");
    const Input input = acquire_input(cfg);
    io::write_pattern_csv(out / "pattern.csv", input.pattern, input.ids);
    for (std::size_t ch = 0; ch < input.marks->num_channels(); ++ch) {
      io::write_marks_csv(out / ("marks_" + std::to_string(ch + 1) + ".csv"), *input.marks, ch,
                          input.ids);
    }
    write_manifest(cfg, command);
    return;
  }

  // parse everything before touching the data so bad keys fail fast
  const StatisticPlan plan = statistic_plan(cfg);
  const EstimationConfig est = estimation_config(cfg);
  if (command != Command::estimate) envelope_settings(cfg);
  const Input input = acquire_input(cfg);
  if (plan.empty()) {
    write_manifest(cfg, command);
    return;
  }

  if (command == Command::estimate) {
    const FunctionalMarkSet* marks = input.marks ? &*input.marks : nullptr;
    if (!plan.requests.empty()) {
      const EstimationContext ctx(input.pattern, marks, est);
      for (const auto& req : plan.requests) {
        io::write_curve_csv(out / (request_label(req) + ".csv"), ctx.evaluate(req));
      }
    }
    if (plan.nn_indices || plan.knn_indices) {
      if (marks == nullptr) throw validation_error("nn_indices and knn_indices need marks");
      const std::size_t h = channel(cfg, "h");
      const std::size_t l = channel(cfg, "l");
      const std::string suffix = "_" + std::to_string(h + 1) + "_" + std::to_string(l + 1) + ".csv";
      if (plan.nn_indices) {
        io::write_nn_csv(out / ("nn_indices" + suffix),
                         estimate_nn_indices(input.pattern, *marks, h, l, est));
      }
      if (plan.knn_indices) {
        io::write_knn_csv(out / ("knn_indices" + suffix),
                          estimate_knn_indices(input.pattern, *marks, h, l,
                                               cfg.get_size("k_max"), est));
      }
    }
  } else {
    const std::vector<EnvelopeBand> bands = envelopes(cfg, input, plan);
    if (command == Command::envelope) {
      for (const auto& b : bands) io::write_envelope_csv(out / (b.label + ".csv"), b);
    } else {
      write_summary(out / "summary.csv", bands);
    }
  }
  write_manifest(cfg, command);
}

}  // namespace fmark::app
