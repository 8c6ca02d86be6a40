#include "fmark/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fmark/core.hpp"

namespace fmark {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw parse_error("key '" + std::string(key) + "': cannot parse '" + std::string(value) +
                    "' as " + std::string(want));
}

double to_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) bad_value(key, text, "a number");
  return v;
}

std::uint64_t to_u64(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    bad_value(key, text, "a nonnegative integer");
  }
  return v;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      // input
      {"pattern", "", "pattern CSV (id,x,y[,type])"},
      {"marks", "", "comma list of marks CSVs, one per channel"},
      {"window", "0,1,0,1", "x_min,x_max,y_min,y_max"},
      {"torus", "", "periodic window; default true for simulated, false for loaded data"},
      // point process
      {"process", "", "poisson | thomas | strauss"},
      {"lambda", "200", "Poisson intensity"},
      {"lambda_parent", "40", "Thomas parent intensity"},
      {"mu", "5", "Thomas mean offspring count"},
      {"sigma", "0.04", "Thomas offspring dispersion"},
      {"beta", "", "Strauss activity; calibrated to target_n when empty"},
      {"target_n", "200", "Strauss calibration target"},
      {"q", "0.05", "Strauss interaction parameter"},
      {"r_int", "0.025", "Strauss interaction radius"},
      {"mcmc_steps", "100000", "Strauss MCMC proposals"},
      {"pilot_steps", "200000", "Strauss calibration proposals"},
      // growth marks
      {"mode", "independent", "independent | positive | negative"},
      {"c", "0", "interaction increment"},
      {"D", "0.05", "interaction distance"},
      {"S_h", "5", "capacity of mark 1"},
      {"S_l", "5", "capacity of mark 2"},
      {"beta_h", "0.05", "growth rate of mark 1"},
      {"beta_l", "0.2", "growth rate of mark 2"},
      {"dt", "0.1", "Euler step"},
      {"steps", "100", "Euler steps"},
      {"init", "constant", "constant | uniform"},
      {"init_h", "0.1", "initial value of mark 1 (constant rule)"},
      {"init_l", "0.1", "initial value of mark 2 (constant rule)"},
      {"init_low", "0.05", "lower end (uniform rule)"},
      {"init_high", "0.15", "upper end (uniform rule)"},
      // estimation
      {"kernel", "epanechnikov", "epanechnikov | box | gaussian_truncated"},
      {"bandwidth", "", "kernel half-width; default 0.15/sqrt(lambda-hat)"},
      {"edge", "", "none_torus | translation; default by topology"},
      {"r_max", "", "largest r; default a quarter of the shortest side"},
      {"n_r", "100", "number of r values"},
      {"lag", "0", "time lag in grid steps"},
      {"chat", "all_pairs", "all_pairs | distinct_pairs"},
      {"mean_norm", "integrated", "integrated | pointwise"},
      {"statistics", "", "comma list of statistics, nn_indices, knn_indices"},
      {"h", "1", "origin mark channel (1-based)"},
      {"l", "2", "partner mark channel (1-based)"},
      {"test_function", "T3", "T1..T5 for rho_tf, kappa_tf, g_tf, K_tf, L_tf"},
      {"unit_weight", "false", "unit pair weights for g_tf, K_tf, L_tf"},
      {"normalization", "c_hat", "kappa_tf normaliser"},
      {"base", "kappa_hl", "base characteristic of U"},
      {"multi_base", "", "T1 | T3 enables a multi-function test function"},
      {"multi_combine", "mean_of_others", "mean_of_others | pairwise_sum"},
      {"multi_left", "1", "origin channel of the multi-function"},
      {"multi_right", "", "comma list of partner channels"},
      {"types", "", "i,j for cross-type or i,dot for dot-type"},
      {"local_point", "", "1-based point index for local K/L"},
      {"k_max", "5", "largest k of the k-NN indices"},
      // envelopes
      {"null", "random_labeling", "random_labeling | csr"},
      {"nsim", "199", "number of simulations"},
      {"k_env", "5", "envelope rank"},
      // run
      {"seed", "1", "master seed"},
      {"out", "out", "output directory"},
  };
  return keys;
}

bool is_config_key(std::string_view name) {
  const auto& keys = config_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == name; });
}

Config Config::parse(std::string_view text, std::string_view source) {
  Config cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw parse_error(std::string(source) + " line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), std::string(trim(line.substr(eq + 1))));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::set(std::string_view key, std::string value) {
  if (!is_config_key(key)) throw parse_error("unknown config key '" + std::string(key) + "'");
  values_[std::string(key)] = std::move(value);
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

bool Config::is_set(std::string_view key) const {
  const auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

std::string Config::raw(std::string_view key) const {
  if (is_set(key)) return values_.find(key)->second;
  for (const auto& k : config_keys()) {
    if (k.name == key) return std::string(k.default_value);
  }
  throw parse_error("unknown config key '" + std::string(key) + "'");
}

double Config::get_double(std::string_view key) const {
  const std::string v = raw(key);
  if (v.empty()) throw parse_error("key '" + std::string(key) + "' has no value");
  return to_double(key, v);
}

std::optional<double> Config::get_optional_double(std::string_view key) const {
  const std::string v = raw(key);
  if (v.empty()) return std::nullopt;
  return to_double(key, v);
}

std::size_t Config::get_size(std::string_view key) const {
  const std::string v = raw(key);
  if (v.empty()) throw parse_error("key '" + std::string(key) + "' has no value");
  return static_cast<std::size_t>(to_u64(key, v));
}

std::optional<std::size_t> Config::get_optional_size(std::string_view key) const {
  const std::string v = raw(key);
  if (v.empty()) return std::nullopt;
  return static_cast<std::size_t>(to_u64(key, v));
}

std::uint64_t Config::get_u64(std::string_view key) const {
  const std::string v = raw(key);
  if (v.empty()) throw parse_error("key '" + std::string(key) + "' has no value");
  return to_u64(key, v);
}

bool Config::get_bool(std::string_view key) const {
  const std::string v = raw(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> Config::get_list(std::string_view key) const {
  const std::string v = raw(key);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t end = std::min(v.find(',', start), v.size());
    const std::string_view item = trim(std::string_view(v).substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

std::vector<double> Config::get_double_list(std::string_view key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) out.push_back(to_double(key, item));
  return out;
}

}  // namespace fmark
