#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fmark {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

/// Every key accepted in a config file or as a `--<key>` flag.
const std::vector<ConfigKey>& config_keys();
bool is_config_key(std::string_view name);

/// Flat key = value settings. Lines starting with `#` and text after `#` are
/// ignored; an empty value means "use the default". Getters fall back to the
/// default of the key and throw parse_error naming the key on bad values.
class Config {
 public:
  static Config parse(std::string_view text, std::string_view source = "config");
  static Config load(const std::filesystem::path& path);

  /// Throws parse_error for unknown keys.
  void set(std::string_view key, std::string value);
  /// Later values win.
  void merge(const Config& other);

  bool is_set(std::string_view key) const;
  /// Explicit value, else the default (possibly empty).
  std::string raw(std::string_view key) const;

  std::string get_string(std::string_view key) const { return raw(key); }
  double get_double(std::string_view key) const;
  std::optional<double> get_optional_double(std::string_view key) const;
  std::size_t get_size(std::string_view key) const;
  std::optional<std::size_t> get_optional_size(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  /// Comma-separated, trimmed, empty items dropped.
  std::vector<std::string> get_list(std::string_view key) const;
  std::vector<double> get_double_list(std::string_view key) const;

  const std::map<std::string, std::string, std::less<>>& explicit_values() const {
    return values_;
  }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace fmark
