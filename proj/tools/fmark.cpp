#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <map>
#include <string>

#include "fmark/app.hpp"
#include "fmark/config.hpp"
#include "fmark/core.hpp"
#include "fmark/kernels.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Summary characteristics of point patterns with function-valued marks"};
  cli.set_version_flag("--version", std::string(FMARK_VERSION));
  cli.require_subcommand(1);

  std::string config_path;
  int threads = 0;
  std::map<std::string, std::string> overrides;

  const char* commands[][2] = {
      {"simulate", "simulate a pattern with growth marks"},
      {"estimate", "estimate summary curves"},
      {"envelope", "estimate curves with simulation envelopes"},
      {"report", "envelope summary table"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = cli.add_subcommand(name, help);
    // --h is a config key, so help keeps only its long form
    sub->set_help_flag("--help", "print this help and exit");
    sub->add_option("--config", config_path, "flat key = value file (a manifest.txt works)");
    sub->add_option("--threads", threads, "worker threads (default FMARK_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    for (const auto& key : fmark::config_keys()) {
      const std::string k(key.name);
      sub->add_option_function<std::string>(
          "--" + k, [&overrides, k](const std::string& v) { overrides[k] = v; },
          std::string(key.help));
    }
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    fmark::Config cfg;
    if (!config_path.empty()) cfg = fmark::Config::load(config_path);
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    if (threads > 0) fmark::set_thread_count(threads);
    const auto command = fmark::app::command_from_string(cli.get_subcommands().front()->get_name());
    fmark::app::run(command, cfg);
  } catch (const fmark::validation_error& e) {
    std::cerr << "fmark: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fmark: internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
