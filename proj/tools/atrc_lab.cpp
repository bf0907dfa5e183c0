// atrc-lab verify|phase-scan|decay|phi --config <file> --seed <u64> --out <dir>

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "atrc/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Ashkin-Teller random-cluster lab"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out = ".";
  bool print_config = false;

  for (const char* name : {"verify", "phase-scan", "decay", "phi"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config; missing keys take their defaults")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out, "output directory");
    sub->add_flag("--print-config", print_config, "print the effective config and exit");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : atrc::exit_config;
  }

  auto* sub = app.get_subcommands().front();
  atrc::ExperimentConfig cfg;
  cfg.command = sub->get_name();
  cfg.out = out;
  if (sub->count("--seed")) cfg.seed = seed;
  try {
    nlohmann::json user;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      try {
        user = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw atrc::ConfigError(std::string("config parse error: ") + e.what());
      }
    }
    cfg.params = atrc::merge_config(cfg.command, user);
    if (print_config) {
      std::cout << cfg.params.dump(2) << '\n';
      return atrc::exit_pass;
    }
    return atrc::run_command(cfg);
  } catch (const atrc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return atrc::exit_config;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return atrc::exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return atrc::exit_config;
  } catch (const atrc::CapExceeded& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return atrc::exit_config;
  }
}
