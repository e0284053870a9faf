#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "optomech/cli/commands.hpp"
#include "optomech/cli/config.hpp"

namespace cli = optomech::cli;

int main(int argc, char** argv) {
  CLI::App app{"Driven optomechanical cavity: spectra, evolution and Husimi functions", "optomech"};
  app.set_version_flag("--version", cli::tool_version());
  std::string command;
  std::string config_path;
  std::string preset;
  std::string out_dir = ".";
  bool verify = false;
  app.add_option("command", command, "spectrum | evolve | husimi | sweep | verify")
      ->required()
      ->check(CLI::IsMember({"spectrum", "evolve", "husimi", "sweep", "verify"}));
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--preset", preset, "built-in base configuration (fig1)");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--verify", verify, "cross-check results against the oracles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : optomech::exit_code::config_error;
  }

  try {
    if (config_path.empty() && preset.empty()) throw cli::ConfigError("", "give --config, --preset or both");
    std::string base;
    if (!preset.empty()) {
      const auto text = cli::preset_json(preset);
      if (!text) throw cli::ConfigError("--preset", "unknown preset '" + preset + "'");
      base = *text;
    }
    const cli::RunConfig config =
        config_path.empty() ? cli::parse_config(base, "preset:" + preset) : cli::load_config(config_path, base);
    const auto experiment = *cli::parse_experiment(command);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw cli::ConfigError("--out", "cannot create '" + out_dir + "': " + ec.message());

    const cli::CommandOptions opts{out_dir, verify, &std::cout};
    const cli::CommandResult result = cli::run_command(experiment, config, opts);
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    return result.exit_code;
  } catch (const optomech::Error& e) {
    std::cerr << "optomech: " << e.what() << '\n';
    return optomech::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "optomech: " << e.what() << '\n';
    return optomech::exit_code::numerical_failure;
  }
}
