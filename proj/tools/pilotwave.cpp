#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "pilotwave/errors.hpp"
#include "pilotwave/runner.hpp"
#include "pilotwave/scenario.hpp"

using namespace pilotwave;

int main(int argc, char** argv) {
  CLI::App app{"Pilot-wave trajectory simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario file or a preset");
  std::string file, preset_name, out_dir;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  run->add_option("scenario", file, "Scenario JSON file");
  run->add_option("--preset", preset_name, "Built-in scenario");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out-dir", out_dir, "Override the output directory");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* show = app.add_subcommand("show", "Print a preset as a scenario file");
  std::string show_name;
  show->add_option("preset", show_name, "Preset name")->required();

  app.add_subcommand("presets", "List built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("presets")) {
      for (const auto& n : preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (app.got_subcommand("show")) {
      std::cout << scenario_to_json(preset(show_name)).dump(2) << "\n";
      return 0;
    }
    if (file.empty() == preset_name.empty()) {
      std::cerr << "run needs exactly one of a scenario file or --preset\n";
      return 2;
    }
    ScenarioConfig config = preset_name.empty() ? parse_scenario(file) : preset(preset_name);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.output_dir = out_dir;
    const RunReport rep = run_scenario(config, workers);
    std::cout << rep.summary;
    for (const auto& a : rep.artifacts) std::cout << "wrote " << config.output_dir << "/" << a << "\n";
    return rep.exit_code;
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
