#pragma once

#include <string>
#include <vector>

#include "pilotwave/scenario.hpp"

namespace pilotwave {

struct RunReport {
  int exit_code = 0;  // 0 success, 1 failed verification
  std::vector<std::string> artifacts;
  std::string summary;
};

/// Runs a scenario and writes its artifacts plus manifest.json (SHA-256 of
/// every artifact) under config.output_dir. Files are written with a
/// .partial suffix and renamed only once the whole run has succeeded, so an
/// error leaves the partial files behind and propagates.
RunReport run_scenario(const ScenarioConfig& config, int workers = 1);

}  // namespace pilotwave
