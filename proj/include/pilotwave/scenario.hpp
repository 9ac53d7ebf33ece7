#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pilotwave/hamiltonian.hpp"
#include "pilotwave/nikolic.hpp"
#include "pilotwave/state.hpp"

namespace pilotwave {

/// Validated run description. `params` holds the model parameters with every
/// default filled in, so serializing and re-parsing is the identity.
///
/// Top-level keys: model, mode, params, T, dt, M, seed, hbar, checkpoints,
/// record_interval, output_dir. model and mode are required.
struct ScenarioConfig {
  std::string model;  // bell-lattice | btqft-emission | nikolic-decay
  std::string mode;   // trajectory | ensemble | verify | sweep
  nlohmann::json params = nlohmann::json::object();
  double T = 1.0;
  double dt = 1e-3;
  std::size_t M = 1;
  std::uint64_t seed = 0;
  double hbar = 1.0;
  std::vector<double> checkpoints;
  double record_interval = 0.0;
  std::string output_dir = "out";

  bool operator==(const ScenarioConfig&) const = default;
};

/// Reads and validates a scenario file. All problems are reported together
/// in a ScenarioError.
ScenarioConfig parse_scenario(const std::string& path);
ScenarioConfig scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

std::vector<std::string> preset_names();
/// ParameterError for an unknown name.
ScenarioConfig preset(const std::string& name);

/// Hamiltonian of a bell-lattice or btqft-emission scenario.
ModelHamiltonian scenario_hamiltonian(const ScenarioConfig& config);
/// Initial state from params.initial, normalized.
QuantumState scenario_initial_state(const ScenarioConfig& config, const ModelHamiltonian& h);
/// Decay scenario of a nikolic-decay config.
DecayScenario scenario_decay(const ScenarioConfig& config);

}  // namespace pilotwave
