#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "pilotwave/bell.hpp"
#include "pilotwave/field.hpp"
#include "pilotwave/hamiltonian.hpp"
#include "pilotwave/rng.hpp"
#include "pilotwave/trajectory.hpp"

namespace pilotwave {

struct PdmpState {
  SectorConfig config;
  QuantumState psi;
  double t = 0.0;
};

/// Rates out of one continuum configuration at a fixed instant.
/// creation[j]: rate to add a particle in cell j (density times dx).
/// annihilation[i]: rate to remove particle i of the sorted configuration.
struct BtqftRateTable {
  std::vector<double> creation;
  std::vector<double> annihilation;

  double total() const;
};

/// Bohmian velocities (hbar/m) Im(d_i psi / psi) of every particle.
std::vector<double> velocity_field(const SectorField& field, const SectorConfig& q, double mass,
                                   double node_threshold = 1e-20);
std::vector<double> velocity_field(const QuantumState& state, const SectorConfig& q,
                                   double mass = 1.0);

/// Explicit midpoint step of the configuration under the full-H evolved
/// state; the step is split while |v| dt >= dx.
PdmpState flow_step(const PdmpState& s, const ModelHamiltonian& h, double dt);

BtqftRateTable btqft_rates(const SectorField& field, const SectorConfig& q,
                           const ModelHamiltonian& h, RateRule rule = RateRule::PositivePart);
BtqftRateTable btqft_rates(const QuantumState& state, const SectorConfig& q,
                           const ModelHamiltonian& h, RateRule rule = RateRule::PositivePart);

/// Creation rate density sigma(y | x) at continuous y.
double creation_density(const SectorField& field, const SectorConfig& q, double y,
                        const ModelHamiltonian& h, RateRule rule = RateRule::PositivePart);
/// Rate of removing particle i from q.
double annihilation_rate(const SectorField& field, const SectorConfig& q, std::size_t i,
                         const ModelHamiltonian& h, RateRule rule = RateRule::PositivePart);

/// Draws configurations from |psi|^2: the sector from its probability, the
/// positions from a fine-grid table of the interpolated density.
class BornSampler {
 public:
  BornSampler(const SectorField& field, const std::vector<double>& sector_probabilities,
              int subcells = 8);
  SectorConfig draw(Rng& rng) const;

 private:
  struct SectorTable {
    int resolution = 0;  // fine points per axis
    std::vector<double> cdf;
  };
  Grid grid_;
  std::vector<double> sector_probabilities_;
  std::vector<SectorTable> tables_;
};

struct BtqftOptions {
  RateRule rule = RateRule::PositivePart;
  std::vector<double> checkpoints;
  double max_window_intensity = 0.05;
  int subcells = 8;
  double record_interval = 0.0;  // > 0 adds periodic sample events
  bool record_events = true;
  double node_threshold = 1e-20;
  double dt_min = 1e-6;
};

/// Interpolated fields at quarter steps of dt over [0, T].
class BtqftTimeline {
 public:
  BtqftTimeline(const ModelHamiltonian& h, const QuantumState& initial, double T, double dt);

  double dt() const { return dt_; }
  std::size_t steps() const { return steps_; }
  const SectorField& quarter(std::size_t k) const { return fields_[k]; }
  const QuantumState& quarter_state(std::size_t k) const { return states_[k]; }
  /// Field at an arbitrary time; results are cached and shared between threads.
  std::shared_ptr<const SectorField> field_at(double t) const;
  double max_norm_defect() const { return max_norm_defect_; }

 private:
  double dt_;
  std::size_t steps_;
  std::shared_ptr<const Propagator> propagator_;
  std::shared_ptr<const ModelHamiltonian> hamiltonian_;
  std::vector<QuantumState> states_;
  std::vector<SectorField> fields_;
  double max_norm_defect_ = 0.0;
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const SectorField>> cache_;
};

struct BtqftCounters {
  std::size_t proposals = 0;
  std::size_t bound_violations = 0;
  std::size_t window_splits = 0;
  std::size_t flow_splits = 0;
};

TrajectoryRecord run_btqft_trajectory(const BtqftTimeline& timeline, const ModelHamiltonian& h,
                                      const SectorConfig& initial, Rng& rng,
                                      const BtqftOptions& options,
                                      BtqftCounters* counters = nullptr);

/// Convenience form: builds the timeline for one trajectory.
TrajectoryRecord run_btqft_trajectory(const PdmpState& initial, const ModelHamiltonian& h,
                                      double T, double dt, Rng& rng,
                                      const BtqftOptions& options = {});

struct BtqftEnsemble {
  std::vector<TrajectoryRecord> records;
  std::vector<SectorConfig> initial;
  double max_norm_defect = 0.0;
  std::size_t flagged = 0;
  BtqftCounters counters;
};

BtqftEnsemble run_btqft_ensemble(const ModelHamiltonian& h, const QuantumState& psi0,
                                 std::size_t M, double T, double dt, const BtqftOptions& options,
                                 std::uint64_t seed, int workers = 1,
                                 const std::vector<SectorConfig>& initial = {});

}  // namespace pilotwave
