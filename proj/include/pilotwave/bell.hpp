#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pilotwave/evolution.hpp"
#include "pilotwave/hamiltonian.hpp"
#include "pilotwave/rng.hpp"
#include "pilotwave/trajectory.hpp"

namespace pilotwave {

/// PositivePart is the physical rule; Magnitude replaces [J]^+ by |J| and
/// exists only as a negative control for the verification harness.
enum class RateRule { PositivePart, Magnitude };

struct JumpRateTable {
  std::size_t source = 0;
  double t = 0.0;
  std::vector<std::pair<std::size_t, double>> rates;  // destination, rate > 0

  double total() const;
  double rate_to(std::size_t destination) const;
};

/// Signed probability current (2/hbar) Im<Psi|P(a) H P(b) Psi> from b to a,
/// evaluated in a fixed index order so that current(a, b) == -current(b, a).
double bell_current(const QuantumState& state, const ModelHamiltonian& h, std::size_t a,
                    std::size_t b);

JumpRateTable bell_rates(const QuantumState& state, std::size_t source, const ModelHamiltonian& h,
                         RateRule rule = RateRule::PositivePart, double t = 0.0);
JumpRateTable bell_rates(const QuantumState& state, const LatticeConfig& source,
                         const ModelHamiltonian& h, RateRule rule = RateRule::PositivePart,
                         double t = 0.0);

struct JumpSample {
  std::size_t destination;
  double offset;  // time from the start of the window
};

/// First jump within `window` for rates frozen over the window.
std::optional<JumpSample> sample_next_jump(const JumpRateTable& rates, Rng& rng, double window);

struct BellOptions {
  RateRule rule = RateRule::PositivePart;
  std::vector<double> checkpoints;  // multiples of dt within [0, T]
  double max_window_intensity = 0.05;
  bool record_events = true;
};

/// Rate tables on windows covering [0, T], each frozen at the window midpoint.
class BellSchedule {
 public:
  BellSchedule(const ModelHamiltonian& h, const QuantumState& initial, double T, double dt,
               const BellOptions& options);

  struct Window {
    double t0;
    double t1;
    std::vector<JumpRateTable> tables;  // indexed by source; empty if no support
    std::vector<char> supported;
  };

  const std::vector<Window>& windows() const { return windows_; }
  double max_norm_defect() const { return max_norm_defect_; }
  const std::vector<double>& checkpoints() const { return checkpoints_; }

 private:
  void fill(const ModelHamiltonian& h, const Propagator& prop, double t0, double t1, int depth,
            const BellOptions& options);

  std::vector<Window> windows_;
  std::vector<double> checkpoints_;
  double max_norm_defect_ = 0.0;
};

TrajectoryRecord run_bell_trajectory(const BellSchedule& schedule, std::size_t initial, Rng& rng,
                                     bool record_events = true);

/// Convenience form: builds the schedule for one trajectory.
TrajectoryRecord run_bell_trajectory(const QuantumState& psi0, const LatticeConfig& q0,
                                     const ModelHamiltonian& h, double T, double dt, Rng& rng,
                                     const BellOptions& options = {});

struct BellEnsemble {
  std::vector<TrajectoryRecord> records;
  std::vector<std::size_t> initial;
  double max_norm_defect = 0.0;
  std::size_t flagged = 0;
};

/// M trajectories; trajectory i uses RNG stream i. Initial configurations
/// are drawn from |psi0|^2 unless `initial` is given.
BellEnsemble run_bell_ensemble(const ModelHamiltonian& h, const QuantumState& psi0, std::size_t M,
                               double T, double dt, const BellOptions& options, std::uint64_t seed,
                               int workers = 1, const std::vector<std::size_t>& initial = {});

/// Index drawn from a discrete distribution by inversion.
std::size_t sample_discrete(const std::vector<double>& probabilities, Rng& rng);

}  // namespace pilotwave
