#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pilotwave/bell.hpp"
#include "pilotwave/btqft.hpp"
#include "pilotwave/hamiltonian.hpp"
#include "pilotwave/trajectory.hpp"

namespace pilotwave {

/// Probability masses over a named partition of configuration space.
struct DensityTable {
  std::string partition;
  std::vector<double> mass;
};

/// (1/2) sum |p - q|; StructuralError if the partitions differ.
double tv_distance(const DensityTable& p, const DensityTable& q);

/// Partition used to bin configurations.
///  LatticeConfigs: one cell per basis state.
///  SectorMarginal: one cell per particle number 0..n_max.
///  PositionBins: sector 0, then `bins` cells for sector 1, then the sorted
///  bin pairs (b1 <= b2) for sector 2.
struct Binning {
  enum class Kind { LatticeConfigs, SectorMarginal, PositionBins };
  Kind kind = Kind::LatticeConfigs;
  std::size_t configs = 0;
  int n_max = 0;
  int bins = 16;
  double length = 0.0;

  static Binning lattice(std::size_t configs);
  static Binning sectors(int n_max);
  static Binning positions(int n_max, int bins, double length);

  std::size_t size() const;
  std::string name() const;
  std::size_t cell(long config_id, const std::vector<double>& positions) const;
};

/// Histogram of unflagged trajectories at checkpoint t; ParameterError if
/// no trajectory recorded a checkpoint at t.
DensityTable empirical_distribution(const std::vector<TrajectoryRecord>& records, double t,
                                    const Binning& binning);
/// Counts behind empirical_distribution.
std::vector<double> empirical_counts(const std::vector<TrajectoryRecord>& records, double t,
                                     const Binning& binning);

/// Exact Born masses of a state on a partition. Position bins integrate the
/// interpolated density with Gauss-Legendre quadrature.
DensityTable reference_distribution(const QuantumState& state, const Binning& binning);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double lower_floor = 0.0;  // 1e-6 lower quantile of chi^2_dof
};
ChiSquare chi_square(const std::vector<double>& counts, const DensityTable& reference);

/// TV of M i.i.d. draws from the reference (sampling-noise baseline).
double noise_baseline_tv(const DensityTable& reference, std::size_t M, std::uint64_t seed);

/// 3 sqrt(K / 4M) with K the number of cells carrying mass.
double default_tv_threshold(const DensityTable& reference, std::size_t M);

struct VerifyModel {
  std::string id;
  ModelHamiltonian h;
  QuantumState psi0;
  double dt = 1e-2;
  RateRule rule = RateRule::PositivePart;
  int position_bins = 16;
  double tv_threshold = 0.0;           // 0 selects the default threshold
  double position_tv_threshold = 0.0;  // continuum position histogram
};

struct CheckpointResult {
  double t = 0.0;
  std::string partition;
  double tv = 0.0;
  double tv_threshold = 0.0;
  double noise_baseline = 0.0;
  ChiSquare chi2;
  bool sub_noise = false;
  bool pass = false;
  std::vector<double> empirical;
  std::vector<double> reference;
};

struct EnsembleReport {
  std::string model;
  std::string check;
  std::size_t M = 0;
  std::uint64_t seed = 0;
  std::vector<double> checkpoints;
  std::vector<CheckpointResult> results;
  std::size_t flagged = 0;
  bool inconclusive = false;
  double max_norm_defect = 0.0;
  std::size_t jump_events = 0;
  std::size_t transition_violations = 0;

  bool pass() const;
  nlohmann::json to_json() const;
  std::string summary() const;
};

/// Ensemble from |psi0|^2, compared with the exact Born distribution at each
/// checkpoint. Records are returned through `records` when requested.
EnsembleReport check_equivariance(const VerifyModel& model, std::size_t M,
                                  const std::vector<double>& checkpoints, std::uint64_t seed,
                                  int workers = 1,
                                  std::vector<TrajectoryRecord>* records = nullptr);

struct MasterEquationResult {
  double max_residual = 0.0;
  std::vector<double> residual_per_time;
};

/// max |d<P>/dt - net jump flux| by centered differences (step fd) on the
/// exact evolution: per lattice configuration, or per sector for the
/// continuum model.
MasterEquationResult check_master_equation(const ModelHamiltonian& h, const QuantumState& psi0,
                                           const std::vector<double>& times, double fd = 1e-4);

/// Forward run to T, then the reversed process from conj(Psi_T) under
/// conj(H) starting at the forward terminal configurations; compares the
/// reversed terminal distribution with |Psi_0|^2. With conjugate = false the
/// second run uses Psi_T and H unchanged (negative control).
EnsembleReport check_time_reversal(const VerifyModel& model, double T, std::size_t M,
                                   std::uint64_t seed, int workers = 1, bool conjugate = true);

}  // namespace pilotwave
