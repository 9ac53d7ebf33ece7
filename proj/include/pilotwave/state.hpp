#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pilotwave/fock_basis.hpp"

namespace pilotwave {

using cplx = std::complex<double>;

/// Uniform periodic 1D grid. Node j sits at x_j = j * dx; its cell is
/// [x_j - dx/2, x_j + dx/2).
struct Grid {
  int points = 0;
  double dx = 1.0;

  double length() const { return points * dx; }
  double node(int j) const { return j * dx; }
  /// Wrap a position into [0, length).
  double wrap(double x) const;
  /// Index of the cell containing x (after wrapping).
  int cell_of(double x) const;

  bool operator==(const Grid&) const = default;
};

/// Lattice beable: occupation number per site.
struct LatticeConfig {
  std::vector<int> occupation;

  int total() const;
  bool operator==(const LatticeConfig&) const = default;
};

/// Continuum beable: N unordered particle positions, stored sorted.
class SectorConfig {
 public:
  SectorConfig() = default;
  /// Sorts the positions; throws StructuralError if any lies outside [0, L).
  SectorConfig(std::vector<double> positions, const Grid& grid);

  static SectorConfig at_cells(std::span<const int> cells, const Grid& grid);

  int sector() const { return static_cast<int>(positions_.size()); }
  const std::vector<double>& positions() const { return positions_; }

  SectorConfig with_added(double position, const Grid& grid) const;
  SectorConfig with_removed(std::size_t particle) const;

  bool operator==(const SectorConfig&) const = default;

 private:
  std::vector<double> positions_;
};

/// Complex amplitudes over a truncated Fock basis.
///
/// Amplitudes are coefficients in the orthonormal occupation basis, so the
/// Born weight of basis state m is |c_m|^2. For continuum states (grid
/// present) the amplitude of a canonical cell tuple m relates to the
/// symmetric wave function by psi(x_t) = c_m sqrt(prod m_k! / n!) / dx^(n/2),
/// which makes sum over all ordered tuples of |psi|^2 dx^n equal to sum |c|^2.
class QuantumState {
 public:
  QuantumState(std::shared_ptr<const FockBasis> basis, Eigen::VectorXcd amplitudes,
               std::optional<Grid> grid = std::nullopt, double hbar = 1.0);

  static QuantumState basis_state(std::shared_ptr<const FockBasis> basis,
                                  std::size_t index,
                                  std::optional<Grid> grid = std::nullopt,
                                  double hbar = 1.0);

  /// Build a continuum state from full ordered wave-function arrays, one per
  /// listed sector (row-major, G^n entries). Arrays are symmetrized.
  static QuantumState from_sector_functions(
      std::shared_ptr<const FockBasis> basis, const Grid& grid,
      const std::vector<std::pair<int, std::vector<cplx>>>& sectors,
      double hbar = 1.0);

  const FockBasis& basis() const { return *basis_; }
  const std::shared_ptr<const FockBasis>& basis_ptr() const { return basis_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  cplx amplitude(std::size_t index) const { return amplitudes_[static_cast<Eigen::Index>(index)]; }
  std::size_t dimension() const { return static_cast<std::size_t>(amplitudes_.size()); }

  bool is_continuum() const { return grid_.has_value(); }
  const Grid& grid() const;
  const std::optional<Grid>& maybe_grid() const { return grid_; }
  double hbar() const { return hbar_; }

  QuantumState with_amplitudes(Eigen::VectorXcd amplitudes) const;
  QuantumState scaled(cplx factor) const;
  QuantumState normalized() const;
  QuantumState conjugated() const;

  double sector_probability(int n) const;

  /// Full ordered, symmetric wave-function array of sector n (G^n values).
  std::vector<cplx> sector_function(int n) const;

 private:
  std::shared_ptr<const FockBasis> basis_;
  Eigen::VectorXcd amplitudes_;
  std::optional<Grid> grid_;
  double hbar_;
};

// Projections onto regions of configuration space.
struct ConfigProjection {
  std::size_t index;
};
struct SectorProjection {
  int n;
};
/// Set of canonical (sorted) cell tuples inside one sector.
struct CellSetProjection {
  int n;
  std::vector<std::vector<int>> cells;
};
using Projection = std::variant<ConfigProjection, SectorProjection, CellSetProjection>;

/// Projection onto a single lattice configuration; StructuralError if the
/// configuration is not part of the basis.
Projection projection_onto(const FockBasis& basis, const LatticeConfig& q);

double norm_squared(const QuantumState& state);
double project_expectation(const QuantumState& state, const Projection& p);

enum class Normalization { Strict, Auto };

/// Born probabilities per basis state. With Strict, a state whose norm
/// deviates from 1 by more than 1e-10 is rejected.
std::vector<double> born_density(const QuantumState& state,
                                 Normalization mode = Normalization::Strict);

std::size_t lattice_index(const FockBasis& basis, const LatticeConfig& q);
LatticeConfig lattice_config(const FockBasis& basis, std::size_t index);

// Snapshot format: {kind, modes, n_max, dx, hbar, sectors: [{n, shape, re, im}]}.
// Grid sectors hold the full ordered function array (shape [G]*n); lattice
// sectors hold the amplitudes in basis order (shape [count]).
nlohmann::json state_to_json(const QuantumState& state);
QuantumState state_from_json(const nlohmann::json& doc);

}  // namespace pilotwave
