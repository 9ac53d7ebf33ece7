#pragma once

#include <complex>
#include <span>
#include <vector>

#include "pilotwave/state.hpp"

namespace pilotwave {

/// Periodic band-limited interpolation kernel of a grid.
///
/// D(u) = (1/G) [1 + 2 sum_{m=1}^{G/2-1} cos(k_m u) + cos(k_N u)], so a grid
/// function f_j extends to f(x) = sum_j f_j D(x - x_j). The Nyquist mode is
/// kept as a cosine, matching the spectral Laplacian used by the models.
class SpectralKernel {
 public:
  explicit SpectralKernel(const Grid& grid);

  const Grid& grid() const { return grid_; }

  /// Fill value weights k[j] = D(x - x_j) and, if dk is non-null, derivative
  /// weights dk[j] = D'(x - x_j). Positions on a node give exact unit weights.
  void weights(double x, double* k, double* dk) const;

  /// Node index if x sits on a grid node (to 1e-12 cells), else -1.
  int node_of(double x) const;

 private:
  void weights_by_series(double u, double& value, double& deriv) const;

  Grid grid_;
  int half_;
  std::vector<cplx> half_shift_;       // e^{-i pi j / G}
  std::vector<cplx> dirichlet_shift_;  // e^{-i pi (G-1) j / G}
};

/// Interpolated view of all sectors of a continuum state at one instant.
class SectorField {
 public:
  explicit SectorField(const QuantumState& state);

  const Grid& grid() const { return kernel_.grid(); }
  const SpectralKernel& kernel() const { return kernel_; }
  int n_max() const { return static_cast<int>(arrays_.size()) - 1; }
  double hbar() const { return hbar_; }

  /// Ordered, symmetric sector-n array (G^n entries, row-major).
  const std::vector<cplx>& array(int n) const { return arrays_[n]; }

  /// psi_n at positions x (any order; result is symmetric).
  cplx value(int n, std::span<const double> x) const;
  /// psi_n and its gradient (one entry per particle).
  cplx value_and_gradient(int n, std::span<const double> x, std::span<cplx> grad) const;

  /// phi_j = psi_{n+1}(x, y_j) for every node y_j, with x a sector-n tuple.
  void partial_nodes(std::span<const double> x, std::vector<cplx>& phi) const;

  /// psi_n on the tensor grid pts^n (n <= 2), row-major.
  std::vector<cplx> tensor_values(int n, std::span<const double> pts) const;

 private:
  SpectralKernel kernel_;
  std::vector<std::vector<cplx>> arrays_;
  double hbar_;
};

/// Kernel matrix K[p][j] = D(pts[p] - x_j), row-major (pts.size() x G).
std::vector<double> kernel_matrix(const SpectralKernel& kernel, std::span<const double> pts);

/// Contract a periodic node function with the kernel: f(x) = sum_j f_j D(x - x_j).
cplx interpolate_nodes(const SpectralKernel& kernel, std::span<const cplx> nodes, double x);

}  // namespace pilotwave
