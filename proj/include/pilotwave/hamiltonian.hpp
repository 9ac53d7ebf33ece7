#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pilotwave/state.hpp"

namespace pilotwave {

using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct BellLatticeParams {
  int sites = 2;
  double hop = 1.0;
  double hop_phase = 0.0;  // hopping x -> x+1 carries e^{i hop_phase}
  double pair_coupling = 0.0;
  double single_coupling = 0.0;
  double onsite = 0.0;
  int n_max = 2;
  std::size_t dimension_cap = FockBasis::kDefaultDimensionCap;
};

struct EmissionParams {
  int points = 32;
  double dx = 0.25;
  double g = 0.3;
  double width = 1.0;
  std::vector<double> sources;  // empty: one source at the grid centre
  double mass = 1.0;
  int n_max = 2;
  double hbar = 1.0;
  std::size_t dimension_cap = FockBasis::kDefaultDimensionCap;
};

struct Spectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

/// H = H0 + H_int on a truncated Fock basis.
class ModelHamiltonian {
 public:
  ModelHamiltonian(std::string model, std::shared_ptr<const FockBasis> basis,
                   SparseMatrix h0, SparseMatrix h_int, std::optional<Grid> grid,
                   double hbar);

  const std::string& model() const { return model_; }
  const FockBasis& basis() const { return *basis_; }
  const std::shared_ptr<const FockBasis>& basis_ptr() const { return basis_; }
  const std::optional<Grid>& grid() const { return grid_; }
  double hbar() const { return hbar_; }
  std::size_t dimension() const { return basis_->size(); }

  const SparseMatrix& h0() const { return h0_; }
  const SparseMatrix& h_int() const { return h_int_; }
  const SparseMatrix& full() const { return full_; }

  /// Set for models built by build_emission_absorption_model.
  const std::optional<EmissionParams>& emission() const { return emission_; }
  const std::vector<double>& form_factor() const { return form_factor_; }
  /// Continuous form factor f(y): sum of periodic Gaussians, peak 1.
  double form_factor_at(double y) const;
  /// L2 norm of the continuous form factor over one period.
  double form_factor_norm() const { return form_factor_norm_; }

  double hermiticity_defect() const;
  /// Entrywise complex conjugate (used for time-reversed runs).
  ModelHamiltonian conjugated() const;

  /// Dense eigendecomposition of the full H, computed once on first use.
  const Spectrum& spectrum() const;

  QuantumState zero_state() const;

  void set_emission(EmissionParams params, std::vector<double> f);

 private:
  struct Cache {
    std::once_flag once;
    Spectrum spectrum;
  };

  std::string model_;
  std::shared_ptr<const FockBasis> basis_;
  SparseMatrix h0_, h_int_, full_;
  std::optional<Grid> grid_;
  double hbar_;
  std::optional<EmissionParams> emission_;
  std::vector<double> form_factor_;
  double form_factor_norm_ = 0.0;
  std::shared_ptr<Cache> cache_;
};

ModelHamiltonian build_bell_lattice_model(const BellLatticeParams& params, double hbar = 1.0);
ModelHamiltonian build_emission_absorption_model(const EmissionParams& params);

struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};
std::vector<Triplet> triplets(const SparseMatrix& m);
/// CSV with header row,col,re,im; one line per stored nonzero.
std::string triplets_csv(const SparseMatrix& m);

}  // namespace pilotwave
