#pragma once

#include <cstddef>
#include <vector>

#include "pilotwave/hamiltonian.hpp"

namespace pilotwave {

enum class StepMethod { Auto, Exact, ImplicitMidpoint };

inline constexpr std::size_t kExactDimensionLimit = 4096;

struct EvolveReport {
  double norm_defect = 0.0;  // |norm^2 after - norm^2 before|
  int halvings = 0;          // times dt was halved to meet the tolerance
  StepMethod method = StepMethod::Exact;
};

/// Psi(t + dt) under the full H. Auto picks the exact method up to
/// kExactDimensionLimit and the implicit midpoint rule above it.
QuantumState evolve(const QuantumState& state, const ModelHamiltonian& h, double dt,
                    StepMethod method = StepMethod::Auto, EvolveReport* report = nullptr);

/// Exact propagation from a fixed initial state to arbitrary times. The
/// spectrum is borrowed from h, which must outlive the propagator.
class Propagator {
 public:
  Propagator(const ModelHamiltonian& h, const QuantumState& initial);
  QuantumState at(double t) const;

 private:
  const Spectrum* spectrum_;
  QuantumState initial_;
  Eigen::VectorXcd coefficients_;
};

/// States on a uniform time grid t_k = k * step, k = 0..count-1.
class StateTimeline {
 public:
  StateTimeline(const ModelHamiltonian& h, const QuantumState& initial, double step,
                std::size_t count, StepMethod method = StepMethod::Auto);

  double step() const { return step_; }
  std::size_t size() const { return states_.size(); }
  const QuantumState& operator[](std::size_t k) const { return states_[k]; }
  double time(std::size_t k) const { return static_cast<double>(k) * step_; }
  /// Largest |norm^2 - 1| over the stored states.
  double max_norm_defect() const;

 private:
  double step_;
  std::vector<QuantumState> states_;
};

}  // namespace pilotwave
