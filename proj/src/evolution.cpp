#include "pilotwave/evolution.hpp"

#include <cmath>

#include <Eigen/SparseLU>

#include "pilotwave/errors.hpp"

namespace pilotwave {

namespace {

constexpr double kStepTolerance = 1e-10;
constexpr int kMaxHalvings = 20;

Eigen::VectorXcd exact_step(const Eigen::VectorXcd& c, const Spectrum& s, double dt, double hbar) {
  Eigen::VectorXcd coeff = s.vectors.adjoint() * c;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    coeff[i] *= std::polar(1.0, -s.values[i] * dt / hbar);
  }
  return s.vectors * coeff;
}

Eigen::VectorXcd midpoint_step(const Eigen::VectorXcd& c, const SparseMatrix& h, double dt,
                               double hbar) {
  const auto dim = h.rows();
  Eigen::SparseMatrix<cplx> id(dim, dim);
  id.setIdentity();
  const cplx half(0.0, 0.5 * dt / hbar);
  Eigen::SparseMatrix<cplx> lhs = id + half * Eigen::SparseMatrix<cplx>(h);
  const Eigen::VectorXcd rhs = c - half * (h * c);
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(lhs);
  if (lu.info() != Eigen::Success) throw EvolutionError("implicit midpoint factorization failed");
  return lu.solve(rhs);
}

Eigen::VectorXcd step_checked(const Eigen::VectorXcd& c, const ModelHamiltonian& h, double dt,
                              StepMethod method, int depth, EvolveReport& report) {
  const double before = c.squaredNorm();
  Eigen::VectorXcd out = method == StepMethod::Exact
                             ? exact_step(c, h.spectrum(), dt, h.hbar())
                             : midpoint_step(c, h.full(), dt, h.hbar());
  const double defect = std::abs(out.squaredNorm() - before);
  if (defect <= kStepTolerance) {
    report.norm_defect = std::max(report.norm_defect, defect);
    return out;
  }
  if (depth >= kMaxHalvings) {
    throw EvolutionError("norm defect " + std::to_string(defect) +
                         " above tolerance after repeated step halving");
  }
  report.halvings += 1;
  Eigen::VectorXcd mid = step_checked(c, h, 0.5 * dt, method, depth + 1, report);
  return step_checked(mid, h, 0.5 * dt, method, depth + 1, report);
}

StepMethod resolve(StepMethod method, std::size_t dim) {
  if (method != StepMethod::Auto) return method;
  return dim <= kExactDimensionLimit ? StepMethod::Exact : StepMethod::ImplicitMidpoint;
}

}  // namespace

QuantumState evolve(const QuantumState& state, const ModelHamiltonian& h, double dt,
                    StepMethod method, EvolveReport* report) {
  if (!(dt > 0)) throw ParameterError("evolve needs dt > 0");
  if (!(state.basis() == h.basis())) throw StructuralError("state and Hamiltonian bases differ");
  EvolveReport local;
  local.method = resolve(method, h.dimension());
  Eigen::VectorXcd out = step_checked(state.amplitudes(), h, dt, local.method, 0, local);
  if (report) *report = local;
  return state.with_amplitudes(std::move(out));
}

Propagator::Propagator(const ModelHamiltonian& h, const QuantumState& initial)
    : spectrum_(&h.spectrum()), initial_(initial) {
  if (!(initial.basis() == h.basis())) throw StructuralError("state and Hamiltonian bases differ");
  coefficients_ = spectrum_->vectors.adjoint() * initial.amplitudes();
}

QuantumState Propagator::at(double t) const {
  Eigen::VectorXcd coeff = coefficients_;
  const double hbar = initial_.hbar();
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    coeff[i] *= std::polar(1.0, -spectrum_->values[i] * t / hbar);
  }
  return initial_.with_amplitudes(spectrum_->vectors * coeff);
}

StateTimeline::StateTimeline(const ModelHamiltonian& h, const QuantumState& initial, double step,
                             std::size_t count, StepMethod method)
    : step_(step) {
  if (!(step > 0)) throw ParameterError("timeline step must be positive");
  if (count == 0) throw ParameterError("timeline needs at least one state");
  states_.reserve(count);
  if (resolve(method, h.dimension()) == StepMethod::Exact) {
    const Propagator prop(h, initial);
    states_.push_back(initial);
    for (std::size_t k = 1; k < count; ++k) states_.push_back(prop.at(time(k)));
  } else {
    states_.push_back(initial);
    for (std::size_t k = 1; k < count; ++k) {
      states_.push_back(evolve(states_.back(), h, step, StepMethod::ImplicitMidpoint));
    }
  }
}

double StateTimeline::max_norm_defect() const {
  double worst = 0.0;
  for (const auto& s : states_) worst = std::max(worst, std::abs(norm_squared(s) - 1.0));
  return worst;
}

}  // namespace pilotwave
