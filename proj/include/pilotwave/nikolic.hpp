#pragma once

#include <array>
#include <complex>
#include <vector>

namespace pilotwave {

using cplx = std::complex<double>;

/// Positive-frequency Klein-Gordon solution in 1+1 dimensions, written as a
/// finite sum of plane waves exp(i (k (x - x0) - omega(k) (t - t0))).
class WavePacket {
 public:
  /// Gaussian packet exp(-(x-x0)^2 / (2 width^2)) e^{i k0 (x-x0)} at t = t0,
  /// built from Gauss-Hermite momentum nodes.
  static WavePacket gaussian(double center, double width, double momentum, double mass,
                             int nodes = 32, double t0 = 0.0);
  static WavePacket plane_wave(double momentum, double mass, cplx amplitude = 1.0);

  double mass() const { return mass_; }
  double omega(double k) const;

  cplx value(double t, double x) const;
  /// Value and first derivatives in t and x.
  cplx value_and_derivatives(double t, double x, cplx& d_t, cplx& d_x) const;

 private:
  double mass_ = 1.0;
  double x0_ = 0.0;
  double t0_ = 0.0;
  std::vector<double> k_;
  std::vector<double> omega_;
  std::vector<cplx> weight_;
};

/// Spacetime points of the three particles, X[k] = (t, x), plus pointer y.
struct MultiTimePoint {
  std::array<std::array<double, 2>, 3> X{};
  double y = 0.0;
  double s = 0.0;
};

/// Psi = a1 phi1(X1) E1(y) + a2 phi2(X2) phi3(X3) E2(y), with Gaussian
/// pointer states E_i(y) = (2 pi w^2)^{-1/4} exp(-(y - mu_i)^2 / (4 w^2)).
struct DecayScenario {
  cplx a1{1.0 / 1.4142135623730951, 0.0};
  cplx a2{0.0, 1.0 / 1.4142135623730951};
  WavePacket phi1;
  WavePacket phi2;
  WavePacket phi3;
  double mu1 = 0.0;
  double mu2 = 4.0;
  double w_e = 1.0;
  bool exact_collapse = false;  // branch selection: E1 identically zero
  double pointer_mass = 0.0;    // > 0 moves y with dy/ds = Im(d_y Psi / Psi) / m
  MultiTimePoint reference;     // where speeds are evaluated
};

/// Default masses satisfy M1^2 = M2^2 + M3^2.
DecayScenario default_decay_scenario();

/// Scenario with mu2 = mu1 + separation.
DecayScenario with_separation(const DecayScenario& scenario, double separation);

double detector_state(const DecayScenario& sc, int branch, double y);
cplx decay_amplitude(const DecayScenario& sc, const MultiTimePoint& p);

struct FourVelocity {
  std::array<std::array<double, 2>, 3> v{};  // v[k] = (v^0, v^1) of particle k
  double pointer = 0.0;                       // dy/ds (0 for a static pointer)
};

/// v_k^mu = -Im(Psi* d_k^mu Psi) / |Psi|^2 with d^mu = (d_t, -d_x).
FourVelocity four_velocity(const DecayScenario& sc, const MultiTimePoint& p);

/// Midpoint-rule integration over s in [0, s_span]; steps hitting a node
/// are retried with halved ds.
std::vector<MultiTimePoint> integrate_multitime(const DecayScenario& sc, const MultiTimePoint& start,
                                                double s_span, double ds);

/// Overlap integral of sqrt(E1 E2) over y: exp(-sep^2 / (8 w^2)).
double detector_overlap(const DecayScenario& sc);

/// Max-norm of particle 1's 4-velocity at the reference point with the
/// pointer settled at mu2, for mu2 = mu1 + separation.
double dead_particle_speed(const DecayScenario& sc, double separation);

/// Branch (1 or 2) with the larger weight at the actual configuration.
int dominant_branch(const DecayScenario& sc, const MultiTimePoint& p);

/// Sum over particles of d_mu j^mu computed analytically from the
/// Klein-Gordon equation: Im(Psi* (M1^2 B1 + (M2^2 + M3^2) B2)).
double continuity_source(const DecayScenario& sc, const MultiTimePoint& p);

/// Two measurement stages: the pointer sits at y_first for s in
/// [0, s_first], then at mu2 for a further s_second.
std::vector<MultiTimePoint> two_stage_path(const DecayScenario& sc, const MultiTimePoint& start,
                                           double y_first, double s_first, double s_second,
                                           double ds);

}  // namespace pilotwave
