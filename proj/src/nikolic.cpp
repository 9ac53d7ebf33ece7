#include "pilotwave/nikolic.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "pilotwave/errors.hpp"

namespace pilotwave {

namespace {

constexpr double kNodeFloor = 1e-300;

// Gauss-Hermite nodes and weights (weight function e^{-x^2}) by Golub-Welsch.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()[i];
    const double v = es.eigenvectors()(0, i);
    weights[i] = std::sqrt(std::numbers::pi) * v * v;
  }
}

struct Branches {
  cplx b1, b2;
  cplx d1[2];     // derivatives of b1 with respect to X1 (t, x)
  cplx d2[2][2];  // derivatives of b2 with respect to X2, X3
  cplx dy;
};

Branches branches(const DecayScenario& sc, const MultiTimePoint& p) {
  Branches b{};
  cplx p1t, p1x, p2t, p2x, p3t, p3x;
  const cplx f1 = sc.phi1.value_and_derivatives(p.X[0][0], p.X[0][1], p1t, p1x);
  const cplx f2 = sc.phi2.value_and_derivatives(p.X[1][0], p.X[1][1], p2t, p2x);
  const cplx f3 = sc.phi3.value_and_derivatives(p.X[2][0], p.X[2][1], p3t, p3x);
  const double e1 = sc.exact_collapse ? 0.0 : detector_state(sc, 1, p.y);
  const double e2 = detector_state(sc, 2, p.y);
  const double w2 = sc.w_e * sc.w_e;
  const double de1 = sc.exact_collapse ? 0.0 : -(p.y - sc.mu1) / (2.0 * w2) * e1;
  const double de2 = -(p.y - sc.mu2) / (2.0 * w2) * e2;
  b.b1 = sc.a1 * f1 * e1;
  b.b2 = sc.a2 * f2 * f3 * e2;
  b.d1[0] = sc.a1 * p1t * e1;
  b.d1[1] = sc.a1 * p1x * e1;
  b.d2[0][0] = sc.a2 * p2t * f3 * e2;
  b.d2[0][1] = sc.a2 * p2x * f3 * e2;
  b.d2[1][0] = sc.a2 * f2 * p3t * e2;
  b.d2[1][1] = sc.a2 * f2 * p3x * e2;
  b.dy = sc.a1 * f1 * de1 + sc.a2 * f2 * f3 * de2;
  return b;
}

// (v^0, v^1) from Psi and its (d_t, d_x) derivatives.
std::array<double, 2> covariant(cplx psi, cplx dt, cplx dx, double w) {
  const cplx c = std::conj(psi);
  return {-(c * dt).imag() / w, (c * dx).imag() / w};
}

}  // namespace

WavePacket WavePacket::gaussian(double center, double width, double momentum, double mass,
                                int nodes, double t0) {
  if (!(width > 0)) throw ParameterError("packet width must be positive");
  if (!(mass >= 0)) throw ParameterError("packet mass must be non-negative");
  WavePacket p;
  p.mass_ = mass;
  p.x0_ = center;
  p.t0_ = t0;
  std::vector<double> xi, w;
  gauss_hermite(nodes, xi, w);
  const double sigma_k = 1.0 / width;
  for (int i = 0; i < nodes; ++i) {
    const double k = momentum + std::sqrt(2.0) * sigma_k * xi[i];
    p.k_.push_back(k);
    p.omega_.push_back(p.omega(k));
    p.weight_.push_back(w[i] / std::sqrt(std::numbers::pi));
  }
  return p;
}

WavePacket WavePacket::plane_wave(double momentum, double mass, cplx amplitude) {
  WavePacket p;
  p.mass_ = mass;
  p.k_ = {momentum};
  p.omega_ = {p.omega(momentum)};
  p.weight_ = {amplitude};
  return p;
}

double WavePacket::omega(double k) const { return std::sqrt(k * k + mass_ * mass_); }

cplx WavePacket::value(double t, double x) const {
  cplx d_t, d_x;
  return value_and_derivatives(t, x, d_t, d_x);
}

cplx WavePacket::value_and_derivatives(double t, double x, cplx& d_t, cplx& d_x) const {
  cplx v = 0.0;
  d_t = 0.0;
  d_x = 0.0;
  for (std::size_t q = 0; q < k_.size(); ++q) {
    const cplx term = weight_[q] * std::polar(1.0, k_[q] * (x - x0_) - omega_[q] * (t - t0_));
    v += term;
    d_t += cplx(0.0, -omega_[q]) * term;
    d_x += cplx(0.0, k_[q]) * term;
  }
  return v;
}

DecayScenario default_decay_scenario() {
  DecayScenario sc;
  sc.phi1 = WavePacket::gaussian(0.0, 1.0, 0.8, std::sqrt(2.0));
  sc.phi2 = WavePacket::gaussian(-1.0, 1.0, -0.6, 1.0);
  sc.phi3 = WavePacket::gaussian(1.0, 1.0, 0.6, 1.0);
  sc.mu1 = 0.0;
  sc.mu2 = 4.0;
  sc.w_e = 1.0;
  sc.reference.X = {{{0.0, 0.3}, {0.0, -0.8}, {0.0, 1.2}}};
  sc.reference.y = sc.mu2;
  return sc;
}

DecayScenario with_separation(const DecayScenario& scenario, double separation) {
  if (!(separation >= 0)) throw ParameterError("separation must be non-negative");
  DecayScenario sc = scenario;
  sc.mu2 = sc.mu1 + separation;
  sc.reference.y = sc.mu2;
  return sc;
}

double detector_state(const DecayScenario& sc, int branch, double y) {
  const double mu = branch == 1 ? sc.mu1 : sc.mu2;
  const double w = sc.w_e;
  const double d = y - mu;
  return std::pow(2.0 * std::numbers::pi * w * w, -0.25) * std::exp(-d * d / (4.0 * w * w));
}

cplx decay_amplitude(const DecayScenario& sc, const MultiTimePoint& p) {
  const Branches b = branches(sc, p);
  return b.b1 + b.b2;
}

FourVelocity four_velocity(const DecayScenario& sc, const MultiTimePoint& p) {
  const Branches b = branches(sc, p);
  const cplx psi = b.b1 + b.b2;
  const double w = std::norm(psi);
  if (!(w > kNodeFloor)) throw NodeError("node encountered");
  FourVelocity out;
  out.v[0] = covariant(psi, b.d1[0], b.d1[1], w);
  out.v[1] = covariant(psi, b.d2[0][0], b.d2[0][1], w);
  out.v[2] = covariant(psi, b.d2[1][0], b.d2[1][1], w);
  if (sc.pointer_mass > 0) out.pointer = (std::conj(psi) * b.dy).imag() / w / sc.pointer_mass;
  return out;
}

namespace {

MultiTimePoint advance(const MultiTimePoint& p, const FourVelocity& v, double h) {
  MultiTimePoint out = p;
  for (int k = 0; k < 3; ++k) {
    for (int mu = 0; mu < 2; ++mu) out.X[k][mu] += h * v.v[k][mu];
  }
  out.y += h * v.pointer;
  out.s += h;
  return out;
}

MultiTimePoint midpoint_step(const DecayScenario& sc, const MultiTimePoint& p, double ds, int depth) {
  try {
    const FourVelocity v0 = four_velocity(sc, p);
    const MultiTimePoint mid = advance(p, v0, 0.5 * ds);
    const FourVelocity v1 = four_velocity(sc, mid);
    return advance(p, v1, ds);
  } catch (const NodeError&) {
    if (depth >= 30) throw;
    const MultiTimePoint half = midpoint_step(sc, p, 0.5 * ds, depth + 1);
    return midpoint_step(sc, half, 0.5 * ds, depth + 1);
  }
}

}  // namespace

std::vector<MultiTimePoint> integrate_multitime(const DecayScenario& sc, const MultiTimePoint& start,
                                                double s_span, double ds) {
  if (!(ds > 0) || !(s_span >= 0)) throw ParameterError("integration needs ds > 0 and s_span >= 0");
  const auto steps = static_cast<std::size_t>(std::llround(s_span / ds));
  if (std::abs(steps * ds - s_span) > 1e-9 * std::max(1.0, s_span)) {
    throw ParameterError("s_span must be a multiple of ds");
  }
  std::vector<MultiTimePoint> path;
  path.reserve(steps + 1);
  path.push_back(start);
  for (std::size_t i = 0; i < steps; ++i) {
    MultiTimePoint next = midpoint_step(sc, path.back(), ds, 0);
    next.s = start.s + (i + 1) * ds;
    path.push_back(next);
  }
  return path;
}

double detector_overlap(const DecayScenario& sc) {
  if (sc.exact_collapse) return 0.0;
  const double sep = sc.mu2 - sc.mu1;
  return std::exp(-sep * sep / (8.0 * sc.w_e * sc.w_e));
}

double dead_particle_speed(const DecayScenario& scenario, double separation) {
  const DecayScenario sc = with_separation(scenario, separation);
  if (sc.exact_collapse) {
    const FourVelocity v = four_velocity(sc, sc.reference);
    return std::max(std::abs(v.v[0][0]), std::abs(v.v[0][1]));
  }
  // Divide both branches by E2(mu2); E1/E2 at the settled pointer is r.
  const double r = std::exp(-separation * separation / (4.0 * sc.w_e * sc.w_e));
  const MultiTimePoint& p = sc.reference;
  cplx d_t, d_x, unused_t, unused_x;
  const cplx f1 = sc.phi1.value_and_derivatives(p.X[0][0], p.X[0][1], d_t, d_x);
  const cplx f2 = sc.phi2.value_and_derivatives(p.X[1][0], p.X[1][1], unused_t, unused_x);
  const cplx f3 = sc.phi3.value_and_derivatives(p.X[2][0], p.X[2][1], unused_t, unused_x);
  const cplx psi = sc.a1 * f1 * r + sc.a2 * f2 * f3;
  const double w = std::norm(psi);
  if (!(w > kNodeFloor)) throw NodeError("node encountered");
  const auto v = covariant(psi, sc.a1 * d_t * r, sc.a1 * d_x * r, w);
  return std::max(std::abs(v[0]), std::abs(v[1]));
}

int dominant_branch(const DecayScenario& sc, const MultiTimePoint& p) {
  const Branches b = branches(sc, p);
  return std::norm(b.b1) >= std::norm(b.b2) ? 1 : 2;
}

double continuity_source(const DecayScenario& sc, const MultiTimePoint& p) {
  const Branches b = branches(sc, p);
  const cplx psi = b.b1 + b.b2;
  const double m1 = sc.phi1.mass(), m2 = sc.phi2.mass(), m3 = sc.phi3.mass();
  const cplx box = m1 * m1 * b.b1 + (m2 * m2 + m3 * m3) * b.b2;
  return (std::conj(psi) * box).imag();
}

std::vector<MultiTimePoint> two_stage_path(const DecayScenario& sc, const MultiTimePoint& start,
                                           double y_first, double s_first, double s_second,
                                           double ds) {
  DecayScenario first = sc;
  first.pointer_mass = 0.0;
  MultiTimePoint p = start;
  p.y = y_first;
  std::vector<MultiTimePoint> path = integrate_multitime(first, p, s_first, ds);
  MultiTimePoint settled = path.back();
  settled.y = sc.mu2;
  std::vector<MultiTimePoint> second = integrate_multitime(first, settled, s_second, ds);
  path.insert(path.end(), second.begin(), second.end());
  return path;
}

}  // namespace pilotwave
