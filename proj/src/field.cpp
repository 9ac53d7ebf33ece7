#include "pilotwave/field.hpp"

#include <cmath>
#include <numbers>

#include "pilotwave/errors.hpp"

namespace pilotwave {

SpectralKernel::SpectralKernel(const Grid& grid) : grid_(grid), half_(grid.points / 2) {
  if (grid.points < 2 || grid.points % 2 != 0) {
    throw ParameterError("spectral interpolation needs an even number of grid points");
  }
  const int G = grid.points;
  half_shift_.resize(G);
  dirichlet_shift_.resize(G);
  for (int j = 0; j < G; ++j) {
    half_shift_[j] = std::polar(1.0, -std::numbers::pi * j / G);
    dirichlet_shift_[j] = std::polar(1.0, -std::numbers::pi * (G - 1) * j / G);
  }
}

int SpectralKernel::node_of(double x) const {
  const double r = x / grid_.dx;
  const double nearest = std::round(r);
  if (std::abs(r - nearest) > 1e-12) return -1;
  long j = static_cast<long>(nearest) % grid_.points;
  if (j < 0) j += grid_.points;
  return static_cast<int>(j);
}

void SpectralKernel::weights_by_series(double u, double& value, double& deriv) const {
  const int G = grid_.points;
  const double base = 2.0 * std::numbers::pi / grid_.length();
  const double theta = base * u;
  const double c1 = std::cos(theta);
  const double s1 = std::sin(theta);
  double c = 1.0, s = 0.0;
  value = 1.0;
  deriv = 0.0;
  for (int m = 1; m <= half_; ++m) {
    const double cn = c * c1 - s * s1;
    const double sn = s * c1 + c * s1;
    c = cn;
    s = sn;
    const double mult = m < half_ ? 2.0 : 1.0;
    value += mult * c;
    deriv -= mult * base * m * s;
  }
  value /= G;
  deriv /= G;
}

void SpectralKernel::weights(double x, double* k, double* dk) const {
  const int G = grid_.points;
  const double base = 2.0 * std::numbers::pi / grid_.length();
  const double a = 0.5 * (G - 1);
  const double theta0 = base * x;
  const cplx half0 = std::polar(1.0, 0.5 * theta0);
  const cplx dir0 = std::polar(1.0, a * theta0);
  const cplx nyq0 = std::polar(1.0, half_ * theta0);
  for (int j = 0; j < G; ++j) {
    const cplx hj = half0 * half_shift_[j];
    const double s = hj.imag();
    double value, deriv;
    if (std::abs(s) < 0.05) {
      weights_by_series(x - grid_.node(j), value, deriv);
    } else {
      const double c = hj.real();
      const cplx dj = dir0 * dirichlet_shift_[j];
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      const double ratio = dj.imag() / s;
      value = (ratio + sign * nyq0.real()) / G;
      deriv = base / G *
              ((a * dj.real() * s - 0.5 * dj.imag() * c) / (s * s) - half_ * sign * nyq0.imag());
    }
    if (k) k[j] = value;
    if (dk) dk[j] = deriv;
  }
  const int node = node_of(x);
  if (node >= 0 && k) {
    for (int j = 0; j < G; ++j) k[j] = 0.0;
    k[node] = 1.0;
  }
}

cplx interpolate_nodes(const SpectralKernel& kernel, std::span<const cplx> nodes, double x) {
  const int node = kernel.node_of(x);
  if (node >= 0) return nodes[node];
  const int G = kernel.grid().points;
  std::vector<double> k(G);
  kernel.weights(x, k.data(), nullptr);
  cplx out = 0.0;
  for (int j = 0; j < G; ++j) out += nodes[j] * k[j];
  return out;
}

SectorField::SectorField(const QuantumState& state)
    : kernel_(state.grid()), hbar_(state.hbar()) {
  const int n_max = state.basis().n_max();
  arrays_.reserve(n_max + 1);
  for (int n = 0; n <= n_max; ++n) arrays_.push_back(state.sector_function(n));
}

namespace {

// Contract an ordered G^n array with per-coordinate weights, last coordinate
// first. A coordinate sitting on a node is contracted as a slice.
cplx contract(const std::vector<cplx>& array, int n, int G,
              const std::vector<const double*>& w, const std::vector<int>& nodes) {
  if (n == 0) return array[0];
  std::vector<cplx> cur;
  const cplx* src = array.data();
  std::size_t size = array.size();
  std::vector<cplx> next;
  for (int i = n - 1; i >= 0; --i) {
    const std::size_t outer = size / G;
    next.assign(outer, cplx(0.0));
    if (nodes[i] >= 0) {
      for (std::size_t p = 0; p < outer; ++p) next[p] = src[p * G + nodes[i]];
    } else {
      const double* k = w[i];
      for (std::size_t p = 0; p < outer; ++p) {
        const cplx* row = src + p * G;
        double re = 0.0, im = 0.0;
        for (int t = 0; t < G; ++t) {
          re += row[t].real() * k[t];
          im += row[t].imag() * k[t];
        }
        next[p] = {re, im};
      }
    }
    cur.swap(next);
    src = cur.data();
    size = outer;
  }
  return cur[0];
}

}  // namespace

cplx SectorField::value(int n, std::span<const double> x) const {
  if (n < 0 || n > n_max()) throw StructuralError("sector outside truncation");
  if (static_cast<int>(x.size()) != n) throw StructuralError("position count does not match sector");
  const int G = grid().points;
  std::vector<double> buf(static_cast<std::size_t>(n) * G);
  std::vector<const double*> w(n);
  std::vector<int> nodes(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = kernel_.node_of(x[i]);
    w[i] = buf.data() + static_cast<std::size_t>(i) * G;
    if (nodes[i] < 0) kernel_.weights(x[i], buf.data() + static_cast<std::size_t>(i) * G, nullptr);
  }
  return contract(arrays_[n], n, G, w, nodes);
}

cplx SectorField::value_and_gradient(int n, std::span<const double> x,
                                     std::span<cplx> grad) const {
  if (n < 0 || n > n_max()) throw StructuralError("sector outside truncation");
  if (static_cast<int>(x.size()) != n || grad.size() != x.size()) {
    throw StructuralError("position count does not match sector");
  }
  const int G = grid().points;
  std::vector<double> kb(static_cast<std::size_t>(n) * G), db(static_cast<std::size_t>(n) * G);
  std::vector<const double*> w(n);
  std::vector<int> nodes(n, -1);
  for (int i = 0; i < n; ++i) {
    kernel_.weights(x[i], kb.data() + static_cast<std::size_t>(i) * G,
                    db.data() + static_cast<std::size_t>(i) * G);
    w[i] = kb.data() + static_cast<std::size_t>(i) * G;
    nodes[i] = kernel_.node_of(x[i]);
  }
  const cplx psi = contract(arrays_[n], n, G, w, nodes);
  for (int i = 0; i < n; ++i) {
    std::vector<const double*> wd = w;
    std::vector<int> nd = nodes;
    wd[i] = db.data() + static_cast<std::size_t>(i) * G;
    nd[i] = -1;
    grad[i] = contract(arrays_[n], n, G, wd, nd);
  }
  return psi;
}

void SectorField::partial_nodes(std::span<const double> x, std::vector<cplx>& phi) const {
  const int n = static_cast<int>(x.size());
  if (n + 1 > n_max()) throw StructuralError("no sector above the truncation");
  const int G = grid().points;
  const std::vector<cplx>& a = arrays_[n + 1];
  phi.assign(G, cplx(0.0));
  if (n == 0) {
    for (int j = 0; j < G; ++j) phi[j] = a[j];
    return;
  }
  // psi_{n+1}(x_1..x_n, y_j): contract the first n coordinates, keep the last.
  std::vector<double> buf(static_cast<std::size_t>(n) * G);
  std::vector<int> nodes(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = kernel_.node_of(x[i]);
    if (nodes[i] < 0) kernel_.weights(x[i], buf.data() + static_cast<std::size_t>(i) * G, nullptr);
  }
  // Walk all prefixes (t_1..t_n) with their weight products.
  std::vector<int> t(n, 0);
  const std::size_t prefixes = a.size() / G;
  for (std::size_t p = 0; p < prefixes; ++p) {
    double weight = 1.0;
    std::size_t rem = p;
    for (int i = n - 1; i >= 0; --i) {
      t[i] = static_cast<int>(rem % G);
      rem /= G;
    }
    for (int i = 0; i < n && weight != 0.0; ++i) {
      weight *= nodes[i] >= 0 ? (t[i] == nodes[i] ? 1.0 : 0.0)
                              : buf[static_cast<std::size_t>(i) * G + t[i]];
    }
    if (weight == 0.0) continue;
    const cplx* row = a.data() + p * G;
    for (int j = 0; j < G; ++j) phi[j] += row[j] * weight;
  }
}

}  // namespace pilotwave

namespace pilotwave {

std::vector<double> kernel_matrix(const SpectralKernel& kernel, std::span<const double> pts) {
  const int G = kernel.grid().points;
  std::vector<double> k(pts.size() * G);
  for (std::size_t p = 0; p < pts.size(); ++p) kernel.weights(pts[p], k.data() + p * G, nullptr);
  return k;
}

std::vector<cplx> SectorField::tensor_values(int n, std::span<const double> pts) const {
  if (n < 0 || n > n_max()) throw StructuralError("sector outside truncation");
  if (n > 2) throw StructuralError("tensor evaluation supports sectors up to 2");
  if (n == 0) return {arrays_[0][0]};
  const int G = grid().points;
  const auto P = static_cast<Eigen::Index>(pts.size());
  const std::vector<double> kd = kernel_matrix(kernel_, pts);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      K(kd.data(), P, G);
  const Eigen::MatrixXcd Kc = K.cast<cplx>();
  std::vector<cplx> out(static_cast<std::size_t>(n == 1 ? P : P * P));
  if (n == 1) {
    const Eigen::Map<const Eigen::VectorXcd> a(arrays_[1].data(), G);
    Eigen::Map<Eigen::VectorXcd>(out.data(), P) = Kc * a;
  } else {
    const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        A(arrays_[2].data(), G, G);
    Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out.data(), P,
                                                                                      P) =
        Kc * A * Kc.transpose();
  }
  return out;
}

}  // namespace pilotwave
