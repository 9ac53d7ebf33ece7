#include "pilotwave/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pilotwave/errors.hpp"
#include "pilotwave/format.hpp"

namespace pilotwave {

namespace {

using TripletList = std::vector<Eigen::Triplet<cplx>>;

class OperatorBuilder {
 public:
  explicit OperatorBuilder(const FockBasis& basis) : basis_(basis) {}

  // coeff * a+_i a_j applied to every basis state (i != j allowed or equal).
  void hop(int i, int j, cplx coeff, TripletList& out) const {
    for (std::size_t b = 0; b < basis_.size(); ++b) {
      std::vector<int> occ = basis_.occupation(b);
      if (occ[j] == 0) continue;
      double factor = std::sqrt(static_cast<double>(occ[j]));
      occ[j] -= 1;
      factor *= std::sqrt(static_cast<double>(occ[i] + 1));
      occ[i] += 1;
      push(occ, b, coeff * factor, out);
    }
  }

  // coeff * (a+_i)^k for k = 1, 2, together with its adjoint.
  void create(int i, int k, double coeff, TripletList& out) const {
    for (std::size_t b = 0; b < basis_.size(); ++b) {
      std::vector<int> occ = basis_.occupation(b);
      if (basis_.sector(b) + k > basis_.n_max()) continue;
      double factor = 1.0;
      for (int r = 1; r <= k; ++r) factor *= std::sqrt(static_cast<double>(occ[i] + r));
      occ[i] += k;
      const auto a = basis_.find_occupation(occ);
      out.emplace_back(static_cast<int>(*a), static_cast<int>(b), coeff * factor);
      out.emplace_back(static_cast<int>(b), static_cast<int>(*a), coeff * factor);
    }
  }

  // sum_ij kernel(i, j) a+_i a_j in one pass over the basis.
  template <class Kernel>
  void one_body(int modes, const Kernel& kernel, TripletList& out) const {
    std::vector<int> next;
    for (std::size_t b = 0; b < basis_.size(); ++b) {
      const auto sites = basis_.sites(b);
      for (std::size_t p = 0; p < sites.size();) {
        const int j = sites[p];
        std::size_t q = p;
        while (q < sites.size() && sites[q] == j) ++q;
        const double occ_j = static_cast<double>(q - p);
        for (int i = 0; i < modes; ++i) {
          if (i == j) {
            out.emplace_back(static_cast<int>(b), static_cast<int>(b), kernel(i, j) * occ_j);
            continue;
          }
          next.assign(sites.begin(), sites.end());
          next.erase(next.begin() + static_cast<std::ptrdiff_t>(p));
          const auto at = std::upper_bound(next.begin(), next.end(), i);
          const auto lo = std::lower_bound(next.begin(), next.end(), i);
          const double occ_i = static_cast<double>(at - lo);
          next.insert(at, i);
          const auto a = basis_.find_sites(next);
          out.emplace_back(static_cast<int>(*a), static_cast<int>(b),
                           kernel(i, j) * std::sqrt(occ_j * (occ_i + 1.0)));
        }
        p = q;
      }
    }
  }

  void number(int i, double coeff, TripletList& out) const {
    for (std::size_t b = 0; b < basis_.size(); ++b) {
      const int occ = basis_.occupation(b)[i];
      if (occ != 0) out.emplace_back(static_cast<int>(b), static_cast<int>(b), coeff * occ);
    }
  }

 private:
  void push(const std::vector<int>& occ, std::size_t b, cplx value, TripletList& out) const {
    const auto a = basis_.find_occupation(occ);
    out.emplace_back(static_cast<int>(*a), static_cast<int>(b), value);
  }

  const FockBasis& basis_;
};

SparseMatrix assemble(std::size_t dim, const TripletList& t) {
  SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(t.begin(), t.end());
  m.prune(cplx(0.0), 0.0);
  m.makeCompressed();
  return m;
}

double periodic_distance(double a, double b, double length) {
  double d = std::fmod(std::abs(a - b), length);
  return std::min(d, length - d);
}

}  // namespace

ModelHamiltonian::ModelHamiltonian(std::string model, std::shared_ptr<const FockBasis> basis,
                                   SparseMatrix h0, SparseMatrix h_int,
                                   std::optional<Grid> grid, double hbar)
    : model_(std::move(model)),
      basis_(std::move(basis)),
      h0_(std::move(h0)),
      h_int_(std::move(h_int)),
      grid_(grid),
      hbar_(hbar),
      cache_(std::make_shared<Cache>()) {
  const auto dim = static_cast<Eigen::Index>(basis_->size());
  if (h0_.rows() != dim || h0_.cols() != dim || h_int_.rows() != dim || h_int_.cols() != dim) {
    throw StructuralError("Hamiltonian blocks do not match the basis dimension");
  }
  full_ = h0_ + h_int_;
  full_.makeCompressed();
}

double ModelHamiltonian::form_factor_at(double y) const {
  if (!emission_) return 0.0;
  const double L = grid_->length();
  const double w = emission_->width;
  double f = 0.0;
  for (double s : emission_->sources) {
    const double d = periodic_distance(y, s, L);
    f += std::exp(-d * d / (2.0 * w * w));
  }
  return f;
}

void ModelHamiltonian::set_emission(EmissionParams params, std::vector<double> f) {
  emission_ = std::move(params);
  form_factor_ = std::move(f);
  const int samples = 64 * grid_->points;
  const double h = grid_->length() / samples;
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double v = form_factor_at((i + 0.5) * h);
    sum += v * v * h;
  }
  form_factor_norm_ = std::sqrt(sum);
}

double ModelHamiltonian::hermiticity_defect() const {
  const SparseMatrix adj = full_.adjoint();
  const SparseMatrix diff = full_ - adj;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

ModelHamiltonian ModelHamiltonian::conjugated() const {
  ModelHamiltonian out(model_, basis_, h0_.conjugate(), h_int_.conjugate(), grid_, hbar_);
  out.emission_ = emission_;
  out.form_factor_ = form_factor_;
  out.form_factor_norm_ = form_factor_norm_;
  return out;
}

const Spectrum& ModelHamiltonian::spectrum() const {
  std::call_once(cache_->once, [this] {
    const Eigen::MatrixXcd dense = Eigen::MatrixXcd(full_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense);
    if (solver.info() != Eigen::Success) throw EvolutionError("eigendecomposition failed");
    cache_->spectrum.values = solver.eigenvalues();
    cache_->spectrum.vectors = solver.eigenvectors();
  });
  return cache_->spectrum;
}

QuantumState ModelHamiltonian::zero_state() const {
  return QuantumState(basis_, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension())),
                      grid_, hbar_);
}

ModelHamiltonian build_bell_lattice_model(const BellLatticeParams& p, double hbar) {
  if (p.sites < 2) throw ParameterError("bell lattice model needs sites >= 2");
  if (p.n_max < 1) throw ParameterError("bell lattice model needs n_max >= 1");
  auto basis = std::make_shared<const FockBasis>(p.sites, p.n_max, p.dimension_cap);
  const OperatorBuilder ops(*basis);
  TripletList free_part, interaction;
  const cplx phase = std::polar(1.0, p.hop_phase);
  for (int x = 0; x + 1 < p.sites; ++x) {
    ops.hop(x + 1, x, -p.hop * phase, free_part);
    ops.hop(x, x + 1, -p.hop * std::conj(phase), free_part);
  }
  for (int x = 0; x < p.sites; ++x) {
    if (p.onsite != 0.0) ops.number(x, p.onsite, free_part);
    if (p.single_coupling != 0.0) ops.create(x, 1, p.single_coupling, interaction);
    if (p.pair_coupling != 0.0) ops.create(x, 2, p.pair_coupling, interaction);
  }
  return ModelHamiltonian("bell-lattice", basis, assemble(basis->size(), free_part),
                          assemble(basis->size(), interaction), std::nullopt, hbar);
}

ModelHamiltonian build_emission_absorption_model(const EmissionParams& p) {
  if (p.points < 16) throw ParameterError("emission model needs at least 16 grid points");
  if (p.points % 2 != 0) throw ParameterError("emission model needs an even number of grid points");
  if (!(p.dx > 0)) throw ParameterError("grid spacing dx must be positive");
  if (!(p.width >= 2.0 * p.dx)) {
    throw ParameterError("form factor under-resolved: width " + format_double(p.width) +
                         " < 2 dx = " + format_double(2.0 * p.dx));
  }
  if (!(p.mass > 0)) throw ParameterError("mass must be positive");
  if (!(p.hbar > 0)) throw ParameterError("hbar must be positive");
  if (p.n_max < 1) throw ParameterError("emission model needs n_max >= 1");

  const Grid grid{p.points, p.dx};
  auto basis = std::make_shared<const FockBasis>(p.points, p.n_max, p.dimension_cap);
  const OperatorBuilder ops(*basis);
  const int G = p.points;
  const double L = grid.length();
  const int half = G / 2;

  // Spectral kinetic kernel T_ij = (hbar^2/2m) (1/G) sum_m k_m^2 cos(k_m (x_i - x_j)).
  std::vector<double> kinetic(G);
  for (int d = 0; d < G; ++d) {
    const int e = std::min(d, G - d);
    double s = 0.0;
    for (int m = 1; m < half; ++m) {
      const double k = 2.0 * std::numbers::pi * m / L;
      s += 2.0 * k * k * std::cos(k * e * p.dx);
    }
    const double kn = std::numbers::pi / p.dx;
    s += kn * kn * ((d % 2 == 0) ? 1.0 : -1.0);
    kinetic[d] = p.hbar * p.hbar / (2.0 * p.mass) * s / G;
  }

  TripletList free_part, interaction;
  ops.one_body(G, [&](int i, int j) { return cplx(kinetic[(i - j + G) % G]); }, free_part);

  EmissionParams params = p;
  if (params.sources.empty()) params.sources.push_back(0.5 * L);
  for (double& s : params.sources) s = grid.wrap(s);
  std::vector<double> f(G, 0.0);
  for (int j = 0; j < G; ++j) {
    for (double s : params.sources) {
      const double d = periodic_distance(grid.node(j), s, L);
      f[j] += std::exp(-d * d / (2.0 * p.width * p.width));
    }
  }
  const double sqrt_dx = std::sqrt(p.dx);
  for (int j = 0; j < G; ++j) {
    if (p.g != 0.0 && f[j] != 0.0) ops.create(j, 1, p.g * sqrt_dx * f[j], interaction);
  }

  ModelHamiltonian h("btqft-emission", basis, assemble(basis->size(), free_part),
                     assemble(basis->size(), interaction), grid, p.hbar);
  h.set_emission(std::move(params), std::move(f));
  return h;
}

std::vector<Triplet> triplets(const SparseMatrix& m) {
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      out.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()),
                     it.value()});
    }
  }
  return out;
}

std::string triplets_csv(const SparseMatrix& m) {
  std::ostringstream os;
  os << "row,col,re,im\n";
  for (const auto& t : triplets(m)) {
    os << t.row << ',' << t.col << ',' << format_double(t.value.real()) << ','
       << format_double(t.value.imag()) << '\n';
  }
  return os.str();
}

}  // namespace pilotwave
