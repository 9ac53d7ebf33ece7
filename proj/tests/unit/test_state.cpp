#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/field.hpp"
#include "pilotwave/fock_basis.hpp"
#include "pilotwave/state.hpp"

using namespace pilotwave;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

TEST(FockBasis, DimensionMatchesStarsAndBars) {
  for (int modes : {1, 2, 5, 32}) {
    for (int n_max : {0, 1, 2, 3}) {
      double expected = 0.0;
      for (int n = 0; n <= n_max; ++n) expected += binomial(modes + n - 1, n);
      EXPECT_EQ(FockBasis::dimension_for(modes, n_max), static_cast<std::size_t>(expected));
      if (expected < 20000) EXPECT_EQ(FockBasis(modes, n_max).size(), static_cast<std::size_t>(expected));
    }
  }
}

TEST(FockBasis, SectorsAreContiguousAndLookupsRoundTrip) {
  const FockBasis b(4, 3);
  for (int n = 0; n <= 3; ++n) {
    for (std::size_t i = b.sector_begin(n); i < b.sector_end(n); ++i) {
      EXPECT_EQ(b.sector(i), n);
      const auto sites = b.sites(i);
      EXPECT_EQ(static_cast<int>(sites.size()), n);
      EXPECT_TRUE(std::is_sorted(sites.begin(), sites.end()));
      EXPECT_EQ(b.find_sites(sites), i);
      const auto occ = b.occupation(i);
      EXPECT_EQ(std::accumulate(occ.begin(), occ.end(), 0), n);
      EXPECT_EQ(b.find_occupation(occ), i);
      double denom = 1.0;
      for (int m : occ) denom *= factorial(m);
      EXPECT_DOUBLE_EQ(b.ordered_count(i), factorial(n) / denom);
    }
  }
}

TEST(FockBasis, CapIsEnforced) {
  EXPECT_THROW(FockBasis(64, 3, 1000), StructuralError);
  EXPECT_THROW(FockBasis(0, 1), ParameterError);
}

TEST(SectorConfig, SortsAndValidates) {
  const Grid g{16, 0.5};
  const SectorConfig q({3.0, 1.0}, g);
  EXPECT_EQ(q.positions(), (std::vector<double>{1.0, 3.0}));
  EXPECT_EQ(q.sector(), 2);
  EXPECT_THROW(SectorConfig({8.0}, g), StructuralError);
  EXPECT_THROW(SectorConfig({-0.1}, g), StructuralError);
  EXPECT_EQ(q.with_added(2.0, g).positions(), (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_EQ(q.with_removed(0).positions(), (std::vector<double>{3.0}));
}

TEST(Grid, WrapAndCell) {
  const Grid g{16, 0.5};
  EXPECT_DOUBLE_EQ(g.wrap(8.25), 0.25);
  EXPECT_DOUBLE_EQ(g.wrap(-0.25), 7.75);
  EXPECT_EQ(g.cell_of(0.74), 1);
  EXPECT_EQ(g.cell_of(0.76), 2);
}

TEST(QuantumState, NormalizationAndBorn) {
  auto basis = std::make_shared<const FockBasis>(2, 2);
  Eigen::VectorXcd a = Eigen::VectorXcd::Ones(6);
  const QuantumState raw(basis, a);
  EXPECT_NEAR(norm_squared(raw), 6.0, 1e-14);
  EXPECT_THROW(born_density(raw), StructuralError);
  const auto p = born_density(raw, Normalization::Auto);
  for (double x : p) EXPECT_NEAR(x, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(norm_squared(raw.normalized()), 1.0, 1e-15);
  EXPECT_THROW(QuantumState(basis, Eigen::VectorXcd::Ones(5)), StructuralError);
}

TEST(QuantumState, ProjectionsSumToOne) {
  std::mt19937_64 gen(3);
  auto basis = std::make_shared<const FockBasis>(3, 2);
  const QuantumState s(basis, oracle::random_state(static_cast<Eigen::Index>(basis->size()), gen));
  double total = 0.0;
  for (int n = 0; n <= 2; ++n) total += project_expectation(s, SectorProjection{n});
  EXPECT_NEAR(total, 1.0, 1e-14);
  const LatticeConfig q{{1, 0, 1}};
  const std::size_t idx = lattice_index(*basis, q);
  EXPECT_NEAR(project_expectation(s, projection_onto(*basis, q)), std::norm(s.amplitude(idx)), 1e-15);
  EXPECT_EQ(lattice_config(*basis, idx), q);
  EXPECT_THROW(projection_onto(*basis, LatticeConfig{{3, 0, 0}}), StructuralError);
}

TEST(QuantumState, SectorFunctionsRoundTrip) {
  const Grid g{16, 0.5};
  auto basis = std::make_shared<const FockBasis>(16, 2);
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  std::vector<cplx> f1(16), f2(256);
  for (auto& v : f1) v = {nd(gen), nd(gen)};
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) f2[i * 16 + j] = f1[i] * f1[j] * 0.3;
  }
  const QuantumState s = QuantumState::from_sector_functions(basis, g, {{1, f1}, {2, f2}});
  const auto back1 = s.sector_function(1);
  const auto back2 = s.sector_function(2);
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(std::abs(back1[i] - f1[i]), 0.0, 1e-12);
  for (int i = 0; i < 256; ++i) EXPECT_NEAR(std::abs(back2[i] - f2[i]), 0.0, 1e-12);
  double p2 = 0.0;
  for (const auto& v : f2) p2 += std::norm(v) * g.dx * g.dx;
  EXPECT_NEAR(s.sector_probability(2), p2, 1e-12);
}

TEST(QuantumState, JsonRoundTrip) {
  const Grid g{16, 0.5};
  auto basis = std::make_shared<const FockBasis>(16, 2);
  std::mt19937_64 gen(9);
  const QuantumState s(basis, oracle::random_state(static_cast<Eigen::Index>(basis->size()), gen), g, 1.5);
  const QuantumState back = state_from_json(state_to_json(s));
  EXPECT_EQ(back.basis(), s.basis());
  EXPECT_DOUBLE_EQ(back.hbar(), 1.5);
  EXPECT_LT((back.amplitudes() - s.amplitudes()).norm(), 1e-14);

  auto lb = std::make_shared<const FockBasis>(2, 2);
  const QuantumState l(lb, oracle::random_state(6, gen));
  EXPECT_LT((state_from_json(state_to_json(l)).amplitudes() - l.amplitudes()).norm(), 0.0 + 1e-15);
}

TEST(SpectralKernel, MatchesModeSum) {
  const Grid g{32, 0.25};
  const SpectralKernel k(g);
  std::vector<double> w(32), dw(32);
  for (double x : {0.0, 0.1, 1.37, 3.999, 4.0, 7.9, 0.25 + 1e-9}) {
    k.weights(x, w.data(), dw.data());
    for (int j = 0; j < 32; ++j) EXPECT_NEAR(w[j], oracle::series_weight(32, 0.25, x, j), 1e-12) << x;
  }
}

TEST(SpectralKernel, InterpolatesResolvedPlaneWaveExactly) {
  const Grid g{32, 0.25};
  const SpectralKernel k(g);
  const double kx = 2.0 * std::numbers::pi * 3.0 / g.length();
  std::vector<cplx> nodes(32);
  for (int j = 0; j < 32; ++j) nodes[j] = std::polar(1.0, kx * g.node(j));
  for (double x : {0.3, 2.71, 6.66}) {
    EXPECT_NEAR(std::abs(interpolate_nodes(k, nodes, x) - std::polar(1.0, kx * x)), 0.0, 1e-12);
  }
}

TEST(SectorField, GradientMatchesFiniteDifference) {
  const Grid g{32, 0.25};
  auto basis = std::make_shared<const FockBasis>(32, 2);
  std::mt19937_64 gen(2);
  const QuantumState s(basis, oracle::random_state(static_cast<Eigen::Index>(basis->size()), gen), g);
  const SectorField f(s);
  const std::vector<double> x{1.3, 5.2};
  std::vector<cplx> grad(2);
  const cplx v = f.value_and_gradient(2, x, grad);
  EXPECT_NEAR(std::abs(v - f.value(2, x)), 0.0, 1e-13);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    auto p = x, m = x;
    p[i] += h;
    m[i] -= h;
    const cplx fd = (f.value(2, p) - f.value(2, m)) / (2 * h);
    EXPECT_NEAR(std::abs(fd - grad[i]), 0.0, 1e-5 * std::max(1.0, std::abs(grad[i])));
  }
  EXPECT_NEAR(std::abs(f.value(2, x) - f.value(2, std::vector<double>{5.2, 1.3})), 0.0, 1e-13);
}
