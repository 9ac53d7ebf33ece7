#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pilotwave/bell.hpp"
#include "pilotwave/btqft.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/verify.hpp"

using namespace pilotwave;

namespace {

ModelHamiltonian emission(int n_max, double g = 0.3, std::vector<double> sources = {}) {
  EmissionParams p;
  p.n_max = n_max;
  p.g = g;
  p.sources = std::move(sources);
  return build_emission_absorption_model(p);
}

QuantumState random_state(const ModelHamiltonian& h, std::mt19937_64& gen) {
  return QuantumState(h.basis_ptr(), oracle::random_state(static_cast<Eigen::Index>(h.dimension()), gen),
                      h.grid());
}

// Normalized one-particle state from node values.
QuantumState one_particle(const ModelHamiltonian& h, const std::vector<cplx>& f) {
  return QuantumState::from_sector_functions(h.basis_ptr(), *h.grid(), {{1, f}}).normalized();
}

std::vector<cplx> packet(const Grid& g, double center, double k, double width = 1.0) {
  std::vector<cplx> f(g.points);
  for (int j = 0; j < g.points; ++j) {
    double d = g.node(j) - center;
    d -= g.length() * std::round(d / g.length());
    f[j] = std::exp(-d * d / (2 * width * width)) * std::polar(1.0, k * d);
  }
  return f;
}

}  // namespace

TEST(Velocity, RealPacketIsAtRest) {
  const ModelHamiltonian h = emission(1, 0.0);
  const QuantumState s = one_particle(h, packet(*h.grid(), 4.0, 0.0));
  for (double x : {1.0, 3.3, 4.0, 6.1}) {
    EXPECT_NEAR(velocity_field(s, SectorConfig({x}, *h.grid()))[0], 0.0, 1e-14);
  }
}

TEST(Velocity, PlaneWaveMovesAtK) {
  const ModelHamiltonian h = emission(1, 0.0);
  const Grid& g = *h.grid();
  const double k = 2.0 * std::numbers::pi * 3.0 / g.length();
  std::vector<cplx> f(g.points);
  for (int j = 0; j < g.points; ++j) f[j] = std::polar(1.0, k * g.node(j));
  const QuantumState s = one_particle(h, f);
  for (double x : {0.1, 2.37, 7.9}) {
    EXPECT_NEAR(velocity_field(s, SectorConfig({x}, g))[0], k, 1e-6);
  }
  EXPECT_NEAR(velocity_field(s, SectorConfig({2.0}, g), 2.0)[0], k / 2.0, 1e-6);
}

TEST(Velocity, ProductStateFactorizes) {
  const ModelHamiltonian h = emission(2, 0.0);
  const Grid& g = *h.grid();
  const auto f = packet(g, 3.0, 0.8, 1.2);
  std::vector<cplx> f2(g.points * g.points);
  for (int i = 0; i < g.points; ++i) {
    for (int j = 0; j < g.points; ++j) f2[i * g.points + j] = f[i] * f[j];
  }
  const QuantumState s =
      QuantumState::from_sector_functions(h.basis_ptr(), g, {{2, f2}}).normalized();
  const double v_ref = velocity_field(s, SectorConfig({1.0, 2.5}, g))[0];
  for (double x2 : {3.0, 4.4, 5.5}) {
    EXPECT_NEAR(velocity_field(s, SectorConfig({1.0, x2}, g))[0], v_ref, 1e-8);
  }
}

TEST(Velocity, NodeIsReported) {
  const ModelHamiltonian h = emission(1, 0.0);
  const Grid& g = *h.grid();
  std::vector<cplx> f(g.points);
  for (int j = 0; j < g.points; ++j) f[j] = std::sin(2.0 * std::numbers::pi * g.node(j) / g.length());
  const QuantumState s = one_particle(h, f);
  EXPECT_THROW(velocity_field(s, SectorConfig({0.0}, g)), NodeError);
}

TEST(BtqftRates, CellRatesEqualFockBasisRates) {
  const ModelHamiltonian h = emission(2);
  const Grid& g = *h.grid();
  std::mt19937_64 gen(1);
  const QuantumState s = random_state(h, gen);
  const FockBasis& b = h.basis();
  const SectorField field(s);
  for (std::size_t m = 0; m < b.sector_end(1); ++m) {
    const auto sites = b.sites(m);
    const BtqftRateTable t = btqft_rates(field, SectorConfig::at_cells(sites, g), h);
    const JumpRateTable fock = bell_rates(s, m, h);
    for (int j = 0; j < g.points; ++j) {
      std::vector<int> up(sites.begin(), sites.end());
      up.insert(std::upper_bound(up.begin(), up.end(), j), j);
      const double expected = fock.rate_to(*b.find_sites(up));
      EXPECT_NEAR(t.creation[j], expected, 1e-10 * std::max(1.0, expected));
    }
    for (std::size_t i = 0; i < sites.size(); ++i) {
      std::vector<int> down(sites.begin(), sites.end());
      down.erase(down.begin() + static_cast<long>(i));
      const double expected = fock.rate_to(*b.find_sites(down));
      EXPECT_NEAR(t.annihilation[i], expected, 1e-10 * std::max(1.0, expected));
    }
  }
}

TEST(BtqftRates, MinimalityOverAllCellPairs) {
  const ModelHamiltonian h = emission(2);
  const Grid& g = *h.grid();
  std::mt19937_64 gen(2);
  const QuantumState s = random_state(h, gen);
  const SectorField field(s);
  const FockBasis& b = h.basis();
  for (std::size_t m = 0; m < b.sector_end(1); ++m) {
    const auto sites = b.sites(m);
    const BtqftRateTable up = btqft_rates(field, SectorConfig::at_cells(sites, g), h);
    for (int j = 0; j < g.points; ++j) {
      std::vector<int> dest(sites.begin(), sites.end());
      dest.insert(std::upper_bound(dest.begin(), dest.end(), j), j);
      const BtqftRateTable down = btqft_rates(field, SectorConfig::at_cells(dest, g), h);
      const auto pos = std::find(dest.begin(), dest.end(), j) - dest.begin();
      EXPECT_EQ(std::min(up.creation[j], down.annihilation[static_cast<std::size_t>(pos)]), 0.0);
    }
  }
}

TEST(BtqftRates, ZeroCouplingGivesZeroRates) {
  const ModelHamiltonian h = emission(2, 0.0);
  std::mt19937_64 gen(3);
  const QuantumState s = random_state(h, gen);
  const BtqftRateTable t = btqft_rates(s, SectorConfig({1.3}, *h.grid()), h);
  EXPECT_EQ(t.total(), 0.0);
}

TEST(BtqftRates, ContinuousDensityReducesToCellValues) {
  const ModelHamiltonian h = emission(1);
  const Grid& g = *h.grid();
  std::mt19937_64 gen(4);
  const QuantumState s = random_state(h, gen);
  const SectorField field(s);
  const SectorConfig vac({}, g);
  const BtqftRateTable t = btqft_rates(field, vac, h);
  for (int j : {3, 17, 30}) {
    EXPECT_NEAR(creation_density(field, vac, g.node(j), h) * g.dx, t.creation[j], 1e-12);
  }
}

TEST(BtqftRates, SectorFluxMatchesExactEvolution) {
  const ModelHamiltonian h = emission(2);
  std::mt19937_64 gen(5);
  const QuantumState s = random_state(h, gen);
  EXPECT_LT(check_master_equation(h, s, {0.1, 0.4}).max_residual, 1e-5);
  const ModelHamiltonian free = emission(2, 0.0);
  EXPECT_LT(check_master_equation(free, s, {0.3}).max_residual, 1e-10);
}

TEST(Flow, StationaryStateKeepsConfiguration) {
  const ModelHamiltonian h = emission(1, 0.0);
  const Grid& g = *h.grid();
  const QuantumState s = one_particle(h, std::vector<cplx>(g.points, 1.0));
  PdmpState st{SectorConfig({2.7}, g), s, 0.0};
  for (int k = 0; k < 20; ++k) st = flow_step(st, h, 0.05);
  EXPECT_NEAR(st.config.positions()[0], 2.7, 1e-12);
  EXPECT_NEAR(st.t, 1.0, 1e-12);
}

TEST(Flow, ReversalWithConjugatedStateReturns) {
  const ModelHamiltonian h = emission(1, 0.0);
  const Grid& g = *h.grid();
  const QuantumState s = one_particle(h, packet(g, 4.0, 0.785, 1.0));
  const PdmpState fwd = flow_step(PdmpState{SectorConfig({4.3}, g), s, 0.0}, h, 1e-3);
  const PdmpState back = flow_step(PdmpState{fwd.config, fwd.psi.conjugated(), 0.0}, h.conjugated(), 1e-3);
  EXPECT_NEAR(back.config.positions()[0], 4.3, 1e-8);
  EXPECT_GT(std::abs(fwd.config.positions()[0] - 4.3), 1e-4);
}

TEST(Flow, EnsembleMeanFollowsExactMean) {
  const ModelHamiltonian h = emission(1, 0.0);
  const Grid& g = *h.grid();
  const double center = 3.0, k = 2.0 * std::numbers::pi / g.length();
  const QuantumState s = one_particle(h, packet(g, center, k));
  BtqftOptions opt;
  opt.checkpoints = {1.0};
  opt.record_events = false;
  const std::size_t M = 2000;
  const BtqftEnsemble ens = run_btqft_ensemble(h, s, M, 1.0, 0.01, opt, 21);
  ASSERT_EQ(ens.flagged, 0u);
  auto unwrap = [&](double x) { return x - g.length() * std::round((x - center) / g.length()); };
  double disp = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    disp += unwrap(ens.records[i].checkpoints.back().positions[0]) - unwrap(ens.initial[i].positions()[0]);
  }
  disp /= M;
  // Exact mean over one period centred on the packet, from a fine sum of the
  // interpolated density.
  auto mean_x = [&](const QuantumState& st) {
    const SectorField f(st);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 4096; ++i) {
      const double x = center - 0.5 * g.length() + (i + 0.5) * g.length() / 4096;
      const std::vector<double> xs{g.wrap(x)};
      const double w = std::norm(f.value(1, xs));
      num += x * w;
      den += w;
    }
    return num / den;
  };
  const double exact = mean_x(Propagator(h, s).at(1.0)) - mean_x(s);
  EXPECT_NEAR(exact, k, 0.02 * k);
  EXPECT_NEAR(disp, exact, 0.02 * k);
}

TEST(BtqftProcess, NoCouplingNoJumps) {
  const ModelHamiltonian h = emission(1, 0.0);
  const QuantumState s = one_particle(h, packet(*h.grid(), 4.0, 0.5));
  BtqftOptions opt;
  const BtqftEnsemble ens = run_btqft_ensemble(h, s, 10000, 0.1, 0.01, opt, 5);
  std::size_t jumps = 0;
  for (const auto& r : ens.records) jumps += r.jump_count();
  EXPECT_EQ(jumps, 0u);
  EXPECT_EQ(ens.flagged, 0u);
}

TEST(BtqftProcess, EmissionAbsorptionEventStructure) {
  // Two sources, photon vacuum at t = 0.
  const ModelHamiltonian h = emission(2, 1.5, {2.0, 6.0});
  const QuantumState vac = QuantumState::basis_state(h.basis_ptr(), 0, h.grid());
  BtqftOptions opt;
  opt.checkpoints = {1.0};
  const std::size_t M = 2000;
  const BtqftEnsemble ens = run_btqft_ensemble(h, vac, M, 1.0, 0.01, opt, 17);
  EXPECT_EQ(ens.flagged, 0u);
  EXPECT_EQ(ens.counters.bound_violations, 0u);
  std::size_t emit_absorb = 0;
  for (const auto& r : ens.records) {
    int n = 0;
    bool created = false, absorbed_after = false;
    for (const auto& e : r.events) {
      if (e.kind == EventKind::Creation) {
        EXPECT_EQ(e.destination_id, n + 1);
        EXPECT_EQ(static_cast<int>(e.positions.size()), n + 1);
        EXPECT_NE(std::find(e.positions.begin(), e.positions.end(), e.destination_position), e.positions.end());
        n += 1;
        created = true;
      } else if (e.kind == EventKind::Annihilation) {
        EXPECT_EQ(e.destination_id, n - 1);
        EXPECT_EQ(static_cast<int>(e.positions.size()), n - 1);
        n -= 1;
        absorbed_after = absorbed_after || created;
      }
    }
    emit_absorb += absorbed_after;
    EXPECT_EQ(r.checkpoints.back().config_id, n);
  }
  EXPECT_GT(emit_absorb, 0u);
  const QuantumState exact = Propagator(h, vac).at(1.0);
  for (int n = 0; n <= 2; ++n) {
    double count = 0.0;
    for (const auto& r : ens.records) count += r.checkpoints.back().config_id == n;
    const double p = exact.sector_probability(n);
    EXPECT_NEAR(count / M, p, 2.0 * std::sqrt(p * (1 - p) / M)) << "sector " << n;
  }
}

TEST(BtqftProcess, SectorOccupancyMatchesExactState) {
  const ModelHamiltonian h = emission(1);
  std::vector<cplx> f = packet(*h.grid(), 2.0, 2.0);
  const QuantumState one = one_particle(h, f);
  Eigen::VectorXcd c = one.amplitudes();
  c[0] = 1.0;
  const QuantumState s = one.with_amplitudes(c).normalized();
  VerifyModel m{"single", h, s};
  m.tv_threshold = 0.02;
  m.position_tv_threshold = 0.05;
  const EnsembleReport r = check_equivariance(m, 20000, {1.0}, 31);
  ASSERT_EQ(r.results.size(), 2u);
  EXPECT_EQ(r.results[0].partition, "sector-marginal");
  EXPECT_LT(r.results[0].tv, 0.02);
  EXPECT_TRUE(r.pass()) << r.summary();
}

TEST(BtqftProcess, DeterministicAcrossWorkers) {
  const ModelHamiltonian h = emission(1);
  const QuantumState s = one_particle(h, packet(*h.grid(), 2.0, 2.0));
  BtqftOptions opt;
  opt.checkpoints = {0.5};
  const auto a = run_btqft_ensemble(h, s, 200, 0.5, 0.01, opt, 9, 1);
  const auto b = run_btqft_ensemble(h, s, 200, 0.5, 0.01, opt, 9, 4);
  EXPECT_EQ(trajectories_csv(a.records), trajectories_csv(b.records));
}

TEST(BornSampler, MatchesSectorProbabilities) {
  const ModelHamiltonian h = emission(2);
  std::mt19937_64 gen(6);
  const QuantumState s = random_state(h, gen);
  std::vector<double> probs;
  for (int n = 0; n <= 2; ++n) probs.push_back(s.sector_probability(n));
  const BornSampler sampler(SectorField(s), probs);
  Rng rng(3, 0);
  std::vector<double> counts(3, 0.0);
  const int M = 20000;
  for (int i = 0; i < M; ++i) counts[sampler.draw(rng).sector()] += 1.0;
  for (int n = 0; n <= 2; ++n) {
    EXPECT_NEAR(counts[n] / M, probs[n], 4.0 * std::sqrt(probs[n] * (1 - probs[n]) / M));
  }
}
