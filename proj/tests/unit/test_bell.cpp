#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pilotwave/bell.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/verify.hpp"

using namespace pilotwave;

namespace {

ModelHamiltonian two_site(double phase = 0.7) {
  BellLatticeParams b;
  b.hop_phase = phase;
  b.pair_coupling = 0.4;
  b.single_coupling = 0.3;
  b.onsite = 0.2;
  return build_bell_lattice_model(b);
}

QuantumState random_state(const ModelHamiltonian& h, std::mt19937_64& gen) {
  return QuantumState(h.basis_ptr(), oracle::random_state(static_cast<Eigen::Index>(h.dimension()), gen));
}

}  // namespace

TEST(BellRates, MinimalityIsExact) {
  const ModelHamiltonian h = two_site();
  std::mt19937_64 gen(1);
  for (int draw = 0; draw < 200; ++draw) {
    const QuantumState s = random_state(h, gen);
    for (std::size_t a = 0; a < h.dimension(); ++a) {
      const JumpRateTable ta = bell_rates(s, a, h);
      for (std::size_t b = 0; b < h.dimension(); ++b) {
        EXPECT_EQ(std::min(ta.rate_to(b), bell_rates(s, b, h).rate_to(a)), 0.0);
      }
    }
  }
}

TEST(BellRates, NetCurrentMatchesDirectFormula) {
  const ModelHamiltonian h = two_site();
  const Eigen::MatrixXcd H(h.full());
  std::mt19937_64 gen(2);
  for (int draw = 0; draw < 100; ++draw) {
    const QuantumState s = random_state(h, gen);
    const auto& c = s.amplitudes();
    for (std::size_t a = 0; a < h.dimension(); ++a) {
      for (std::size_t b = 0; b < h.dimension(); ++b) {
        if (a == b) continue;
        const double direct = 2.0 * (std::conj(c[a]) * H(a, b) * c[b]).imag();
        const double net = bell_rates(s, b, h).rate_to(a) * std::norm(c[b]) -
                           bell_rates(s, a, h).rate_to(b) * std::norm(c[a]);
        EXPECT_NEAR(net, direct, 1e-10);
        EXPECT_NEAR(bell_current(s, h, a, b), direct, 1e-12);
        EXPECT_EQ(bell_current(s, h, a, b), -bell_current(s, h, b, a));
      }
    }
  }
}

TEST(BellRates, TwoLevelHandComputation) {
  BellLatticeParams b;
  b.hop = 0.9;
  b.hop_phase = 0.4;
  b.n_max = 1;
  const ModelHamiltonian h = build_bell_lattice_model(b);
  const std::vector<int> left{1, 0}, right{0, 1};
  const std::size_t l = *h.basis().find_occupation(left), r = *h.basis().find_occupation(right);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(3);
  c[static_cast<Eigen::Index>(l)] = {0.6, 0.0};
  c[static_cast<Eigen::Index>(r)] = {0.0, 0.8};
  const QuantumState s(h.basis_ptr(), c);
  const cplx h_rl = -0.9 * std::polar(1.0, 0.4);
  EXPECT_NEAR(bell_rates(s, l, h).rate_to(r), oracle::two_level_rate(c[l], c[r], h_rl), 1e-14);
  EXPECT_NEAR(bell_rates(s, r, h).rate_to(l), oracle::two_level_rate(c[r], c[l], std::conj(h_rl)), 1e-14);
  EXPECT_GT(bell_rates(s, l, h).total() + bell_rates(s, r, h).total(), 0.0);
}

TEST(BellRates, SupportAndNoCoupling) {
  const ModelHamiltonian h = two_site();
  const QuantumState vac = QuantumState::basis_state(h.basis_ptr(), 0);
  EXPECT_THROW(bell_rates(vac, 1, h), SupportError);
  EXPECT_THROW(bell_rates(vac, LatticeConfig{{1, 1}}, h), SupportError);

  BellLatticeParams b;
  const ModelHamiltonian free = build_bell_lattice_model(b);
  // Real eigenvector of a real H carries no current.
  const Eigen::VectorXcd v = free.spectrum().vectors.col(2);
  const QuantumState eig(free.basis_ptr(), v);
  for (std::size_t a = 0; a < free.dimension(); ++a) {
    if (std::norm(v[static_cast<Eigen::Index>(a)]) > 1e-20) {
      EXPECT_LT(bell_rates(eig, a, free).total(), 1e-10);
    }
  }
}

TEST(BellRates, MagnitudeRuleBreaksMinimality) {
  const ModelHamiltonian h = two_site();
  std::mt19937_64 gen(3);
  const QuantumState s = random_state(h, gen);
  int both = 0;
  for (std::size_t a = 0; a < h.dimension(); ++a) {
    for (std::size_t b = a + 1; b < h.dimension(); ++b) {
      if (bell_rates(s, a, h, RateRule::Magnitude).rate_to(b) > 0 &&
          bell_rates(s, b, h, RateRule::Magnitude).rate_to(a) > 0) {
        ++both;
      }
    }
  }
  EXPECT_GT(both, 0);
}

TEST(JumpSampler, PoissonFrequency) {
  JumpRateTable t;
  t.rates = {{1, 1.5}, {2, 0.5}};
  Rng rng(11, 0);
  const int n = 40000;
  int jumps = 0, to1 = 0;
  for (int i = 0; i < n; ++i) {
    if (auto s = sample_next_jump(t, rng, 0.1)) {
      ++jumps;
      to1 += s->destination == 1;
      EXPECT_GE(s->offset, 0.0);
      EXPECT_LT(s->offset, 0.1);
    }
  }
  const double p = 1.0 - std::exp(-0.2);
  EXPECT_NEAR(jumps / double(n), p, 4.0 * std::sqrt(p * (1 - p) / n));
  EXPECT_NEAR(to1 / double(jumps), 0.75, 4.0 * std::sqrt(0.75 * 0.25 / jumps));
}

TEST(BellProcess, NoCouplingMeansNoSectorJumps) {
  BellLatticeParams b;
  b.n_max = 2;
  const ModelHamiltonian h = build_bell_lattice_model(b);
  std::mt19937_64 gen(5);
  const QuantumState s = random_state(h, gen);
  BellOptions opt;
  const BellEnsemble ens = run_bell_ensemble(h, s, 500, 1.0, 0.01, opt, 3);
  for (const auto& r : ens.records) {
    for (const auto& e : r.events) {
      if (e.kind == EventKind::Jump) {
        EXPECT_EQ(h.basis().sector(static_cast<std::size_t>(e.source_id)),
                  h.basis().sector(static_cast<std::size_t>(e.destination_id)));
      }
    }
  }
}

TEST(BellProcess, WorkerCountDoesNotChangeResults) {
  const ModelHamiltonian h = two_site();
  std::mt19937_64 gen(6);
  const QuantumState s = random_state(h, gen);
  BellOptions opt;
  opt.checkpoints = {0.5, 1.0};
  const auto one = run_bell_ensemble(h, s, 300, 1.0, 0.01, opt, 42, 1);
  const auto three = run_bell_ensemble(h, s, 300, 1.0, 0.01, opt, 42, 3);
  EXPECT_EQ(trajectories_csv(one.records), trajectories_csv(three.records));
  const auto other = run_bell_ensemble(h, s, 300, 1.0, 0.01, opt, 43, 1);
  EXPECT_NE(trajectories_csv(one.records), trajectories_csv(other.records));
}

TEST(BellProcess, JumpsFollowNonzeroMatrixElements) {
  const ModelHamiltonian h = two_site();
  std::mt19937_64 gen(7);
  const QuantumState s = random_state(h, gen);
  const auto ens = run_bell_ensemble(h, s, 500, 1.0, 0.01, BellOptions{}, 1);
  std::size_t jumps = 0;
  for (const auto& r : ens.records) {
    for (const auto& e : r.events) {
      if (e.kind != EventKind::Jump) continue;
      ++jumps;
      EXPECT_NE(h.full().coeff(e.destination_id, e.source_id), cplx(0.0));
    }
  }
  EXPECT_GT(jumps, 0u);
}

TEST(BellProcess, CheckpointsMustAlignWithSteps) {
  const ModelHamiltonian h = two_site();
  const QuantumState s = QuantumState::basis_state(h.basis_ptr(), 0);
  BellOptions opt;
  opt.checkpoints = {0.333};
  EXPECT_THROW(run_bell_ensemble(h, s, 1, 1.0, 0.01, opt, 1), ParameterError);
  EXPECT_THROW(run_bell_ensemble(h, s, 1, 1.0, 0.003, BellOptions{}, 1), ParameterError);
}

TEST(BellProcess, MasterEquationResidual) {
  const ModelHamiltonian h = two_site();
  std::mt19937_64 gen(8);
  for (int draw = 0; draw < 5; ++draw) {
    const QuantumState s = random_state(h, gen);
    EXPECT_LT(check_master_equation(h, s, {0.2, 0.9}).max_residual, 1e-6);
  }
  BellLatticeParams b;
  const ModelHamiltonian free = build_bell_lattice_model(b);
  EXPECT_LT(check_master_equation(free, random_state(free, gen), {0.5}).max_residual, 1e-6);
}
