// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "pilotwave/bell.hpp"
#include "pilotwave/btqft.hpp"
#include "pilotwave/evolution.hpp"
#include "pilotwave/nikolic.hpp"
#include "pilotwave/runner.hpp"
#include "pilotwave/scenario.hpp"
#include "pilotwave/verify.hpp"

using namespace pilotwave;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::uniform_real_distribution<double> unit(0.0, 1.0);

ModelHamiltonian random_lattice(std::mt19937_64& gen) {
  BellLatticeParams b;
  b.hop = 2.0 * unit(gen);
  b.hop_phase = 2.0 * std::numbers::pi * unit(gen);
  b.pair_coupling = 2.0 * unit(gen) - 1.0;
  b.single_coupling = 2.0 * unit(gen) - 1.0;
  b.onsite = 2.0 * unit(gen) - 1.0;
  return build_bell_lattice_model(b);
}

ModelHamiltonian random_continuum(std::mt19937_64& gen, int n_max) {
  EmissionParams p;
  p.n_max = n_max;
  p.g = 0.1 + 0.9 * unit(gen);
  p.width = 0.5 + unit(gen);
  p.sources = {8.0 * unit(gen)};
  return build_emission_absorption_model(p);
}

QuantumState random_state(const ModelHamiltonian& h, std::mt19937_64& gen) {
  return QuantumState(h.basis_ptr(), oracle::random_state(static_cast<Eigen::Index>(h.dimension()), gen),
                      h.grid());
}

// Rate tables of every cell configuration of a continuum state.
std::vector<BtqftRateTable> cell_tables(const QuantumState& s, const ModelHamiltonian& h) {
  const SectorField field(s);
  std::vector<BtqftRateTable> out;
  out.reserve(h.dimension());
  for (std::size_t m = 0; m < h.dimension(); ++m) {
    out.push_back(btqft_rates(field, SectorConfig::at_cells(h.basis().sites(m), *h.grid()), h));
  }
  return out;
}

// Visits every (config, cell) creation pair of the continuum basis with the
// destination index and the positions of the new particle in it.
void for_each_creation(const FockBasis& b, int n_max,
                       const std::function<void(std::size_t, int, std::size_t, std::vector<std::size_t>)>& f) {
  for (std::size_t m = 0; m < b.sector_begin(n_max); ++m) {
    const auto sites = b.sites(m);
    for (int j = 0; j < b.modes(); ++j) {
      std::vector<int> dest(sites.begin(), sites.end());
      dest.insert(std::upper_bound(dest.begin(), dest.end(), j), j);
      std::vector<std::size_t> at_j;
      for (std::size_t i = 0; i < dest.size(); ++i) {
        if (dest[i] == j) at_j.push_back(i);
      }
      f(m, j, *b.find_sites(dest), at_j);
    }
  }
}

Outcome minimality() {
  std::mt19937_64 gen(101);
  std::size_t pairs = 0, violations = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    const ModelHamiltonian h = random_lattice(gen);
    const QuantumState s = random_state(h, gen);
    std::vector<JumpRateTable> t;
    for (std::size_t a = 0; a < h.dimension(); ++a) t.push_back(bell_rates(s, a, h));
    for (std::size_t a = 0; a < h.dimension(); ++a) {
      for (std::size_t b = 0; b < h.dimension(); ++b) {
        ++pairs;
        violations += std::min(t[a].rate_to(b), t[b].rate_to(a)) != 0.0;
      }
    }
  }
  for (int draw = 0; draw < 1000; ++draw) {
    const ModelHamiltonian h = random_continuum(gen, 2);
    const QuantumState s = random_state(h, gen);
    const auto t = cell_tables(s, h);
    for_each_creation(h.basis(), 2, [&](std::size_t m, int j, std::size_t d, std::vector<std::size_t> at_j) {
      for (std::size_t i : at_j) {
        ++pairs;
        violations += std::min(t[m].creation[j], t[d].annihilation[i]) != 0.0;
      }
    });
  }
  return {violations == 0, std::to_string(pairs) + " pairs, " + std::to_string(violations) + " violations"};
}

Outcome net_current() {
  std::mt19937_64 gen(202);
  double worst = 0.0;
  const ModelHamiltonian lattice = random_lattice(gen);
  const Eigen::MatrixXcd H(lattice.full());
  for (int draw = 0; draw < 1000; ++draw) {
    const QuantumState s = random_state(lattice, gen);
    const auto& c = s.amplitudes();
    for (std::size_t a = 0; a < lattice.dimension(); ++a) {
      for (std::size_t b = 0; b < lattice.dimension(); ++b) {
        if (a == b) continue;
        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        const double direct = 2.0 * (std::conj(c[ia]) * H(ia, ib) * c[ib]).imag();
        const double net = bell_rates(s, b, lattice).rate_to(a) * std::norm(c[ib]) -
                           bell_rates(s, a, lattice).rate_to(b) * std::norm(c[ia]);
        worst = std::max(worst, std::abs(net - direct));
      }
    }
  }
  const ModelHamiltonian field = random_continuum(gen, 2);
  const SparseMatrix& Hi = field.h_int();
  for (int draw = 0; draw < 1000; ++draw) {
    const QuantumState s = random_state(field, gen);
    const auto& c = s.amplitudes();
    const auto t = cell_tables(s, field);
    for_each_creation(field.basis(), 2, [&](std::size_t m, int j, std::size_t d, std::vector<std::size_t> at_j) {
      const auto im = static_cast<Eigen::Index>(m), id = static_cast<Eigen::Index>(d);
      double removal = 0.0;
      for (std::size_t i : at_j) removal += t[d].annihilation[i];
      const double direct = 2.0 * (std::conj(c[id]) * Hi.coeff(id, im) * c[im]).imag();
      const double net = t[m].creation[j] * std::norm(c[im]) - removal * std::norm(c[id]);
      worst = std::max(worst, std::abs(net - direct));
    });
  }
  return {worst < 1e-10, "max deviation " + fmt("%.2e", worst)};
}

// d|c_q|^2/dt by centered differences on the exact evolution against the
// net jump flux into q.
double lattice_residual(const ModelHamiltonian& h, const QuantumState& s0, double t, double fd) {
  const Propagator prop(h, s0);
  const QuantumState s = prop.at(t), sp = prop.at(t + fd), sm = prop.at(t - fd);
  std::vector<JumpRateTable> tab;
  for (std::size_t a = 0; a < h.dimension(); ++a) tab.push_back(bell_rates(s, a, h));
  double worst = 0.0;
  for (std::size_t q = 0; q < h.dimension(); ++q) {
    const double lhs = (std::norm(sp.amplitude(q)) - std::norm(sm.amplitude(q))) / (2 * fd);
    double flux = 0.0;
    for (std::size_t r = 0; r < h.dimension(); ++r) {
      flux += tab[r].rate_to(q) * std::norm(s.amplitude(r)) - tab[q].rate_to(r) * std::norm(s.amplitude(q));
    }
    worst = std::max(worst, std::abs(lhs - flux));
  }
  return worst;
}

double sector_residual(const ModelHamiltonian& h, const QuantumState& s0, double t, double fd) {
  const Propagator prop(h, s0);
  const QuantumState s = prop.at(t), sp = prop.at(t + fd), sm = prop.at(t - fd);
  const auto tab = cell_tables(s, h);
  const int n_max = h.basis().sector(h.dimension() - 1);
  std::vector<double> gain(n_max + 1, 0.0);
  for (std::size_t m = 0; m < h.dimension(); ++m) {
    const int n = h.basis().sector(m);
    const double w = std::norm(s.amplitude(m));
    for (double r : tab[m].creation) {
      if (n == n_max) continue;
      gain[n + 1] += r * w;
      gain[n] -= r * w;
    }
    for (double r : tab[m].annihilation) {
      gain[n - 1] += r * w;
      gain[n] -= r * w;
    }
  }
  double worst = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double lhs = (sp.sector_probability(n) - sm.sector_probability(n)) / (2 * fd);
    worst = std::max(worst, std::abs(lhs - gain[n]));
  }
  return worst;
}

Outcome master_equation() {
  std::mt19937_64 gen(303);
  double lattice = 0.0, continuum = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    const ModelHamiltonian h = random_lattice(gen);
    const QuantumState s = random_state(h, gen);
    for (double t : {0.25, 0.5, 1.0}) lattice = std::max(lattice, lattice_residual(h, s, t, 1e-4));
  }
  for (int draw = 0; draw < 3; ++draw) {
    const ModelHamiltonian h = random_continuum(gen, 2);
    const QuantumState s = random_state(h, gen);
    for (double t : {0.25, 0.5}) continuum = std::max(continuum, sector_residual(h, s, t, 1e-4));
  }
  return {lattice < 1e-6 && continuum < 1e-5,
          "lattice " + fmt("%.2e", lattice) + " (< 1e-6), sectors " + fmt("%.2e", continuum) + " (< 1e-5)"};
}

VerifyModel model_of(const std::string& name) {
  const ScenarioConfig c = preset(name);
  const ModelHamiltonian h = scenario_hamiltonian(c);
  VerifyModel m{name, h, scenario_initial_state(c, h), c.dt};
  m.tv_threshold = 0.03;
  m.position_tv_threshold = 0.05;
  return m;
}

struct EquivarianceRuns {
  EnsembleReport bell, btqft;
  std::vector<TrajectoryRecord> btqft_records;
};

double norm_defect = 0.0;

Outcome equivariance(EquivarianceRuns& runs) {
  runs.bell = check_equivariance(model_of("bell-2site"), 20000, {0.5, 1.0}, 404);
  runs.btqft = check_equivariance(model_of("btqft-single"), 20000, {0.5, 1.0}, 405, 1, &runs.btqft_records);
  norm_defect = std::max({norm_defect, runs.bell.max_norm_defect, runs.btqft.max_norm_defect});
  std::string detail;
  for (const auto* r : {&runs.bell, &runs.btqft}) {
    for (const auto& c : r->results) {
      detail += "\n    " + r->model + " t=" + fmt("%.1f", c.t) + " " + c.partition + " TV=" + fmt("%.4f", c.tv) +
                " < " + fmt("%.2f", c.tv_threshold) + " chi2=" + fmt("%.1f", c.chi2.statistic) + " > " +
                fmt("%.2e", c.chi2.lower_floor) + (c.pass ? " ok" : " FAIL");
    }
  }
  return {runs.bell.pass() && runs.btqft.pass(), "M=20000" + detail};
}

Outcome sector_rule(const EquivarianceRuns& runs) {
  std::size_t jumps = 0, violations = 0;
  for (const auto& r : runs.btqft_records) {
    for (const auto& e : r.events) {
      if (e.kind != EventKind::Creation && e.kind != EventKind::Annihilation) continue;
      ++jumps;
      violations += std::abs(e.destination_id - e.source_id) != 1;
    }
  }
  return {violations == 0 && jumps > 0,
          std::to_string(jumps) + " jumps, " + std::to_string(violations) + " violations"};
}

Outcome time_reversal() {
  const VerifyModel m = model_of("bell-2site");
  const EnsembleReport rev = check_time_reversal(m, 1.0, 20000, 606);
  const EnsembleReport control = check_time_reversal(m, 1.0, 20000, 606, 1, false);
  norm_defect = std::max({norm_defect, rev.max_norm_defect, control.max_norm_defect});
  return {rev.pass() && !control.pass(), "reversed TV=" + fmt("%.4f", rev.results.back().tv) +
                                             " (< 0.03), unconjugated control TV=" +
                                             fmt("%.4f", control.results.back().tv) +
                                             (control.pass() ? " passed (should fail)" : " fails as required")};
}

Outcome dead_particle() {
  DecayScenario collapsed = default_decay_scenario();
  collapsed.exact_collapse = true;
  const FourVelocity v0 = four_velocity(collapsed, collapsed.reference);
  bool ok = v0.v[0][0] == 0.0 && v0.v[0][1] == 0.0;
  std::string detail = std::string("collapse ") + (ok ? "0 exactly" : "nonzero") + ", speeds";
  const DecayScenario sc = default_decay_scenario();
  double previous = INFINITY;
  for (double n : {2.0, 4.0, 6.0, 8.0}) {
    const double speed = dead_particle_speed(sc, n * sc.w_e);
    const DecayScenario s = with_separation(sc, n * sc.w_e);
    const auto& d = four_velocity(s, s.reference).v[0];
    const double direct = std::max(std::abs(d[0]), std::abs(d[1]));
    ok = ok && speed > 0.0 && speed < previous && std::abs(speed - direct) < 1e-6;
    previous = speed;
    detail += " " + fmt("%.3e", speed);
  }
  return {ok, detail};
}

std::string manifest_after_run(const ScenarioConfig& c, int workers) {
  const RunReport rep = run_scenario(c, workers);
  std::ifstream in(fs::path(c.output_dir) / "manifest.json", std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome unitarity_and_determinism() {
  std::size_t runs = 0;
  for (const char* name : {"bell-2site", "btqft-single", "picture-a", "pair-creation"}) {
    const ScenarioConfig c = preset(name);
    const ModelHamiltonian h = scenario_hamiltonian(c);
    const QuantumState s = scenario_initial_state(c, h);
    const std::size_t steps = static_cast<std::size_t>(std::llround(c.T / c.dt));
    norm_defect = std::max(norm_defect, StateTimeline(h, s, c.dt, steps + 1).max_norm_defect());
    ++runs;
  }
  bool identical = true;
  const fs::path root = fs::temp_directory_path() / "pilotwave_acceptance";
  for (const char* name : {"bell-2site", "btqft-single", "pair-creation"}) {
    ScenarioConfig c = preset(name);
    c.M = 2000;
    c.seed = 808;
    c.output_dir = (root / name).string();
    fs::remove_all(c.output_dir);
    const std::string one = manifest_after_run(c, 1);
    identical = identical && one == manifest_after_run(c, 4) && one == manifest_after_run(c, 2);
  }
  return {norm_defect < 1e-7 && identical, "max |norm^2 - 1| " + fmt("%.1e", norm_defect) +
                                              ", manifests at 1/2/4 workers " +
                                              (identical ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
  bool all = true;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs >= limit_s) {
      o.pass = false;
      o.detail += " (over " + fmt("%.0f", limit_s) + " s)";
    }
    all = all && o.pass;
    std::printf("[%s] %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };
  EquivarianceRuns runs;
  report(1, "minimality", 30, minimality);
  report(2, "net current", 30, net_current);
  report(3, "master equation", 60, master_equation);
  report(4, "equivariance", 300, [&] { return equivariance(runs); });
  report(5, "sector rule", 0, [&] { return sector_rule(runs); });
  report(6, "time reversal", 180, time_reversal);
  report(7, "dead particle", 10, dead_particle);
  report(8, "unitarity and determinism", 0, unitarity_and_determinism);
  return all ? 0 : 1;
}
