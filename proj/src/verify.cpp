#include "pilotwave/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "pilotwave/errors.hpp"
#include "pilotwave/format.hpp"

namespace pilotwave {

namespace {

constexpr double kMassFloor = 1e-12;

std::size_t pair_index(int b1, int b2, int bins) {
  return static_cast<std::size_t>(b1 * bins - b1 * (b1 - 1) / 2 + (b2 - b1));
}

// Gauss-Legendre nodes and weights on [a, b].
void legendre(double a, double b, std::vector<double>& x, std::vector<double>& w) {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < Rule::abscissa().size(); ++i) {
    const double s = Rule::abscissa()[i];
    const double wt = Rule::weights()[i];
    x.push_back(mid - half * s);
    w.push_back(half * wt);
    if (s != 0.0) {
      x.push_back(mid + half * s);
      w.push_back(half * wt);
    }
  }
}

bool on_time(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

}  // namespace

double tv_distance(const DensityTable& p, const DensityTable& q) {
  if (p.partition != q.partition || p.mass.size() != q.mass.size()) {
    throw StructuralError("tv_distance needs tables on the same partition");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) s += std::abs(p.mass[i] - q.mass[i]);
  return std::min(1.0, 0.5 * s);
}

Binning Binning::lattice(std::size_t configs) {
  Binning b;
  b.kind = Kind::LatticeConfigs;
  b.configs = configs;
  return b;
}

Binning Binning::sectors(int n_max) {
  Binning b;
  b.kind = Kind::SectorMarginal;
  b.n_max = n_max;
  return b;
}

Binning Binning::positions(int n_max, int bins, double length) {
  if (n_max > 2) throw ParameterError("position binning supports sectors up to 2");
  Binning b;
  b.kind = Kind::PositionBins;
  b.n_max = n_max;
  b.bins = bins;
  b.length = length;
  return b;
}

std::size_t Binning::size() const {
  switch (kind) {
    case Kind::LatticeConfigs: return configs;
    case Kind::SectorMarginal: return static_cast<std::size_t>(n_max) + 1;
    case Kind::PositionBins: {
      std::size_t s = 1;
      if (n_max >= 1) s += bins;
      if (n_max >= 2) s += static_cast<std::size_t>(bins * (bins + 1) / 2);
      return s;
    }
  }
  return 0;
}

std::string Binning::name() const {
  switch (kind) {
    case Kind::LatticeConfigs: return "lattice-configs";
    case Kind::SectorMarginal: return "sector-marginal";
    case Kind::PositionBins: return "position-bins-" + std::to_string(bins);
  }
  return "";
}

std::size_t Binning::cell(long config_id, const std::vector<double>& positions) const {
  switch (kind) {
    case Kind::LatticeConfigs:
      if (config_id < 0 || static_cast<std::size_t>(config_id) >= configs) {
        throw StructuralError("configuration id outside the lattice basis");
      }
      return static_cast<std::size_t>(config_id);
    case Kind::SectorMarginal:
      if (config_id < 0 || config_id > n_max) throw StructuralError("sector outside truncation");
      return static_cast<std::size_t>(config_id);
    case Kind::PositionBins: {
      auto bin = [&](double x) {
        const int b = static_cast<int>(std::floor(x / (length / bins)));
        return std::clamp(b, 0, bins - 1);
      };
      if (positions.empty()) return 0;
      if (positions.size() == 1) return 1 + static_cast<std::size_t>(bin(positions[0]));
      if (positions.size() == 2) {
        const int b1 = bin(positions[0]), b2 = bin(positions[1]);
        return 1 + static_cast<std::size_t>(bins) +
               pair_index(std::min(b1, b2), std::max(b1, b2), bins);
      }
      throw StructuralError("position binning supports sectors up to 2");
    }
  }
  return 0;
}

std::vector<double> empirical_counts(const std::vector<TrajectoryRecord>& records, double t,
                                     const Binning& binning) {
  std::vector<double> counts(binning.size(), 0.0);
  bool seen = false;
  for (const auto& r : records) {
    if (r.flagged) continue;
    for (const auto& c : r.checkpoints) {
      if (!on_time(c.t, t)) continue;
      seen = true;
      counts[binning.cell(c.config_id, c.positions)] += 1.0;
    }
  }
  if (!seen) throw ParameterError("no trajectory covers t = " + format_double(t));
  return counts;
}

DensityTable empirical_distribution(const std::vector<TrajectoryRecord>& records, double t,
                                    const Binning& binning) {
  DensityTable out{binning.name(), empirical_counts(records, t, binning)};
  double total = 0.0;
  for (double c : out.mass) total += c;
  for (double& m : out.mass) m /= total;
  return out;
}

DensityTable reference_distribution(const QuantumState& state, const Binning& binning) {
  DensityTable out{binning.name(), std::vector<double>(binning.size(), 0.0)};
  switch (binning.kind) {
    case Binning::Kind::LatticeConfigs:
      out.mass = born_density(state, Normalization::Auto);
      break;
    case Binning::Kind::SectorMarginal:
      for (int n = 0; n <= binning.n_max; ++n) out.mass[n] = state.sector_probability(n);
      break;
    case Binning::Kind::PositionBins: {
      const int bins = binning.bins;
      const double width = binning.length / bins;
      std::vector<double> x, w;
      for (int b = 0; b < bins; ++b) legendre(b * width, (b + 1) * width, x, w);
      const std::size_t per_bin = x.size() / bins;
      const SectorField field(state);
      out.mass[0] = state.sector_probability(0);
      for (int n = 3; n <= state.basis().n_max(); ++n) {
        if (state.sector_probability(n) > kMassFloor) {
          throw ParameterError("position binning supports sectors up to 2");
        }
      }
      if (binning.n_max >= 1) {
        const auto v = field.tensor_values(1, x);
        for (std::size_t i = 0; i < x.size(); ++i) out.mass[1 + i / per_bin] += w[i] * std::norm(v[i]);
      }
      if (binning.n_max >= 2) {
        const auto v = field.tensor_values(2, x);
        const std::size_t P = x.size();
        for (std::size_t i = 0; i < P; ++i) {
          for (std::size_t j = 0; j < P; ++j) {
            const int b1 = static_cast<int>(i / per_bin), b2 = static_cast<int>(j / per_bin);
            if (b1 > b2) continue;
            const double factor = b1 == b2 ? 1.0 : 2.0;
            out.mass[1 + bins + pair_index(b1, b2, bins)] += factor * w[i] * w[j] * std::norm(v[i * P + j]);
          }
        }
      }
      break;
    }
  }
  return out;
}

ChiSquare chi_square(const std::vector<double>& counts, const DensityTable& reference) {
  if (counts.size() != reference.mass.size()) throw StructuralError("chi-square partition mismatch");
  double M = 0.0;
  for (double c : counts) M += c;
  ChiSquare out;
  int cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (reference.mass[i] <= kMassFloor) continue;
    const double e = M * reference.mass[i];
    out.statistic += (counts[i] - e) * (counts[i] - e) / e;
    ++cells;
  }
  out.dof = std::max(1, cells - 1);
  out.lower_floor = cells > 1 ? boost::math::quantile(boost::math::chi_squared(out.dof), 1e-6) : 0.0;
  return out;
}

double noise_baseline_tv(const DensityTable& reference, std::size_t M, std::uint64_t seed) {
  Rng rng(seed, 0x6e6f697365ull);
  DensityTable sample{reference.partition, std::vector<double>(reference.mass.size(), 0.0)};
  for (std::size_t i = 0; i < M; ++i) sample.mass[sample_discrete(reference.mass, rng)] += 1.0;
  for (double& m : sample.mass) m /= static_cast<double>(M);
  return tv_distance(sample, reference);
}

double default_tv_threshold(const DensityTable& reference, std::size_t M) {
  std::size_t K = 0;
  for (double m : reference.mass) K += m > kMassFloor ? 1 : 0;
  return 3.0 * std::sqrt(static_cast<double>(K) / (4.0 * static_cast<double>(M)));
}

bool EnsembleReport::pass() const {
  if (inconclusive || transition_violations > 0 || results.empty()) return false;
  for (const auto& r : results) {
    if (!r.pass) return false;
  }
  return true;
}

nlohmann::json EnsembleReport::to_json() const {
  using nlohmann::json;
  json j;
  j["model"] = model;
  j["check"] = check;
  j["M"] = M;
  j["seed"] = seed;
  j["checkpoints"] = checkpoints;
  j["flagged"] = flagged;
  j["inconclusive"] = inconclusive;
  j["max_norm_defect"] = max_norm_defect;
  j["jump_events"] = jump_events;
  j["transition_violations"] = transition_violations;
  j["pass"] = pass();
  json rs = json::array();
  for (const auto& r : results) {
    json e;
    e["t"] = r.t;
    e["partition"] = r.partition;
    e["tv"] = r.tv;
    e["tv_threshold"] = r.tv_threshold;
    e["noise_baseline_tv"] = r.noise_baseline;
    e["chi_square"] = r.chi2.statistic;
    e["dof"] = r.chi2.dof;
    e["chi_square_floor"] = r.chi2.lower_floor;
    e["sub_noise"] = r.sub_noise;
    e["pass"] = r.pass;
    e["empirical"] = r.empirical;
    e["reference"] = r.reference;
    rs.push_back(std::move(e));
  }
  j["results"] = std::move(rs);
  return j;
}

std::string EnsembleReport::summary() const {
  std::ostringstream os;
  for (const auto& r : results) {
    os << check << ' ' << model << " t=" << format_double(r.t) << ' ' << r.partition
       << " TV=" << r.tv << " (threshold " << r.tv_threshold << ", noise " << r.noise_baseline
       << ") chi2=" << r.chi2.statistic << " (floor " << r.chi2.lower_floor << ") "
       << (r.pass ? "PASS" : (r.sub_noise ? "FAIL sub-noise" : "FAIL")) << '\n';
  }
  os << check << ' ' << model << " M=" << M << " flagged=" << flagged
     << " transition_violations=" << transition_violations
     << " max_norm_defect=" << max_norm_defect << (inconclusive ? " INCONCLUSIVE" : "") << ' '
     << (pass() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

namespace {

CheckpointResult compare(double t, const std::vector<double>& counts, const DensityTable& reference,
                         double threshold, std::size_t M, std::uint64_t seed) {
  CheckpointResult r;
  r.t = t;
  r.partition = reference.partition;
  double total = 0.0;
  for (double c : counts) total += c;
  DensityTable emp{reference.partition, counts};
  for (double& m : emp.mass) m /= total;
  r.tv = tv_distance(emp, reference);
  r.tv_threshold = threshold > 0 ? threshold : default_tv_threshold(reference, M);
  r.noise_baseline = noise_baseline_tv(reference, M, seed);
  r.chi2 = chi_square(counts, reference);
  r.sub_noise = r.chi2.statistic < r.chi2.lower_floor;
  r.pass = r.tv < r.tv_threshold && !r.sub_noise;
  r.empirical = emp.mass;
  r.reference = reference.mass;
  return r;
}

std::size_t bell_violations(const std::vector<TrajectoryRecord>& records, const ModelHamiltonian& h,
                            std::size_t& jumps) {
  std::size_t bad = 0;
  for (const auto& r : records) {
    for (const auto& e : r.events) {
      if (e.kind != EventKind::Jump) continue;
      ++jumps;
      if (h.full().coeff(e.destination_id, e.source_id) == cplx(0.0)) ++bad;
    }
  }
  return bad;
}

std::size_t sector_violations(const std::vector<TrajectoryRecord>& records, std::size_t& jumps) {
  std::size_t bad = 0;
  for (const auto& r : records) {
    for (const auto& e : r.events) {
      if (e.kind != EventKind::Creation && e.kind != EventKind::Annihilation) continue;
      ++jumps;
      if (std::abs(e.destination_id - e.source_id) != 1) ++bad;
    }
  }
  return bad;
}

void finish(EnsembleReport& rep) {
  rep.inconclusive = static_cast<double>(rep.flagged) > 0.01 * static_cast<double>(rep.M);
}

}  // namespace

EnsembleReport check_equivariance(const VerifyModel& model, std::size_t M,
                                  const std::vector<double>& checkpoints, std::uint64_t seed,
                                  int workers, std::vector<TrajectoryRecord>* records) {
  if (M == 0) throw ParameterError("equivariance check needs M > 0");
  if (checkpoints.empty()) throw ParameterError("equivariance check needs checkpoints");
  const double T = *std::max_element(checkpoints.begin(), checkpoints.end());
  EnsembleReport rep;
  rep.model = model.id;
  rep.check = "equivariance";
  rep.M = M;
  rep.seed = seed;
  rep.checkpoints = checkpoints;
  const Propagator prop(model.h, model.psi0);
  std::vector<TrajectoryRecord> recs;
  if (!model.h.grid()) {
    BellOptions opt;
    opt.rule = model.rule;
    opt.checkpoints = checkpoints;
    BellEnsemble ens = run_bell_ensemble(model.h, model.psi0, M, T, model.dt, opt, seed, workers);
    rep.flagged = ens.flagged;
    rep.max_norm_defect = ens.max_norm_defect;
    rep.transition_violations = bell_violations(ens.records, model.h, rep.jump_events);
    const Binning binning = Binning::lattice(model.h.dimension());
    for (double t : checkpoints) {
      const DensityTable ref = reference_distribution(prop.at(t), binning);
      rep.results.push_back(compare(t, empirical_counts(ens.records, t, binning), ref,
                                    model.tv_threshold, M, seed));
    }
    recs = std::move(ens.records);
  } else {
    BtqftOptions opt;
    opt.rule = model.rule;
    opt.checkpoints = checkpoints;
    BtqftEnsemble ens = run_btqft_ensemble(model.h, model.psi0, M, T, model.dt, opt, seed, workers);
    rep.flagged = ens.flagged;
    rep.max_norm_defect = ens.max_norm_defect;
    rep.transition_violations = sector_violations(ens.records, rep.jump_events);
    const int n_max = model.h.basis().n_max();
    const Binning sectors = Binning::sectors(n_max);
    const Binning positions = Binning::positions(n_max, model.position_bins, model.h.grid()->length());
    for (double t : checkpoints) {
      const QuantumState psi = prop.at(t);
      rep.results.push_back(compare(t, empirical_counts(ens.records, t, sectors),
                                    reference_distribution(psi, sectors), model.tv_threshold, M,
                                    seed));
      rep.results.push_back(compare(t, empirical_counts(ens.records, t, positions),
                                    reference_distribution(psi, positions),
                                    model.position_tv_threshold, M, seed));
    }
    recs = std::move(ens.records);
  }
  finish(rep);
  if (records) *records = std::move(recs);
  return rep;
}

MasterEquationResult check_master_equation(const ModelHamiltonian& h, const QuantumState& psi0,
                                           const std::vector<double>& times, double fd) {
  const Propagator prop(h, psi0);
  MasterEquationResult out;
  for (double t : times) {
    const QuantumState psi = prop.at(t);
    const QuantumState plus = prop.at(t + fd);
    const QuantumState minus = prop.at(t - fd);
    double worst = 0.0;
    if (!h.grid()) {
      std::vector<double> flux(h.dimension(), 0.0);
      for (std::size_t b = 0; b < h.dimension(); ++b) {
        const double pb = std::norm(psi.amplitude(b));
        if (pb <= 1e-300) continue;
        const JumpRateTable table = bell_rates(psi, b, h);
        for (const auto& [a, rate] : table.rates) {
          flux[a] += rate * pb;
          flux[b] -= rate * pb;
        }
      }
      for (std::size_t q = 0; q < h.dimension(); ++q) {
        const double deriv =
            (std::norm(plus.amplitude(q)) - std::norm(minus.amplitude(q))) / (2.0 * fd);
        worst = std::max(worst, std::abs(deriv - flux[q]));
      }
    } else {
      const FockBasis& basis = h.basis();
      const Grid& grid = *h.grid();
      const SectorField field(psi);
      std::vector<double> flux(basis.n_max() + 1, 0.0);
      for (std::size_t m = 0; m < basis.size(); ++m) {
        const double pm = std::norm(psi.amplitude(m));
        if (pm <= 1e-300) continue;
        const int n = basis.sector(m);
        const BtqftRateTable table = btqft_rates(field, SectorConfig::at_cells(basis.sites(m), grid), h);
        double up = 0.0, down = 0.0;
        for (double r : table.creation) up += r;
        for (double r : table.annihilation) down += r;
        if (up > 0) {
          flux[n + 1] += up * pm;
          flux[n] -= up * pm;
        }
        if (down > 0) {
          flux[n - 1] += down * pm;
          flux[n] -= down * pm;
        }
      }
      for (int n = 0; n <= basis.n_max(); ++n) {
        const double deriv = (plus.sector_probability(n) - minus.sector_probability(n)) / (2.0 * fd);
        worst = std::max(worst, std::abs(deriv - flux[n]));
      }
    }
    out.residual_per_time.push_back(worst);
    out.max_residual = std::max(out.max_residual, worst);
  }
  return out;
}

EnsembleReport check_time_reversal(const VerifyModel& model, double T, std::size_t M,
                                   std::uint64_t seed, int workers, bool conjugate) {
  EnsembleReport rep;
  rep.model = model.id;
  rep.check = conjugate ? "time-reversal" : "time-reversal-unconjugated";
  rep.seed = seed;
  rep.checkpoints = {T};
  const QuantumState psi_T = Propagator(model.h, model.psi0).at(T);
  const ModelHamiltonian h_rev = conjugate ? model.h.conjugated() : model.h;
  const QuantumState psi_rev = conjugate ? psi_T.conjugated() : psi_T;
  const std::uint64_t reverse_seed = seed ^ 0x9e3779b97f4a7c15ull;
  if (!model.h.grid()) {
    BellOptions opt;
    opt.rule = model.rule;
    opt.checkpoints = {T};
    opt.record_events = false;
    const BellEnsemble fwd = run_bell_ensemble(model.h, model.psi0, M, T, model.dt, opt, seed, workers);
    std::vector<std::size_t> start;
    for (const auto& r : fwd.records) {
      if (!r.flagged) start.push_back(static_cast<std::size_t>(r.checkpoints.back().config_id));
    }
    const BellEnsemble rev = run_bell_ensemble(h_rev, psi_rev, start.size(), T, model.dt, opt,
                                               reverse_seed, workers, start);
    rep.M = start.size();
    rep.flagged = fwd.flagged + rev.flagged;
    rep.max_norm_defect = std::max(fwd.max_norm_defect, rev.max_norm_defect);
    const Binning binning = Binning::lattice(model.h.dimension());
    rep.results.push_back(compare(T, empirical_counts(rev.records, T, binning),
                                  reference_distribution(model.psi0, binning), model.tv_threshold,
                                  rep.M, seed));
  } else {
    BtqftOptions opt;
    opt.rule = model.rule;
    opt.checkpoints = {T};
    opt.record_events = false;
    const BtqftEnsemble fwd = run_btqft_ensemble(model.h, model.psi0, M, T, model.dt, opt, seed, workers);
    std::vector<SectorConfig> start;
    const Grid& grid = *model.h.grid();
    for (const auto& r : fwd.records) {
      if (!r.flagged) start.emplace_back(r.checkpoints.back().positions, grid);
    }
    const BtqftEnsemble rev = run_btqft_ensemble(h_rev, psi_rev, start.size(), T, model.dt, opt,
                                                 reverse_seed, workers, start);
    rep.M = start.size();
    rep.flagged = fwd.flagged + rev.flagged;
    rep.max_norm_defect = std::max(fwd.max_norm_defect, rev.max_norm_defect);
    const int n_max = model.h.basis().n_max();
    const Binning sectors = Binning::sectors(n_max);
    const Binning positions = Binning::positions(n_max, model.position_bins, grid.length());
    rep.results.push_back(compare(T, empirical_counts(rev.records, T, sectors),
                                  reference_distribution(model.psi0, sectors), model.tv_threshold,
                                  rep.M, seed));
    rep.results.push_back(compare(T, empirical_counts(rev.records, T, positions),
                                  reference_distribution(model.psi0, positions),
                                  model.position_tv_threshold, rep.M, seed));
  }
  rep.inconclusive = static_cast<double>(rep.flagged) > 0.01 * static_cast<double>(M);
  return rep;
}

}  // namespace pilotwave
