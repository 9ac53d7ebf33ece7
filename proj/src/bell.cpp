#include "pilotwave/bell.hpp"

#include <cmath>

#include "pilotwave/errors.hpp"
#include "pilotwave/parallel.hpp"

namespace pilotwave {

namespace {

constexpr double kSupportFloor = 1e-300;
constexpr int kMaxWindowDepth = 10;

std::vector<double> occupation_as_positions(const FockBasis& basis, std::size_t index) {
  std::vector<double> out;
  for (int c : basis.occupation(index)) out.push_back(c);
  return out;
}

std::vector<double> validated_checkpoints(const std::vector<double>& requested, double T,
                                          double dt) {
  std::vector<double> out;
  for (double c : requested) {
    const double k = std::round(c / dt);
    if (std::abs(c / dt - k) > 1e-9 || c < 0 || c > T * (1 + 1e-12)) {
      throw ParameterError("checkpoint " + std::to_string(c) +
                           " must be a multiple of dt inside [0, T]");
    }
    out.push_back(k * dt);
  }
  return out;
}

std::size_t step_count(double T, double dt) {
  if (!(dt > 0) || !(T > 0)) throw ParameterError("T and dt must be positive");
  const double k = std::round(T / dt);
  if (std::abs(T / dt - k) > 1e-9) throw ParameterError("T must be a multiple of dt");
  return static_cast<std::size_t>(k);
}

}  // namespace

double JumpRateTable::total() const {
  double s = 0.0;
  for (const auto& r : rates) s += r.second;
  return s;
}

double JumpRateTable::rate_to(std::size_t destination) const {
  for (const auto& r : rates) {
    if (r.first == destination) return r.second;
  }
  return 0.0;
}

double bell_current(const QuantumState& state, const ModelHamiltonian& h, std::size_t a,
                    std::size_t b) {
  if (a == b) return 0.0;
  const std::size_t lo = std::min(a, b), hi = std::max(a, b);
  const cplx hij = h.full().coeff(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi));
  const cplx w = std::conj(state.amplitude(lo)) * hij * state.amplitude(hi);
  const double j = 2.0 / state.hbar() * w.imag();
  return a == lo ? j : -j;
}

JumpRateTable bell_rates(const QuantumState& state, std::size_t source, const ModelHamiltonian& h,
                         RateRule rule, double t) {
  if (!(state.basis() == h.basis())) throw StructuralError("state and Hamiltonian bases differ");
  if (source >= h.dimension()) throw StructuralError("source configuration outside the basis");
  const double weight = std::norm(state.amplitude(source));
  if (weight <= kSupportFloor) throw SupportError("configuration outside support");
  JumpRateTable table;
  table.source = source;
  table.t = t;
  const SparseMatrix& H = h.full();
  for (SparseMatrix::InnerIterator it(H, static_cast<Eigen::Index>(source)); it; ++it) {
    const auto dest = static_cast<std::size_t>(it.col());
    if (dest == source) continue;
    const double j = bell_current(state, h, dest, source);
    const double numerator = rule == RateRule::PositivePart ? std::max(j, 0.0) : std::abs(j);
    if (numerator > 0.0) table.rates.emplace_back(dest, numerator / weight);
  }
  return table;
}

JumpRateTable bell_rates(const QuantumState& state, const LatticeConfig& source,
                         const ModelHamiltonian& h, RateRule rule, double t) {
  return bell_rates(state, lattice_index(h.basis(), source), h, rule, t);
}

std::optional<JumpSample> sample_next_jump(const JumpRateTable& rates, Rng& rng, double window) {
  if (!(window > 0)) throw ParameterError("sampling window must be positive");
  const double total = rates.total();
  if (!(total > 0)) return std::nullopt;
  const double tau = rng.exponential() / total;
  if (tau >= window) return std::nullopt;
  double u = rng.uniform() * total;
  for (const auto& [dest, rate] : rates.rates) {
    if (u < rate) return JumpSample{dest, tau};
    u -= rate;
  }
  return JumpSample{rates.rates.back().first, tau};
}

std::size_t sample_discrete(const std::vector<double>& probabilities, Rng& rng) {
  double total = 0.0;
  for (double p : probabilities) total += p;
  double u = rng.uniform() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] <= 0) continue;
    last = i;
    if (u < probabilities[i]) return i;
    u -= probabilities[i];
  }
  return last;
}

BellSchedule::BellSchedule(const ModelHamiltonian& h, const QuantumState& initial, double T,
                           double dt, const BellOptions& options) {
  if (h.grid()) throw StructuralError("Bell process needs a lattice model");
  const std::size_t steps = step_count(T, dt);
  checkpoints_ = validated_checkpoints(options.checkpoints, T, dt);
  const Propagator prop(h, initial);
  max_norm_defect_ = std::abs(norm_squared(initial) - 1.0);
  for (std::size_t k = 0; k < steps; ++k) {
    fill(h, prop, k * dt, (k + 1) * dt, 0, options);
  }
  max_norm_defect_ = std::max(max_norm_defect_, std::abs(norm_squared(prop.at(T)) - 1.0));
}

void BellSchedule::fill(const ModelHamiltonian& h, const Propagator& prop, double t0, double t1,
                        int depth, const BellOptions& options) {
  const double tm = 0.5 * (t0 + t1);
  const QuantumState psi = prop.at(tm);
  max_norm_defect_ = std::max(max_norm_defect_, std::abs(norm_squared(psi) - 1.0));
  Window w{t0, t1, {}, {}};
  w.tables.resize(h.dimension());
  w.supported.assign(h.dimension(), 0);
  double worst = 0.0;
  for (std::size_t b = 0; b < h.dimension(); ++b) {
    const double weight = std::norm(psi.amplitude(b));
    if (weight <= kSupportFloor) continue;
    w.tables[b] = bell_rates(psi, b, h, options.rule, tm);
    w.supported[b] = 1;
    if (weight > 1e-8) worst = std::max(worst, w.tables[b].total());
  }
  if (worst * (t1 - t0) > options.max_window_intensity && depth < kMaxWindowDepth) {
    fill(h, prop, t0, tm, depth + 1, options);
    fill(h, prop, tm, t1, depth + 1, options);
    return;
  }
  windows_.push_back(std::move(w));
}

TrajectoryRecord run_bell_trajectory(const BellSchedule& schedule, std::size_t initial, Rng& rng,
                                     bool record_events) {
  TrajectoryRecord rec;
  std::size_t q = initial;
  const auto& checkpoints = schedule.checkpoints();
  auto record_checkpoints = [&](double t) {
    for (double c : checkpoints) {
      if (std::abs(c - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
        rec.checkpoints.push_back({c, static_cast<long>(q), {}});
      }
    }
  };
  if (record_events) rec.events.push_back({0.0, EventKind::Start, static_cast<long>(q), -1});
  record_checkpoints(0.0);
  for (const auto& w : schedule.windows()) {
    double t = w.t0;
    while (true) {
      if (!w.supported[q]) {
        rec.flagged = true;
        rec.flag_reason = "configuration outside support";
        if (record_events) rec.events.push_back({t, EventKind::Flagged, static_cast<long>(q), -1});
        return rec;
      }
      const auto jump = sample_next_jump(w.tables[q], rng, w.t1 - t);
      if (!jump) break;
      t += jump->offset;
      if (record_events) {
        rec.events.push_back({t, EventKind::Jump, static_cast<long>(q),
                              static_cast<long>(jump->destination)});
      }
      q = jump->destination;
    }
    record_checkpoints(w.t1);
  }
  if (record_events && !schedule.windows().empty()) {
    rec.events.push_back({schedule.windows().back().t1, EventKind::End, static_cast<long>(q), -1});
  }
  return rec;
}

TrajectoryRecord run_bell_trajectory(const QuantumState& psi0, const LatticeConfig& q0,
                                     const ModelHamiltonian& h, double T, double dt, Rng& rng,
                                     const BellOptions& options) {
  const std::size_t start = lattice_index(h.basis(), q0);
  if (std::norm(psi0.amplitude(start)) <= kSupportFloor) {
    throw SupportError("configuration outside support");
  }
  const BellSchedule schedule(h, psi0, T, dt, options);
  TrajectoryRecord rec = run_bell_trajectory(schedule, start, rng, options.record_events);
  for (auto& e : rec.events) {
    if (e.kind == EventKind::Start || e.kind == EventKind::End || e.kind == EventKind::Jump) {
      const long id = e.kind == EventKind::Jump ? e.destination_id : e.source_id;
      e.positions = occupation_as_positions(h.basis(), static_cast<std::size_t>(id));
    }
  }
  return rec;
}

BellEnsemble run_bell_ensemble(const ModelHamiltonian& h, const QuantumState& psi0, std::size_t M,
                               double T, double dt, const BellOptions& options,
                               std::uint64_t seed, int workers,
                               const std::vector<std::size_t>& initial) {
  if (!initial.empty() && initial.size() != M) {
    throw ParameterError("initial configuration list must hold M entries");
  }
  const BellSchedule schedule(h, psi0, T, dt, options);
  const std::vector<double> born = born_density(psi0, Normalization::Auto);
  BellEnsemble out;
  out.records.resize(M);
  out.initial.resize(M);
  parallel_chunks(M, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(seed, i);
      const std::size_t q0 = initial.empty() ? sample_discrete(born, rng) : initial[i];
      out.initial[i] = q0;
      out.records[i] = run_bell_trajectory(schedule, q0, rng, options.record_events);
    }
  });
  for (const auto& r : out.records) out.flagged += r.flagged ? 1 : 0;
  out.max_norm_defect = schedule.max_norm_defect();
  return out;
}

}  // namespace pilotwave
