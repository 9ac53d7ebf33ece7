#include "pilotwave/btqft.hpp"

#include <algorithm>
#include <cmath>

#include "pilotwave/errors.hpp"
#include "pilotwave/evolution.hpp"
#include "pilotwave/parallel.hpp"

namespace pilotwave {

namespace {

constexpr double kSupportFloor = 1e-300;
constexpr int kMaxFlowDepth = 24;
constexpr int kMaxWindowDepth = 4;

// Im(conj(a) b), written out so that imcross(a, b) == -imcross(b, a) exactly.
double imcross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

double apply_rule(double x, RateRule rule) {
  return rule == RateRule::PositivePart ? std::max(x, 0.0) : std::abs(x);
}

const EmissionParams& emission_of(const ModelHamiltonian& h) {
  if (!h.emission()) throw StructuralError("BTQFT process needs an emission-absorption model");
  return *h.emission();
}

struct FlagTrajectory {
  std::string reason;
};

std::vector<double> sorted_wrapped(std::vector<double> x, const Grid& grid) {
  for (double& v : x) v = grid.wrap(v);
  std::sort(x.begin(), x.end());
  return x;
}

}  // namespace

double BtqftRateTable::total() const {
  double s = 0.0;
  for (double r : creation) s += r;
  for (double r : annihilation) s += r;
  return s;
}

std::vector<double> velocity_field(const SectorField& field, const SectorConfig& q, double mass,
                                   double node_threshold) {
  const int n = q.sector();
  if (n > field.n_max()) throw StructuralError("configuration sector outside truncation");
  std::vector<cplx> grad(n);
  const cplx psi = field.value_and_gradient(n, q.positions(), grad);
  const double w = std::norm(psi);
  if (!(w >= node_threshold)) throw NodeError("node encountered");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = field.hbar() / mass * imcross(psi, grad[i]) / w;
  return v;
}

std::vector<double> velocity_field(const QuantumState& state, const SectorConfig& q,
                                   double mass) {
  return velocity_field(SectorField(state), q, mass);
}

namespace {

std::vector<double> velocities_at(const SectorField& field, std::span<const double> x,
                                  double mass, double node_threshold) {
  const int n = static_cast<int>(x.size());
  std::vector<cplx> grad(n);
  const cplx psi = field.value_and_gradient(n, x, grad);
  const double w = std::norm(psi);
  if (!(w >= node_threshold)) throw NodeError("node encountered");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = field.hbar() / mass * imcross(psi, grad[i]) / w;
  return v;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

PdmpState flow_step(const PdmpState& s, const ModelHamiltonian& h, double dt) {
  if (!(dt > 0)) throw ParameterError("flow step needs dt > 0");
  const auto& params = emission_of(h);
  const Grid& grid = s.psi.grid();
  const QuantumState half = evolve(s.psi, h, 0.5 * dt);
  const QuantumState full = evolve(half, h, 0.5 * dt);
  const std::vector<double>& x = s.config.positions();
  const std::vector<double> v0 = velocity_field(SectorField(s.psi), s.config, params.mass);
  std::vector<double> xm(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xm[i] = grid.wrap(x[i] + 0.5 * dt * v0[i]);
  const std::vector<double> v1 =
      velocities_at(SectorField(half), xm, params.mass, 1e-20);
  if ((max_abs(v0) * dt >= grid.dx || max_abs(v1) * dt >= grid.dx) && dt > 1e-12) {
    const PdmpState mid = flow_step(s, h, 0.5 * dt);
    return flow_step(mid, h, 0.5 * dt);
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + dt * v1[i];
  return PdmpState{SectorConfig(sorted_wrapped(std::move(out), grid), grid), full, s.t + dt};
}

double creation_density(const SectorField& field, const SectorConfig& q, double y,
                        const ModelHamiltonian& h, RateRule rule) {
  const auto& params = emission_of(h);
  const int n = q.sector();
  if (n + 1 > field.n_max() || params.g == 0.0) return 0.0;
  const Grid& grid = field.grid();
  const double yw = grid.wrap(y);
  const cplx psi_n = field.value(n, q.positions());
  const double w = std::norm(psi_n);
  if (w <= kSupportFloor) throw SupportError("configuration outside support");
  const SectorConfig dest = q.with_added(yw, grid);
  const cplx psi_up = field.value(n + 1, dest.positions());
  const double numerator = params.g * h.form_factor_at(yw) * imcross(psi_up, psi_n);
  return 2.0 / field.hbar() * std::sqrt(n + 1.0) * apply_rule(numerator, rule) / w;
}

double annihilation_rate(const SectorField& field, const SectorConfig& q, std::size_t i,
                         const ModelHamiltonian& h, RateRule rule) {
  const auto& params = emission_of(h);
  const int n = q.sector();
  if (i >= static_cast<std::size_t>(n)) throw StructuralError("particle index outside configuration");
  if (params.g == 0.0) return 0.0;
  const cplx psi_n = field.value(n, q.positions());
  const double w = std::norm(psi_n);
  if (w <= kSupportFloor) throw SupportError("configuration outside support");
  const SectorConfig dest = q.with_removed(i);
  const cplx psi_down = field.value(n - 1, dest.positions());
  const double z = q.positions()[i];
  const double numerator = params.g * h.form_factor_at(z) * imcross(psi_down, psi_n);
  return 2.0 / field.hbar() * apply_rule(numerator, rule) / (std::sqrt(static_cast<double>(n)) * w);
}

BtqftRateTable btqft_rates(const SectorField& field, const SectorConfig& q,
                           const ModelHamiltonian& h, RateRule rule) {
  const auto& params = emission_of(h);
  const Grid& grid = field.grid();
  const int n = q.sector();
  if (n > field.n_max()) throw StructuralError("configuration sector outside truncation");
  const double w = std::norm(field.value(n, q.positions()));
  if (w <= kSupportFloor) throw SupportError("configuration outside support");
  BtqftRateTable table;
  if (n + 1 <= field.n_max() && params.g != 0.0) {
    table.creation.resize(grid.points);
    for (int j = 0; j < grid.points; ++j) {
      table.creation[j] = creation_density(field, q, grid.node(j), h, rule) * grid.dx;
    }
  }
  table.annihilation.resize(n);
  for (int i = 0; i < n; ++i) table.annihilation[i] = annihilation_rate(field, q, i, h, rule);
  return table;
}

BtqftRateTable btqft_rates(const QuantumState& state, const SectorConfig& q,
                           const ModelHamiltonian& h, RateRule rule) {
  return btqft_rates(SectorField(state), q, h, rule);
}

BornSampler::BornSampler(const SectorField& field, const std::vector<double>& sector_probabilities,
                         int subcells)
    : grid_(field.grid()), sector_probabilities_(sector_probabilities) {
  tables_.resize(sector_probabilities.size());
  for (std::size_t n = 1; n < sector_probabilities.size(); ++n) {
    if (!(sector_probabilities[n] > 0)) continue;
    if (n > 2) throw ParameterError("Born sampling supports sectors up to 2");
    const int res = (n == 1 ? subcells : std::max(1, subcells / 2)) * grid_.points;
    const double h = grid_.length() / res;
    std::vector<double> pts(res);
    for (int k = 0; k < res; ++k) pts[k] = (k + 0.5) * h;
    const std::vector<cplx> vals = field.tensor_values(static_cast<int>(n), pts);
    SectorTable& t = tables_[n];
    t.resolution = res;
    t.cdf.resize(vals.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      acc += std::norm(vals[i]);
      t.cdf[i] = acc;
    }
  }
}

SectorConfig BornSampler::draw(Rng& rng) const {
  const std::size_t n = sample_discrete(sector_probabilities_, rng);
  if (n == 0) return SectorConfig({}, grid_);
  const SectorTable& t = tables_[n];
  const double u = rng.uniform() * t.cdf.back();
  std::size_t idx = static_cast<std::size_t>(
      std::upper_bound(t.cdf.begin(), t.cdf.end(), u) - t.cdf.begin());
  idx = std::min(idx, t.cdf.size() - 1);
  const double h = grid_.length() / t.resolution;
  std::vector<double> x(n);
  for (int i = static_cast<int>(n) - 1; i >= 0; --i) {
    x[i] = (static_cast<double>(idx % t.resolution) + rng.uniform()) * h;
    idx /= t.resolution;
  }
  return SectorConfig(sorted_wrapped(std::move(x), grid_), grid_);
}

BtqftTimeline::BtqftTimeline(const ModelHamiltonian& h, const QuantumState& initial, double T,
                             double dt)
    : dt_(dt) {
  emission_of(h);
  if (!(dt > 0) || !(T > 0)) throw ParameterError("T and dt must be positive");
  const double k = std::round(T / dt);
  if (std::abs(T / dt - k) > 1e-9) throw ParameterError("T must be a multiple of dt");
  steps_ = static_cast<std::size_t>(k);
  const std::size_t count = 4 * steps_ + 1;
  if (h.dimension() <= kExactDimensionLimit) {
    propagator_ = std::make_shared<const Propagator>(h, initial);
    states_.reserve(count);
    for (std::size_t q = 0; q < count; ++q) states_.push_back(propagator_->at(q * 0.25 * dt));
  } else {
    const StateTimeline tl(h, initial, 0.25 * dt, count);
    for (std::size_t q = 0; q < count; ++q) states_.push_back(tl[q]);
  }
  fields_.reserve(count);
  for (const auto& s : states_) {
    fields_.emplace_back(s);
    max_norm_defect_ = std::max(max_norm_defect_, std::abs(norm_squared(s) - 1.0));
  }
  hamiltonian_ = std::make_shared<const ModelHamiltonian>(h);
}

std::shared_ptr<const SectorField> BtqftTimeline::field_at(double t) const {
  {
    const std::lock_guard<std::mutex> lock(cache_mutex_);
    if (auto it = cache_.find(t); it != cache_.end()) return it->second;
  }
  std::shared_ptr<const SectorField> field;
  if (propagator_) {
    field = std::make_shared<const SectorField>(propagator_->at(t));
  } else {
    const double quarter = 0.25 * dt_;
    auto k = static_cast<std::size_t>(std::floor(t / quarter));
    k = std::min(k, states_.size() - 1);
    const double rest = t - k * quarter;
    field = rest <= 0 ? std::make_shared<const SectorField>(fields_[k])
                      : std::make_shared<const SectorField>(
                            evolve(states_[k], *hamiltonian_, rest, StepMethod::ImplicitMidpoint));
  }
  const std::lock_guard<std::mutex> lock(cache_mutex_);
  return cache_.emplace(t, std::move(field)).first->second;
}

namespace {

struct FineGrid {
  int resolution = 0;
  double h = 0.0;
  std::vector<double> f;       // form factor at fine midpoints
  std::vector<double> kernel;  // resolution x G
};

FineGrid make_fine_grid(const ModelHamiltonian& h, int subcells) {
  const Grid& grid = *h.grid();
  FineGrid fg;
  fg.resolution = subcells * grid.points;
  fg.h = grid.length() / fg.resolution;
  std::vector<double> pts(fg.resolution);
  fg.f.resize(fg.resolution);
  for (int k = 0; k < fg.resolution; ++k) {
    pts[k] = (k + 0.5) * fg.h;
    fg.f[k] = h.form_factor_at(pts[k]);
  }
  fg.kernel = kernel_matrix(SpectralKernel(grid), pts);
  return fg;
}

class Walker {
 public:
  Walker(const BtqftTimeline& tl, const ModelHamiltonian& h, const FineGrid& fine,
         const BtqftOptions& opt, Rng& rng, BtqftCounters& counters, TrajectoryRecord& rec)
      : tl_(tl),
        h_(h),
        params_(emission_of(h)),
        grid_(*h.grid()),
        fine_(fine),
        opt_(opt),
        rng_(rng),
        counters_(counters),
        rec_(rec) {}

  void run(const SectorConfig& start) {
    x_ = start.positions();
    const double dt = tl_.dt();
    if (opt_.record_events) push_event(0.0, EventKind::Start, sector(), -1, NAN);
    record_checkpoints(0.0);
    try {
      for (std::size_t k = 0; k < tl_.steps(); ++k) {
        const double t0 = k * dt;
        const SectorField* f[5];
        for (int q = 0; q < 5; ++q) f[q] = &tl_.quarter(4 * k + q);
        step(t0, dt, f, 0);
        const double t1 = (k + 1) * dt;
        record_checkpoints(t1);
        if (opt_.record_events && opt_.record_interval > 0) {
          const double r = t1 / opt_.record_interval;
          if (std::abs(r - std::round(r)) < 1e-9) push_event(t1, EventKind::Sample, sector(), -1, NAN);
        }
      }
      if (opt_.record_events) push_event(tl_.steps() * dt, EventKind::End, sector(), -1, NAN);
    } catch (const FlagTrajectory& flag) {
      rec_.flagged = true;
      rec_.flag_reason = flag.reason;
      if (opt_.record_events) push_event(t_flag_, EventKind::Flagged, sector(), -1, NAN);
    }
  }

 private:
  long sector() const { return static_cast<long>(x_.size()); }

  void push_event(double t, EventKind kind, long src, long dst, double pos) {
    TrajectoryEvent e;
    e.t = t;
    e.kind = kind;
    e.source_id = src;
    e.destination_id = dst;
    e.destination_position = pos;
    e.positions = x_;
    rec_.events.push_back(std::move(e));
  }

  void record_checkpoints(double t) {
    for (double c : opt_.checkpoints) {
      if (std::abs(c - t) <= 1e-9 * std::max(1.0, t)) rec_.checkpoints.push_back({c, sector(), x_});
    }
  }

  // One Strang step: flow h/2, jumps over h with the midpoint field, flow h/2.
  // f[0..4] are the fields at t0 + q h / 4.
  void step(double t0, double h, const SectorField* const f[5], int depth) {
    if (depth < kMaxWindowDepth && intensity_bound(*f[2]) * h > opt_.max_window_intensity) {
      counters_.window_splits += 1;
      split_step(t0, h, f, depth);
      return;
    }
    flow(t0, 0.5 * h, *f[0], *f[1], 0);
    jumps(t0, h, *f[2]);
    flow(t0 + 0.5 * h, 0.5 * h, *f[2], *f[3], 0);
  }

  void split_step(double t0, double h, const SectorField* const f[5], int depth) {
    std::shared_ptr<const SectorField> extra[4];
    for (int q = 0; q < 4; ++q) extra[q] = tl_.field_at(t0 + (2 * q + 1) * h / 8);
    const SectorField* a[5] = {f[0], extra[0].get(), f[1], extra[1].get(), f[2]};
    const SectorField* b[5] = {f[2], extra[2].get(), f[3], extra[3].get(), f[4]};
    step(t0, 0.5 * h, a, depth + 1);
    step(t0 + 0.5 * h, 0.5 * h, b, depth + 1);
  }

  void flow(double t0, double h, const SectorField& fa, const SectorField& fb, int depth) {
    if (x_.empty()) return;
    std::vector<double> v0, v1;
    std::vector<double> xm(x_.size());
    bool split = false;
    try {
      v0 = velocities_at(fa, x_, params_.mass, opt_.node_threshold);
      if (max_abs(v0) * h >= grid_.dx) {
        split = true;
      } else {
        for (std::size_t i = 0; i < x_.size(); ++i) xm[i] = grid_.wrap(x_[i] + 0.5 * h * v0[i]);
        v1 = velocities_at(fb, xm, params_.mass, opt_.node_threshold);
        if (max_abs(v1) * h >= grid_.dx) split = true;
      }
    } catch (const NodeError&) {
      split = true;
    }
    if (split) {
      if (0.5 * h < opt_.dt_min || depth >= kMaxFlowDepth) {
        t_flag_ = t0;
        throw FlagTrajectory{"node or velocity guard below the minimum step"};
      }
      counters_.flow_splits += 1;
      const auto q1 = tl_.field_at(t0 + 0.25 * h);
      const auto q2 = tl_.field_at(t0 + 0.5 * h);
      const auto q3 = tl_.field_at(t0 + 0.75 * h);
      flow(t0, 0.5 * h, fa, *q1, depth + 1);
      flow(t0 + 0.5 * h, 0.5 * h, *q2, *q3, depth + 1);
      return;
    }
    for (std::size_t i = 0; i < x_.size(); ++i) x_[i] = grid_.wrap(x_[i] + h * v1[i]);
    std::sort(x_.begin(), x_.end());
  }

  // Upper bound on the total jump intensity out of the current configuration.
  double intensity_bound(const SectorField& field) {
    const int n = static_cast<int>(x_.size());
    const cplx psi = field.value(n, x_);
    const double w = std::norm(psi);
    if (w <= kSupportFloor) return 0.0;
    double total = creation_bound(field, std::sqrt(w));
    for (int i = 0; i < n; ++i) total += annihilation(field, i, psi, w);
    return total;
  }

  double creation_bound(const SectorField& field, double abs_psi) {
    const int n = static_cast<int>(x_.size());
    if (n + 1 > field.n_max() || params_.g == 0.0) return 0.0;
    field.partial_nodes(x_, phi_);
    double s = 0.0;
    for (const cplx& p : phi_) s += std::norm(p);
    return 2.0 / field.hbar() * std::sqrt(n + 1.0) * std::abs(params_.g) * h_.form_factor_norm() *
           std::sqrt(grid_.dx * s) / abs_psi;
  }

  double annihilation(const SectorField& field, int i, cplx psi, double w) {
    std::vector<double> rest = x_;
    rest.erase(rest.begin() + i);
    const cplx down = field.value(static_cast<int>(rest.size()), rest);
    const double numerator = params_.g * h_.form_factor_at(x_[i]) * imcross(down, psi);
    return 2.0 / field.hbar() * apply_rule(numerator, opt_.rule) /
           (std::sqrt(static_cast<double>(x_.size())) * w);
  }

  void jumps(double t0, double h, const SectorField& field) {
    double t = t0;
    const double t_end = t0 + h;
    while (true) {
      const int n = static_cast<int>(x_.size());
      const cplx psi = field.value(n, x_);
      const double w = std::norm(psi);
      if (w <= kSupportFloor) {
        t_flag_ = t;
        throw FlagTrajectory{"configuration outside support"};
      }
      const double bound_c = creation_bound(field, std::sqrt(w));
      std::vector<double> ann(n);
      double total = bound_c;
      for (int i = 0; i < n; ++i) {
        ann[i] = annihilation(field, i, psi, w);
        total += ann[i];
      }
      if (!(total > 0)) return;
      const double tau = rng_.exponential() / total;
      if (t + tau >= t_end) return;
      t += tau;
      counters_.proposals += 1;
      double u = rng_.uniform() * total;
      if (u < bound_c) {
        propose_creation(t, field, psi, w, bound_c);
      } else {
        u -= bound_c;
        std::size_t pick = 0;
        for (int i = 0; i < n; ++i) {
          if (ann[i] <= 0) continue;
          pick = i;
          if (u < ann[i]) break;
          u -= ann[i];
        }
        const double removed = x_[pick];
        const long src = sector();
        x_.erase(x_.begin() + static_cast<std::ptrdiff_t>(pick));
        if (opt_.record_events) push_event(t, EventKind::Annihilation, src, sector(), removed);
      }
    }
  }

  void propose_creation(double t, const SectorField& field, cplx psi, double w, double bound) {
    const int n = static_cast<int>(x_.size());
    const int G = grid_.points;
    const double pref = 2.0 / field.hbar() * std::sqrt(n + 1.0);
    profile_.resize(fine_.resolution);
    double integral = 0.0;
    for (int k = 0; k < fine_.resolution; ++k) {
      const double* K = fine_.kernel.data() + static_cast<std::size_t>(k) * G;
      double re = 0.0, im = 0.0;
      for (int j = 0; j < G; ++j) {
        re += phi_[j].real() * K[j];
        im += phi_[j].imag() * K[j];
      }
      const double numerator = params_.g * fine_.f[k] * imcross(cplx(re, im), psi);
      profile_[k] = pref * apply_rule(numerator, opt_.rule) / w;
      integral += profile_[k] * fine_.h;
    }
    if (integral > bound) counters_.bound_violations += 1;
    if (rng_.uniform() * bound >= integral) return;
    double u = rng_.uniform() * (integral / fine_.h);
    int pick = 0;
    for (int k = 0; k < fine_.resolution; ++k) {
      if (profile_[k] <= 0) continue;
      pick = k;
      if (u < profile_[k]) break;
      u -= profile_[k];
    }
    const double y = grid_.wrap((pick + rng_.uniform()) * fine_.h);
    const long src = sector();
    x_.insert(std::upper_bound(x_.begin(), x_.end(), y), y);
    if (opt_.record_events) push_event(t, EventKind::Creation, src, sector(), y);
  }

  const BtqftTimeline& tl_;
  const ModelHamiltonian& h_;
  const EmissionParams& params_;
  const Grid& grid_;
  const FineGrid& fine_;
  const BtqftOptions& opt_;
  Rng& rng_;
  BtqftCounters& counters_;
  TrajectoryRecord& rec_;
  std::vector<double> x_;
  std::vector<cplx> phi_;
  std::vector<double> profile_;
  double t_flag_ = 0.0;
};

void check_checkpoints(const std::vector<double>& checkpoints, double T, double dt) {
  for (double c : checkpoints) {
    const double k = std::round(c / dt);
    if (std::abs(c / dt - k) > 1e-9 || c < 0 || c > T * (1 + 1e-12)) {
      throw ParameterError("checkpoint " + std::to_string(c) +
                           " must be a multiple of dt inside [0, T]");
    }
  }
}

}  // namespace

TrajectoryRecord run_btqft_trajectory(const BtqftTimeline& timeline, const ModelHamiltonian& h,
                                      const SectorConfig& initial, Rng& rng,
                                      const BtqftOptions& options, BtqftCounters* counters) {
  const FineGrid fine = make_fine_grid(h, options.subcells);
  BtqftCounters local;
  TrajectoryRecord rec;
  Walker walker(timeline, h, fine, options, rng, counters ? *counters : local, rec);
  walker.run(initial);
  return rec;
}

TrajectoryRecord run_btqft_trajectory(const PdmpState& initial, const ModelHamiltonian& h,
                                      double T, double dt, Rng& rng,
                                      const BtqftOptions& options) {
  check_checkpoints(options.checkpoints, T, dt);
  const BtqftTimeline timeline(h, initial.psi, T, dt);
  return run_btqft_trajectory(timeline, h, initial.config, rng, options);
}

BtqftEnsemble run_btqft_ensemble(const ModelHamiltonian& h, const QuantumState& psi0,
                                 std::size_t M, double T, double dt, const BtqftOptions& options,
                                 std::uint64_t seed, int workers,
                                 const std::vector<SectorConfig>& initial) {
  if (!initial.empty() && initial.size() != M) {
    throw ParameterError("initial configuration list must hold M entries");
  }
  check_checkpoints(options.checkpoints, T, dt);
  const BtqftTimeline timeline(h, psi0, T, dt);
  const FineGrid fine = make_fine_grid(h, options.subcells);
  std::vector<double> sectors(psi0.basis().n_max() + 1);
  for (int n = 0; n <= psi0.basis().n_max(); ++n) sectors[n] = psi0.sector_probability(n);
  std::unique_ptr<BornSampler> sampler;
  if (initial.empty()) sampler = std::make_unique<BornSampler>(timeline.quarter(0), sectors, options.subcells);

  BtqftEnsemble out;
  out.records.resize(M);
  out.initial.resize(M);
  const int n_workers = std::max(1, workers);
  std::vector<BtqftCounters> per_worker(static_cast<std::size_t>(n_workers));
  const std::size_t chunk = (M + n_workers - 1) / n_workers;
  parallel_chunks(M, n_workers, [&](std::size_t begin, std::size_t end) {
    BtqftCounters& c = per_worker[chunk == 0 ? 0 : begin / chunk];
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(seed, i);
      out.initial[i] = initial.empty() ? sampler->draw(rng) : initial[i];
      Walker walker(timeline, h, fine, options, rng, c, out.records[i]);
      walker.run(out.initial[i]);
    }
  });
  for (const auto& c : per_worker) {
    out.counters.proposals += c.proposals;
    out.counters.bound_violations += c.bound_violations;
    out.counters.window_splits += c.window_splits;
    out.counters.flow_splits += c.flow_splits;
  }
  for (const auto& r : out.records) out.flagged += r.flagged ? 1 : 0;
  out.max_norm_defect = timeline.max_norm_defect();
  return out;
}

}  // namespace pilotwave
