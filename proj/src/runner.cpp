#include "pilotwave/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "pilotwave/bell.hpp"
#include "pilotwave/btqft.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/evolution.hpp"
#include "pilotwave/format.hpp"
#include "pilotwave/nikolic.hpp"
#include "pilotwave/verify.hpp"

namespace pilotwave {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / (name + ".partial"), std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error("cannot write artifact " + name);
    entries_.push_back({name, sha256_hex(content), content.size()});
  }
  void write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

  std::vector<std::string> commit() {
    json list = json::array();
    std::vector<std::string> names;
    for (const auto& e : entries_) {
      fs::rename(dir_ / (e.name + ".partial"), dir_ / e.name);
      list.push_back({{"path", e.name}, {"sha256", e.hash}, {"bytes", e.bytes}});
      names.push_back(e.name);
    }
    std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    out << json{{"artifacts", list}}.dump(2) << "\n";
    names.push_back("manifest.json");
    return names;
  }

 private:
  struct Entry {
    std::string name;
    std::string hash;
    std::size_t bytes;
  };
  fs::path dir_;
  std::vector<Entry> entries_;
};

RateRule rule_of(const json& params) {
  return params["rule"].get<std::string>() == "magnitude" ? RateRule::Magnitude
                                                           : RateRule::PositivePart;
}

// Sector index of a recorded configuration id.
int sector_of(const ModelHamiltonian& h, long id) {
  return h.grid() ? static_cast<int>(id) : h.basis().sector(static_cast<std::size_t>(id));
}

std::string sector_path(const ModelHamiltonian& h, const TrajectoryRecord& r) {
  std::string out;
  int last = -1;
  for (const auto& e : r.events) {
    int s = -1;
    if (e.kind == EventKind::Start) s = sector_of(h, e.source_id);
    else if (e.kind == EventKind::Jump || e.kind == EventKind::Creation || e.kind == EventKind::Annihilation) {
      s = sector_of(h, e.destination_id);
    }
    if (s < 0 || s == last) continue;
    out += (out.empty() ? "" : "-") + std::to_string(s);
    last = s;
  }
  return out;
}

json ensemble_summary(const ModelHamiltonian& h, const QuantumState& psi0,
                      const std::vector<TrajectoryRecord>& records,
                      const std::vector<double>& checkpoints, std::uint64_t seed) {
  const Propagator prop(h, psi0);
  const int n_max = h.basis().n_max();
  std::size_t used = 0;
  for (const auto& r : records) used += r.flagged ? 0 : 1;
  json out = json::array();
  for (double t : checkpoints) {
    const QuantumState psi = prop.at(t);
    std::vector<double> counts(n_max + 1, 0.0);
    for (const auto& r : records) {
      if (r.flagged) continue;
      for (const auto& c : r.checkpoints) {
        if (std::abs(c.t - t) <= 1e-9 * std::max(1.0, t)) counts[sector_of(h, c.config_id)] += 1.0;
      }
    }
    DensityTable exact{"sector-marginal", {}}, emp{"sector-marginal", {}};
    json sectors = json::array();
    for (int n = 0; n <= n_max; ++n) {
      const double p = psi.sector_probability(n);
      const double f = used ? counts[n] / used : 0.0;
      const double sigma = used ? std::sqrt(p * (1 - p) / used) : 0.0;
      exact.mass.push_back(p);
      emp.mass.push_back(f);
      sectors.push_back({{"n", n},
                         {"exact", p},
                         {"empirical", f},
                         {"within_2sigma", std::abs(f - p) <= 2.0 * sigma + 1e-15}});
    }
    json entry{{"t", t},
               {"sectors", sectors},
               {"sector_tv", tv_distance(emp, exact)},
               {"noise_baseline_tv", noise_baseline_tv(exact, std::max<std::size_t>(used, 1), seed)}};
    if (!h.grid()) {
      const Binning b = Binning::lattice(h.dimension());
      const DensityTable ref = reference_distribution(psi, b);
      const DensityTable e = empirical_distribution(records, t, b);
      entry["config_tv"] = tv_distance(e, ref);
      entry["config_empirical"] = e.mass;
      entry["config_exact"] = ref.mass;
    }
    out.push_back(std::move(entry));
  }
  return out;
}

json sequence_counts(const ModelHamiltonian& h, const std::vector<TrajectoryRecord>& records) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) {
    if (!r.flagged) ++counts[sector_path(h, r)];
  }
  json out = json::object();
  for (const auto& [k, v] : counts) out[k] = v;
  return out;
}

std::vector<TrajectoryRecord> run_records(const ScenarioConfig& c, const ModelHamiltonian& h,
                                          const QuantumState& psi0, int workers,
                                          const std::vector<double>& checkpoints, json& info) {
  if (!h.grid()) {
    BellOptions opt;
    opt.rule = rule_of(c.params);
    opt.checkpoints = checkpoints;
    BellEnsemble ens = run_bell_ensemble(h, psi0, c.M, c.T, c.dt, opt, c.seed, workers);
    info = {{"M", c.M}, {"flagged", ens.flagged}, {"max_norm_defect", ens.max_norm_defect}};
    return std::move(ens.records);
  }
  BtqftOptions opt;
  opt.rule = rule_of(c.params);
  opt.checkpoints = checkpoints;
  opt.subcells = c.params["subcells"].get<int>();
  opt.record_interval = c.record_interval;
  BtqftEnsemble ens = run_btqft_ensemble(h, psi0, c.M, c.T, c.dt, opt, c.seed, workers);
  std::size_t violations = 0;
  for (const auto& r : ens.records) {
    for (const auto& e : r.events) {
      if ((e.kind == EventKind::Creation || e.kind == EventKind::Annihilation) &&
          std::abs(e.destination_id - e.source_id) != 1) {
        ++violations;
      }
    }
  }
  info = {{"M", c.M},
          {"flagged", ens.flagged},
          {"max_norm_defect", ens.max_norm_defect},
          {"transition_violations", violations},
          {"proposals", ens.counters.proposals},
          {"bound_violations", ens.counters.bound_violations},
          {"window_splits", ens.counters.window_splits},
          {"flow_splits", ens.counters.flow_splits}};
  return std::move(ens.records);
}

VerifyModel verify_model(const ScenarioConfig& c, const ModelHamiltonian& h, const QuantumState& psi0) {
  VerifyModel m{c.model, h, psi0, c.dt, rule_of(c.params)};
  m.tv_threshold = c.params["tv_threshold"].get<double>();
  if (h.grid()) {
    m.position_bins = c.params["position_bins"].get<int>();
    m.position_tv_threshold = c.params["position_tv_threshold"].get<double>();
  }
  return m;
}

int run_quantum(const ScenarioConfig& c, int workers, Artifacts& out, std::ostringstream& log) {
  const ModelHamiltonian h = scenario_hamiltonian(c);
  const QuantumState psi0 = scenario_initial_state(c, h);
  out.write("hamiltonian.csv", triplets_csv(h.full()));
  out.write_json("initial_state.json", state_to_json(psi0));

  if (c.mode == "trajectory") {
    json info;
    const auto records = run_records(c, h, psi0, workers, c.checkpoints, info);
    out.write("trajectories.csv", trajectories_csv(records));
    out.write_json("final_state.json", state_to_json(Propagator(h, psi0).at(c.T)));
    std::size_t jumps = 0;
    for (const auto& r : records) jumps += r.jump_count();
    log << "trajectory " << c.model << ": " << records.size() << " path(s), " << jumps
        << " jump(s), flagged " << info["flagged"].get<std::size_t>() << "\n";
    return 0;
  }

  if (c.mode == "ensemble") {
    json info;
    const auto records = run_records(c, h, psi0, workers, c.checkpoints, info);
    info["checkpoints"] = ensemble_summary(h, psi0, records, c.checkpoints, c.seed);
    info["sector_sequences"] = sequence_counts(h, records);
    out.write("trajectories.csv", trajectories_csv(records));
    out.write_json("ensemble.json", info);
    for (const auto& cp : info["checkpoints"]) {
      log << "ensemble " << c.model << " t=" << format_double(cp["t"].get<double>())
          << " sector TV=" << cp["sector_tv"].get<double>() << "\n";
    }
    return 0;
  }

  // verify
  const VerifyModel model = verify_model(c, h, psi0);
  const EnsembleReport eq = check_equivariance(model, c.M, c.checkpoints, c.seed, workers);
  const double tolerance = h.grid() ? 1e-5 : 1e-6;
  const MasterEquationResult me = check_master_equation(h, psi0, c.checkpoints);
  const bool me_pass = me.max_residual < tolerance;
  json report{{"equivariance", eq.to_json()},
              {"master_equation",
               {{"times", c.checkpoints},
                {"residual", me.residual_per_time},
                {"max_residual", me.max_residual},
                {"tolerance", tolerance},
                {"pass", me_pass}}}};
  bool pass = eq.pass() && me_pass;
  log << eq.summary();
  log << "master-equation " << c.model << " max residual " << me.max_residual << " (tolerance "
      << tolerance << ") " << (me_pass ? "PASS" : "FAIL") << "\n";
  if (c.params["time_reversal"].get<bool>()) {
    const EnsembleReport tr = check_time_reversal(model, c.T, c.M, c.seed, workers, true);
    report["time_reversal"] = tr.to_json();
    log << tr.summary();
    pass = pass && tr.pass();
  }
  report["pass"] = pass;
  out.write_json("report.json", report);
  log << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 1;
}

double max_norm(const FourVelocity& v) { return std::max(std::abs(v.v[0][0]), std::abs(v.v[0][1])); }

int run_decay(const ScenarioConfig& c, Artifacts& out, std::ostringstream& log) {
  const DecayScenario sc = scenario_decay(c);
  const json& p = c.params;
  if (c.mode == "sweep") {
    std::ostringstream csv;
    csv << "separation,separation_over_w,speed,direct_speed,overlap\n";
    double last = INFINITY;
    bool monotone = true, positive = true;
    for (double k : p["separations_w"].get<std::vector<double>>()) {
      const double sep = k * sc.w_e;
      const DecayScenario at = with_separation(sc, sep);
      const double speed = dead_particle_speed(sc, sep);
      const double direct = max_norm(four_velocity(at, at.reference));
      csv << format_double(sep) << ',' << format_double(k) << ',' << format_double(speed) << ','
          << format_double(direct) << ',' << format_double(detector_overlap(at)) << '\n';
      monotone = monotone && speed < last;
      positive = positive && speed > 0;
      last = speed;
      log << "separation " << format_double(sep) << ": speed " << speed << "\n";
    }
    out.write("sweep.csv", csv.str());
    log << "strictly positive: " << (positive ? "yes" : "no")
        << ", decreasing: " << (monotone ? "yes" : "no") << "\n";
    return 0;
  }
  const double span = p["s_span"].get<double>(), ds = p["ds"].get<double>();
  std::vector<MultiTimePoint> path;
  if (p["two_stage"].is_null()) {
    path = integrate_multitime(sc, sc.reference, span, ds);
  } else {
    path = two_stage_path(sc, sc.reference, p["two_stage"]["y_first"].get<double>(),
                          p["two_stage"]["s_first"].get<double>(), span, ds);
  }
  std::ostringstream csv;
  csv << "s,t1,x1,t2,x2,t3,x3,y,dominant_branch\n";
  std::size_t switches = 0;
  int last = 0;
  for (const auto& q : path) {
    const int b = dominant_branch(sc, q);
    if (last && b != last) ++switches;
    last = b;
    csv << format_double(q.s);
    for (int k = 0; k < 3; ++k) csv << ',' << format_double(q.X[k][0]) << ',' << format_double(q.X[k][1]);
    csv << ',' << format_double(q.y) << ',' << b << '\n';
  }
  out.write("path.csv", csv.str());
  log << "path with " << path.size() << " points, dominant branch at end " << last << ", "
      << switches << " switch(es)\n";
  return 0;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, int workers) {
  if (workers < 1) throw ParameterError("workers must be at least 1");
  Artifacts out(config.output_dir);
  out.write_json("scenario.json", scenario_to_json(config));
  std::ostringstream log;
  RunReport rep;
  rep.exit_code = config.model == "nikolic-decay" ? run_decay(config, out, log)
                                                   : run_quantum(config, workers, out, log);
  rep.artifacts = out.commit();
  rep.summary = log.str();
  return rep;
}

}  // namespace pilotwave
