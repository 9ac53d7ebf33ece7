#include "pilotwave/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "pilotwave/errors.hpp"

namespace pilotwave {

using nlohmann::json;

namespace {

enum class Bound { Any, Positive, NonNegative };

// Reads keys of one JSON object, applying defaults and collecting problems.
class Reader {
 public:
  Reader(const json& in, std::string path, std::vector<std::string>& errors)
      : in_(in), path_(std::move(path)), errors_(errors) {
    if (!in_.is_object()) fail("", "expected an object");
  }

  json result() const { return out_; }
  bool ok() const { return in_.is_object(); }

  void finish() {
    if (!in_.is_object()) return;
    for (const auto& [key, value] : in_.items()) {
      if (!seen_.count(key)) fail(key, "unknown key");
    }
  }

  double number(const std::string& key, double def, Bound bound = Bound::Any) {
    double v = def;
    if (const json* j = take(key)) {
      if (!j->is_number()) {
        fail(key, "expected a number");
      } else {
        v = j->get<double>();
        if (!std::isfinite(v)) fail(key, "must be finite");
        if (bound == Bound::Positive && !(v > 0)) fail(key, "must be positive");
        if (bound == Bound::NonNegative && !(v >= 0)) fail(key, "must be non-negative");
      }
    }
    out_[key] = v;
    return v;
  }

  long integer(const std::string& key, long def, long min) {
    long v = def;
    if (const json* j = take(key)) {
      if (!j->is_number_integer()) {
        fail(key, "expected an integer");
      } else {
        v = j->get<long>();
        if (v < min) fail(key, "must be at least " + std::to_string(min));
      }
    }
    out_[key] = v;
    return v;
  }

  bool boolean(const std::string& key, bool def) {
    bool v = def;
    if (const json* j = take(key)) {
      if (!j->is_boolean()) {
        fail(key, "expected true or false");
      } else {
        v = j->get<bool>();
      }
    }
    out_[key] = v;
    return v;
  }

  std::string choice(const std::string& key, const std::string& def,
                     const std::vector<std::string>& allowed) {
    std::string v = def;
    if (const json* j = take(key)) {
      if (!j->is_string()) {
        fail(key, "expected a string");
      } else {
        v = j->get<std::string>();
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
          std::string list;
          for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
          fail(key, "must be one of " + list);
        }
      }
    }
    out_[key] = v;
    return v;
  }

  cplx complex(const std::string& key, cplx def) {
    cplx v = def;
    if (const json* j = take(key)) {
      if (!is_pair(*j)) {
        fail(key, "expected [re, im]");
      } else {
        v = {(*j)[0].get<double>(), (*j)[1].get<double>()};
      }
    }
    out_[key] = json::array({v.real(), v.imag()});
    return v;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& def,
                              Bound bound = Bound::Any) {
    std::vector<double> v = def;
    if (const json* j = take(key)) {
      v.clear();
      if (!j->is_array()) {
        fail(key, "expected an array of numbers");
      } else {
        for (const auto& e : *j) {
          if (!e.is_number()) {
            fail(key, "expected an array of numbers");
            break;
          }
          const double x = e.get<double>();
          if (bound == Bound::Positive && !(x > 0)) fail(key, "entries must be positive");
          if (bound == Bound::NonNegative && !(x >= 0)) fail(key, "entries must be non-negative");
          v.push_back(x);
        }
      }
    }
    out_[key] = v;
    return v;
  }

  // Raw access for nested structures; the caller stores the normalized value.
  const json* raw(const std::string& key) { return take(key); }
  void store(const std::string& key, json value) { out_[key] = std::move(value); }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  void fail(const std::string& key, const std::string& what) {
    errors_.push_back((key.empty() ? path_ : path(key)) + ": " + what);
  }

 private:
  static bool is_pair(const json& j) {
    return j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number();
  }

  const json* take(const std::string& key) {
    seen_.insert(key);
    if (!in_.is_object()) return nullptr;
    auto it = in_.find(key);
    if (it == in_.end()) return nullptr;
    return &*it;
  }

  const json& in_;
  std::string path_;
  std::vector<std::string>& errors_;
  json out_ = json::object();
  std::set<std::string> seen_;
};

const json kEmptyObject = json::object();

json packet_json(const json* in, const std::string& path, std::vector<std::string>& errors,
                 double center, double width, double momentum, double mass, bool with_mass) {
  Reader r(in ? *in : kEmptyObject, path, errors);
  r.number("center", center);
  r.number("width", width, Bound::Positive);
  r.number("momentum", momentum);
  if (with_mass) r.number("mass", mass, Bound::NonNegative);
  r.finish();
  return r.result();
}

json read_bell_params(const json& in, std::vector<std::string>& errors) {
  Reader r(in, "params", errors);
  const long sites = r.integer("sites", 2, 2);
  r.number("hop", 1.0);
  r.number("hop_phase", 0.0);
  r.number("pair_coupling", 0.0);
  r.number("single_coupling", 0.0);
  r.number("onsite", 0.0);
  const long n_max = r.integer("n_max", 2, 1);
  r.integer("dimension_cap", static_cast<long>(FockBasis::kDefaultDimensionCap), 1);
  r.choice("rule", "positive-part", {"positive-part", "magnitude"});
  r.number("tv_threshold", 0.0, Bound::NonNegative);
  r.boolean("time_reversal", true);

  const json* init = r.raw("initial");
  json initial = json::object();
  if (!init) {
    initial["occupations"] = std::vector<long>(static_cast<std::size_t>(std::max(0L, sites)), 0);
  } else if (!init->is_object() || init->size() != 1 ||
             !(init->contains("occupations") || init->contains("amplitudes"))) {
    r.fail("initial", "expected {\"occupations\": [...]} or {\"amplitudes\": [[re, im], ...]}");
  } else if (init->contains("occupations")) {
    const json& occ = (*init)["occupations"];
    bool good = occ.is_array() && static_cast<long>(occ.size()) == sites;
    long total = 0;
    if (good) {
      for (const auto& e : occ) {
        if (!e.is_number_integer() || e.get<long>() < 0) good = false;
        else total += e.get<long>();
      }
    }
    if (!good) r.fail("initial.occupations", "expected one non-negative integer per site");
    else if (total > n_max) r.fail("initial.occupations", "particle number exceeds n_max");
    initial["occupations"] = occ;
  } else {
    const json& amp = (*init)["amplitudes"];
    bool good = amp.is_array();
    double norm = 0.0;
    if (good) {
      for (const auto& e : amp) {
        if (!(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())) {
          good = false;
          break;
        }
        norm += std::norm(cplx(e[0].get<double>(), e[1].get<double>()));
      }
    }
    if (!good) {
      r.fail("initial.amplitudes", "expected an array of [re, im] pairs");
    } else if (sites >= 1 && n_max >= 0 &&
               amp.size() != FockBasis::dimension_for(static_cast<int>(sites), static_cast<int>(n_max))) {
      r.fail("initial.amplitudes", "length must equal the basis dimension");
    } else if (!(norm > 0)) {
      r.fail("initial.amplitudes", "state has zero norm");
    }
    initial["amplitudes"] = amp;
  }
  r.store("initial", initial);
  r.finish();
  return r.result();
}

json read_emission_params(const json& in, std::vector<std::string>& errors) {
  Reader r(in, "params", errors);
  const long points = r.integer("points", 32, 16);
  if (points % 2 != 0) r.fail("points", "must be even");
  const double dx = r.number("dx", 0.25, Bound::Positive);
  r.number("g", 0.3);
  const double width = r.number("width", 1.0, Bound::Positive);
  if (width > 0 && dx > 0 && width < 2.0 * dx) r.fail("width", "form factor under-resolved (needs width >= 2 dx)");
  const double L = static_cast<double>(points) * dx;
  const auto sources = r.numbers("sources", {0.5 * L});
  for (double s : sources) {
    if (!(s >= 0 && s < L)) r.fail("sources", "positions must lie in [0, points * dx)");
  }
  r.number("mass", 1.0, Bound::Positive);
  const long n_max = r.integer("n_max", 1, 1);
  r.integer("dimension_cap", static_cast<long>(FockBasis::kDefaultDimensionCap), 1);
  r.integer("subcells", 8, 1);
  r.integer("position_bins", 16, 1);
  r.choice("rule", "positive-part", {"positive-part", "magnitude"});
  r.number("tv_threshold", 0.0, Bound::NonNegative);
  r.number("position_tv_threshold", 0.0, Bound::NonNegative);
  r.boolean("time_reversal", false);

  const json* init = r.raw("initial");
  json sectors = json::array();
  if (!init) {
    sectors.push_back({{"n", 0}, {"amplitude", {1.0, 0.0}}, {"packets", json::array()}});
  } else if (!init->is_object() || init->size() != 1 || !init->contains("sectors") ||
             !(*init)["sectors"].is_array()) {
    r.fail("initial", "expected {\"sectors\": [...]}");
  } else {
    std::set<long> used;
    std::size_t i = 0;
    for (const auto& s : (*init)["sectors"]) {
      const std::string path = "params.initial.sectors[" + std::to_string(i++) + "]";
      Reader sr(s, path, errors);
      if (!sr.ok()) continue;
      const long n = sr.integer("n", 0, 0);
      if (n > n_max) sr.fail("n", "exceeds n_max");
      if (!used.insert(n).second) sr.fail("n", "sector listed twice");
      sr.complex("amplitude", 1.0);
      const json* packets = sr.raw("packets");
      json list = json::array();
      if (packets && !packets->is_array()) {
        sr.fail("packets", "expected an array");
      } else if (packets) {
        if (static_cast<long>(packets->size()) != n) sr.fail("packets", "needs exactly n packets");
        std::size_t k = 0;
        for (const auto& p : *packets) {
          json pk = packet_json(&p, sr.path("packets[" + std::to_string(k++) + "]"), errors,
                                0.5 * L, 1.0, 0.0, 0.0, false);
          if (pk.contains("center") && !(pk["center"].get<double>() >= 0 && pk["center"].get<double>() < L)) {
            errors.push_back(sr.path("packets") + ": centers must lie in [0, points * dx)");
          }
          list.push_back(std::move(pk));
        }
      } else if (n != 0) {
        sr.fail("packets", "needs exactly n packets");
      }
      sr.store("packets", list);
      sr.finish();
      sectors.push_back(sr.result());
    }
    if (sectors.empty()) r.fail("initial.sectors", "must not be empty");
  }
  r.store("initial", json{{"sectors", sectors}});
  r.finish();
  return r.result();
}

json read_decay_params(const json& in, std::vector<std::string>& errors) {
  Reader r(in, "params", errors);
  const double s = 1.0 / std::numbers::sqrt2;
  r.complex("a1", {s, 0.0});
  r.complex("a2", {0.0, s});
  r.store("phi1", packet_json(r.raw("phi1"), "params.phi1", errors, 0.0, 1.0, 0.8, std::numbers::sqrt2, true));
  r.store("phi2", packet_json(r.raw("phi2"), "params.phi2", errors, -1.0, 1.0, -0.6, 1.0, true));
  r.store("phi3", packet_json(r.raw("phi3"), "params.phi3", errors, 1.0, 1.0, 0.6, 1.0, true));
  r.number("mu1", 0.0);
  const double mu2 = r.number("mu2", 4.0);
  r.number("w_e", 1.0, Bound::Positive);
  r.boolean("exact_collapse", false);
  r.number("pointer_mass", 0.0, Bound::NonNegative);
  {
    const json* ref = r.raw("reference");
    Reader rr(ref ? *ref : kEmptyObject, "params.reference", errors);
    json X = json::array({json::array({0.0, 0.3}), json::array({0.0, -0.8}), json::array({0.0, 1.2})});
    if (const json* x = rr.raw("X")) {
      bool good = x->is_array() && x->size() == 3;
      for (std::size_t k = 0; good && k < 3; ++k) {
        const json& e = (*x)[k];
        good = e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number();
      }
      if (!good) rr.fail("X", "expected three [t, x] pairs");
      else X = *x;
    }
    rr.store("X", X);
    rr.number("y", mu2);
    rr.finish();
    r.store("reference", rr.result());
  }
  r.numbers("separations_w", {2.0, 4.0, 6.0, 8.0}, Bound::NonNegative);
  const double span = r.number("s_span", 2.0, Bound::NonNegative);
  const double ds = r.number("ds", 1e-3, Bound::Positive);
  if (ds > 0 && std::abs(std::round(span / ds) * ds - span) > 1e-9 * std::max(1.0, span)) {
    r.fail("s_span", "must be a multiple of ds");
  }
  const json* two = r.raw("two_stage");
  if (!two || two->is_null()) {
    r.store("two_stage", nullptr);
  } else {
    Reader tr(*two, "params.two_stage", errors);
    tr.number("y_first", 0.0);
    const double first = tr.number("s_first", 1.0, Bound::NonNegative);
    if (ds > 0 && std::abs(std::round(first / ds) * ds - first) > 1e-9 * std::max(1.0, first)) {
      tr.fail("s_first", "must be a multiple of ds");
    }
    tr.finish();
    r.store("two_stage", tr.result());
  }
  r.finish();
  return r.result();
}

bool multiple_of(double t, double dt) {
  const double k = std::round(t / dt);
  return std::abs(k * dt - t) <= 1e-9 * std::max(1.0, std::abs(t));
}

std::vector<cplx> packet_product(const json& packets, const Grid& grid) {
  const int G = grid.points;
  const std::size_t n = packets.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= static_cast<std::size_t>(G);
  std::vector<std::vector<cplx>> factors;
  for (const auto& p : packets) {
    const double c = p["center"].get<double>(), w = p["width"].get<double>();
    const double k = p["momentum"].get<double>();
    std::vector<cplx> f(G);
    for (int j = 0; j < G; ++j) {
      double d = grid.node(j) - c;
      d -= grid.length() * std::round(d / grid.length());
      f[j] = std::exp(-d * d / (2.0 * w * w)) * std::polar(1.0, k * d);
    }
    factors.push_back(std::move(f));
  }
  std::vector<cplx> out(total, 1.0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t k = n; k-- > 0;) {
      out[idx] *= factors[k][rest % G];
      rest /= G;
    }
  }
  return out;
}

WavePacket packet_from(const json& p) {
  return WavePacket::gaussian(p["center"].get<double>(), p["width"].get<double>(),
                              p["momentum"].get<double>(), p["mass"].get<double>());
}

cplx complex_from(const json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

}  // namespace

ScenarioConfig scenario_from_json(const json& doc) {
  std::vector<std::string> errors;
  ScenarioConfig c;
  Reader r(doc, "", errors);
  if (!r.ok()) throw ScenarioError({"scenario: expected a JSON object"});
  const json* model = r.raw("model");
  const json* mode = r.raw("mode");
  if (!model) errors.push_back("model: missing required key");
  if (!mode) errors.push_back("mode: missing required key");
  c.model = r.choice("model", model ? "" : "bell-lattice", {"bell-lattice", "btqft-emission", "nikolic-decay"});
  c.mode = r.choice("mode", mode ? "" : "trajectory", {"trajectory", "ensemble", "verify", "sweep"});
  c.T = r.number("T", 1.0, Bound::Positive);
  c.dt = r.number("dt", 1e-3, Bound::Positive);
  c.hbar = r.number("hbar", 1.0, Bound::Positive);
  c.M = static_cast<std::size_t>(r.integer("M", 1, 1));
  c.record_interval = r.number("record_interval", 0.0, Bound::NonNegative);
  if (const json* s = r.raw("seed")) {
    if (!s->is_number_integer() || (!s->is_number_unsigned() && s->get<long long>() < 0)) {
      errors.push_back("seed: expected a non-negative integer");
    } else {
      c.seed = s->get<std::uint64_t>();
    }
  }
  r.store("seed", c.seed);
  if (const json* o = r.raw("output_dir")) {
    if (!o->is_string() || o->get<std::string>().empty()) errors.push_back("output_dir: expected a path");
    else c.output_dir = o->get<std::string>();
  }
  r.store("output_dir", c.output_dir);
  const bool stochastic = c.model != "nikolic-decay";
  std::vector<double> fallback;
  if (stochastic && (c.mode == "ensemble" || c.mode == "verify")) fallback = {0.5 * c.T, c.T};
  c.checkpoints = r.numbers("checkpoints", fallback, Bound::Positive);
  if (c.T > 0 && c.dt > 0) {
    if (!multiple_of(c.T, c.dt)) errors.push_back("T: must be a multiple of dt");
    for (double t : c.checkpoints) {
      if (t > c.T * (1 + 1e-12) || !multiple_of(t, c.dt)) {
        errors.push_back("checkpoints: entries must be multiples of dt within (0, T]");
        break;
      }
    }
  }
  const json* params = r.raw("params");
  const json& p = params ? *params : kEmptyObject;
  if (c.model == "bell-lattice") c.params = read_bell_params(p, errors);
  else if (c.model == "btqft-emission") c.params = read_emission_params(p, errors);
  else if (c.model == "nikolic-decay") c.params = read_decay_params(p, errors);
  if (model && mode) {
    if (stochastic && c.mode == "sweep") errors.push_back("mode: sweep is only available for nikolic-decay");
    if (!stochastic && c.mode != "trajectory" && c.mode != "sweep") {
      errors.push_back("mode: nikolic-decay supports trajectory and sweep");
    }
  }
  r.finish();
  if (!errors.empty()) throw ScenarioError(errors);
  return c;
}

ScenarioConfig parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({path + ": cannot open file"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError({path + ": " + e.what()});
  }
  return scenario_from_json(doc);
}

json scenario_to_json(const ScenarioConfig& c) {
  return json{{"model", c.model},
              {"mode", c.mode},
              {"params", c.params},
              {"T", c.T},
              {"dt", c.dt},
              {"M", c.M},
              {"seed", c.seed},
              {"hbar", c.hbar},
              {"checkpoints", c.checkpoints},
              {"record_interval", c.record_interval},
              {"output_dir", c.output_dir}};
}

std::vector<std::string> preset_names() {
  return {"picture-a", "pair-creation", "decay-box", "dead-particle-sweep", "bell-2site",
          "btqft-single"};
}

ScenarioConfig preset(const std::string& name) {
  json doc;
  if (name == "picture-a") {
    doc = {{"model", "btqft-emission"},
           {"mode", "ensemble"},
           {"T", 1.0},
           {"dt", 0.01},
           {"M", 2000},
           {"checkpoints", {0.25, 0.5, 0.75, 1.0}},
           {"params", {{"g", 1.5}, {"n_max", 2}, {"sources", {2.0, 6.0}}}}};
  } else if (name == "pair-creation") {
    doc = {{"model", "bell-lattice"},
           {"mode", "ensemble"},
           {"T", 2.0},
           {"dt", 0.01},
           {"M", 2000},
           {"checkpoints", {0.5, 1.0, 1.5, 2.0}},
           {"params", {{"sites", 3}, {"n_max", 4}, {"hop", 1.0}, {"pair_coupling", 0.5}}}};
  } else if (name == "decay-box") {
    doc = {{"model", "nikolic-decay"},
           {"mode", "trajectory"},
           {"params", {{"mu2", 1.0}, {"reference", {{"y", 0.5}}}, {"s_span", 2.0}, {"ds", 1e-3}}}};
  } else if (name == "dead-particle-sweep") {
    doc = {{"model", "nikolic-decay"}, {"mode", "sweep"}, {"params", json::object()}};
  } else if (name == "bell-2site") {
    const std::size_t dim = FockBasis::dimension_for(2, 2);
    json amps = json::array();
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) norm += std::pow(1.0 + 0.3 * i, 2);
    for (std::size_t i = 0; i < dim; ++i) {
      const cplx a = std::polar((1.0 + 0.3 * i) / std::sqrt(norm), 0.9 * i * i);
      amps.push_back({a.real(), a.imag()});
    }
    doc = {{"model", "bell-lattice"},
           {"mode", "verify"},
           {"T", 1.0},
           {"dt", 0.01},
           {"M", 20000},
           {"checkpoints", {0.5, 1.0}},
           {"params",
            {{"sites", 2},
             {"n_max", 2},
             {"hop", 1.0},
             {"hop_phase", 0.7},
             {"pair_coupling", 0.4},
             {"single_coupling", 0.3},
             {"onsite", 0.2},
             {"tv_threshold", 0.03},
             {"initial", {{"amplitudes", amps}}}}}};
  } else if (name == "btqft-single") {
    const double s = 1.0 / std::numbers::sqrt2;
    doc = {{"model", "btqft-emission"},
           {"mode", "verify"},
           {"T", 1.0},
           {"dt", 0.01},
           {"M", 20000},
           {"checkpoints", {0.5, 1.0}},
           {"params",
            {{"n_max", 1},
             {"tv_threshold", 0.03},
             {"position_tv_threshold", 0.05},
             {"initial",
              {{"sectors",
                {{{"n", 0}, {"amplitude", {s, 0.0}}},
                 {{"n", 1},
                  {"amplitude", {s, 0.0}},
                  {"packets", {{{"center", 2.0}, {"width", 1.0}, {"momentum", 2.0}}}}}}}}}}}};
  } else {
    throw ParameterError("unknown preset '" + name + "'");
  }
  doc["output_dir"] = "out/" + name;
  return scenario_from_json(doc);
}

ModelHamiltonian scenario_hamiltonian(const ScenarioConfig& c) {
  const json& p = c.params;
  if (c.model == "bell-lattice") {
    BellLatticeParams b;
    b.sites = p["sites"].get<int>();
    b.hop = p["hop"].get<double>();
    b.hop_phase = p["hop_phase"].get<double>();
    b.pair_coupling = p["pair_coupling"].get<double>();
    b.single_coupling = p["single_coupling"].get<double>();
    b.onsite = p["onsite"].get<double>();
    b.n_max = p["n_max"].get<int>();
    b.dimension_cap = p["dimension_cap"].get<std::size_t>();
    return build_bell_lattice_model(b, c.hbar);
  }
  if (c.model == "btqft-emission") {
    EmissionParams e;
    e.points = p["points"].get<int>();
    e.dx = p["dx"].get<double>();
    e.g = p["g"].get<double>();
    e.width = p["width"].get<double>();
    e.sources = p["sources"].get<std::vector<double>>();
    e.mass = p["mass"].get<double>();
    e.n_max = p["n_max"].get<int>();
    e.hbar = c.hbar;
    e.dimension_cap = p["dimension_cap"].get<std::size_t>();
    return build_emission_absorption_model(e);
  }
  throw ParameterError("model '" + c.model + "' has no Hamiltonian");
}

QuantumState scenario_initial_state(const ScenarioConfig& c, const ModelHamiltonian& h) {
  const json& init = c.params["initial"];
  if (c.model == "bell-lattice") {
    if (init.contains("occupations")) {
      const auto occ = init["occupations"].get<std::vector<int>>();
      const auto index = h.basis().find_occupation(occ);
      if (!index) throw StructuralError("initial occupations outside the truncated basis");
      return QuantumState::basis_state(h.basis_ptr(), *index, std::nullopt, h.hbar());
    }
    Eigen::VectorXcd a(static_cast<Eigen::Index>(init["amplitudes"].size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = complex_from(init["amplitudes"][i]);
    return QuantumState(h.basis_ptr(), a, std::nullopt, h.hbar()).normalized();
  }
  if (c.model == "btqft-emission") {
    const Grid& grid = *h.grid();
    Eigen::VectorXcd total = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(h.dimension()));
    for (const auto& s : init["sectors"]) {
      const int n = s["n"].get<int>();
      const QuantumState part = QuantumState::from_sector_functions(
          h.basis_ptr(), grid, {{n, packet_product(s["packets"], grid)}}, h.hbar());
      const double p = part.sector_probability(n);
      if (!(p > 0)) throw StructuralError("initial sector " + std::to_string(n) + " has zero norm");
      total += part.amplitudes() * (complex_from(s["amplitude"]) / std::sqrt(p));
    }
    if (!(total.squaredNorm() > 0)) throw StructuralError("initial state has zero norm");
    return QuantumState(h.basis_ptr(), total, grid, h.hbar()).normalized();
  }
  throw ParameterError("model '" + c.model + "' has no quantum state");
}

DecayScenario scenario_decay(const ScenarioConfig& c) {
  if (c.model != "nikolic-decay") throw ParameterError("not a nikolic-decay scenario");
  const json& p = c.params;
  DecayScenario sc;
  sc.a1 = complex_from(p["a1"]);
  sc.a2 = complex_from(p["a2"]);
  sc.phi1 = packet_from(p["phi1"]);
  sc.phi2 = packet_from(p["phi2"]);
  sc.phi3 = packet_from(p["phi3"]);
  sc.mu1 = p["mu1"].get<double>();
  sc.mu2 = p["mu2"].get<double>();
  sc.w_e = p["w_e"].get<double>();
  sc.exact_collapse = p["exact_collapse"].get<bool>();
  sc.pointer_mass = p["pointer_mass"].get<double>();
  for (int k = 0; k < 3; ++k) {
    sc.reference.X[k][0] = p["reference"]["X"][k][0].get<double>();
    sc.reference.X[k][1] = p["reference"]["X"][k][1].get<double>();
  }
  sc.reference.y = p["reference"]["y"].get<double>();
  return sc;
}

}  // namespace pilotwave
