#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pilotwave/bell.hpp"
#include "pilotwave/btqft.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/evolution.hpp"
#include "pilotwave/nikolic.hpp"
#include "pilotwave/runner.hpp"
#include "pilotwave/scenario.hpp"
#include "pilotwave/verify.hpp"

namespace py = pybind11;
using namespace pilotwave;

namespace {

ScenarioConfig scenario_from_text(const std::string& text) {
  return scenario_from_json(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bell-type jump processes and Bohmian trajectories";

  auto base = py::register_exception<Error>(m, "PilotwaveError");
  py::register_exception<ScenarioError>(m, "ScenarioError", base.ptr());

  py::class_<ModelHamiltonian>(m, "Hamiltonian")
      .def_property_readonly("model", &ModelHamiltonian::model)
      .def_property_readonly("dimension", &ModelHamiltonian::dimension)
      .def_property_readonly("hbar", &ModelHamiltonian::hbar)
      .def_property_readonly("n_max", [](const ModelHamiltonian& h) { return h.basis().n_max(); })
      .def("hermiticity_defect", &ModelHamiltonian::hermiticity_defect)
      .def("dense", [](const ModelHamiltonian& h) { return Eigen::MatrixXcd(h.full()); })
      .def("dense_interaction", [](const ModelHamiltonian& h) { return Eigen::MatrixXcd(h.h_int()); })
      .def("occupation", [](const ModelHamiltonian& h, std::size_t i) { return h.basis().occupation(i); })
      .def("sector", [](const ModelHamiltonian& h, std::size_t i) { return h.basis().sector(i); })
      .def("conjugated", &ModelHamiltonian::conjugated);

  py::class_<QuantumState>(m, "State")
      .def_property_readonly("amplitudes", &QuantumState::amplitudes)
      .def_property_readonly("dimension", &QuantumState::dimension)
      .def("norm_squared", [](const QuantumState& s) { return norm_squared(s); })
      .def("sector_probability", &QuantumState::sector_probability)
      .def("born_density", [](const QuantumState& s) { return born_density(s, Normalization::Auto); })
      .def("conjugated", &QuantumState::conjugated)
      .def("to_json", [](const QuantumState& s) { return state_to_json(s).dump(); });

  m.def("bell_lattice_model",
        [](int sites, double hop, double hop_phase, double pair_coupling, double single_coupling,
           double onsite, int n_max, double hbar) {
          BellLatticeParams p;
          p.sites = sites;
          p.hop = hop;
          p.hop_phase = hop_phase;
          p.pair_coupling = pair_coupling;
          p.single_coupling = single_coupling;
          p.onsite = onsite;
          p.n_max = n_max;
          return build_bell_lattice_model(p, hbar);
        },
        py::arg("sites") = 2, py::arg("hop") = 1.0, py::arg("hop_phase") = 0.0,
        py::arg("pair_coupling") = 0.0, py::arg("single_coupling") = 0.0, py::arg("onsite") = 0.0,
        py::arg("n_max") = 2, py::arg("hbar") = 1.0);

  m.def("emission_model",
        [](int points, double dx, double g, double width, std::vector<double> sources, double mass,
           int n_max, double hbar) {
          EmissionParams p;
          p.points = points;
          p.dx = dx;
          p.g = g;
          p.width = width;
          p.sources = std::move(sources);
          p.mass = mass;
          p.n_max = n_max;
          p.hbar = hbar;
          return build_emission_absorption_model(p);
        },
        py::arg("points") = 32, py::arg("dx") = 0.25, py::arg("g") = 0.3, py::arg("width") = 1.0,
        py::arg("sources") = std::vector<double>{}, py::arg("mass") = 1.0, py::arg("n_max") = 1,
        py::arg("hbar") = 1.0);

  m.def("state_from_amplitudes",
        [](const ModelHamiltonian& h, const Eigen::VectorXcd& a) {
          return QuantumState(h.basis_ptr(), a, h.grid(), h.hbar());
        },
        py::arg("h"), py::arg("amplitudes"));

  m.def("propagate", [](const ModelHamiltonian& h, const QuantumState& s, double t) {
    return Propagator(h, s).at(t);
  });

  m.def("bell_rates",
        [](const QuantumState& s, std::size_t source, const ModelHamiltonian& h) {
          std::map<std::size_t, double> out;
          for (const auto& [d, r] : bell_rates(s, source, h).rates) out[d] = r;
          return out;
        },
        py::arg("state"), py::arg("source"), py::arg("h"));

  m.def("bell_current", &bell_current, py::arg("state"), py::arg("h"), py::arg("a"), py::arg("b"));

  m.def("btqft_rates",
        [](const QuantumState& s, std::vector<double> positions, const ModelHamiltonian& h) {
          const BtqftRateTable t = btqft_rates(s, SectorConfig(std::move(positions), *h.grid()), h);
          return py::make_tuple(t.creation, t.annihilation);
        },
        py::arg("state"), py::arg("positions"), py::arg("h"));

  m.def("tv_distance", [](std::vector<double> p, std::vector<double> q) {
    return tv_distance({"", std::move(p)}, {"", std::move(q)});
  });

  m.def("_check_equivariance",
        [](const ModelHamiltonian& h, const QuantumState& psi0, std::size_t M,
           std::vector<double> checkpoints, std::uint64_t seed, double dt, int workers) {
          VerifyModel model{h.model(), h, psi0, dt};
          py::gil_scoped_release release;
          return check_equivariance(model, M, checkpoints, seed, workers).to_json().dump();
        },
        py::arg("h"), py::arg("psi0"), py::arg("M"), py::arg("checkpoints"), py::arg("seed") = 0,
        py::arg("dt") = 0.01, py::arg("workers") = 1);

  m.def("master_equation_residual",
        [](const ModelHamiltonian& h, const QuantumState& psi0, std::vector<double> times) {
          return check_master_equation(h, psi0, times).max_residual;
        });

  m.def("dead_particle_speed", [](double separation, bool exact_collapse) {
    DecayScenario sc = default_decay_scenario();
    sc.exact_collapse = exact_collapse;
    return dead_particle_speed(sc, separation);
  }, py::arg("separation"), py::arg("exact_collapse") = false);

  m.def("preset_names", &preset_names);
  m.def("_preset", [](const std::string& name) { return scenario_to_json(preset(name)).dump(); });
  m.def("_normalize_scenario",
        [](const std::string& text) { return scenario_to_json(scenario_from_text(text)).dump(); });
  m.def("_run_scenario", [](const std::string& text, int workers) {
    const ScenarioConfig c = scenario_from_text(text);
    RunReport rep;
    {
      py::gil_scoped_release release;
      rep = run_scenario(c, workers);
    }
    return py::make_tuple(rep.exit_code, rep.artifacts, rep.summary);
  });
}
