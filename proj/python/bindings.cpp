#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <string>

#include "robust_etc/commands.hpp"
#include "robust_etc/config.hpp"
#include "robust_etc/error.hpp"
#include "robust_etc/io.hpp"
#include "robust_etc/linalg.hpp"
#include "robust_etc/synthesis.hpp"
#include "robust_etc/trigger_sim.hpp"
#include "robust_etc/verification.hpp"

namespace py = pybind11;
using namespace robust_etc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() == 0) return Matrix(1, 1, {a.data()[0]});
  if (a.ndim() == 1) {
    return Matrix(static_cast<std::size_t>(a.shape(0)), 1,
                  std::vector<double>(a.data(), a.data() + a.size()));
  }
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array");
  return Matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.entries().begin(), m.entries().end(), out.mutable_data());
  return out;
}

Array rows_array(const std::vector<SimStep>& steps, Vector SimStep::*field) {
  const std::size_t width = steps.empty() ? 0 : (steps.front().*field).size();
  Array out({steps.size(), width});
  double* d = out.mutable_data();
  for (const SimStep& s : steps)
    for (double v : s.*field) *d++ = v;
  return out;
}

ExperimentConfig config_from(const std::string& text) {
  return parse_config(nlohmann::json::parse(text));
}

SynthesisParams make_params(const Array& Q, const Array& R1, const Array& R2, double alpha,
                            double beta, double epsilon, double sigma) {
  return SynthesisParams(to_matrix(Q), to_matrix(R1), to_matrix(R2), alpha, beta, epsilon, sigma);
}

py::dict trace_dict(const SimTrace& t) {
  py::dict d;
  d["policy"] = to_string(t.policy);
  d["x"] = rows_array(t.steps, &SimStep::x);
  d["u"] = rows_array(t.steps, &SimStep::u);
  py::list triggered, V;
  for (const SimStep& s : t.steps) {
    triggered.append(s.triggered);
    V.append(s.V ? py::cast(*s.V) : py::none());
  }
  d["triggered"] = triggered;
  d["V"] = V;
  d["transmissions"] = t.transmissions;
  d["diverged"] = t.diverged;
  d["summary"] = dump_json(json_summary(summarize(t)));
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust event-triggered control: synthesis, simulation and verification";

  static py::handle error = py::exception<Error>(m, "Error", PyExc_RuntimeError).release();
  static py::handle config_error =
      py::exception<ConfigError>(m, "ConfigError", error.ptr()).release();
  static py::handle violation =
      py::exception<ConditionViolation>(m, "ConditionViolation", error.ptr()).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), e.what());
    } catch (const ConditionViolation& e) {
      py::object inst = py::reinterpret_borrow<py::object>(violation.ptr())(e.what());
      inst.attr("condition") = e.condition();
      inst.attr("margin") = e.margin();
      PyErr_SetObject(violation.ptr(), inst.ptr());
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  m.def("pseudo_inverse", [](const Array& B) { return to_array(pseudo_inverse(to_matrix(B))); },
        py::arg("B"));

  m.def(
      "solve_modified_dare",
      [](const Array& A, const Array& B, const Array& Q, const Array& R1, const Array& R2,
         double alpha, double beta, double epsilon, const Array& F, double sigma) {
        const auto params = make_params(Q, R1, R2, alpha, beta, epsilon, sigma);
        return to_array(solve_modified_dare(to_matrix(A), to_matrix(B), params, to_matrix(F)));
      },
      py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R1"), py::arg("R2"), py::arg("alpha"),
      py::arg("beta"), py::arg("epsilon"), py::arg("F"), py::arg("sigma") = 0.1);

  m.def(
      "gains",
      [](const Array& A, const Array& B, const Array& P, const Array& Q, const Array& R1,
         const Array& R2, double alpha, double beta, double epsilon, double sigma) {
        const auto params = make_params(Q, R1, R2, alpha, beta, epsilon, sigma);
        const Matrix a = to_matrix(A), b = to_matrix(B), p = to_matrix(P);
        return py::make_tuple(to_array(compute_gain_K(a, b, p, params)),
                              to_array(compute_gain_L(a, b, p, params)));
      },
      py::arg("A"), py::arg("B"), py::arg("P"), py::arg("Q"), py::arg("R1"), py::arg("R2"),
      py::arg("alpha"), py::arg("beta"), py::arg("epsilon"), py::arg("sigma") = 0.1,
      "Returns (K, L).");

  m.def("compute_Z", [](const Array& P, double epsilon) {
    return to_array(compute_Z(to_matrix(P), epsilon));
  }, py::arg("P"), py::arg("epsilon"));

  m.def("scaffold_config", [] { return to_json(scaffold_config()).dump(); },
        "The example configuration as a JSON string.");

  m.def("normalize_config", [](const std::string& text) {
    return to_json(config_from(text)).dump();
  }, py::arg("config_json"), "Parses, validates and re-serializes a config.");

  m.def("synthesize", [](const std::string& text) {
    const ExperimentConfig c = config_from(text);
    const SynthesisAttempt a = attempt_synthesis(c.system.A, c.system.B, c.model(),
                                                 c.synthesis_params(), c.feasibility_options());
    return json_attempt(a).dump();
  }, py::arg("config_json"), "Synthesis attempt with feasibility report, as JSON.");

  m.def("simulate", [](const std::string& text, std::optional<std::string> policy) {
    const ExperimentConfig c = config_from(text);
    const SynthesisAttempt a = attempt_synthesis(c.system.A, c.system.B, c.model(),
                                                 c.synthesis_params(), c.feasibility_options());
    const bool periodic = policy ? *policy == "periodic"
                                 : c.simulation.policy == PolicyKind::kPeriodic;
    if (policy && *policy != "periodic" && *policy != "event") {
      throw InvalidArgument("policy must be \"periodic\" or \"event\"");
    }
    TriggerPolicy trigger = TriggerPolicy::periodic();
    if (!periodic) {
      const std::optional<double> mu = c.simulation.mu ? c.simulation.mu : a.mu;
      if (!mu) {
        throw ConditionViolation(a.failed_condition.value_or("mu1"), a.failure_margin,
                                 "no admissible trigger coefficient: " + a.failure_message);
      }
      trigger = TriggerPolicy::event(*mu);
    }
    const SimTrace t = simulate(c.system.A, c.system.B, c.model(), a.K, trigger, c.trajectory(),
                                c.simulation.x0, c.simulation.steps, a.P);
    return trace_dict(t);
  }, py::arg("config_json"), py::arg("policy") = py::none());

  m.def("run_command", [](const std::string& command, const std::string& text,
                          const std::string& out_dir) {
    const std::filesystem::path dir(out_dir);
    CommandResult r;
    if (command == "scaffold") {
      r = run_scaffold(dir);
    } else {
      const ExperimentConfig c = config_from(text);
      if (command == "synth") r = run_synth(c, dir);
      else if (command == "simulate") r = run_simulate(c, dir);
      else if (command == "compare") r = run_compare(c, dir);
      else if (command == "verify") r = run_verify(c, dir);
      else throw InvalidArgument("unknown command: " + command);
    }
    std::vector<std::string> written;
    for (const auto& p : r.written) written.push_back(p.string());
    return py::make_tuple(r.exit_code, r.summary, written);
  }, py::arg("command"), py::arg("config_json"), py::arg("out_dir"),
     "Runs a CLI command in-process; returns (exit_code, summary, written files).");

  m.def("identity_campaign", [](std::size_t samples, std::uint64_t seed, std::size_t max_dim) {
    CampaignOptions o;
    o.samples = samples;
    o.seed = seed;
    o.max_dim = max_dim;
    return json_campaign(identity_campaign(o)).dump();
  }, py::arg("samples") = 1000, py::arg("seed") = 0, py::arg("max_dim") = 5);

  m.def("lemma1_campaign", [](std::size_t samples, std::uint64_t seed, std::size_t max_dim) {
    CampaignOptions o;
    o.samples = samples;
    o.seed = seed;
    o.max_dim = max_dim;
    return json_campaign(lemma1_campaign(o)).dump();
  }, py::arg("samples") = 1000, py::arg("seed") = 0, py::arg("max_dim") = 5);
}
