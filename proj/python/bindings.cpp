#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hri/extraction.hpp"
#include "hri/harness.hpp"
#include "hri/inference.hpp"
#include "hri/model.hpp"
#include "hri/tasks.hpp"
#include "hri/training.hpp"

namespace py = pybind11;
using namespace hri;

namespace {

std::vector<std::string> atoms(const FactSet& s) {
  std::vector<std::string> out;
  for (const auto& a : s) out.push_back(to_string(a));
  return out;
}

FactSet parse_atoms(const std::vector<std::string>& v) {
  FactSet out;
  for (const auto& s : v) out.insert(parse_atom(s));
  return out;
}

RunConfig config_from(const std::string& task, const std::string& text) { return parse_config(text, default_config(task)); }

py::dict record_dict(const RunRecord& r) {
  py::dict d;
  d["task"] = r.task;
  d["seed"] = r.seed;
  d["train_mse"] = r.train_mse;
  d["soft_eval_mse"] = r.soft_eval_mse;
  d["symbolic_eval_mse"] = r.symbolic_eval_mse;
  d["train_success"] = r.train_success;
  d["soft_success"] = r.soft_success;
  d["symbolic_success"] = r.symbolic_success;
  d["wall_time"] = r.wall_time;
  d["program"] = r.program;
  d["error"] = r.error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hri, m) {
  m.doc() = "hierarchical rule induction";

  py::register_exception<LogicError>(m, "LogicError", PyExc_ValueError);
  py::register_exception<TaskError>(m, "TaskError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  py::class_<IlpTask>(m, "Task")
      .def_readonly("name", &IlpTask::name)
      .def_readonly("constants", &IlpTask::constants)
      .def_property_readonly("background", [](const IlpTask& t) { return atoms(t.background); })
      .def_property_readonly("positives", [](const IlpTask& t) { return atoms(t.positives); })
      .def_property_readonly("negatives", [](const IlpTask& t) { return atoms(t.negatives); })
      .def_property_readonly("target", [](const IlpTask& t) { return py::make_tuple(t.target.name, t.target.arity); })
      .def("to_json", &task_to_json)
      .def_static("from_json", &task_from_json)
      .def("__eq__", [](const IlpTask& a, const IlpTask& b) { return a == b; });

  m.def("task_names", &task_names);
  m.def(
      "generate_task", [](const std::string& name, int n, std::uint64_t seed) { return generate_task({name, n, seed}); },
      py::arg("name"), py::arg("n"), py::arg("seed") = 0);
  m.def("load_task", [](const std::string& path) { return load_task(path); });
  m.def("save_task", [](const IlpTask& t, const std::string& path) { save_task(t, path); });
  m.def("reference_solution", [](const std::string& name) -> std::optional<std::string> {
    auto p = reference_solution(name);
    if (!p) return std::nullopt;
    return to_string(*p);
  });
  m.def(
      "forward_chain",
      [](const std::string& program, const std::vector<std::string>& facts, const std::vector<std::string>& constants,
         int max_steps, const std::string& target) {
        return atoms(forward_chain(parse_program(program, target), parse_atoms(facts), constants, max_steps));
      },
      py::arg("program"), py::arg("facts"), py::arg("constants"), py::arg("max_steps"), py::arg("target") = "target");

  m.def("default_config", [](const std::string& task) { return config_to_string(default_config(task)); });

  py::class_<Model>(m, "Model")
      .def_readonly("dim", &Model::dim)
      .def_readonly("seed", &Model::seed)
      .def_property_readonly("predicates",
                             [](const Model& md) {
                               std::vector<std::string> names;
                               for (const auto& p : md.predicates) names.push_back(p.name);
                               return names;
                             })
      .def_property_readonly("num_slots", [](const Model& md) { return md.num_slots; })
      .def_property("weights", [](const Model& md) { return md.weights; },
                    [](Model& md, const std::vector<double>& w) {
                      if (w.size() != md.weights.size()) throw std::invalid_argument("weight count mismatch");
                      md.weights = w;
                    })
      .def("to_json", &model_to_json)
      .def_static("from_json", &model_from_json)
      .def("save", [](const Model& md, const std::string& path) { save_model(md, path); })
      .def_static("load", [](const std::string& path) { return load_model(path); })
      .def("extract", [](const Model& md) { return to_string(extract_program(md).program); })
      .def("extract_json", [](const Model& md) { return extraction_to_json(extract_program(md), md); });

  m.def(
      "build_model",
      [](const std::string& task, const std::string& config, std::uint64_t seed) {
        const auto cfg = config_from(task, config);
        const auto d = task_defaults(task);
        const IlpTask t = generate_task({task, d.train_num_constants, seed});
        return build_model(cfg.model, t.input_predicates, t.target, seed);
      },
      py::arg("task"), py::arg("config") = "", py::arg("seed") = 0);

  m.def(
      "train",
      [](const std::string& task, const std::string& config, std::uint64_t seed, int iterations) {
        auto cfg = config_from(task, config);
        if (iterations > 0) cfg.train.iterations = iterations;
        cfg.train.seed = seed;
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(generator_source(task, cfg.train.train_num_constants, seed), cfg.model, cfg.train);
        }
        py::list log;
        for (const auto& row : r.log) {
          py::dict d;
          d["iteration"] = row.iteration;
          d["loss"] = row.loss;
          d["bce"] = row.bce;
          d["reg"] = row.reg;
          d["train_mse"] = row.train_mse;
          d["g_t"] = row.gumbel;
          d["sigma_t"] = row.sigma;
          log.append(d);
        }
        return py::make_tuple(std::move(r.model), r.train_mse, log);
      },
      py::arg("task"), py::arg("config") = "", py::arg("seed") = 0, py::arg("iterations") = 0);

  m.def(
      "infer",
      [](const Model& md, const IlpTask& t, int steps) {
        const Instance inst = make_instance(md, t);
        const auto r = run_inference(md, inst, steps);
        std::map<std::string, double> out;
        for (const auto& [atom, v] : target_predictions(r.target, t.constants, t.target.name)) out[to_string(atom)] = v;
        return py::make_tuple(out, soft_mse(r.target, inst));
      },
      py::arg("model"), py::arg("task"), py::arg("steps"));

  m.def(
      "symbolic_evaluate",
      [](const Model& md, const IlpTask& t, int steps) { return symbolic_evaluate(extract_program(md), t, steps).mse; },
      py::arg("model"), py::arg("task"), py::arg("steps"));

  m.def(
      "run_experiment",
      [](const std::string& task, const std::vector<std::uint64_t>& seeds, const std::string& config) {
        const auto cfg = config_from(task, config);
        ExperimentReport rep;
        {
          py::gil_scoped_release release;
          rep = run_experiment(task, seeds, cfg);
        }
        py::list runs;
        for (const auto& r : rep.runs) runs.append(record_dict(r));
        py::dict d;
        d["task"] = rep.task;
        d["fingerprint"] = rep.fingerprint;
        d["train_pct"] = rep.train_pct;
        d["soft_pct"] = rep.soft_pct;
        d["symbolic_pct"] = rep.symbolic_pct;
        d["runs"] = runs;
        return d;
      },
      py::arg("task"), py::arg("seeds"), py::arg("config") = "");

  m.def(
      "check_gradients",
      [](const std::string& task, std::uint64_t seed, int coordinates) {
        const IlpTask t = generate_task({task, 5, seed});
        ModelConfig mc;
        mc.max_depth = 2;
        const Model md = build_model(mc, t.input_predicates, t.target, seed);
        GradCheckOptions o;
        o.coordinates = coordinates;
        o.seed = seed;
        const auto rep = check_gradients(md, make_instance(md, t), o);
        py::dict d;
        d["max_rel_error"] = rep.max_rel_error;
        d["checked"] = rep.checked;
        d["resamples"] = rep.resamples;
        d["inconclusive"] = rep.inconclusive;
        d["pass"] = rep.pass;
        return d;
      },
      py::arg("task"), py::arg("seed") = 0, py::arg("coordinates") = 20);
}
