// Python bindings for the main pipeline operations. Structured data crosses
// the boundary as JSON-compatible dicts via the existing serializers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "guitest/cli.hpp"

namespace py = pybind11;
using namespace guitest;

namespace {

py::object json_to_py(const json& j) {
    py::module_ pyjson = py::module_::import("json");
    return pyjson.attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_guitest, m) {
    m.doc() = "Deterministic GUI-defect laboratory: run agents, score runs, synthesize tasks";

    // Base first: pybind11 tries translators in reverse registration order,
    // so the derived classes must be registered after their base.
    py::register_exception<GuitestError>(m, "GuitestError", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

    m.def(
        "run",
        [](const std::string& bench, const std::string& out, const std::string& agent,
           const std::string& mode, std::uint64_t seed, int runs, int max_steps, int budget) {
            RunConfig config;
            config.bench_path = bench;
            config.out_dir = out;
            config.agent = agent;
            config.mode = mode;
            config.seed = seed;
            config.runs = runs;
            config.max_steps = max_steps;
            config.budget = budget;
            return cmd_run(config);
        },
        py::arg("bench"), py::arg("out"), py::arg("agent") = "oracle", py::arg("mode") = "orchestrated",
        py::arg("seed") = 0, py::arg("runs") = 3, py::arg("max_steps") = 6, py::arg("budget") = 60,
        "Execute every bench task and write trajectories plus a manifest; returns the exit code.");

    m.def(
        "evaluate",
        [](const std::string& run_dir, const std::string& bench, const std::string& out,
           const std::string& pass_k) { return cmd_eval(run_dir, bench, pass_k_from(pass_k), out); },
        py::arg("run_dir"), py::arg("bench"), py::arg("out"), py::arg("pass_k") = "pass1",
        "Score a run directory against its bench and write a report; returns the exit code.");

    m.def(
        "synth",
        [](const std::string& app, const std::vector<std::string>& defects,
           const std::vector<std::string>& repros, const std::string& out, size_t n_pre, size_t n_post,
           std::uint64_t seed) { return cmd_synth(app, defects, repros, n_pre, n_post, seed, out); },
        py::arg("app"), py::arg("defects"), py::arg("repros"), py::arg("out"), py::arg("n_pre") = 3,
        py::arg("n_post") = 2, py::arg("seed") = 0,
        "Synthesize and filter tasks from reproduction trajectories into a bench bundle.");

    m.def("validate", &cmd_validate, py::arg("bench"),
          "Check bundle digests and replay every defect-oriented task; returns the exit code.");

    m.def("bench_hash", &bench_hash, py::arg("bench"), "Combined content hash of a bench bundle.");

    m.def(
        "load_report", [](const std::string& path) { return json_to_py(report_to_json(load_report(path))); },
        py::arg("path"), "Load an evaluation report as a dict.");

    m.def(
        "render_report", [](const std::string& path) { return render_report_table(load_report(path)); },
        py::arg("path"), "Render an evaluation report as an aligned text table.");

    m.def(
        "load_trajectory",
        [](const std::string& path) {
            const RunRecord run = load_run_record(path);
            json steps = json::array();
            for (const auto& s : run.steps) steps.push_back(step_record_to_json(s));
            json decls = json::array();
            for (const auto& d : run.declarations)
                decls.push_back(json{{"step", d.step_index}, {"source", d.source}});
            return json_to_py(json{{"task_id", run.task_id},
                                   {"run_index", run.run_index},
                                   {"seed", run.seed},
                                   {"status", run.status},
                                   {"steps", std::move(steps)},
                                   {"declarations", std::move(decls)}});
        },
        py::arg("path"), "Load a JSONL trajectory as a dict.");
}
