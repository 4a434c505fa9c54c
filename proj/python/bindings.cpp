#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "serpa/analytic.hpp"
#include "serpa/channels.hpp"
#include "serpa/env.hpp"
#include "serpa/errors.hpp"
#include "serpa/infotheory.hpp"
#include "serpa/run.hpp"
#include "serpa/trainer.hpp"

namespace py = pybind11;
using namespace serpa;

PYBIND11_MODULE(_serpa, m) {
  m.doc() = "Bounded-rational serial perception-action channels: analytic "
            "fixed-point solver and online score-function gradient trainer";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<ConvergenceError>(m, "ConvergenceError");
  py::register_exception<NumericError>(m, "NumericError");

  py::class_<WorldModel>(m, "WorldModel")
      .def(py::init<>())
      .def_readwrite("prior", &WorldModel::prior)
      .def_readwrite("utility", &WorldModel::utility)
      .def_readwrite("encodings", &WorldModel::encodings)
      .def_readwrite("noise", &WorldModel::noise)
      .def("num_worlds", &WorldModel::num_worlds)
      .def("num_actions", &WorldModel::num_actions)
      .def("input_dim", &WorldModel::input_dim)
      .def("validate", &WorldModel::validate);
  m.def("predator_prey_task", &predator_prey_task);
  m.def("predator_prey_utility", &predator_prey_utility);
  m.def("mug_task", &mug_task, py::arg("noise") = 0.0);
  m.def("mug_utility", &mug_utility);
  m.def("mug_templates", &mug_templates);
  m.def("load_world_model_file", &load_world_model_file, py::arg("path"));

  py::class_<Metrics>(m, "Metrics")
      .def_readonly("J", &Metrics::J)
      .def_readonly("expected_utility", &Metrics::expected_utility)
      .def_readonly("I_wx", &Metrics::I_wx)
      .def_readonly("I_xa", &Metrics::I_xa);
  m.def(
      "metrics",
      [](const Eigen::VectorXd& prior, const Eigen::MatrixXd& utility,
         const Eigen::MatrixXd& p_x_given_w, const Eigen::MatrixXd& p_a_given_x,
         double beta1, double beta2) {
        JointSystem sys{prior, utility, p_x_given_w, p_a_given_x, beta1, beta2};
        sys.validate();
        return metrics(sys);
      },
      py::arg("prior"), py::arg("utility"), py::arg("p_x_given_w"),
      py::arg("p_a_given_x"), py::arg("beta1"), py::arg("beta2"),
      "Exact J, E[U], I(Omega;X), I(X;A) (information in nats)");
  m.def("mutual_information",
        [](const Eigen::MatrixXd& joint) { return mutual_information(joint); },
        py::arg("joint"));
  m.attr("NATS_PER_BIT") = kNatsPerBit;

  py::class_<SweepStat>(m, "SweepStat")
      .def_readonly("sweep", &SweepStat::sweep)
      .def_readonly("J", &SweepStat::J)
      .def_readonly("I_wx", &SweepStat::I_wx)
      .def_readonly("I_xa", &SweepStat::I_xa)
      .def_readonly("max_change", &SweepStat::max_change);
  py::class_<TabularSolution>(m, "TabularSolution")
      .def_readonly("p_x_given_w", &TabularSolution::p_x_given_w)
      .def_readonly("p_a_given_x", &TabularSolution::p_a_given_x)
      .def_readonly("p_x", &TabularSolution::p_x)
      .def_readonly("p_a", &TabularSolution::p_a)
      .def_readonly("sweeps", &TabularSolution::sweeps)
      .def_readonly("J", &TabularSolution::J)
      .def_readonly("final_change", &TabularSolution::final_change)
      .def_readonly("converged", &TabularSolution::converged);
  py::class_<RestartReport>(m, "RestartReport")
      .def_readonly("best", &RestartReport::best)
      .def_readonly("best_index", &RestartReport::best_index)
      .def_readonly("J_spread", &RestartReport::J_spread)
      .def_readonly("agree", &RestartReport::agree)
      .def_readonly("J_values", &RestartReport::J_values);
  m.def(
      "solve_serial",
      [](const WorldModel& model, double beta1, double beta2, int num_percepts,
         int restarts, std::uint64_t seed) {
        return solve_serial_restarts(model, beta1, beta2, num_percepts,
                                     restarts, seed);
      },
      py::arg("model"), py::arg("beta1"), py::arg("beta2"),
      py::arg("num_percepts"), py::arg("restarts") = 5, py::arg("seed") = 0,
      "Two-stage self-consistent solution, best of N restarts");
  py::class_<SingleStageSolution>(m, "SingleStageSolution")
      .def_readonly("p_a_given_w", &SingleStageSolution::p_a_given_w)
      .def_readonly("p_a", &SingleStageSolution::p_a)
      .def_readonly("J", &SingleStageSolution::J)
      .def_readonly("J_history", &SingleStageSolution::J_history)
      .def_readonly("iterations", &SingleStageSolution::iterations)
      .def_readonly("converged", &SingleStageSolution::converged);
  m.def(
      "solve_rate_distortion",
      [](const WorldModel& model, double beta) {
        return solve_rate_distortion(model, beta);
      },
      py::arg("model"), py::arg("beta"));

  py::class_<PerceptualNetwork>(m, "PerceptualNetwork")
      .def_readwrite("V", &PerceptualNetwork::V)
      .def_readwrite("W", &PerceptualNetwork::W)
      .def("forward", &PerceptualNetwork::forward, py::arg("xi"))
      .def("tabulate", &PerceptualNetwork::tabulate, py::arg("encodings"));
  py::class_<ActionChannel>(m, "ActionChannel")
      .def_readwrite("eta", &ActionChannel::eta)
      .def("probs", &ActionChannel::probs, py::arg("x"))
      .def("table", &ActionChannel::table);

  py::class_<TrainingConfig>(m, "TrainingConfig")
      .def(py::init<>())
      .def_readwrite("beta1", &TrainingConfig::beta1)
      .def_readwrite("beta2", &TrainingConfig::beta2)
      .def_readwrite("alpha_vw", &TrainingConfig::alpha_vw)
      .def_readwrite("alpha_eta", &TrainingConfig::alpha_eta)
      .def_readwrite("batch", &TrainingConfig::batch)
      .def_readwrite("iterations", &TrainingConfig::iterations)
      .def_readwrite("stride", &TrainingConfig::stride)
      .def_readwrite("seed", &TrainingConfig::seed)
      .def_readwrite("hidden", &TrainingConfig::hidden)
      .def_readwrite("num_percepts", &TrainingConfig::num_percepts);
  py::class_<Snapshot>(m, "Snapshot")
      .def_readonly("iteration", &Snapshot::iteration)
      .def_readonly("J", &Snapshot::J)
      .def_readonly("expected_utility", &Snapshot::expected_utility)
      .def_readonly("I_wx", &Snapshot::I_wx)
      .def_readonly("I_xa", &Snapshot::I_xa);
  py::class_<TrainingTrace>(m, "TrainingTrace")
      .def_readonly("snapshots", &TrainingTrace::snapshots)
      .def_readonly("net", &TrainingTrace::net)
      .def_readonly("channel", &TrainingTrace::channel);
  m.def("train", &train, py::arg("model"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>(),
        "Glorot init + online score-function gradient ascent");

  py::class_<GridCell>(m, "GridCell")
      .def_readonly("alpha_vw", &GridCell::alpha_vw)
      .def_readonly("alpha_eta", &GridCell::alpha_eta)
      .def_readonly("final_J", &GridCell::final_J)
      .def_readonly("ok", &GridCell::ok)
      .def_readonly("note", &GridCell::note);
  m.def("grid_search", &grid_search, py::arg("model"), py::arg("base"),
        py::arg("alphas_vw"), py::arg("alphas_eta"), py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());

  py::class_<RunSpec>(m, "RunSpec")
      .def(py::init<>())
      .def_readwrite("task", &RunSpec::task)
      .def_readwrite("mode", &RunSpec::mode)
      .def_readwrite("beta1", &RunSpec::beta1)
      .def_readwrite("beta2", &RunSpec::beta2)
      .def_readwrite("alpha_vw", &RunSpec::alpha_vw)
      .def_readwrite("alpha_eta", &RunSpec::alpha_eta)
      .def_readwrite("iterations", &RunSpec::iterations)
      .def_readwrite("seed", &RunSpec::seed)
      .def_readwrite("out", &RunSpec::out)
      .def_readwrite("noise", &RunSpec::noise)
      .def_readwrite("unit", &RunSpec::unit)
      .def_readwrite("batch", &RunSpec::batch)
      .def_readwrite("stride", &RunSpec::stride)
      .def_readwrite("hidden", &RunSpec::hidden)
      .def_readwrite("percepts", &RunSpec::percepts)
      .def_readwrite("restarts", &RunSpec::restarts)
      .def("validate", &RunSpec::validate);
  py::class_<RunResult>(m, "RunResult")
      .def_readonly("J", &RunResult::J)
      .def_readonly("baseline_J", &RunResult::baseline_J)
      .def_readonly("delta_J_rel", &RunResult::delta_J_rel)
      .def_readonly("expected_utility", &RunResult::expected_utility)
      .def_readonly("I_wx", &RunResult::I_wx)
      .def_readonly("I_xa", &RunResult::I_xa)
      .def_readonly("converged", &RunResult::converged)
      .def_readonly("wall_seconds", &RunResult::wall_seconds);
  m.def("run", &run, py::arg("spec"),
        py::call_guard<py::gil_scoped_release>(),
        "Execute a RunSpec and write its artifact directory");
  m.def("reproduce_paper", &reproduce_paper, py::arg("out_dir"),
        py::call_guard<py::gil_scoped_release>());
}
