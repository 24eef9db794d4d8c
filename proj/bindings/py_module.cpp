#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "indist/ablation.hpp"
#include "indist/evaluation.hpp"
#include "indist/oracle.hpp"
#include "indist/scene.hpp"

namespace py = pybind11;
using namespace indist;

PYBIND11_MODULE(_indist, m) {
  m.doc() = "search for in-distribution adversarial examples";

  py::enum_<Membership>(m, "Membership")
      .value("Class0", Membership::Class0)
      .value("Class1", Membership::Class1)
      .value("Outside", Membership::Outside);

  py::class_<UniformPairSupport>(m, "UniformPairSupport")
      .def(py::init([](int dim, double a, double b, double c, double d) {
             UniformPairSupport s{dim, a, b, c, d};
             s.validate();
             return s;
           }),
           py::arg("dim") = 20, py::arg("a") = -10.0, py::arg("b") = 10.0,
           py::arg("c") = 20.0, py::arg("d") = 40.0)
      .def_readonly("dim", &UniformPairSupport::dim);

  py::class_<LabeledDataset>(m, "LabeledDataset")
      .def_readonly("points", &LabeledDataset::points)
      .def_readonly("labels", &LabeledDataset::labels)
      .def_readonly("seed", &LabeledDataset::seed);

  m.def("sample_dataset", &sample_dataset, py::arg("support"),
        py::arg("n_per_class"), py::arg("seed"));
  m.def("membership", &membership, py::arg("support"), py::arg("x"));

  py::class_<MlpModel>(m, "MlpModel")
      .def_readonly("dims", &MlpModel::dims)
      .def_readonly("init_seed", &MlpModel::init_seed);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("sgd_seed", &TrainConfig::sgd_seed);

  m.def("mlp_init", &mlp_init, py::arg("input_dim"), py::arg("init_seed"));
  m.def(
      "forward",
      [](const MlpModel& model, const Eigen::VectorXd& x) {
        const Prediction pred = forward(model, x);
        return py::make_tuple(pred.logits, pred.probs, pred.label);
      },
      py::arg("model"), py::arg("x"));
  m.def("train", &train, py::arg("model"), py::arg("data"), py::arg("cfg"));
  m.def("accuracy", &accuracy, py::arg("model"), py::arg("data"));
  m.def("grad_check", &grad_check, py::arg("model"), py::arg("x"),
        py::arg("label"));
  m.def("save_model", &save_model);
  m.def("load_model", &load_model);

  py::class_<AttackConfig>(m, "AttackConfig")
      .def(py::init<>())
      .def_readwrite("max_generations", &AttackConfig::max_generations)
      .def_readwrite("sigma0", &AttackConfig::sigma0);

  py::class_<AttackOutcome>(m, "AttackOutcome")
      .def_readonly("start", &AttackOutcome::start)
      .def_readonly("adversarial", &AttackOutcome::adversarial)
      .def_readonly("iterations_used", &AttackOutcome::iterations_used)
      .def_readonly("evals_used", &AttackOutcome::evals_used)
      .def_readonly("distance", &AttackOutcome::distance)
      .def_property_readonly("success", &AttackOutcome::success);

  m.def(
      "attack_point",
      [](const MlpModel& model, const UniformPairSupport& support,
         int true_label, const Eigen::VectorXd& start, const AttackConfig& cfg,
         std::uint64_t seed) {
        const SearchSpace space = parametric_search_space(support);
        const BatchClassifier classifier =
            [&model](const std::vector<Eigen::VectorXd>& points) {
              std::vector<ClassifyResult> out;
              for (const auto& p : points) {
                const Prediction pred = forward(model, p);
                out.push_back({pred.label, {pred.probs[0], pred.probs[1]}});
              }
              return out;
            };
        return attack(classifier, true_label, start, space, cfg, seed);
      },
      py::arg("model"), py::arg("support"), py::arg("true_label"),
      py::arg("start"), py::arg("cfg"), py::arg("seed"));

  py::class_<EvalConfig>(m, "EvalConfig")
      .def(py::init<>())
      .def_readwrite("attack", &EvalConfig::attack)
      .def_readwrite("n_starts", &EvalConfig::n_starts)
      .def_readwrite("n_repeats", &EvalConfig::n_repeats)
      .def_readwrite("jobs", &EvalConfig::jobs);

  py::class_<AttackRateReport>(m, "AttackRateReport")
      .def_readonly("per_repeat_rates", &AttackRateReport::per_repeat_rates)
      .def_readonly("mean_rate", &AttackRateReport::mean_rate)
      .def_readonly("std_rate", &AttackRateReport::std_rate)
      .def_readonly("mean_distance", &AttackRateReport::mean_distance)
      .def_readonly("std_distance", &AttackRateReport::std_distance);

  m.def("attack_rate", &attack_rate, py::arg("model"), py::arg("support"),
        py::arg("test_pool"), py::arg("cfg"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<SceneVector>(m, "SceneVector")
      .def_property_readonly("flat", &SceneVector::flat)
      .def_property_readonly(
          "n_lights", [](const SceneVector& s) { return s.lights.size(); })
      .def_static("from_flat", &SceneVector::from_flat, py::arg("flat"),
                  py::arg("n_lights"));

  m.def(
      "sample_scenes",
      [](int count, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<SceneVector> scenes;
        scenes.reserve(count);
        for (int i = 0; i < count; ++i) scenes.push_back(sample_scene(rng));
        return scenes;
      },
      py::arg("count"), py::arg("seed"));
  m.def("scene_membership",
        py::overload_cast<const SceneVector&>(&scene_membership));

  py::class_<SyntheticOracle>(m, "SyntheticOracle")
      .def(py::init<std::uint64_t, double>(), py::arg("seed"),
           py::arg("temperature") = 1.0)
      .def(
          "classify",
          [](const SyntheticOracle& oracle, const Eigen::VectorXd& flat,
             int n_lights) {
            const ClassifyResult result = oracle.classify(flat, n_lights);
            return py::make_tuple(result.label, result.probs);
          },
          py::arg("flat"), py::arg("n_lights"));
}
