#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "knock/experiment.hpp"
#include "knock/features.hpp"
#include "knock/nn.hpp"
#include "knock/signal.hpp"
#include "knock/wav.hpp"

namespace py = pybind11;
using namespace knock;

namespace {

// Inputs as an (n, dim) row-per-window matrix plus labels.
std::pair<Matrix, std::vector<int>> as_arrays(const LabeledDataset& ds) {
  Matrix x(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(ds.dim()));
  for (std::size_t i = 0; i < ds.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = ds.examples[i].x.transpose();
  return {x, ds.labels()};
}

struct Model {
  TrainedModel model;

  static Model load(const std::filesystem::path& path) { return {load_trained(path)}; }
  void save(const std::filesystem::path& path) const { save_trained(model, path); }
  std::string kind() const {
    return std::holds_alternative<SdaeModel>(model)
               ? "sdae"
               : std::string("svm-") + to_string(std::get<ShallowClassifier>(model).feature_kind);
  }
  int predict(const Vector& window) const { return make_predictor(model)(window); }
  // Class probabilities for the SDAE, one-vs-rest margins for the SVM.
  Vector scores(const Vector& window) const {
    if (const auto* m = std::get_if<SdaeModel>(&model)) return knock::predict(*m, window).probs;
    return std::get<ShallowClassifier>(model).predict(window).scores;
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Knock-sound object recognition: SDAE and SVM baselines";

  py::register_exception<Error>(m, "KnockError", PyExc_RuntimeError);

  m.def("default_config_json", [] { return config_to_json(ExperimentConfig{}); });
  m.def("fast_config_json", [](const std::string& config) { return config_to_json(fast_profile(config_from_json(config))); });

  m.def("synth_corpus",
        [](int n_classes, int trials, std::uint64_t seed) { return as_arrays(synth_corpus(n_classes, trials, seed)); },
        py::arg("n_classes"), py::arg("trials_per_class"), py::arg("seed") = 42);
  m.def("load_dataset", [](const std::string& config) { return as_arrays(load_dataset(config_from_json(config))); });

  m.def("window",
        [](const Vector& samples, std::size_t n) { return normalize(extract_window(RawSignal{samples, kDefaultSampleRate}, n)).values; },
        py::arg("samples"), py::arg("length") = kDefaultWindowLength);
  m.def("mfcc_feature", [](const Vector& window) { return mfcc_feature(window); });

  m.def("load_wav", [](const std::filesystem::path& path) {
    const RawSignal s = load_wav(path);
    return std::make_pair(s.samples, s.sample_rate_hz);
  });
  m.def("save_wav", [](const std::filesystem::path& path, const Vector& samples, int rate) {
    save_wav(path, RawSignal{samples, rate});
  }, py::arg("path"), py::arg("samples"), py::arg("sample_rate") = kDefaultSampleRate);

  m.def("grad_check_random", [](int count, std::uint64_t seed, double eps) {
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
      const NetworkInstance inst = random_instance(rng, 4, 32, i % 2 == 0, 1 + i % 4);
      worst = std::max(worst, grad_check(inst.layers, inst.activations, inst.inputs, inst.target, eps));
    }
    return worst;
  }, py::arg("count") = 20, py::arg("seed") = 1, py::arg("eps") = 1e-5);

  py::class_<Model>(m, "Model")
      .def_static("load", &Model::load)
      .def("save", &Model::save)
      .def_property_readonly("kind", &Model::kind)
      .def_property_readonly("feature_dim", [](const Model& self) { return feature_dim(self.model); })
      .def("predict", &Model::predict)
      .def("scores", &Model::scores);

  m.def("train", [](const std::string& config) {
    const ExperimentConfig c = config_from_json(config);
    py::gil_scoped_release release;
    return Model{train_method(c, split(load_dataset(c), c.split).train)};
  });
  m.def("evaluate", [](const std::string& config, const Model& model) {
    const ExperimentConfig c = config_from_json(config);
    py::gil_scoped_release release;
    return report_to_json(evaluate_model(c, model.model, split(load_dataset(c), c.split).test));
  });
  m.def("run_experiment", [](const std::string& config) {
    const ExperimentConfig c = config_from_json(config);
    py::gil_scoped_release release;
    return report_to_json(run_experiment(c));
  });

  m.def("sweep_parameters", &sweep_parameters);
  m.def("default_sweep_values", &default_sweep_values);
  m.def("sweep", [](const std::string& config, const std::string& param, const std::vector<std::string>& values,
                    int repetitions, int jobs) {
    const ExperimentConfig c = config_from_json(config);
    std::vector<SweepResult> results;
    {
      py::gil_scoped_release release;
      results = sweep(c, param, values, repetitions, jobs);
    }
    py::list out;
    for (const auto& r : results) {
      py::dict d;
      d["param"] = r.param;
      d["value"] = r.value;
      d["accuracies"] = r.accuracies;
      d["mean_accuracy"] = r.mean_accuracy;
      d["mean_seconds"] = r.mean_seconds;
      out.append(d);
    }
    return out;
  }, py::arg("config"), py::arg("param"), py::arg("values"), py::arg("repetitions") = 5, py::arg("jobs") = 1);
}
