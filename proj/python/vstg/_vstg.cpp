// SPDX-License-Identifier: Apache-2.0
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vstg/data/dataset.hpp"
#include "vstg/data/feature_file.hpp"
#include "vstg/data/protocol.hpp"
#include "vstg/data/synthetic.hpp"
#include "vstg/engine/ablate.hpp"
#include "vstg/engine/checkpoint.hpp"
#include "vstg/engine/config.hpp"
#include "vstg/engine/evaluate.hpp"
#include "vstg/engine/model.hpp"
#include "vstg/engine/trainer.hpp"
#include "vstg/error.hpp"
#include "vstg/objective.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Configs and reports cross the boundary as plain dicts via the json module.
json to_cpp(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return json::parse(text);
}

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::array_t<double> to_numpy(const vstg::Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<double> out(shape);
  std::copy(t.storage().begin(), t.storage().end(), out.mutable_data());
  return out;
}

vstg::Tensor from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw vstg::ShapeError("expected a 2-D array, got " + std::to_string(a.ndim()) + " dimensions");
  vstg::Shape shape{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))};
  return vstg::Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

vstg::Dataset dataset_for(const vstg::Checkpoint& ckpt, const std::optional<std::string>& dataset_dir) {
  const std::string dir = dataset_dir ? *dataset_dir : ckpt.config.dataset_dir;
  if (dir.empty()) throw vstg::ConfigError("no dataset given and the checkpoint records none");
  return vstg::load_dataset(dir);
}

py::dict synth(const py::object& config, const std::string& out_dir) {
  const vstg::SynthConfig cfg = vstg::synth_config_from_json(to_cpp(config));
  vstg::SyntheticDataset synth;
  {
    py::gil_scoped_release release;
    synth = vstg::generate_synthetic(cfg);
    vstg::save_dataset(synth.data, out_dir);
  }
  py::dict out;
  out["dataset"] = out_dir;
  out["n_classes"] = cfg.n_classes;
  out["bayes_ceiling_top1_val"] = synth.bayes_ceiling_top1;
  return out;
}

py::dict train(const py::object& config, const std::optional<std::string>& dataset_dir,
               const std::optional<std::string>& checkpoint_dir,
               const std::optional<std::function<void(py::dict)>>& on_epoch) {
  json j = to_cpp(config);
  if (dataset_dir) j["dataset_dir"] = *dataset_dir;
  const vstg::TrainConfig cfg = vstg::train_config_from_json(j);
  vstg::TrainHooks hooks;
  if (on_epoch) {
    hooks.on_epoch = [&](const vstg::EpochRecord& r) {
      py::gil_scoped_acquire acquire;
      py::dict d;
      d["epoch"] = r.epoch;
      d["train_loss"] = r.train_loss;
      d["val_top5"] = r.val_top5;
      (*on_epoch)(d);
    };
  }
  vstg::Checkpoint ckpt;
  {
    py::gil_scoped_release release;
    ckpt = vstg::train(cfg, hooks);
    if (checkpoint_dir) vstg::save_checkpoint(ckpt, *checkpoint_dir);
  }
  py::list history;
  for (const auto& r : ckpt.history) {
    py::dict d;
    d["epoch"] = r.epoch;
    d["train_loss"] = r.train_loss;
    d["val_top5"] = r.val_top5;
    history.append(d);
  }
  py::dict out;
  out["best_epoch"] = ckpt.epoch;
  out["val_top5"] = ckpt.val_top5;
  out["history"] = history;
  if (checkpoint_dir) out["checkpoint"] = *checkpoint_dir;
  return out;
}

py::object evaluate(const std::string& checkpoint_dir, const std::optional<std::string>& dataset_dir,
                    const std::string& split) {
  json report;
  {
    py::gil_scoped_release release;
    const vstg::Checkpoint ckpt = vstg::load_checkpoint(checkpoint_dir);
    const vstg::Dataset ds = dataset_for(ckpt, dataset_dir);
    const vstg::Model model = vstg::restore_model(ckpt, ds);
    report = vstg::evaluate(model, ds, split, ckpt.config.modality).to_json();
  }
  return to_py(report);
}

py::array_t<double> predict_scores(const std::string& checkpoint_dir, const std::optional<std::string>& dataset_dir,
                                   const std::string& split, std::size_t n) {
  vstg::Tensor scores;
  {
    py::gil_scoped_release release;
    const vstg::Checkpoint ckpt = vstg::load_checkpoint(checkpoint_dir);
    const vstg::Dataset ds = dataset_for(ckpt, dataset_dir);
    const vstg::Model model = vstg::restore_model(ckpt, ds);
    scores = vstg::predict_scores(model, ds.split(split), ckpt.config.modality, ds.protocol, n);
  }
  return to_numpy(scores);
}

py::object ablate(const py::object& grid) {
  const vstg::AblationGrid g = vstg::ablation_grid_from_json(to_cpp(grid));
  json out;
  {
    py::gil_scoped_release release;
    const vstg::AblationTable table = vstg::ablate(g);
    out = table.to_json();
    out["text"] = table.render();
  }
  return to_py(out);
}

}  // namespace

PYBIND11_MODULE(_vstg, m) {
  m.doc() = "Visual-semantic transformer action anticipation";

  // Translators run newest first, so the base class is registered before its subclasses.
  auto& base = py::register_exception<vstg::Error>(m, "VstgError", PyExc_RuntimeError);
  py::register_exception<vstg::ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<vstg::ProtocolError>(m, "ProtocolError", base.ptr());
  py::register_exception<vstg::FormatError>(m, "FormatError", base.ptr());
  py::register_exception<vstg::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<vstg::IndexError>(m, "IndexError", base.ptr());
  py::register_exception<vstg::NumericError>(m, "NumericError", base.ptr());
  py::register_exception<vstg::TrainingError>(m, "TrainingError", base.ptr());

  py::class_<vstg::AnticipationProtocol>(m, "AnticipationProtocol")
      .def(py::init([](std::size_t s_enc, std::size_t s_ant, double alpha_s) {
             vstg::AnticipationProtocol p{s_enc, s_ant, alpha_s};
             p.validate();
             return p;
           }),
           py::arg("s_enc") = 6, py::arg("s_ant") = 8, py::arg("alpha_s") = 0.25)
      .def_readonly("s_enc", &vstg::AnticipationProtocol::s_enc)
      .def_readonly("s_ant", &vstg::AnticipationProtocol::s_ant)
      .def_readonly("alpha_s", &vstg::AnticipationProtocol::alpha_s)
      .def("total_steps", &vstg::AnticipationProtocol::total_steps)
      .def("observed_steps", &vstg::AnticipationProtocol::observed_steps, py::arg("n"))
      .def("anticipation_time", &vstg::AnticipationProtocol::anticipation_time, py::arg("n"))
      .def("observation_time", &vstg::AnticipationProtocol::observation_time, py::arg("n"))
      .def("selection_step", &vstg::AnticipationProtocol::selection_step);

  m.def("read_feature_file", [](const std::string& path) { return to_numpy(vstg::read_feature_file(path)); },
        py::arg("path"), "Read a FeatureFile into a float64 array.");
  m.def("write_feature_file",
        [](const std::string& path, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
          vstg::write_feature_file(path, from_numpy(a));
        },
        py::arg("path"), py::arg("array"), "Write a 2-D array as a FeatureFile (float32 payload).");

  m.def("top_k_accuracy",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
           const std::vector<std::size_t>& labels, std::size_t k) {
          return vstg::top_k_accuracy(from_numpy(scores), labels, k);
        },
        py::arg("scores"), py::arg("labels"), py::arg("k"));
  m.def("top5_accuracy",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
           const std::vector<std::size_t>& labels) { return vstg::top5_accuracy(from_numpy(scores), labels); },
        py::arg("scores"), py::arg("labels"));
  m.def("mean_top5_recall",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
           const std::vector<std::size_t>& labels) { return vstg::mean_top5_recall(from_numpy(scores), labels); },
        py::arg("scores"), py::arg("labels"));

  m.def("default_train_config", [] { return to_py(vstg::to_json(vstg::TrainConfig{})); });
  m.def("desk_scale_config", [] { return to_py(vstg::to_json(vstg::TrainConfig::desk_scale())); });
  m.def("default_synth_config", [] { return to_py(vstg::to_json(vstg::SynthConfig{})); });

  m.def("synth", &synth, py::arg("config"), py::arg("out_dir"), "Generate a synthetic dataset directory.");
  m.def("train", &train, py::arg("config"), py::arg("dataset_dir") = py::none(), py::arg("checkpoint_dir") = py::none(),
        py::arg("on_epoch") = py::none(), "Train a model; optionally save the best checkpoint.");
  m.def("evaluate", &evaluate, py::arg("checkpoint_dir"), py::arg("dataset_dir") = py::none(),
        py::arg("split") = "val", "Evaluate a checkpoint and return the report as a dict.");
  m.def("predict_scores", &predict_scores, py::arg("checkpoint_dir"), py::arg("dataset_dir") = py::none(),
        py::arg("split") = "val", py::arg("n") = 4, "Target scores for every sample of a split at step n.");
  m.def("ablate", &ablate, py::arg("grid"), "Run an ablation grid and return the table as a dict.");
}
