// SPDX-License-Identifier: Apache-2.0
#include "vstg/engine/checkpoint.hpp"

#include <fstream>

#include "json.hpp"
#include "vstg/data/feature_file.hpp"
#include "vstg/error.hpp"

namespace vstg {
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "vstg-checkpoint-1";

std::string param_file(const std::string& name) { return "params/" + name + ".vstg"; }

}  // namespace

Checkpoint make_checkpoint(const Model& model, const TrainConfig& cfg, const AnticipationProtocol& protocol) {
  Checkpoint c;
  c.config = cfg;
  c.protocol = protocol;
  c.d_v = model.d_v();
  c.d_s = model.semantic().dim();
  c.n_classes = model.num_classes();
  for (const auto& p : model.named_params()) c.params.emplace_back(p.name, p.var.value());
  return c;
}

Model restore_model(const Checkpoint& ckpt, const SemanticMatrix& semantic) {
  if (semantic.num_classes() != ckpt.n_classes || semantic.dim() != ckpt.d_s) {
    throw ConfigError("checkpoint expects " + std::to_string(ckpt.n_classes) + " classes with d_s = " +
                      std::to_string(ckpt.d_s) + ", dataset has " + std::to_string(semantic.num_classes()) +
                      " with d_s = " + std::to_string(semantic.dim()));
  }
  Rng rng(ckpt.config.seed);
  Model m(ckpt.config.model, ckpt.d_v, semantic, ckpt.protocol.s_ant, rng);
  m.load_params(ckpt.params);
  return m;
}

Model restore_model(const Checkpoint& ckpt, const Dataset& ds) {
  if (ds.d_v != ckpt.d_v) {
    throw ConfigError("checkpoint expects d_v = " + std::to_string(ckpt.d_v) + ", dataset has " + std::to_string(ds.d_v));
  }
  if (ds.protocol.s_enc != ckpt.protocol.s_enc || ds.protocol.s_ant != ckpt.protocol.s_ant) {
    throw ConfigError("checkpoint and dataset use different anticipation protocols");
  }
  return restore_model(ckpt, ds.semantic);
}

void save_checkpoint(const Checkpoint& ckpt, const fs::path& dir) {
  fs::create_directories(dir / "params");
  json manifest;
  manifest["format"] = kFormat;
  manifest["config"] = to_json(ckpt.config);
  manifest["protocol"] = to_json(ckpt.protocol);
  manifest["d_v"] = ckpt.d_v;
  manifest["d_s"] = ckpt.d_s;
  manifest["n_classes"] = ckpt.n_classes;
  manifest["epoch"] = ckpt.epoch;
  manifest["val_top5"] = ckpt.val_top5;
  json history = json::array();
  for (const auto& r : ckpt.history) {
    history.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_top5", r.val_top5}});
  }
  manifest["history"] = history;
  json params = json::array();
  for (const auto& [name, t] : ckpt.params) {
    const std::string file = param_file(name);
    write_feature_file(dir / file, t);
    params.push_back({{"name", name}, {"file", file}, {"shape", t.shape()}});
  }
  manifest["params"] = params;
  std::ofstream os(dir / "manifest.json");
  if (!os) throw FormatError("cannot write " + (dir / "manifest.json").string());
  os << manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw FormatError("no manifest.json in " + dir.string());
  try {
    const json m = json::parse(is);
    if (m.value("format", "") != kFormat) throw FormatError("unknown checkpoint format in " + dir.string());
    Checkpoint c;
    c.config = train_config_from_json(m.at("config"));
    c.protocol = protocol_from_json(m.at("protocol"));
    c.d_v = m.at("d_v").get<std::size_t>();
    c.d_s = m.at("d_s").get<std::size_t>();
    c.n_classes = m.at("n_classes").get<std::size_t>();
    c.epoch = m.at("epoch").get<std::size_t>();
    c.val_top5 = m.at("val_top5").get<double>();
    for (const auto& r : m.at("history")) {
      c.history.push_back({r.at("epoch").get<std::size_t>(), r.at("train_loss").get<double>(),
                           r.at("val_top5").get<double>()});
    }
    for (const auto& p : m.at("params")) {
      Tensor t = read_feature_file(dir / p.at("file").get<std::string>());
      const auto shape = p.at("shape").get<Shape>();
      if (shape_numel(shape) != t.size()) {
        throw FormatError("parameter " + p.at("name").get<std::string>() + " has " + std::to_string(t.size()) +
                          " values, manifest says " + shape_str(shape));
      }
      c.params.emplace_back(p.at("name").get<std::string>(), Tensor(shape, std::move(t.storage())));
    }
    return c;
  } catch (const json::exception& e) {
    throw FormatError(dir.string() + "/manifest.json: " + e.what());
  }
}

}  // namespace vstg
