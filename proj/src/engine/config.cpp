// SPDX-License-Identifier: Apache-2.0
#include "vstg/engine/config.hpp"

#include <fstream>

#include "vstg/error.hpp"

namespace vstg {
using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

const char* to_string(HorizonPolicy p) { return p == HorizonPolicy::Uniform ? "uniform" : "all"; }

HorizonPolicy horizon_policy_from_string(const std::string& s) {
  if (s == "uniform") return HorizonPolicy::Uniform;
  if (s == "all") return HorizonPolicy::All;
  throw ConfigError("unknown horizon policy '" + s + "'");
}

}  // namespace

LossMode ModelConfig::implied_loss_mode() const {
  return use_semantic && semantic.variant != SemanticVariant::GTS ? LossMode::ES : LossMode::GTS;
}

TrainConfig TrainConfig::desk_scale() {
  TrainConfig c;
  c.batch_size = 32;
  c.epochs = 30;
  return c;
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (batch_size == 0) throw ConfigError("batch_size must be > 0");
  loss.validate();
  if (loss.mode != model.implied_loss_mode()) {
    throw ConfigError(std::string("loss mode ") + to_string(loss.mode) + " does not match the model's semantic source (" +
                      to_string(model.implied_loss_mode()) + " expected)");
  }
}

json to_json(const AnticipationProtocol& p) {
  return {{"s_enc", p.s_enc}, {"s_ant", p.s_ant}, {"alpha_s", p.alpha_s}};
}

AnticipationProtocol protocol_from_json(const json& j) {
  AnticipationProtocol p;
  read_opt(j, "s_enc", p.s_enc);
  read_opt(j, "s_ant", p.s_ant);
  read_opt(j, "alpha_s", p.alpha_s);
  p.validate();
  return p;
}

json to_json(const LossConfig& c) {
  return {{"theta", c.theta}, {"a", c.a}, {"b", c.b}, {"c", c.c}, {"mode", to_string(c.mode)}};
}

LossConfig loss_config_from_json(const json& j, LossConfig base) {
  read_opt(j, "theta", base.theta);
  read_opt(j, "a", base.a);
  read_opt(j, "b", base.b);
  read_opt(j, "c", base.c);
  if (j.contains("mode")) base.mode = loss_mode_from_string(j.at("mode").get<std::string>());
  return base;
}

json to_json(const ModelConfig& c) {
  json j;
  j["use_semantic"] = c.use_semantic;
  j["semantic"] = {{"variant", to_string(c.semantic.variant)},
                   {"top_k", c.semantic.top_k},
                   {"mlp_hidden", c.semantic.mlp_hidden},
                   {"grad_through_estimate", c.semantic.grad_through_estimate}};
  j["fusion"] = {{"strategy", to_string(c.fusion.strategy)},
                 {"projection", to_string(c.fusion.projection)},
                 {"mlp_hidden", c.fusion.mlp_hidden},
                 {"w_vis_init", c.fusion.w_vis_init},
                 {"w_sem_init", c.fusion.w_sem_init}};
  j["encoder"] = {{"m_blocks", c.encoder.m_blocks},
                  {"n_heads", c.encoder.n_heads},
                  {"ffn_hidden", c.encoder.ffn_hidden},
                  {"pooling", to_string(c.encoder.pooling)},
                  {"dropout", c.encoder.dropout},
                  {"norm", c.encoder.norm == NormOrder::Post ? "post" : "pre"},
                  {"positional", c.encoder.positional == PositionalKind::Fixed ? "fixed" : "learned"},
                  {"max_positions", c.encoder.max_positions}};
  return j;
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  read_opt(j, "use_semantic", c.use_semantic);
  if (j.contains("semantic")) {
    const auto& s = j.at("semantic");
    if (s.contains("variant")) c.semantic.variant = semantic_variant_from_string(s.at("variant").get<std::string>());
    read_opt(s, "top_k", c.semantic.top_k);
    read_opt(s, "mlp_hidden", c.semantic.mlp_hidden);
    read_opt(s, "grad_through_estimate", c.semantic.grad_through_estimate);
  }
  if (j.contains("fusion")) {
    const auto& f = j.at("fusion");
    if (f.contains("strategy")) c.fusion.strategy = fusion_strategy_from_string(f.at("strategy").get<std::string>());
    if (f.contains("projection")) c.fusion.projection = projection_from_string(f.at("projection").get<std::string>());
    read_opt(f, "mlp_hidden", c.fusion.mlp_hidden);
    read_opt(f, "w_vis_init", c.fusion.w_vis_init);
    read_opt(f, "w_sem_init", c.fusion.w_sem_init);
  }
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    read_opt(e, "m_blocks", c.encoder.m_blocks);
    read_opt(e, "n_heads", c.encoder.n_heads);
    read_opt(e, "ffn_hidden", c.encoder.ffn_hidden);
    if (e.contains("pooling")) c.encoder.pooling = pooling_from_string(e.at("pooling").get<std::string>());
    read_opt(e, "dropout", c.encoder.dropout);
    if (e.contains("norm")) {
      const auto s = e.at("norm").get<std::string>();
      if (s != "post" && s != "pre") throw ConfigError("unknown norm order '" + s + "'");
      c.encoder.norm = s == "post" ? NormOrder::Post : NormOrder::Pre;
    }
    if (e.contains("positional")) {
      const auto s = e.at("positional").get<std::string>();
      if (s != "fixed" && s != "learned") throw ConfigError("unknown positional kind '" + s + "'");
      c.encoder.positional = s == "fixed" ? PositionalKind::Fixed : PositionalKind::Learned;
    }
    read_opt(e, "max_positions", c.encoder.max_positions);
  }
  return c;
}

json to_json(const TrainConfig& c) {
  json j;
  j["lr"] = c.lr;
  j["momentum"] = c.momentum;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["loss"] = to_json(c.loss);
  j["model"] = to_json(c.model);
  j["horizons"] = to_string(c.horizons);
  j["modality"] = c.modality;
  j["dataset_dir"] = c.dataset_dir;
  j["train_split"] = c.train_split;
  j["val_split"] = c.val_split;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  try {
    TrainConfig c;
    read_opt(j, "lr", c.lr);
    read_opt(j, "momentum", c.momentum);
    read_opt(j, "batch_size", c.batch_size);
    read_opt(j, "epochs", c.epochs);
    read_opt(j, "seed", c.seed);
    if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
    c.loss.mode = c.model.implied_loss_mode();
    if (j.contains("loss")) c.loss = loss_config_from_json(j.at("loss"), c.loss);
    if (j.contains("horizons")) c.horizons = horizon_policy_from_string(j.at("horizons").get<std::string>());
    read_opt(j, "modality", c.modality);
    read_opt(j, "dataset_dir", c.dataset_dir);
    read_opt(j, "train_split", c.train_split);
    read_opt(j, "val_split", c.val_split);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
}

json to_json(const SynthConfig& c) {
  json j;
  j["n_classes"] = c.n_classes;
  j["d_v"] = c.d_v;
  j["d_s"] = c.d_s;
  j["noise_sigma"] = c.noise_sigma;
  j["informativeness"] = c.informativeness;
  if (!c.transition.empty()) {
    json rows = json::array();
    for (std::size_t r = 0; r < c.transition.rows(); ++r) {
      const auto row = c.transition.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["transition"] = rows;
  }
  j["n_train"] = c.n_train;
  j["n_val"] = c.n_val;
  j["n_test"] = c.n_test;
  j["seed"] = c.seed;
  j["modalities"] = c.modalities;
  j["protocol"] = to_json(c.protocol);
  return j;
}

SynthConfig synth_config_from_json(const json& j) {
  try {
    SynthConfig c;
    read_opt(j, "n_classes", c.n_classes);
    read_opt(j, "d_v", c.d_v);
    read_opt(j, "d_s", c.d_s);
    read_opt(j, "noise_sigma", c.noise_sigma);
    read_opt(j, "informativeness", c.informativeness);
    if (j.contains("transition") && !j.at("transition").is_null()) {
      const auto rows = j.at("transition").get<std::vector<std::vector<double>>>();
      std::vector<double> flat;
      for (const auto& r : rows) {
        if (r.size() != rows.size()) throw ConfigError("transition matrix must be square");
        flat.insert(flat.end(), r.begin(), r.end());
      }
      c.transition = Tensor({rows.size(), rows.size()}, std::move(flat));
    }
    read_opt(j, "n_train", c.n_train);
    read_opt(j, "n_val", c.n_val);
    read_opt(j, "n_test", c.n_test);
    read_opt(j, "seed", c.seed);
    read_opt(j, "modalities", c.modalities);
    if (j.contains("protocol")) c.protocol = protocol_from_json(j.at("protocol"));
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace vstg
