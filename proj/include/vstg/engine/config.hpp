// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "vstg/data/protocol.hpp"
#include "vstg/data/synthetic.hpp"
#include "vstg/encoder.hpp"
#include "vstg/fusion.hpp"
#include "vstg/objective.hpp"
#include "vstg/semantics.hpp"

namespace vstg {

struct ModelConfig {
  /// False gives the visual-only model: no semantic path, X = F.
  bool use_semantic = true;
  /// GTS feeds the ground-truth row of the observed class; the other
  /// variants estimate it from the visual sequence.
  SemGenConfig semantic;
  FusionConfig fusion;
  EncoderConfig encoder;

  /// Loss mode implied by the semantic source.
  LossMode implied_loss_mode() const;
};

enum class HorizonPolicy {
  Uniform,  // one anticipation step per example, uniform in [1, s_ant]
  All,      // every step for every example
};

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 128;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  LossConfig loss;
  ModelConfig model;
  HorizonPolicy horizons = HorizonPolicy::Uniform;
  std::string modality = "rgb";
  std::string dataset_dir;
  std::string train_split = "train";
  std::string val_split = "val";

  /// Batch 32 and 30 epochs for CPU-sized runs; everything else unchanged.
  static TrainConfig desk_scale();
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const SynthConfig& c);
nlohmann::json to_json(const LossConfig& c);
nlohmann::json to_json(const AnticipationProtocol& p);

/// Missing keys keep their defaults; unknown enum names raise ConfigError.
/// When "loss.mode" is absent it follows the model's semantic source.
ModelConfig model_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
SynthConfig synth_config_from_json(const nlohmann::json& j);
LossConfig loss_config_from_json(const nlohmann::json& j, LossConfig base = {});
AnticipationProtocol protocol_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);

}  // namespace vstg
