// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vstg/data/dataset.hpp"
#include "vstg/engine/model.hpp"

namespace vstg {

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_top5 = 0.0;  // at the selection step
};

struct Checkpoint {
  TrainConfig config;
  AnticipationProtocol protocol;
  std::size_t d_v = 0;
  std::size_t d_s = 0;
  std::size_t n_classes = 0;
  std::size_t epoch = 0;  // 0 means the initial parameters
  double val_top5 = 0.0;
  std::vector<EpochRecord> history;
  std::vector<std::pair<std::string, Tensor>> params;
};

Checkpoint make_checkpoint(const Model& model, const TrainConfig& cfg, const AnticipationProtocol& protocol);

/// Rebuilds the model against the dataset's semantic matrix. Throws
/// ConfigError when the dimensions disagree.
Model restore_model(const Checkpoint& ckpt, const SemanticMatrix& semantic);
Model restore_model(const Checkpoint& ckpt, const Dataset& ds);

/// Directory layout: manifest.json plus params/<name>.vstg.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace vstg
