// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "vstg/engine/checkpoint.hpp"

namespace vstg {

/// v = mu * v + g;  p -= lr * v.
class SgdMomentum {
 public:
  SgdMomentum(std::vector<NamedParam> params, double lr, double momentum);
  /// Applies one update with gradients scaled by `grad_scale` (1 / batch).
  void step(double grad_scale);
  void zero_grad();

 private:
  std::vector<NamedParam> params_;
  std::vector<Tensor> velocity_;
  double lr_, momentum_;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Trains on `train_split`, selects the epoch with the best validation Top-5
/// at the selection step (earliest on ties) and returns its checkpoint.
/// Parameters are rounded to float32 after every epoch so checkpoints
/// round-trip exactly.
Checkpoint train(const TrainConfig& cfg, const Dataset& ds, const TrainHooks& hooks = {});
/// Loads the dataset from cfg.dataset_dir.
Checkpoint train(const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace vstg
