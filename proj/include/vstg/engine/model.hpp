// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vstg/decoder.hpp"
#include "vstg/engine/config.hpp"

namespace vstg {

/// Records what a forward pass touched; used to check the horizon protocol
/// and that only observed-action labels reach the semantic path.
struct ForwardTrace {
  std::vector<std::size_t> semantic_label_reads;
  std::vector<std::size_t> observed_lengths;
  std::vector<std::size_t> gru_steps;
};

struct ForwardOptions {
  Rng* dropout_rng = nullptr;
  /// Also gather S[obs_label] for the ES losses.
  bool need_semantic_target = false;
  ForwardTrace* trace = nullptr;
  /// When set, receives the encoder's per-head attention maps.
  std::vector<Tensor>* attention_maps = nullptr;
};

struct ForwardOutput {
  Var scores;           // 1 x N target logits
  Var obs_logits;       // 1 x N (FW/PW/NEI only)
  Var semantic;         // 1 x d_s, s or s_hat (undefined when visual-only)
  Var semantic_target;  // 1 x d_s, S[obs_label] when requested in ES mode
  Var fused;            // T x d_x
  std::size_t gru_steps = 0;
};

struct LossValues {
  Var total;
  double tgt = 0.0, obs = 0.0, cos = 0.0, mse = 0.0;
};

class Model {
 public:
  Model() = default;
  /// Parameters are drawn from `rng`; the semantic matrix is shared, not
  /// trained.
  Model(const ModelConfig& cfg, std::size_t d_v, const SemanticMatrix& semantic, std::size_t s_ant, Rng& rng);

  /// `window` holds the observed steps (observed_steps(n) x d_v).
  ForwardOutput forward(const Tensor& window, std::size_t obs_label, std::size_t n,
                        const ForwardOptions& opts = {}) const;

  LossValues loss(const ForwardOutput& out, std::size_t obs_label, std::size_t target_label,
                  const LossConfig& cfg) const;

  /// Stable order; names are unique.
  std::vector<NamedParam> named_params() const;
  /// Copies values by name; throws ConfigError on a missing name or shape.
  void load_params(const std::vector<std::pair<std::string, Tensor>>& values);

  const ModelConfig& config() const { return cfg_; }
  std::size_t d_v() const { return d_v_; }
  std::size_t d_x() const { return d_x_; }
  std::size_t num_classes() const { return semantic_.num_classes(); }
  std::size_t max_steps() const { return s_ant_; }
  const SemanticMatrix& semantic() const { return semantic_; }

 private:
  ModelConfig cfg_;
  SemanticMatrix semantic_;
  std::size_t d_v_ = 0, d_x_ = 0, s_ant_ = 8;
  ObsClassifierParams obs_;
  SemanticMlpParams sem_mlp_;
  FusionParams fusion_;
  EncoderParams encoder_;
  GruCellParams gru_;
  ClassifierParams classifier_;
};

}  // namespace vstg
