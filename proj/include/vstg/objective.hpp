// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vstg/numcore/autograd.hpp"

namespace vstg {

enum class LossMode { GTS, ES };

const char* to_string(LossMode m);
LossMode loss_mode_from_string(const std::string& s);

/// L = L_tgt + a L_obs + b L_cos + c L_mse in ES mode; L_tgt alone in GTS.
struct LossConfig {
  double theta = 0.1;  // label smoothing
  double a = 2.1;
  double b = 1.0;
  double c = 1.0;
  LossMode mode = LossMode::ES;

  /// Weights used on EPIC-Kitchens (2.1 / 1.0 / 1.0).
  static LossConfig epic_kitchens();
  /// Weights used on EGTEA Gaze+ (2.9 / 1.0 / 1.1).
  static LossConfig egtea_gaze();
  void validate() const;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// -(1 - theta) log p[true] - (theta / N) sum_i log p[i], probabilities
/// clamped below at 1e-12.
double ce_label_smooth(std::span<const double> probs, std::size_t true_class, double theta);

/// Same loss evaluated from logits through a log-softmax (1 x N -> 1 x 1).
Var ce_label_smooth(const Var& logits, std::size_t true_class, double theta);

/// 1 - cos(s_hat, s). When either vector is zero the loss is 1 with zero
/// gradient.
Var cos_loss(const Var& s_hat, const Var& s);
/// sum_i (s_i - s_hat_i)^2 (a sum over dimensions, not a mean).
Var mse_loss(const Var& s_hat, const Var& s);

struct LossParts {
  Var tgt, obs, cos, mse;
};

/// Throws ConfigError when ES mode is missing a part.
Var total_loss(const LossConfig& cfg, const LossParts& parts);

// Metrics. Scores are B x N row-major; ties at the k-th rank go to the
// lowest class id.

bool in_top_k(std::span<const double> scores, std::size_t label, std::size_t k);
double top_k_accuracy(const Tensor& scores, std::span<const std::size_t> labels, std::size_t k);
double top5_accuracy(const Tensor& scores, std::span<const std::size_t> labels);
/// Unweighted mean over classes present in `labels` of per-class top-k recall.
double mean_top_k_recall(const Tensor& scores, std::span<const std::size_t> labels, std::size_t k);
double mean_top5_recall(const Tensor& scores, std::span<const std::size_t> labels);

/// Reduces action scores to group scores (verbs or nouns) by taking the max
/// over actions mapped to each group.
Tensor marginalize_max(const Tensor& scores, std::span<const std::size_t> group_of, std::size_t n_groups);

struct LateFusionWeights {
  double w_a = 1.0;
  double w_b = 1.0;
};

Tensor late_fuse(const Tensor& scores_a, const Tensor& scores_b, const LateFusionWeights& w);

struct LateFusionFit {
  std::size_t iterations = 200;
  double lr = 0.01;
  double momentum = 0.9;
};

/// Learns the two weights by minimizing mean cross-entropy of the fused
/// scores (full batch, SGD with momentum), starting from (1, 1).
LateFusionWeights fit_late_fusion(const Tensor& scores_a, const Tensor& scores_b,
                                  std::span<const std::size_t> labels, const LateFusionFit& fit = {});

}  // namespace vstg
