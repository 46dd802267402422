// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "vstg/numcore/layers.hpp"

namespace vstg {

enum class FusionStrategy { Concat, WeightedSum, Mlp, Attention };
enum class Projection { ProjectSemantic, ProjectVisual };

const char* to_string(FusionStrategy s);
const char* to_string(Projection p);
FusionStrategy fusion_strategy_from_string(const std::string& s);
Projection projection_from_string(const std::string& s);

struct FusionConfig {
  FusionStrategy strategy = FusionStrategy::WeightedSum;
  Projection projection = Projection::ProjectSemantic;
  std::size_t mlp_hidden = 0;  // 0 selects d_v
  double w_vis_init = 1.0;
  double w_sem_init = 1.0;
};

/// Width of the fused tokens:
///   Concat                    d_v + d_s
///   WeightedSum / Attention   d_v (ProjectSemantic) or d_s (ProjectVisual)
///   Mlp                       d_v
std::size_t fused_dim(const FusionConfig& cfg, std::size_t d_v, std::size_t d_s);

/// Trainable tensors of every strategy; only the ones the configured
/// strategy uses are allocated.
struct FusionParams {
  Linear proj;      // d_s -> d_v or d_v -> d_s
  Var w_vis, w_sem;  // 1 x 1 each
  Linear mlp_hidden, mlp_out;
  Linear attn_out;  // [attn || s] -> d_x

  static FusionParams init(const FusionConfig& cfg, std::size_t d_v, std::size_t d_s, Rng& rng);
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;
};

/// Maps `x` through the single projection layer.
Var project(const Linear& proj, const Var& x);

/// [f_t || s] for every row of F.
Var fuse_concat(const Var& s, const Var& features);
/// x_t = w_vis * f_t + w_sem * proj(s), or w_vis * proj(f_t) + w_sem * s
/// for ProjectVisual.
Var fuse_weighted_sum(const Var& s, const Var& features, const FusionParams& params, const FusionConfig& cfg);
/// Per step: relu([f_t || s] W1 + b1) W2 + b2, width d_v.
Var fuse_mlp(const Var& s, const Var& features, const FusionParams& params);

struct AttentionFusion {
  Var tokens;   // (T + 1) x d_x, fused token last
  Var weights;  // 1 x T attention weights
};
/// attn = softmax(q K^T / sqrt(d)) V with the projected semantic vector as
/// q and the visual sequence as K and V; the fused token
/// linear([attn || s]) is appended after the visual rows.
AttentionFusion fuse_attention(const Var& s, const Var& features, const FusionParams& params, const FusionConfig& cfg);

Var fuse(const Var& s, const Var& features, const FusionParams& params, const FusionConfig& cfg);

}  // namespace vstg
