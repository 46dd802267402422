// SPDX-License-Identifier: Apache-2.0
#include "vstg/fusion.hpp"

#include <array>
#include <cmath>

#include "vstg/error.hpp"

namespace vstg {

const char* to_string(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::Concat: return "Concat";
    case FusionStrategy::WeightedSum: return "WeightedSum";
    case FusionStrategy::Mlp: return "Mlp";
    case FusionStrategy::Attention: return "Attention";
  }
  return "?";
}

const char* to_string(Projection p) {
  return p == Projection::ProjectSemantic ? "ProjectSemantic" : "ProjectVisual";
}

FusionStrategy fusion_strategy_from_string(const std::string& s) {
  for (auto v : {FusionStrategy::Concat, FusionStrategy::WeightedSum, FusionStrategy::Mlp, FusionStrategy::Attention})
    if (s == to_string(v)) return v;
  throw ConfigError("unknown fusion strategy '" + s + "'");
}

Projection projection_from_string(const std::string& s) {
  if (s == "ProjectSemantic") return Projection::ProjectSemantic;
  if (s == "ProjectVisual") return Projection::ProjectVisual;
  throw ConfigError("unknown projection '" + s + "'");
}

std::size_t fused_dim(const FusionConfig& cfg, std::size_t d_v, std::size_t d_s) {
  switch (cfg.strategy) {
    case FusionStrategy::Concat: return d_v + d_s;
    case FusionStrategy::Mlp: return d_v;
    case FusionStrategy::WeightedSum:
    case FusionStrategy::Attention: return cfg.projection == Projection::ProjectSemantic ? d_v : d_s;
  }
  return d_v;
}

FusionParams FusionParams::init(const FusionConfig& cfg, std::size_t d_v, std::size_t d_s, Rng& rng) {
  FusionParams p;
  const bool project_semantic = cfg.projection == Projection::ProjectSemantic;
  switch (cfg.strategy) {
    case FusionStrategy::Concat:
      break;
    case FusionStrategy::WeightedSum:
      p.proj = project_semantic ? Linear::init(d_s, d_v, rng) : Linear::init(d_v, d_s, rng);
      p.w_vis = Var::param(Tensor({1, 1}, cfg.w_vis_init));
      p.w_sem = Var::param(Tensor({1, 1}, cfg.w_sem_init));
      break;
    case FusionStrategy::Mlp: {
      const std::size_t hidden = cfg.mlp_hidden ? cfg.mlp_hidden : d_v;
      p.mlp_hidden = Linear::init(d_v + d_s, hidden, rng);
      p.mlp_out = Linear::init(hidden, d_v, rng);
      break;
    }
    case FusionStrategy::Attention: {
      p.proj = project_semantic ? Linear::init(d_s, d_v, rng) : Linear::init(d_v, d_s, rng);
      const std::size_t d_x = fused_dim(cfg, d_v, d_s);
      p.attn_out = Linear::init(d_x + d_s, d_x, rng);
      break;
    }
  }
  return p;
}

void FusionParams::collect(const std::string& prefix, std::vector<NamedParam>& out) const {
  if (proj.weight.defined()) proj.collect(prefix + ".proj", out);
  if (w_vis.defined()) out.push_back({prefix + ".w_vis", w_vis});
  if (w_sem.defined()) out.push_back({prefix + ".w_sem", w_sem});
  if (mlp_hidden.weight.defined()) mlp_hidden.collect(prefix + ".mlp_hidden", out);
  if (mlp_out.weight.defined()) mlp_out.collect(prefix + ".mlp_out", out);
  if (attn_out.weight.defined()) attn_out.collect(prefix + ".attn_out", out);
}

Var project(const Linear& proj, const Var& x) {
  if (x.cols() != proj.in_features()) {
    throw ShapeError("projection expects width " + std::to_string(proj.in_features()) + ", got " + shape_str(x.shape()));
  }
  return proj(x);
}

Var fuse_concat(const Var& s, const Var& features) {
  const std::array<Var, 2> parts{features, broadcast_rows(s, features.rows())};
  return concat_cols(parts);
}

Var fuse_weighted_sum(const Var& s, const Var& features, const FusionParams& params, const FusionConfig& cfg) {
  const std::size_t t = features.rows();
  if (cfg.projection == Projection::ProjectSemantic) {
    return add(mul_scalar(features, params.w_vis), broadcast_rows(mul_scalar(project(params.proj, s), params.w_sem), t));
  }
  return add(mul_scalar(project(params.proj, features), params.w_vis), broadcast_rows(mul_scalar(s, params.w_sem), t));
}

Var fuse_mlp(const Var& s, const Var& features, const FusionParams& params) {
  return params.mlp_out(relu(params.mlp_hidden(fuse_concat(s, features))));
}

AttentionFusion fuse_attention(const Var& s, const Var& features, const FusionParams& params, const FusionConfig& cfg) {
  Var query, keys;
  if (cfg.projection == Projection::ProjectSemantic) {
    query = project(params.proj, s);
    keys = features;
  } else {
    query = s;
    keys = project(params.proj, features);
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(keys.cols()));
  Var weights = softmax(scale(matmul(query, transpose(keys)), inv_sqrt_d));
  Var attn = matmul(weights, keys);
  const std::array<Var, 2> joined{attn, s};
  Var fused = params.attn_out(concat_cols(joined));
  const std::array<Var, 2> rows{keys, fused};
  return {concat_rows(rows), weights};
}

Var fuse(const Var& s, const Var& features, const FusionParams& params, const FusionConfig& cfg) {
  switch (cfg.strategy) {
    case FusionStrategy::Concat: return fuse_concat(s, features);
    case FusionStrategy::WeightedSum: return fuse_weighted_sum(s, features, params, cfg);
    case FusionStrategy::Mlp: return fuse_mlp(s, features, params);
    case FusionStrategy::Attention: return fuse_attention(s, features, params, cfg).tokens;
  }
  throw ConfigError("unhandled fusion strategy");
}

}  // namespace vstg
