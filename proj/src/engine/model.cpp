// SPDX-License-Identifier: Apache-2.0
#include "vstg/engine/model.hpp"

#include <map>

#include "vstg/error.hpp"

namespace vstg {
namespace {

Var detach(const Var& v) { return Var::constant(v.value()); }

}  // namespace

Model::Model(const ModelConfig& cfg, std::size_t d_v, const SemanticMatrix& semantic, std::size_t s_ant, Rng& rng)
    : cfg_(cfg), semantic_(semantic), d_v_(d_v), s_ant_(s_ant) {
  if (semantic.num_classes() < 2) throw ConfigError("model needs a semantic matrix with at least 2 classes");
  if (d_v == 0) throw ConfigError("model needs d_v > 0");
  const std::size_t n = semantic.num_classes();
  const std::size_t d_s = semantic.dim();
  d_x_ = cfg.use_semantic ? fused_dim(cfg.fusion, d_v, d_s) : d_v;
  cfg.encoder.validate(d_x_);

  if (cfg.use_semantic) {
    switch (cfg.semantic.variant) {
      case SemanticVariant::GTS:
        break;
      case SemanticVariant::FW:
      case SemanticVariant::PW:
      case SemanticVariant::NEI:
        obs_.linear = Linear::init(d_v, n, rng);
        break;
      case SemanticVariant::MLP:
        sem_mlp_.hidden = Linear::init(d_v, cfg.semantic.mlp_hidden, rng);
        sem_mlp_.out = Linear::init(cfg.semantic.mlp_hidden, d_s, rng);
        break;
    }
    fusion_ = FusionParams::init(cfg.fusion, d_v, d_s, rng);
  }
  encoder_ = EncoderParams::init(cfg.encoder, d_x_, rng);
  gru_ = GruCellParams::init(d_x_, d_x_, rng);
  classifier_.head = Linear::init(d_x_, n, rng);
}

ForwardOutput Model::forward(const Tensor& window, std::size_t obs_label, std::size_t n,
                             const ForwardOptions& opts) const {
  if (window.rank() != 2 || window.cols() != d_v_) {
    throw ShapeError("window " + shape_str(window.shape()) + " does not match d_v = " + std::to_string(d_v_));
  }
  if (window.rows() == 0) throw ShapeError("empty observation window");
  ForwardOutput out;
  const Var features = Var::constant(window);

  Var x = features;
  if (cfg_.use_semantic) {
    const auto read_label = [&](std::size_t label) {
      if (opts.trace) opts.trace->semantic_label_reads.push_back(label);
      return gts_lookup(semantic_, label);
    };
    switch (cfg_.semantic.variant) {
      case SemanticVariant::GTS:
        out.semantic = read_label(obs_label);
        break;
      case SemanticVariant::FW:
      case SemanticVariant::PW:
      case SemanticVariant::NEI: {
        const ObservationOutput obs = classify_observation(obs_, features);
        out.obs_logits = obs.logits;
        const Var logits = cfg_.semantic.grad_through_estimate ? obs.logits : detach(obs.logits);
        if (cfg_.semantic.variant == SemanticVariant::FW) {
          const Var probs = cfg_.semantic.grad_through_estimate ? obs.probs : detach(obs.probs);
          out.semantic = estimate_fw(probs, semantic_);
        } else if (cfg_.semantic.variant == SemanticVariant::PW) {
          out.semantic = estimate_pw(logits, semantic_, cfg_.semantic.effective_top_k(num_classes()));
        } else {
          out.semantic = estimate_nei(logits, semantic_);
        }
        break;
      }
      case SemanticVariant::MLP:
        out.semantic = estimate_mlp(sem_mlp_, features);
        break;
    }
    if (opts.need_semantic_target && cfg_.semantic.variant != SemanticVariant::GTS) {
      out.semantic_target = read_label(obs_label);
    }
    x = fuse(out.semantic, features, fusion_, cfg_.fusion);
  }
  out.fused = x;

  BlockContext ctx;
  ctx.dropout_rng = opts.dropout_rng;
  ctx.attention_maps = opts.attention_maps;
  const EncoderOutput enc = encode(encoder_, x, cfg_.encoder, ctx);
  const Var last = select_row(x, x.rows() - 1);
  const Anticipation ant = anticipate(gru_, classifier_, enc.summary, last, n, s_ant_);
  out.scores = ant.scores;
  out.gru_steps = ant.iterations;
  if (opts.trace) {
    opts.trace->observed_lengths.push_back(window.rows());
    opts.trace->gru_steps.push_back(ant.iterations);
  }
  return out;
}

LossValues Model::loss(const ForwardOutput& out, std::size_t obs_label, std::size_t target_label,
                        const LossConfig& cfg) const {
  LossParts parts;
  parts.tgt = ce_label_smooth(out.scores, target_label, cfg.theta);
  LossValues v;
  v.tgt = parts.tgt.item();
  if (cfg.mode == LossMode::ES) {
    if (!out.semantic.defined() || !out.semantic_target.defined()) {
      throw ConfigError("ES loss needs the estimated and ground-truth semantic vectors");
    }
    // The MLP estimator has no observation classifier, so L_obs is absent.
    if (out.obs_logits.defined()) {
      parts.obs = ce_label_smooth(out.obs_logits, obs_label, cfg.theta);
      v.obs = parts.obs.item();
    } else {
      parts.obs = Var::constant(Tensor({1, 1}, 0.0));
    }
    parts.cos = cos_loss(out.semantic, out.semantic_target);
    parts.mse = mse_loss(out.semantic, out.semantic_target);
    v.cos = parts.cos.item();
    v.mse = parts.mse.item();
  }
  v.total = total_loss(cfg, parts);
  return v;
}

std::vector<NamedParam> Model::named_params() const {
  std::vector<NamedParam> out;
  if (obs_.linear.weight.defined()) obs_.linear.collect("semantic.obs", out);
  if (sem_mlp_.hidden.weight.defined()) {
    sem_mlp_.hidden.collect("semantic.mlp_hidden", out);
    sem_mlp_.out.collect("semantic.mlp_out", out);
  }
  if (cfg_.use_semantic) fusion_.collect("fusion", out);
  encoder_.collect("encoder", out);
  gru_.collect("gru", out);
  classifier_.head.collect("classifier", out);
  return out;
}

void Model::load_params(const std::vector<std::pair<std::string, Tensor>>& values) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [name, t] : values) by_name[name] = &t;
  for (auto& p : named_params()) {
    const auto it = by_name.find(p.name);
    if (it == by_name.end()) throw ConfigError("checkpoint lacks parameter " + p.name);
    if (it->second->shape() != p.var.shape()) {
      throw ConfigError("parameter " + p.name + ": checkpoint shape " + shape_str(it->second->shape()) +
                        " vs model " + shape_str(p.var.shape()));
    }
    p.var.mutable_value() = *it->second;
  }
}

}  // namespace vstg
