// SPDX-License-Identifier: Apache-2.0
#include "vstg/encoder.hpp"

#include <array>
#include <cmath>

#include "vstg/error.hpp"

namespace vstg {
namespace {

Var ones_row(std::size_t d) { return Var::param(Tensor::full(1, d, 1.0)); }
Var zeros_row(std::size_t d) { return Var::param(Tensor::zeros(1, d)); }

}  // namespace

const char* to_string(Pooling p) { return p == Pooling::Mean ? "Mean" : "ClassToken"; }

Pooling pooling_from_string(const std::string& s) {
  if (s == "Mean") return Pooling::Mean;
  if (s == "ClassToken") return Pooling::ClassToken;
  throw ConfigError("unknown pooling '" + s + "'");
}

void EncoderConfig::validate(std::size_t d_model) const {
  if (n_heads == 0 || d_model % n_heads != 0) {
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " + std::to_string(n_heads));
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (positional == PositionalKind::Learned && max_positions == 0) throw ConfigError("max_positions must be > 0");
}

Tensor positional_encoding(std::size_t length, std::size_t d) {
  if (d < 2) throw ShapeError("positional encoding needs d >= 2");
  Tensor pe({length, d});
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; 2 * i < d; ++i) {
      const double angle =
          static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(d));
      pe(pos, 2 * i) = std::sin(angle);
      if (2 * i + 1 < d) pe(pos, 2 * i + 1) = std::cos(angle);
    }
  }
  return pe;
}

BlockParams BlockParams::init(std::size_t d, std::size_t ffn_hidden, Rng& rng) {
  BlockParams p;
  p.wq = Linear::init(d, d, rng);
  p.wk = Linear::init(d, d, rng);
  p.wv = Linear::init(d, d, rng);
  p.wo = Linear::init(d, d, rng);
  p.ln1_gain = ones_row(d);
  p.ln1_bias = zeros_row(d);
  p.ffn_in = Linear::init(d, ffn_hidden, rng);
  p.ffn_out = Linear::init(ffn_hidden, d, rng);
  p.ln2_gain = ones_row(d);
  p.ln2_bias = zeros_row(d);
  return p;
}

void BlockParams::collect(const std::string& prefix, std::vector<NamedParam>& out) const {
  wq.collect(prefix + ".wq", out);
  wk.collect(prefix + ".wk", out);
  wv.collect(prefix + ".wv", out);
  wo.collect(prefix + ".wo", out);
  out.push_back({prefix + ".ln1.gain", ln1_gain});
  out.push_back({prefix + ".ln1.bias", ln1_bias});
  ffn_in.collect(prefix + ".ffn_in", out);
  ffn_out.collect(prefix + ".ffn_out", out);
  out.push_back({prefix + ".ln2.gain", ln2_gain});
  out.push_back({prefix + ".ln2.bias", ln2_bias});
}

EncoderParams EncoderParams::init(const EncoderConfig& cfg, std::size_t d, Rng& rng) {
  cfg.validate(d);
  EncoderParams p;
  for (std::size_t m = 0; m < cfg.m_blocks; ++m) p.blocks.push_back(BlockParams::init(d, cfg.ffn_width(d), rng));
  if (cfg.pooling == Pooling::ClassToken) {
    Tensor tok = rng.normal_tensor(1, d, 0.02);
    round_to_float(tok);
    p.class_token = Var::param(std::move(tok));
  }
  if (cfg.positional == PositionalKind::Learned) {
    Tensor pos = rng.normal_tensor(cfg.max_positions, d, 0.02);
    round_to_float(pos);
    p.pos_embedding = Var::param(std::move(pos));
  }
  if (cfg.norm == NormOrder::Pre) {
    p.final_gain = ones_row(d);
    p.final_bias = zeros_row(d);
  }
  return p;
}

void EncoderParams::collect(const std::string& prefix, std::vector<NamedParam>& out) const {
  for (std::size_t m = 0; m < blocks.size(); ++m) blocks[m].collect(prefix + ".block" + std::to_string(m), out);
  if (class_token.defined()) out.push_back({prefix + ".class_token", class_token});
  if (pos_embedding.defined()) out.push_back({prefix + ".pos_embedding", pos_embedding});
  if (final_gain.defined()) {
    out.push_back({prefix + ".final_ln.gain", final_gain});
    out.push_back({prefix + ".final_ln.bias", final_bias});
  }
}

Var multi_head_self_attention(const BlockParams& p, const Var& x, std::size_t n_heads, const BlockContext& ctx) {
  const std::size_t d = x.cols();
  const std::size_t head_dim = d / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const Var q = p.wq(x);
  const Var k = p.wk(x);
  const Var v = p.wv(x);
  std::vector<Var> heads;
  heads.reserve(n_heads);
  for (std::size_t h = 0; h < n_heads; ++h) {
    const std::size_t lo = h * head_dim, hi = lo + head_dim;
    Var weights = softmax(scale(matmul(slice_cols(q, lo, hi), transpose(slice_cols(k, lo, hi))), inv_sqrt));
    if (ctx.attention_maps) ctx.attention_maps->push_back(weights.value());
    heads.push_back(matmul(weights, slice_cols(v, lo, hi)));
  }
  return p.wo(n_heads == 1 ? heads.front() : concat_cols(heads));
}

Var transformer_block(const BlockParams& p, const Var& x, const EncoderConfig& cfg, const BlockContext& ctx) {
  auto drop = [&](const Var& v) { return ctx.dropout_rng ? dropout(v, cfg.dropout, *ctx.dropout_rng) : v; };
  auto ffn = [&](const Var& v) { return p.ffn_out(relu(p.ffn_in(v))); };
  if (cfg.norm == NormOrder::Post) {
    const Var mid = layernorm(add(drop(multi_head_self_attention(p, x, cfg.n_heads, ctx)), x), p.ln1_gain, p.ln1_bias);
    return layernorm(add(drop(ffn(mid)), mid), p.ln2_gain, p.ln2_bias);
  }
  const Var mid = add(x, drop(multi_head_self_attention(p, layernorm(x, p.ln1_gain, p.ln1_bias), cfg.n_heads, ctx)));
  return add(mid, drop(ffn(layernorm(mid, p.ln2_gain, p.ln2_bias))));
}

Var pool(const Var& encoded, Pooling mode) {
  if (encoded.rows() == 0) throw ShapeError("cannot pool an empty sequence");
  return mode == Pooling::Mean ? mean_rows(encoded) : select_row(encoded, 0);
}

EncoderOutput encode(const EncoderParams& params, const Var& x, const EncoderConfig& cfg, const BlockContext& ctx) {
  const std::size_t t = x.rows();
  const std::size_t d = x.cols();
  cfg.validate(d);
  Var h;
  if (cfg.positional == PositionalKind::Fixed) {
    h = add(x, Var::constant(positional_encoding(t, d)));
  } else {
    if (t > cfg.max_positions) {
      throw ShapeError("sequence of " + std::to_string(t) + " exceeds " + std::to_string(cfg.max_positions) +
                       " learned positions");
    }
    h = add(x, slice_rows(params.pos_embedding, 0, t));
  }
  if (cfg.pooling == Pooling::ClassToken) {
    const std::array<Var, 2> parts{params.class_token, h};
    h = concat_rows(parts);
  }
  for (const auto& block : params.blocks) h = transformer_block(block, h, cfg, ctx);
  if (cfg.norm == NormOrder::Pre) h = layernorm(h, params.final_gain, params.final_bias);
  return {h, pool(h, cfg.pooling)};
}

}  // namespace vstg
