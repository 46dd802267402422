// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "vstg/numcore/layers.hpp"

namespace vstg {

enum class Pooling { Mean, ClassToken };
enum class NormOrder { Post, Pre };
enum class PositionalKind { Fixed, Learned };

const char* to_string(Pooling p);
Pooling pooling_from_string(const std::string& s);

struct EncoderConfig {
  std::size_t m_blocks = 1;
  std::size_t n_heads = 4;
  std::size_t ffn_hidden = 0;  // 0 selects 4 * d_model
  Pooling pooling = Pooling::Mean;
  double dropout = 0.0;
  /// Pre + Learned is the ViT-style comparison row; Post + Fixed is the
  /// default path.
  NormOrder norm = NormOrder::Post;
  PositionalKind positional = PositionalKind::Fixed;
  std::size_t max_positions = 16;  // Learned embeddings only

  std::size_t ffn_width(std::size_t d_model) const { return ffn_hidden ? ffn_hidden : 4 * d_model; }
  void validate(std::size_t d_model) const;
};

/// Fixed sinusoid table: PE(pos, 2i) = sin(pos / 10000^(2i/d)),
/// PE(pos, 2i+1) = cos(pos / 10000^(2i/d)).
Tensor positional_encoding(std::size_t length, std::size_t d);

struct BlockParams {
  Linear wq, wk, wv, wo;
  Var ln1_gain, ln1_bias;
  Linear ffn_in, ffn_out;
  Var ln2_gain, ln2_bias;

  static BlockParams init(std::size_t d_model, std::size_t ffn_hidden, Rng& rng);
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;
};

struct EncoderParams {
  std::vector<BlockParams> blocks;
  Var class_token;    // 1 x d, ClassToken pooling only
  Var pos_embedding;  // max_positions x d, Learned positional only
  Var final_gain, final_bias;  // Pre-Norm only

  static EncoderParams init(const EncoderConfig& cfg, std::size_t d_model, Rng& rng);
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;
};

struct BlockContext {
  Rng* dropout_rng = nullptr;  // null disables dropout (evaluation)
  /// When set, receives one T x T row-stochastic matrix per head.
  std::vector<Tensor>* attention_maps = nullptr;
};

Var multi_head_self_attention(const BlockParams& p, const Var& x, std::size_t n_heads, const BlockContext& ctx = {});

/// Post-Norm: X' = LN(MHSA(X) + X), then LN(FFN(X') + X').
/// Pre-Norm:  X' = X + MHSA(LN(X)), then X' + FFN(LN(X')).
Var transformer_block(const BlockParams& p, const Var& x, const EncoderConfig& cfg, const BlockContext& ctx = {});

Var pool(const Var& encoded, Pooling mode);

struct EncoderOutput {
  Var tokens;   // encoded sequence (class token first when used)
  Var summary;  // 1 x d
};

/// Adds positional information, prepends the class token when pooling by
/// it, runs the blocks and pools.
EncoderOutput encode(const EncoderParams& params, const Var& x, const EncoderConfig& cfg, const BlockContext& ctx = {});

}  // namespace vstg
