// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "vstg/numcore/autograd.hpp"
#include "vstg/numcore/layers.hpp"

namespace vstg {

/// Per-class semantic embeddings, one row per class id, held as a constant
/// graph leaf so every sample shares the same storage.
class SemanticMatrix {
 public:
  SemanticMatrix() = default;
  SemanticMatrix(Tensor matrix, std::vector<std::string> class_names);

  const Tensor& tensor() const { return matrix_.value(); }
  const Var& var() const { return matrix_; }
  const std::vector<std::string>& class_names() const { return names_; }
  std::size_t num_classes() const { return matrix_.defined() ? matrix_.rows() : 0; }
  std::size_t dim() const { return matrix_.defined() ? matrix_.cols() : 0; }

 private:
  Var matrix_;
  std::vector<std::string> names_;
};

enum class SemanticVariant { GTS, FW, PW, NEI, MLP };

const char* to_string(SemanticVariant v);
SemanticVariant semantic_variant_from_string(const std::string& s);

struct SemGenConfig {
  SemanticVariant variant = SemanticVariant::FW;
  std::size_t top_k = 500;
  std::size_t mlp_hidden = 64;
  /// When false, the estimate is detached from the observation classifier
  /// so only L_obs trains it.
  bool grad_through_estimate = true;

  /// top_k clamped to the class count.
  std::size_t effective_top_k(std::size_t n_classes) const;
};

/// Linear d_v -> N applied to the mean-pooled visual sequence.
struct ObsClassifierParams {
  Linear linear;
};

/// Two-layer perceptron d_v -> hidden -> d_s on the mean-pooled sequence.
struct SemanticMlpParams {
  Linear hidden;
  Linear out;
};

struct ObservationOutput {
  Var logits;  // 1 x N
  Var probs;   // 1 x N, softmax(logits)
};

Var gts_lookup(const SemanticMatrix& s, std::size_t label);
ObservationOutput classify_observation(const ObsClassifierParams& params, const Var& features);
Var estimate_fw(const Var& omega, const SemanticMatrix& s);
Var estimate_pw(const Var& logits, const SemanticMatrix& s, std::size_t top_k);
Var estimate_nei(const Var& logits, const SemanticMatrix& s);
Var estimate_mlp(const SemanticMlpParams& params, const Var& features);

}  // namespace vstg
