// SPDX-License-Identifier: Apache-2.0
#include "vstg/semantics.hpp"

#include <algorithm>

#include "vstg/error.hpp"

namespace vstg {
namespace {

void require_features(const Var& features) {
  if (!features.defined() || features.rows() == 0) {
    throw ProtocolError("semantic estimation needs a non-empty feature sequence");
  }
}

void require_omega(const Var& w, const SemanticMatrix& s) {
  if (w.value().size() != s.num_classes()) {
    throw ShapeError("class weights " + shape_str(w.shape()) + " do not match semantic matrix " +
                     shape_str(s.tensor().shape()));
  }
}

}  // namespace

SemanticMatrix::SemanticMatrix(Tensor matrix, std::vector<std::string> class_names)
    : names_(std::move(class_names)) {
  if (matrix.rank() != 2) throw ShapeError("semantic matrix must be rank 2, got " + shape_str(matrix.shape()));
  if (matrix.rows() < 2) throw ConfigError("semantic matrix needs at least 2 classes");
  if (!matrix.all_finite()) throw NumericError("semantic matrix has non-finite entries");
  if (names_.empty()) {
    for (std::size_t i = 0; i < matrix.rows(); ++i) names_.push_back("class_" + std::to_string(i));
  }
  if (names_.size() != matrix.rows()) {
    throw ConfigError(std::to_string(names_.size()) + " class names for " + std::to_string(matrix.rows()) + " rows");
  }
  matrix_ = Var::constant(std::move(matrix));
}

const char* to_string(SemanticVariant v) {
  switch (v) {
    case SemanticVariant::GTS: return "GTS";
    case SemanticVariant::FW: return "FW";
    case SemanticVariant::PW: return "PW";
    case SemanticVariant::NEI: return "NEI";
    case SemanticVariant::MLP: return "MLP";
  }
  return "?";
}

SemanticVariant semantic_variant_from_string(const std::string& s) {
  for (auto v : {SemanticVariant::GTS, SemanticVariant::FW, SemanticVariant::PW, SemanticVariant::NEI,
                 SemanticVariant::MLP}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown semantic variant '" + s + "'");
}

std::size_t SemGenConfig::effective_top_k(std::size_t n_classes) const {
  return std::clamp<std::size_t>(top_k, 1, n_classes);
}

Var gts_lookup(const SemanticMatrix& s, std::size_t label) {
  if (label >= s.num_classes()) {
    throw IndexError("label " + std::to_string(label) + " outside [0, " + std::to_string(s.num_classes()) + ")");
  }
  return select_row(s.var(), label);
}

ObservationOutput classify_observation(const ObsClassifierParams& params, const Var& features) {
  require_features(features);
  Var logits = params.linear(mean_rows(features));
  Var probs = softmax(logits);
  return {logits, probs};
}

Var estimate_fw(const Var& omega, const SemanticMatrix& s) {
  require_omega(omega, s);
  return matmul(omega, s.var());
}

Var estimate_pw(const Var& logits, const SemanticMatrix& s, std::size_t top_k) {
  require_omega(logits, s);
  return matmul(topk_softmax(logits, top_k), s.var());
}

Var estimate_nei(const Var& logits, const SemanticMatrix& s) {
  require_omega(logits, s);
  return select_row(s.var(), argmax(logits.value().data()));
}

Var estimate_mlp(const SemanticMlpParams& params, const Var& features) {
  require_features(features);
  return params.out(relu(params.hidden(mean_rows(features))));
}

}  // namespace vstg
