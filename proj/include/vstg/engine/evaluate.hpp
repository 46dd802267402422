// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vstg/data/dataset.hpp"
#include "vstg/engine/model.hpp"

namespace vstg {

struct HorizonMetrics {
  std::size_t step = 0;
  double anticipation_s = 0.0;
  std::size_t observed_steps = 0;
  double top5 = 0.0;
  double top1 = 0.0;
};

struct GroupMetrics {
  double top5 = 0.0;
  double mean_top5_recall = 0.0;
};

struct EvalReport {
  std::string split;
  std::size_t n_samples = 0;
  std::vector<HorizonMetrics> horizons;  // one per step, in order
  std::size_t selection_step = 0;
  GroupMetrics action;
  std::optional<GroupMetrics> verb, noun;  // present with a verb/noun taxonomy

  const HorizonMetrics& at_step(std::size_t n) const;
  nlohmann::json to_json() const;
};

/// B x N target logits for every sample at step n.
Tensor predict_scores(const Model& model, const std::vector<Sample>& samples, const std::string& modality,
                      const AnticipationProtocol& protocol, std::size_t n, ForwardTrace* trace = nullptr);

std::vector<std::size_t> target_labels(const std::vector<Sample>& samples);

/// Top-5 at step n only; used for epoch selection.
double top5_at_step(const Model& model, const std::vector<Sample>& samples, const std::string& modality,
                    const AnticipationProtocol& protocol, std::size_t n);

/// Scores one sample at step n from its observed window (observed_steps(n)
/// rows); returns N class scores.
using Scorer = std::function<std::vector<double>(const Sample& sample, const Tensor& window, std::size_t n)>;

EvalReport evaluate(const Scorer& scorer, const Dataset& ds, const std::string& split, const std::string& modality);
EvalReport evaluate(const Model& model, const Dataset& ds, const std::string& split, const std::string& modality,
                    ForwardTrace* trace = nullptr);

}  // namespace vstg
