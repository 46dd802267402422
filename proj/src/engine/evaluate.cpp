// SPDX-License-Identifier: Apache-2.0
#include "vstg/engine/evaluate.hpp"

#include "vstg/error.hpp"

namespace vstg {
using nlohmann::json;

namespace {

json group_json(const std::optional<GroupMetrics>& g) {
  if (!g) return nullptr;
  return {{"top5", g->top5}, {"mean_top5_recall", g->mean_top5_recall}};
}

GroupMetrics group_metrics(const Tensor& scores, const std::vector<std::size_t>& labels) {
  return {top5_accuracy(scores, labels), mean_top5_recall(scores, labels)};
}

}  // namespace

const HorizonMetrics& EvalReport::at_step(std::size_t n) const {
  for (const auto& h : horizons)
    if (h.step == n) return h;
  throw IndexError("no horizon entry for step " + std::to_string(n));
}

json EvalReport::to_json() const {
  json j;
  j["split"] = split;
  j["n_samples"] = n_samples;
  json hs = json::array();
  for (const auto& h : horizons) {
    hs.push_back({{"step", h.step},
                  {"anticipation_s", h.anticipation_s},
                  {"observed_steps", h.observed_steps},
                  {"top5", h.top5},
                  {"top1", h.top1}});
  }
  j["horizons"] = hs;
  j["selection_step"] = selection_step;
  j["action"] = group_json(action);
  j["verb"] = group_json(verb);
  j["noun"] = group_json(noun);
  return j;
}

std::vector<std::size_t> target_labels(const std::vector<Sample>& samples) {
  std::vector<std::size_t> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.target_label);
  return out;
}

namespace {

Tensor scores_at_step(const Scorer& scorer, const std::vector<Sample>& samples, const std::string& modality,
                      const AnticipationProtocol& protocol, std::size_t n, std::size_t n_classes) {
  protocol.check_step(n);
  Tensor scores = Tensor::zeros(samples.size(), n_classes);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Tensor window = observed_window(samples[i].modality(modality).steps, protocol, n);
    const std::vector<double> row = scorer(samples[i], window, n);
    if (row.size() != n_classes) {
      throw ShapeError("scorer returned " + std::to_string(row.size()) + " scores for " + std::to_string(n_classes) +
                       " classes");
    }
    std::copy(row.begin(), row.end(), scores.row(i).begin());
  }
  return scores;
}

Scorer model_scorer(const Model& model, ForwardTrace* trace) {
  return [&model, trace](const Sample& s, const Tensor& window, std::size_t n) {
    ForwardOptions opts;
    opts.trace = trace;
    return model.forward(window, s.obs_label, n, opts).scores.value().storage();
  };
}

}  // namespace

Tensor predict_scores(const Model& model, const std::vector<Sample>& samples, const std::string& modality,
                      const AnticipationProtocol& protocol, std::size_t n, ForwardTrace* trace) {
  return scores_at_step(model_scorer(model, trace), samples, modality, protocol, n, model.num_classes());
}

double top5_at_step(const Model& model, const std::vector<Sample>& samples, const std::string& modality,
                    const AnticipationProtocol& protocol, std::size_t n) {
  if (samples.empty()) return 0.0;
  const Tensor scores = predict_scores(model, samples, modality, protocol, n);
  return top5_accuracy(scores, target_labels(samples));
}

EvalReport evaluate(const Scorer& scorer, const Dataset& ds, const std::string& split, const std::string& modality) {
  const auto& samples = ds.split(split);
  if (samples.empty()) throw ConfigError("split '" + split + "' is empty");
  const auto labels = target_labels(samples);

  EvalReport r;
  r.split = split;
  r.n_samples = samples.size();
  r.selection_step = ds.protocol.selection_step();
  for (std::size_t n = 1; n <= ds.protocol.s_ant; ++n) {
    const Tensor scores = scores_at_step(scorer, samples, modality, ds.protocol, n, ds.num_classes());
    r.horizons.push_back({n, ds.protocol.anticipation_time(n), ds.protocol.observed_steps(n),
                          top5_accuracy(scores, labels), top_k_accuracy(scores, labels, 1)});
    if (n != r.selection_step) continue;
    r.action = group_metrics(scores, labels);
    if (!ds.taxonomy.empty()) {
      std::vector<std::size_t> verbs, nouns;
      for (const auto& s : samples) {
        verbs.push_back(s.verb_id.value_or(ds.taxonomy.verb_of.at(s.target_label)));
        nouns.push_back(s.noun_id.value_or(ds.taxonomy.noun_of.at(s.target_label)));
      }
      r.verb = group_metrics(marginalize_max(scores, ds.taxonomy.verb_of, ds.taxonomy.num_verbs()), verbs);
      r.noun = group_metrics(marginalize_max(scores, ds.taxonomy.noun_of, ds.taxonomy.num_nouns()), nouns);
    }
  }
  return r;
}

EvalReport evaluate(const Model& model, const Dataset& ds, const std::string& split, const std::string& modality,
                    ForwardTrace* trace) {
  if (ds.d_v != model.d_v() || ds.num_classes() != model.num_classes()) {
    throw ConfigError("model expects d_v = " + std::to_string(model.d_v()) + ", " +
                      std::to_string(model.num_classes()) + " classes; dataset has d_v = " + std::to_string(ds.d_v) +
                      ", " + std::to_string(ds.num_classes()));
  }
  return evaluate(model_scorer(model, trace), ds, split, modality);
}

}  // namespace vstg
