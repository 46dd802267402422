// SPDX-License-Identifier: Apache-2.0
#include "vstg/objective.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <map>

#include "vstg/error.hpp"
#include "vstg/numcore/ops.hpp"

namespace vstg {
namespace {

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("label smoothing theta must lie in [0, 1]");
}

void check_scores(const Tensor& scores, std::span<const std::size_t> labels) {
  if (scores.rows() != labels.size() || (scores.rank() == 2 && scores.shape()[0] != labels.size())) {
    throw ShapeError("scores " + shape_str(scores.shape()) + " vs " + std::to_string(labels.size()) + " labels");
  }
  for (std::size_t l : labels)
    if (l >= scores.cols()) throw IndexError("label " + std::to_string(l) + " outside [0, " + std::to_string(scores.cols()) + ")");
}

}  // namespace

const char* to_string(LossMode m) { return m == LossMode::GTS ? "GTS" : "ES"; }

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "GTS") return LossMode::GTS;
  if (s == "ES") return LossMode::ES;
  throw ConfigError("unknown loss mode '" + s + "'");
}

LossConfig LossConfig::epic_kitchens() { return {0.1, 2.1, 1.0, 1.0, LossMode::ES}; }
LossConfig LossConfig::egtea_gaze() { return {0.1, 2.9, 1.0, 1.1, LossMode::ES}; }

void LossConfig::validate() const {
  check_theta(theta);
  if (!(a >= 0.0 && b >= 0.0 && c >= 0.0)) throw ConfigError("loss weights a, b, c must be >= 0");
}

double ce_label_smooth(std::span<const double> probs, std::size_t true_class, double theta) {
  check_theta(theta);
  if (true_class >= probs.size()) throw IndexError("true class outside the probability vector");
  const double n = static_cast<double>(probs.size());
  double log_sum = 0.0;
  for (double p : probs) log_sum += std::log(std::max(p, kProbabilityFloor));
  return -(1.0 - theta) * std::log(std::max(probs[true_class], kProbabilityFloor)) - theta / n * log_sum;
}

Var ce_label_smooth(const Var& logits, std::size_t true_class, double theta) {
  check_theta(theta);
  const Tensor& x = logits.value();
  const std::size_t n = x.size();
  if (true_class >= n) throw IndexError("true class " + std::to_string(true_class) + " outside [0, " + std::to_string(n) + ")");
  const double log_floor = std::log(kProbabilityFloor);
  const double mx = *std::max_element(x.storage().begin(), x.storage().end());
  double z = 0.0;
  for (double v : x.storage()) z += std::exp(v - mx);
  const double lse = mx + std::log(z);

  std::vector<double> probs(n), coeff(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double logp = x[i] - lse;
    probs[i] = std::exp(logp);
    const double w = (i == true_class ? 1.0 - theta : 0.0) + theta / static_cast<double>(n);
    const bool clamped = logp < log_floor;
    loss -= w * (clamped ? log_floor : logp);
    coeff[i] = clamped ? 0.0 : -w;
  }
  return Var::make(Tensor({1, 1}, loss), {logits},
                   [probs = std::move(probs), coeff = std::move(coeff)](Node& self) {
    Tensor& g = self.parents[0]->grad_buffer();
    double total = 0.0;
    for (double c : coeff) total += c;
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += self.grad[0] * (coeff[j] - probs[j] * total);
  });
}

Var cos_loss(const Var& s_hat, const Var& s) {
  if (s_hat.value().size() != s.value().size()) {
    throw ShapeError("cos_loss: " + shape_str(s_hat.shape()) + " vs " + shape_str(s.shape()));
  }
  const auto& a = s_hat.value().storage();
  const auto& b = s.value().storage();
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na == 0.0 || nb == 0.0) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) std::clog << "vstg: cos_loss on a zero vector; using loss 1 with zero gradient\n";
    return Var::constant(Tensor({1, 1}, 1.0));
  }
  const double cosine = dot / (na * nb);
  return Var::make(Tensor({1, 1}, 1.0 - cosine), {s_hat, s}, [na, nb, cosine](Node& self) {
    const double g = self.grad[0];
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    // d cos / d a = b / (|a||b|) - cos * a / |a|^2
    if (pa.requires_grad) {
      Tensor& ga = pa.grad_buffer();
      for (std::size_t i = 0; i < ga.size(); ++i)
        ga[i] -= g * (pb.value[i] / (na * nb) - cosine * pa.value[i] / (na * na));
    }
    if (pb.requires_grad) {
      Tensor& gb = pb.grad_buffer();
      for (std::size_t i = 0; i < gb.size(); ++i)
        gb[i] -= g * (pa.value[i] / (na * nb) - cosine * pb.value[i] / (nb * nb));
    }
  });
}

Var mse_loss(const Var& s_hat, const Var& s) {
  if (s_hat.value().size() != s.value().size()) {
    throw ShapeError("mse_loss: " + shape_str(s_hat.shape()) + " vs " + shape_str(s.shape()));
  }
  const Var diff = sub(s_hat, s);
  return sum(mul(diff, diff));
}

Var total_loss(const LossConfig& cfg, const LossParts& parts) {
  cfg.validate();
  if (!parts.tgt.defined()) throw ConfigError("total_loss needs L_tgt");
  if (cfg.mode == LossMode::GTS) return parts.tgt;
  if (!parts.obs.defined() || !parts.cos.defined() || !parts.mse.defined()) {
    throw ConfigError("ES mode needs all of L_tgt, L_obs, L_cos and L_mse");
  }
  Var total = parts.tgt;
  total = add(total, scale(parts.obs, cfg.a));
  total = add(total, scale(parts.cos, cfg.b));
  total = add(total, scale(parts.mse, cfg.c));
  return total;
}

bool in_top_k(std::span<const double> scores, std::size_t label, std::size_t k) {
  const double ref = scores[label];
  std::size_t rank = 0;
  for (std::size_t j = 0; j < scores.size(); ++j)
    if (scores[j] > ref || (scores[j] == ref && j < label)) ++rank;
  return rank < k;
}

double top_k_accuracy(const Tensor& scores, std::span<const std::size_t> labels, std::size_t k) {
  check_scores(scores, labels);
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += in_top_k(scores.row(i), labels[i], k) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double top5_accuracy(const Tensor& scores, std::span<const std::size_t> labels) {
  return top_k_accuracy(scores, labels, 5);
}

double mean_top_k_recall(const Tensor& scores, std::span<const std::size_t> labels, std::size_t k) {
  check_scores(scores, labels);
  if (labels.empty()) throw ConfigError("mean top-k recall of an empty batch");
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> per_class;  // hits, count
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& [hits, count] = per_class[labels[i]];
    hits += in_top_k(scores.row(i), labels[i], k) ? 1 : 0;
    ++count;
  }
  double total = 0.0;
  for (const auto& [cls, hc] : per_class) total += static_cast<double>(hc.first) / static_cast<double>(hc.second);
  return total / static_cast<double>(per_class.size());
}

double mean_top5_recall(const Tensor& scores, std::span<const std::size_t> labels) {
  return mean_top_k_recall(scores, labels, 5);
}

Tensor marginalize_max(const Tensor& scores, std::span<const std::size_t> group_of, std::size_t n_groups) {
  if (group_of.size() != scores.cols()) {
    throw ShapeError("group map covers " + std::to_string(group_of.size()) + " of " + std::to_string(scores.cols()) + " classes");
  }
  Tensor out = Tensor::full(scores.rows(), n_groups, -INFINITY);
  for (std::size_t i = 0; i < scores.rows(); ++i)
    for (std::size_t c = 0; c < scores.cols(); ++c) out(i, group_of[c]) = std::max(out(i, group_of[c]), scores(i, c));
  return out;
}

Tensor late_fuse(const Tensor& scores_a, const Tensor& scores_b, const LateFusionWeights& w) {
  if (scores_a.shape() != scores_b.shape()) {
    throw ShapeError("late_fuse: " + shape_str(scores_a.shape()) + " vs " + shape_str(scores_b.shape()));
  }
  Tensor out(scores_a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w.w_a * scores_a[i] + w.w_b * scores_b[i];
  return out;
}

LateFusionWeights fit_late_fusion(const Tensor& scores_a, const Tensor& scores_b, std::span<const std::size_t> labels,
                                  const LateFusionFit& fit) {
  check_scores(scores_a, labels);
  check_scores(scores_b, labels);
  if (labels.empty()) throw ConfigError("late fusion needs at least one validation sample");
  LateFusionWeights w;
  double va = 0.0, vb = 0.0;
  const double inv_b = 1.0 / static_cast<double>(labels.size());
  for (std::size_t it = 0; it < fit.iterations; ++it) {
    const Tensor p = softmax(late_fuse(scores_a, scores_b, w));
    double ga = 0.0, gb = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
      for (std::size_t j = 0; j < p.cols(); ++j) {
        const double d = (p(i, j) - (j == labels[i] ? 1.0 : 0.0)) * inv_b;
        ga += d * scores_a(i, j);
        gb += d * scores_b(i, j);
      }
    }
    va = fit.momentum * va + ga;
    vb = fit.momentum * vb + gb;
    w.w_a -= fit.lr * va;
    w.w_b -= fit.lr * vb;
  }
  return w;
}

}  // namespace vstg
