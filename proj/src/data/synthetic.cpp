// SPDX-License-Identifier: Apache-2.0
#include "vstg/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "json.hpp"
#include "vstg/error.hpp"
#include "vstg/numcore/layers.hpp"
#include "vstg/numcore/rng.hpp"

namespace vstg {
namespace {

// Sub-stream ids; changing them changes every generated dataset.
constexpr std::uint64_t kSemanticStream = 1;
constexpr std::uint64_t kSuccessorStream = 2;
constexpr std::uint64_t kSplitStream = 10;
constexpr std::uint64_t kPrototypeStream = 100;

std::size_t draw_categorical(const std::vector<double>& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return p.size() - 1;
}

std::string segment_name(const std::string& split, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%06zu", split.c_str(), i);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  protocol.validate();
  if (n_classes < 2) throw ConfigError("synthetic dataset needs n_classes >= 2");
  if (d_v < 1 || d_s < 1) throw ConfigError("synthetic dataset needs d_v >= 1 and d_s >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise_sigma must be finite and >= 0");
  if (!(informativeness >= 0.0 && informativeness <= 1.0)) throw ConfigError("informativeness must lie in [0, 1]");
  if (modalities.empty()) throw ConfigError("synthetic dataset needs at least one modality");
  if (!transition.empty()) {
    if (transition.rank() != 2 || transition.rows() != n_classes || transition.cols() != n_classes) {
      throw ConfigError("transition matrix must be " + std::to_string(n_classes) + "x" + std::to_string(n_classes) +
                        ", got " + shape_str(transition.shape()));
    }
    for (std::size_t r = 0; r < n_classes; ++r) {
      double total = 0.0;
      for (double v : transition.row(r)) {
        if (!(v >= 0.0)) throw ConfigError("transition matrix has a negative entry in row " + std::to_string(r));
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-9) throw ConfigError("transition row " + std::to_string(r) + " does not sum to 1");
    }
  }
}

std::vector<double> target_distribution(const SynthConfig& cfg, const Tensor& transition, std::size_t obs_class) {
  const std::size_t n = cfg.n_classes;
  const double lambda = cfg.informativeness;
  std::vector<double> p(n, (1.0 - lambda) / static_cast<double>(n));
  for (std::size_t t = 0; t < n; ++t) p[t] += lambda * transition(obs_class, t);
  return p;
}

double bayes_ceiling_top1(const SynthConfig& cfg, const Tensor& prototypes, const Tensor& transition,
                          const std::vector<Sample>& samples, const std::string& modality, std::size_t n) {
  if (samples.empty()) return 0.0;
  const std::size_t classes = cfg.n_classes;
  std::vector<std::vector<double>> cond(classes);
  for (std::size_t c = 0; c < classes; ++c) cond[c] = target_distribution(cfg, transition, c);

  double total = 0.0;
  std::vector<double> logpost(classes), post(classes), target(classes);
  for (const auto& s : samples) {
    const Tensor window = observed_window(s.modality(modality).steps, cfg.protocol, n);
    const std::size_t steps = window.rows();
    std::vector<double> mean(window.cols(), 0.0);
    for (std::size_t i = 0; i < steps; ++i)
      for (std::size_t j = 0; j < window.cols(); ++j) mean[j] += window(i, j);
    for (auto& m : mean) m /= static_cast<double>(steps);

    for (std::size_t c = 0; c < classes; ++c) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < mean.size(); ++j) d2 += (mean[j] - prototypes(c, j)) * (mean[j] - prototypes(c, j));
      logpost[c] = -d2;
    }
    std::fill(post.begin(), post.end(), 0.0);
    if (cfg.noise_sigma == 0.0) {
      post[static_cast<std::size_t>(std::max_element(logpost.begin(), logpost.end()) - logpost.begin())] = 1.0;
    } else {
      const double scale = static_cast<double>(steps) / (2.0 * cfg.noise_sigma * cfg.noise_sigma);
      double mx = -INFINITY;
      for (auto& lp : logpost) {
        lp *= scale;
        mx = std::max(mx, lp);
      }
      double z = 0.0;
      for (std::size_t c = 0; c < classes; ++c) z += (post[c] = std::exp(logpost[c] - mx));
      for (auto& p : post) p /= z;
    }
    std::fill(target.begin(), target.end(), 0.0);
    for (std::size_t c = 0; c < classes; ++c)
      if (post[c] > 0.0)
        for (std::size_t t = 0; t < classes; ++t) target[t] += post[c] * cond[c][t];
    total += *std::max_element(target.begin(), target.end());
  }
  return total / static_cast<double>(samples.size());
}

SyntheticDataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_classes;
  const Rng root(cfg.seed);
  SyntheticDataset out;

  for (std::size_t m = 0; m < cfg.modalities.size(); ++m) {
    Rng rng = root.fork(kPrototypeStream + m);
    Tensor protos = rng.normal_tensor(n, cfg.d_v);
    round_to_float(protos);
    out.prototypes.emplace(cfg.modalities[m], std::move(protos));
  }

  {
    Rng rng = root.fork(kSemanticStream);
    const Tensor specific = rng.normal_tensor(n, cfg.d_s);
    const Tensor shared = rng.normal_tensor(1, cfg.d_s);
    Tensor s({n, cfg.d_s});
    const double lambda = cfg.informativeness;
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t j = 0; j < cfg.d_s; ++j) s(c, j) = lambda * specific(c, j) + (1.0 - lambda) * shared[j];
    round_to_float(s);

    const auto verbs = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    std::vector<std::string> names;
    for (std::size_t c = 0; c < n; ++c) {
      out.data.taxonomy.verb_of.push_back(c % verbs);
      out.data.taxonomy.noun_of.push_back(c / verbs);
      names.push_back("verb" + std::to_string(c % verbs) + "_noun" + std::to_string(c / verbs));
    }
    out.data.semantic = SemanticMatrix(std::move(s), std::move(names));
  }

  if (cfg.transition.empty()) {
    Rng rng = root.fork(kSuccessorStream);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    out.transition = Tensor({n, n});
    for (std::size_t c = 0; c < n; ++c) out.transition(c, perm[c]) = 1.0;
  } else {
    out.transition = cfg.transition;
  }
  for (std::size_t c = 0; c < n; ++c) out.successor.push_back(argmax(out.transition.row(c)));

  out.data.protocol = cfg.protocol;
  out.data.modalities = cfg.modalities;
  out.data.d_v = cfg.d_v;

  const std::vector<std::pair<std::string, std::size_t>> splits{
      {"train", cfg.n_train}, {"val", cfg.n_val}, {"test", cfg.n_test}};
  const std::size_t steps = cfg.protocol.total_steps();
  for (std::size_t si = 0; si < splits.size(); ++si) {
    const auto& [name, count] = splits[si];
    Rng rng = root.fork(kSplitStream + si);
    auto& samples = out.data.splits[name];
    samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      Sample s;
      s.segment_id = segment_name(name, i);
      s.target_start_s = static_cast<double>(steps) * cfg.protocol.alpha_s + 10.0 * static_cast<double>(i);
      s.obs_label = static_cast<std::size_t>(rng.below(n));
      s.target_label = draw_categorical(target_distribution(cfg, out.transition, s.obs_label), rng);
      s.verb_id = out.data.taxonomy.verb_of[s.target_label];
      s.noun_id = out.data.taxonomy.noun_of[s.target_label];
      for (const auto& mod : cfg.modalities) {
        const Tensor& protos = out.prototypes.at(mod);
        Tensor f({steps, cfg.d_v});
        for (std::size_t t = 0; t < steps; ++t)
          for (std::size_t j = 0; j < cfg.d_v; ++j) f(t, j) = protos(s.obs_label, j) + cfg.noise_sigma * rng.normal();
        round_to_float(f);
        s.features.emplace(mod, FeatureSequence{std::move(f), s.segment_id, s.target_start_s});
      }
      samples.push_back(std::move(s));
    }
  }

  out.bayes_ceiling_top1 = bayes_ceiling_top1(cfg, out.prototypes.at(cfg.modalities.front()), out.transition,
                                              out.data.splits.at("val"), cfg.modalities.front(),
                                              cfg.protocol.selection_step());

  nlohmann::json meta;
  meta["generator"] = "synthetic-action-grammar";
  meta["seed"] = cfg.seed;
  meta["n_classes"] = cfg.n_classes;
  meta["noise_sigma"] = cfg.noise_sigma;
  meta["informativeness"] = cfg.informativeness;
  meta["successor"] = out.successor;
  meta["bayes_ceiling_top1_val"] = out.bayes_ceiling_top1;
  out.data.meta_json = meta.dump();
  out.data.validate();
  return out;
}

}  // namespace vstg
