// SPDX-License-Identifier: Apache-2.0
#include "vstg/engine/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "vstg/engine/evaluate.hpp"
#include "vstg/error.hpp"

namespace vstg {

SgdMomentum::SgdMomentum(std::vector<NamedParam> params, double lr, double momentum)
    : params_(std::move(params)), lr_(lr), momentum_(momentum) {
  for (const auto& p : params_) velocity_.emplace_back(p.var.shape());
}

void SgdMomentum::step(double grad_scale) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Var& v = params_[i].var;
    if (!v.has_grad()) continue;
    const Tensor& g = v.node()->grad;
    Tensor& vel = velocity_[i];
    Tensor& w = v.mutable_value();
    for (std::size_t j = 0; j < w.size(); ++j) {
      vel[j] = momentum_ * vel[j] + grad_scale * g[j];
      w[j] -= lr_ * vel[j];
    }
  }
}

void SgdMomentum::zero_grad() {
  for (auto& p : params_) p.var.zero_grad();
}

Checkpoint train(const TrainConfig& cfg, const Dataset& ds, const TrainHooks& hooks) {
  cfg.validate();
  const auto& train_set = ds.split(cfg.train_split);
  const auto& val_set = ds.split(cfg.val_split);
  if (train_set.empty()) throw ConfigError("training split '" + cfg.train_split + "' is empty");
  const AnticipationProtocol& protocol = ds.protocol;
  const std::size_t sel = protocol.selection_step();

  Rng root(cfg.seed);
  Rng init_rng = root.fork(1);
  Rng order_rng = root.fork(2);
  Rng horizon_rng = root.fork(3);
  Rng dropout_rng = root.fork(4);

  Model model(cfg.model, ds.d_v, ds.semantic, protocol.s_ant, init_rng);
  auto params = model.named_params();
  SgdMomentum opt(params, cfg.lr, cfg.momentum);

  ForwardOptions opts;
  opts.need_semantic_target = cfg.loss.mode == LossMode::ES;
  opts.dropout_rng = cfg.model.encoder.dropout > 0.0 ? &dropout_rng : nullptr;

  Checkpoint best = make_checkpoint(model, cfg, protocol);
  bool have_best = false;
  std::vector<EpochRecord> history;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> steps;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += cfg.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      opt.zero_grad();
      std::size_t count = 0;
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = train_set[order[k]];
        steps.clear();
        if (cfg.horizons == HorizonPolicy::Uniform) {
          steps.push_back(1 + horizon_rng.below(protocol.s_ant));
        } else {
          for (std::size_t n = 1; n <= protocol.s_ant; ++n) steps.push_back(n);
        }
        for (std::size_t n : steps) {
          const Tensor window = observed_window(s.modality(cfg.modality).steps, protocol, n);
          const ForwardOutput out = model.forward(window, s.obs_label, n, opts);
          const LossValues lv = model.loss(out, s.obs_label, s.target_label, cfg.loss);
          const double total = lv.total.item();
          if (!std::isfinite(total)) {
            std::ostringstream msg;
            msg << "non-finite loss at epoch " << epoch << ", batch " << batch << " (total " << total << ", tgt "
                << lv.tgt << ", obs " << lv.obs << ", cos " << lv.cos << ", mse " << lv.mse << ")";
            throw TrainingError(msg.str());
          }
          lv.total.backward();
          loss_sum += total;
          ++loss_count;
          ++count;
        }
      }
      opt.step(1.0 / static_cast<double>(count));
    }
    for (auto& p : params) round_to_float(p.var.mutable_value());

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(loss_count);
    rec.val_top5 = top5_at_step(model, val_set, cfg.modality, protocol, sel);
    history.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (!have_best || rec.val_top5 > best.val_top5) {
      best = make_checkpoint(model, cfg, protocol);
      best.epoch = epoch;
      best.val_top5 = rec.val_top5;
      have_best = true;
    }
  }
  if (!have_best) best.val_top5 = top5_at_step(model, val_set, cfg.modality, protocol, sel);
  best.history = std::move(history);
  return best;
}

Checkpoint train(const TrainConfig& cfg, const TrainHooks& hooks) {
  if (cfg.dataset_dir.empty()) throw ConfigError("train config has no dataset_dir");
  LoadReport report;
  const Dataset ds = load_dataset(cfg.dataset_dir, &report);
  return train(cfg, ds, hooks);
}

}  // namespace vstg
