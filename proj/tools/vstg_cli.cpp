// SPDX-License-Identifier: Apache-2.0
// vstg: synth / train / eval / ablate front end.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vstg/engine/ablate.hpp"
#include "vstg/engine/evaluate.hpp"
#include "vstg/engine/trainer.hpp"
#include "vstg/error.hpp"

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw vstg::ConfigError("cannot write " + path);
  os << text;
}

void report_error(const std::string& command, const std::string& kind, const std::string& message) {
  const json err = {{"error", {{"command", command}, {"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
}

int run_synth(const std::string& config, const std::string& out) {
  const vstg::SynthConfig cfg = vstg::synth_config_from_json(vstg::read_json_file(config));
  const vstg::SyntheticDataset synth = vstg::generate_synthetic(cfg);
  vstg::save_dataset(synth.data, out);
  std::cout << json{{"dataset", out},
                    {"n_classes", cfg.n_classes},
                    {"splits", {{"train", cfg.n_train}, {"val", cfg.n_val}, {"test", cfg.n_test}}},
                    {"bayes_ceiling_top1_val", synth.bayes_ceiling_top1}}
                   .dump()
            << '\n';
  return 0;
}

int run_train(const std::string& config, const std::string& dataset, const std::string& out, bool quiet) {
  json j = vstg::read_json_file(config);
  if (!dataset.empty()) j["dataset_dir"] = dataset;
  const vstg::TrainConfig cfg = vstg::train_config_from_json(j);
  vstg::TrainHooks hooks;
  if (!quiet) {
    hooks.on_epoch = [](const vstg::EpochRecord& r) {
      std::printf("epoch %3zu  loss %.6f  val top5@1s %.4f\n", r.epoch, r.train_loss, r.val_top5);
      std::fflush(stdout);
    };
  }
  const vstg::Checkpoint ckpt = vstg::train(cfg, hooks);
  vstg::save_checkpoint(ckpt, out);
  std::cout << json{{"checkpoint", out}, {"best_epoch", ckpt.epoch}, {"val_top5", ckpt.val_top5}}.dump() << '\n';
  return 0;
}

int run_eval(const std::string& checkpoint, const std::string& dataset, const std::string& split,
             const std::string& out) {
  const vstg::Checkpoint ckpt = vstg::load_checkpoint(checkpoint);
  const std::string dir = dataset.empty() ? ckpt.config.dataset_dir : dataset;
  if (dir.empty()) throw vstg::ConfigError("no dataset given and the checkpoint records none");
  const vstg::Dataset ds = vstg::load_dataset(dir);
  const vstg::Model model = vstg::restore_model(ckpt, ds);
  const vstg::EvalReport report = vstg::evaluate(model, ds, split, ckpt.config.modality);
  write_text(out, report.to_json().dump(2) + "\n");
  return 0;
}

int run_ablate(const std::string& grid_path, const std::string& out, const std::string& text_out) {
  const vstg::AblationGrid grid = vstg::ablation_grid_from_json(vstg::read_json_file(grid_path));
  const vstg::AblationTable table = vstg::ablate(grid);
  write_text(out, table.to_json().dump(2) + "\n");
  if (!text_out.empty()) write_text(text_out, table.render());
  else if (!out.empty() && out != "-") std::cout << table.render();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual-semantic transformer action anticipation"};
  app.require_subcommand(1);

  std::string synth_config, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("-c,--config", synth_config, "SynthConfig JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("-o,--out", synth_out, "Dataset directory")->required();

  std::string train_config, train_dataset, train_out;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train a model and write the best checkpoint");
  train->add_option("-c,--config", train_config, "TrainConfig JSON")->required()->check(CLI::ExistingFile);
  train->add_option("-d,--dataset", train_dataset, "Dataset directory (overrides dataset_dir)");
  train->add_option("-o,--out", train_out, "Checkpoint directory")->required();
  train->add_flag("-q,--quiet", quiet, "No per-epoch log");

  std::string eval_ckpt, eval_dataset, eval_split = "val", eval_out;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint at every horizon");
  eval->add_option("-k,--checkpoint", eval_ckpt, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("-d,--dataset", eval_dataset, "Dataset directory (defaults to the training one)");
  eval->add_option("-s,--split", eval_split, "Split name")->capture_default_str();
  eval->add_option("-o,--out", eval_out, "Report JSON path (stdout if omitted)");

  std::string grid_path, ablate_out, ablate_text;
  auto* ablate = app.add_subcommand("ablate", "Train one model per grid cell and seed");
  ablate->add_option("-g,--grid", grid_path, "Grid JSON")->required()->check(CLI::ExistingFile);
  ablate->add_option("-o,--out", ablate_out, "Table JSON path (stdout if omitted)");
  ablate->add_option("-t,--text", ablate_text, "Plain-text table path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name(), "usage_error",
                 e.what());
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*synth) return run_synth(synth_config, synth_out);
    if (*train) return run_train(train_config, train_dataset, train_out, quiet);
    if (*eval) return run_eval(eval_ckpt, eval_dataset, eval_split, eval_out);
    return run_ablate(grid_path, ablate_out, ablate_text);
  } catch (const vstg::Error& e) {
    report_error(command, e.kind(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(command, "io_error", e.what());
  } catch (const std::exception& e) {
    report_error(command, "internal_error", e.what());
  }
  return 1;
}
