// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vstg/data/synthetic.hpp"

namespace vstg {

struct AblationCell {
  std::string name;
  nlohmann::json overrides = nlohmann::json::object();  // merge patch over the base TrainConfig
};

struct AblationGrid {
  nlohmann::json base = nlohmann::json::object();
  std::vector<AblationCell> cells;
  std::vector<std::uint64_t> seeds{0};
  /// When set, a dataset is generated per seed (with that seed) and shared
  /// by every cell; otherwise base.dataset_dir is loaded once.
  std::optional<SynthConfig> synth;
  std::size_t workers = 1;
};

AblationGrid ablation_grid_from_json(const nlohmann::json& j);

struct AblationRow {
  std::string name;
  std::vector<std::optional<double>> top5;  // per seed; empty on failure
  std::vector<std::string> errors;
  /// Median over successful seeds; nullopt when every seed failed.
  std::optional<double> median() const;
  std::size_t wins_over(const AblationRow& other) const;
};

struct AblationTable {
  std::vector<std::uint64_t> seeds;
  std::vector<AblationRow> rows;

  const AblationRow& row(const std::string& name) const;
  nlohmann::json to_json() const;
  std::string render() const;
};

/// Trains one model per (cell, seed); the seed also sets TrainConfig::seed.
/// A failing cell records its error and the grid continues.
AblationTable ablate(const AblationGrid& grid);

}  // namespace vstg
