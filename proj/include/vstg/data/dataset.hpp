// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vstg/data/protocol.hpp"
#include "vstg/semantics.hpp"

namespace vstg {

/// Stored visual features of one window: s_enc + s_ant steps of width d_v.
struct FeatureSequence {
  Tensor steps;
  std::string segment_id;
  double target_start_s = 0.0;

  std::size_t dim() const { return steps.cols(); }
  std::size_t length() const { return steps.rows(); }
};

struct Sample {
  std::string segment_id;
  double target_start_s = 0.0;
  std::map<std::string, FeatureSequence> features;  // keyed by modality
  std::size_t obs_label = 0;
  std::size_t target_label = 0;
  std::optional<std::size_t> verb_id;
  std::optional<std::size_t> noun_id;

  const FeatureSequence& modality(const std::string& name) const;
};

/// Which verb and noun every action class belongs to; empty when the
/// dataset has no such decomposition.
struct ActionTaxonomy {
  std::vector<std::size_t> verb_of;
  std::vector<std::size_t> noun_of;

  bool empty() const { return verb_of.empty(); }
  std::size_t num_verbs() const;
  std::size_t num_nouns() const;
};

struct Dataset {
  AnticipationProtocol protocol;
  SemanticMatrix semantic;
  ActionTaxonomy taxonomy;
  std::vector<std::string> modalities;
  std::size_t d_v = 0;
  std::map<std::string, std::vector<Sample>> splits;  // "train", "val", "test"
  /// Free-form metadata (generator config, reference ceilings).
  std::string meta_json = "{}";

  std::size_t num_classes() const { return semantic.num_classes(); }
  const std::vector<Sample>& split(const std::string& name) const;
  /// Checks labels, modalities and window lengths. Throws on the first
  /// inconsistency.
  void validate() const;
};

/// Result of reading an on-disk dataset. Index entries whose windows are
/// shorter than s_enc + s_ant are skipped and counted.
struct LoadReport {
  std::map<std::string, std::size_t> rejected_short;
};

/// On-disk layout under `dir`:
///   dataset.json            manifest (dims, protocol, split index names, taxonomy, meta)
///   semantic.vstg           N x d_s semantic matrix
///   classes.json            class-name list
///   <split>.jsonl           one JSON object per sample
///   features/<split>/<segment_id>.<modality>.vstg
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir, LoadReport* report = nullptr);

SemanticMatrix load_semantic_matrix(const std::filesystem::path& matrix_file,
                                    const std::filesystem::path& class_names_json);

}  // namespace vstg
