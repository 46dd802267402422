// SPDX-License-Identifier: Apache-2.0
#include "vstg/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "vstg/data/feature_file.hpp"
#include "vstg/error.hpp"

namespace vstg {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw FormatError("cannot open " + p.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw FormatError("cannot open " + p.string() + " for writing");
  os << j.dump(2) << "\n";
}

}  // namespace

const FeatureSequence& Sample::modality(const std::string& name) const {
  auto it = features.find(name);
  if (it == features.end()) throw ConfigError("sample " + segment_id + " has no modality '" + name + "'");
  return it->second;
}

std::size_t ActionTaxonomy::num_verbs() const {
  return verb_of.empty() ? 0 : *std::max_element(verb_of.begin(), verb_of.end()) + 1;
}

std::size_t ActionTaxonomy::num_nouns() const {
  return noun_of.empty() ? 0 : *std::max_element(noun_of.begin(), noun_of.end()) + 1;
}

const std::vector<Sample>& Dataset::split(const std::string& name) const {
  auto it = splits.find(name);
  if (it == splits.end()) throw ConfigError("dataset has no split '" + name + "'");
  return it->second;
}

void Dataset::validate() const {
  protocol.validate();
  const std::size_t n = num_classes();
  if (n < 2) throw ConfigError("dataset needs a semantic matrix with at least 2 classes");
  if (!taxonomy.empty() && (taxonomy.verb_of.size() != n || taxonomy.noun_of.size() != n)) {
    throw ConfigError("action taxonomy does not cover all " + std::to_string(n) + " classes");
  }
  for (const auto& [name, samples] : splits) {
    for (const auto& s : samples) {
      if (s.obs_label >= n || s.target_label >= n) {
        throw IndexError("sample " + s.segment_id + " in split " + name + " has a label outside [0, " +
                         std::to_string(n) + ")");
      }
      for (const auto& m : modalities) {
        const auto& f = s.modality(m);
        if (f.length() != protocol.total_steps() || f.dim() != d_v) {
          throw ShapeError("sample " + s.segment_id + " modality " + m + " has shape " +
                           shape_str(f.steps.shape()) + ", expected [" + std::to_string(protocol.total_steps()) +
                           "x" + std::to_string(d_v) + "]");
        }
      }
    }
  }
}

SemanticMatrix load_semantic_matrix(const fs::path& matrix_file, const fs::path& class_names_json) {
  Tensor m = read_feature_file(matrix_file);
  std::vector<std::string> names;
  if (!class_names_json.empty()) names = read_json(class_names_json).get<std::vector<std::string>>();
  return SemanticMatrix(std::move(m), std::move(names));
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  write_feature_file(dir / "semantic.vstg", ds.semantic.tensor());
  write_json(dir / "classes.json", ds.semantic.class_names());

  json manifest;
  manifest["format"] = "vstg-dataset";
  manifest["d_v"] = ds.d_v;
  manifest["d_s"] = ds.semantic.dim();
  manifest["n_classes"] = ds.num_classes();
  manifest["modalities"] = ds.modalities;
  manifest["protocol"] = {{"s_enc", ds.protocol.s_enc}, {"s_ant", ds.protocol.s_ant}, {"alpha_s", ds.protocol.alpha_s}};
  manifest["semantic"] = "semantic.vstg";
  manifest["class_names"] = "classes.json";
  if (!ds.taxonomy.empty()) {
    manifest["action_verb"] = ds.taxonomy.verb_of;
    manifest["action_noun"] = ds.taxonomy.noun_of;
  }
  manifest["meta"] = json::parse(ds.meta_json);
  json split_files = json::object();

  for (const auto& [name, samples] : ds.splits) {
    const fs::path feat_dir = dir / "features" / name;
    fs::create_directories(feat_dir);
    const std::string index_name = name + ".jsonl";
    split_files[name] = index_name;
    std::ofstream index(dir / index_name, std::ios::trunc);
    if (!index) throw FormatError("cannot write index for split " + name);
    for (const auto& s : samples) {
      json line;
      line["segment_id"] = s.segment_id;
      json paths = json::object();
      for (const auto& [mod, seq] : s.features) {
        const fs::path rel = fs::path("features") / name / (s.segment_id + "." + mod + ".vstg");
        write_feature_file(dir / rel, seq.steps);
        paths[mod] = rel.generic_string();
      }
      line["features"] = paths;
      line["obs_label"] = s.obs_label;
      line["target_label"] = s.target_label;
      line["verb_id"] = s.verb_id ? json(*s.verb_id) : json(nullptr);
      line["noun_id"] = s.noun_id ? json(*s.noun_id) : json(nullptr);
      line["target_start_s"] = s.target_start_s;
      index << line.dump() << "\n";
    }
  }
  manifest["splits"] = split_files;
  write_json(dir / "dataset.json", manifest);
}

Dataset load_dataset(const fs::path& dir, LoadReport* report) {
  const json manifest = read_json(dir / "dataset.json");
  Dataset ds;
  try {
    ds.d_v = manifest.at("d_v").get<std::size_t>();
    ds.modalities = manifest.at("modalities").get<std::vector<std::string>>();
    const auto& p = manifest.at("protocol");
    ds.protocol = {p.at("s_enc").get<std::size_t>(), p.at("s_ant").get<std::size_t>(), p.at("alpha_s").get<double>()};
    ds.semantic = load_semantic_matrix(dir / manifest.at("semantic").get<std::string>(),
                                       dir / manifest.value("class_names", std::string("classes.json")));
    if (manifest.contains("action_verb")) {
      ds.taxonomy.verb_of = manifest.at("action_verb").get<std::vector<std::size_t>>();
      ds.taxonomy.noun_of = manifest.at("action_noun").get<std::vector<std::size_t>>();
    }
    if (manifest.contains("meta")) ds.meta_json = manifest.at("meta").dump();

    for (const auto& [name, index_file] : manifest.at("splits").items()) {
      std::ifstream index(dir / index_file.get<std::string>());
      if (!index) throw FormatError("cannot open index " + index_file.get<std::string>());
      auto& samples = ds.splits[name];
      std::size_t rejected = 0;
      std::string text;
      std::size_t line_no = 0;
      while (std::getline(index, text)) {
        ++line_no;
        if (text.empty()) continue;
        json line;
        try {
          line = json::parse(text);
        } catch (const json::exception& e) {
          throw FormatError(index_file.get<std::string>() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        Sample s;
        s.segment_id = line.at("segment_id").get<std::string>();
        s.target_start_s = line.value("target_start_s", 0.0);
        s.obs_label = line.at("obs_label").get<std::size_t>();
        s.target_label = line.at("target_label").get<std::size_t>();
        if (line.contains("verb_id") && !line["verb_id"].is_null()) s.verb_id = line["verb_id"].get<std::size_t>();
        if (line.contains("noun_id") && !line["noun_id"].is_null()) s.noun_id = line["noun_id"].get<std::size_t>();
        bool too_short = false;
        for (const auto& [mod, rel] : line.at("features").items()) {
          FeatureSequence seq{read_feature_file(dir / rel.get<std::string>()), s.segment_id, s.target_start_s};
          if (seq.length() < ds.protocol.total_steps()) too_short = true;
          // Longer windows keep the steps closest to the target start.
          if (seq.length() > ds.protocol.total_steps()) {
            seq.steps = seq.steps.slice_rows(seq.length() - ds.protocol.total_steps(), seq.length());
          }
          s.features.emplace(mod, std::move(seq));
        }
        if (too_short) {
          ++rejected;
          continue;
        }
        samples.push_back(std::move(s));
      }
      if (rejected > 0) {
        std::clog << "vstg: skipped " << rejected << " sample(s) shorter than " << ds.protocol.total_steps()
                  << " steps in split " << name << "\n";
      }
      if (report) report->rejected_short[name] = rejected;
    }
  } catch (const json::exception& e) {
    throw FormatError((dir / "dataset.json").string() + ": " + e.what());
  }
  ds.validate();
  return ds;
}

}  // namespace vstg
