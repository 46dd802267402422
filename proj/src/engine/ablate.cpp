// SPDX-License-Identifier: Apache-2.0
#include "vstg/engine/ablate.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "vstg/engine/trainer.hpp"
#include "vstg/error.hpp"

namespace vstg {
using nlohmann::json;

AblationGrid ablation_grid_from_json(const json& j) {
  try {
    AblationGrid g;
    if (j.contains("base")) g.base = j.at("base");
    for (const auto& c : j.at("cells")) {
      AblationCell cell;
      cell.name = c.at("name").get<std::string>();
      if (c.contains("overrides")) cell.overrides = c.at("overrides");
      g.cells.push_back(std::move(cell));
    }
    if (g.cells.empty()) throw ConfigError("ablation grid has no cells");
    if (j.contains("seeds")) g.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (g.seeds.empty()) throw ConfigError("ablation grid has no seeds");
    if (j.contains("synth") && !j.at("synth").is_null()) g.synth = synth_config_from_json(j.at("synth"));
    if (j.contains("workers")) g.workers = std::max<std::size_t>(1, j.at("workers").get<std::size_t>());
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("ablation grid: ") + e.what());
  }
}

std::optional<double> AblationRow::median() const {
  std::vector<double> v;
  for (const auto& x : top5)
    if (x) v.push_back(*x);
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::size_t AblationRow::wins_over(const AblationRow& other) const {
  std::size_t wins = 0;
  for (std::size_t i = 0; i < std::min(top5.size(), other.top5.size()); ++i)
    if (top5[i] && other.top5[i] && *top5[i] > *other.top5[i]) ++wins;
  return wins;
}

const AblationRow& AblationTable::row(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  throw IndexError("no ablation row named '" + name + "'");
}

json AblationTable::to_json() const {
  json j;
  j["metric"] = "val_top5_at_1s";
  j["seeds"] = seeds;
  json rs = json::array();
  for (const auto& r : rows) {
    json top5 = json::array();
    for (const auto& x : r.top5) top5.push_back(x ? json(*x) : json(nullptr));
    const auto med = r.median();
    rs.push_back({{"name", r.name}, {"top5", top5}, {"median", med ? json(*med) : json(nullptr)}, {"errors", r.errors}});
  }
  j["rows"] = rs;
  return j;
}

std::string AblationTable::render() const {
  std::size_t width = 13;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  std::ostringstream os;
  char buf[64];
  os << std::string(width - 13, ' ') << "configuration";
  for (auto s : seeds) {
    std::snprintf(buf, sizeof buf, "  seed %-3llu", static_cast<unsigned long long>(s));
    os << buf;
  }
  os << "    median\n";
  for (const auto& r : rows) {
    os << std::string(width - r.name.size(), ' ') << r.name;
    for (const auto& x : r.top5) {
      if (x) std::snprintf(buf, sizeof buf, "  %8.2f", 100.0 * *x);
      else std::snprintf(buf, sizeof buf, "  %8s", "failed");
      os << buf;
    }
    const auto med = r.median();
    if (med) std::snprintf(buf, sizeof buf, "  %8.2f", 100.0 * *med);
    else std::snprintf(buf, sizeof buf, "  %8s", "-");
    os << buf << '\n';
  }
  return os.str();
}

AblationTable ablate(const AblationGrid& grid) {
  if (grid.cells.empty()) throw ConfigError("ablation grid has no cells");
  AblationTable table;
  table.seeds = grid.seeds;
  for (const auto& c : grid.cells) {
    AblationRow r;
    r.name = c.name;
    r.top5.resize(grid.seeds.size());
    table.rows.push_back(std::move(r));
  }

  std::vector<std::shared_ptr<const Dataset>> datasets(grid.seeds.size());
  if (grid.synth) {
    for (std::size_t s = 0; s < grid.seeds.size(); ++s) {
      SynthConfig sc = *grid.synth;
      sc.seed = grid.seeds[s];
      datasets[s] = std::make_shared<const Dataset>(generate_synthetic(sc).data);
    }
  } else {
    const std::string dir = grid.base.value("dataset_dir", "");
    if (dir.empty()) throw ConfigError("ablation grid needs either synth or base.dataset_dir");
    const auto shared = std::make_shared<const Dataset>(load_dataset(dir));
    for (auto& d : datasets) d = shared;
  }

  const std::size_t jobs = grid.cells.size() * grid.seeds.size();
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t ci = job / grid.seeds.size();
      const std::size_t si = job % grid.seeds.size();
      try {
        json cfg_json = grid.base;
        cfg_json.merge_patch(grid.cells[ci].overrides);
        cfg_json["seed"] = grid.seeds[si];
        const TrainConfig cfg = train_config_from_json(cfg_json);
        const Checkpoint ckpt = train(cfg, *datasets[si]);
        std::lock_guard lock(mu);
        table.rows[ci].top5[si] = ckpt.val_top5;
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        table.rows[ci].errors.push_back("seed " + std::to_string(grid.seeds[si]) + ": " + e.what());
      }
    }
  };
  const std::size_t n_threads = std::min(grid.workers, jobs);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return table;
}

}  // namespace vstg
