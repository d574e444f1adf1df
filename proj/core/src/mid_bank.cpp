// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/mid_bank.hpp"

#include <algorithm>
#include <string>

namespace framebank {

MidBank::MidBank(std::size_t capacity) : capacity_(capacity) {
  check_structural(capacity >= 1, "MidBank capacity must be >= 1");
}

bool MidBank::contains(FrameId id) const {
  const auto it = std::lower_bound(
      retained_.begin(), retained_.end(), id,
      [](const Entry& e, FrameId v) { return e.frame_id < v; });
  return it != retained_.end() && it->frame_id == id;
}

MidBank::IngestResult MidBank::ingest(FrameId id, Prototype proto) {
  check_structural(!contains(id),
                   "MidBank::ingest: duplicate frame_id " + std::to_string(id));

  std::vector<Entry> pool = retained_;
  pool.push_back(Entry{id, std::move(proto)});
  std::sort(pool.begin(), pool.end(),
            [](const Entry& a, const Entry& b) { return a.frame_id < b.frame_id; });

  IngestResult result;
  if (pool.size() <= capacity_) {
    retained_ = std::move(pool);
    return result;
  }

  kcenter::Stats stats;
  const std::vector<FrameId> selected = select_k_center(pool, capacity_, id, &stats);
  result.degenerate_calls = stats.degenerate_calls;

  std::vector<FrameId> keep = selected;
  std::sort(keep.begin(), keep.end());
  std::vector<Entry> survivors;
  survivors.reserve(keep.size());
  for (auto& entry : pool) {
    if (std::binary_search(keep.begin(), keep.end(), entry.frame_id)) {
      survivors.push_back(std::move(entry));
    } else {
      result.evicted.push_back(entry.frame_id);
    }
  }
  retained_ = std::move(survivors);
  return result;
}

void MidBank::restore(std::vector<Entry> entries) {
  check_structural(entries.size() <= capacity_, "MidBank::restore: over capacity");
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.frame_id < b.frame_id; });
  retained_ = std::move(entries);
}

std::vector<FrameId> MidBank::select_k_center(std::span<const Entry> pool,
                                              std::size_t capacity, FrameId seed_id,
                                              kcenter::Stats* stats) {
  check_structural(!pool.empty(), "select_k_center: empty pool");
  check_structural(capacity >= 1, "select_k_center: capacity must be >= 1");

  std::vector<kcenter::Item<FrameId>> items;
  items.reserve(pool.size());
  for (const Entry& e : pool) items.push_back({e.frame_id, &e.proto});
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });

  std::size_t seed_index = items.size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id == seed_id) {
      seed_index = i;
      break;
    }
  }
  check_structural(seed_index < items.size(), "select_k_center: seed not in pool");

  const auto indices = kcenter::greedy_select_indices(
      std::span<const kcenter::Item<FrameId>>(items), capacity, seed_index, stats);
  std::vector<FrameId> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(items[i].id);
  return out;
}

double MidBank::coverage_radius(std::span<const Entry> retained,
                                std::span<const Prototype> pool, bool* empty_pool) {
  check_structural(!retained.empty(), "coverage_radius: empty retained set");
  if (pool.empty()) {
    if (empty_pool != nullptr) *empty_pool = true;
    return 0.0;
  }
  double worst = 0.0;
  for (const Prototype& p : pool) {
    double best = 3.0;
    for (const Entry& c : retained) {
      best = std::min(best, cosine_distance(p, c.proto));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace framebank
