// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/policies.hpp"

#include <algorithm>
#include <string>

namespace framebank {

namespace {

std::vector<std::uint32_t> all_tokens(std::uint32_t n) {
  std::vector<std::uint32_t> t(n);
  for (std::uint32_t i = 0; i < n; ++i) t[i] = i;
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// FrameKCenterPolicy

FrameKCenterPolicy::FrameKCenterPolicy(const ManagerParams& params)
    : RetentionPolicy(params) {
  banks_.reserve(params.stream.num_layers);
  for (std::size_t l = 0; l < params.stream.num_layers; ++l) {
    banks_.emplace_back(params.mid_capacity);
  }
}

void FrameKCenterPolicy::ingest(const BlockRecord& rec, bool promoted,
                                std::uint64_t step, RetentionTrace& trace,
                                StepResult& out) {
  const FrameId id = rec.block->frame_id();
  for (std::size_t l = 0; l < num_layers(); ++l) {
    out.current_retained[l] = tokens_per_frame();
    if (promoted) continue;
    auto result = banks_[l].ingest(id, rec.prototypes[l]);
    trace.evict_blocks(step, static_cast<int>(l), result.evicted);
    trace.degenerate(step, static_cast<int>(l), result.degenerate_calls);
    out.evicted_blocks[l] = std::move(result.evicted);
  }
}

void FrameKCenterPolicy::section_segments(std::size_t layer,
                                          std::vector<LoadedSegment>& out) const {
  for (const auto& entry : banks_[layer].retained()) {
    out.push_back(LoadedSegment{SegmentKind::kMid, entry.frame_id,
                                all_tokens(tokens_per_frame())});
  }
}

std::uint64_t FrameKCenterPolicy::section_tokens(std::size_t layer) const {
  return banks_[layer].size() * tokens_per_frame();
}

void FrameKCenterPolicy::per_frame(
    std::size_t layer, std::vector<std::pair<FrameId, std::uint64_t>>& out) const {
  for (const auto& entry : banks_[layer].retained()) {
    out.emplace_back(entry.frame_id, tokens_per_frame());
  }
}

void FrameKCenterPolicy::collect_live(std::set<FrameId>& out) const {
  for (const auto& bank : banks_) {
    for (const auto& entry : bank.retained()) out.insert(entry.frame_id);
  }
}

// ---------------------------------------------------------------------------
// RecentKPolicy

RecentKPolicy::RecentKPolicy(const ManagerParams& params)
    : RetentionPolicy(params), reserved_(params.recent_k) {
  if (params.mid_capacity > reserved_) {
    banks_.reserve(params.stream.num_layers);
    for (std::size_t l = 0; l < params.stream.num_layers; ++l) {
      banks_.emplace_back(params.mid_capacity - reserved_);
    }
  }
}

void RecentKPolicy::ingest(const BlockRecord& rec, bool promoted, std::uint64_t step,
                           RetentionTrace& trace, StepResult& out) {
  const FrameId id = rec.block->frame_id();
  for (std::size_t l = 0; l < num_layers(); ++l) out.current_retained[l] = tokens_per_frame();
  if (promoted) return;

  window_.push_back(id);
  window_protos_[id] = rec.prototypes;
  if (window_.size() <= reserved_) return;

  const FrameId exited = window_.front();
  window_.pop_front();
  auto node = window_protos_.extract(exited);

  if (banks_.empty()) {
    // K == B_M: pure sliding window, aged-out blocks are dropped outright.
    for (std::size_t l = 0; l < num_layers(); ++l) {
      std::vector<FrameId> evicted{exited};
      trace.evict_blocks(step, static_cast<int>(l), evicted);
      out.evicted_blocks[l] = std::move(evicted);
    }
    return;
  }
  for (std::size_t l = 0; l < num_layers(); ++l) {
    auto result = banks_[l].ingest(exited, node.mapped()[l]);
    trace.evict_blocks(step, static_cast<int>(l), result.evicted);
    trace.degenerate(step, static_cast<int>(l), result.degenerate_calls);
    out.evicted_blocks[l] = std::move(result.evicted);
  }
}

void RecentKPolicy::section_segments(std::size_t layer,
                                     std::vector<LoadedSegment>& out) const {
  // Bank frames are strictly older than every window frame, so appending the
  // window keeps the section ascending.
  if (!banks_.empty()) {
    for (const auto& entry : banks_[layer].retained()) {
      out.push_back(LoadedSegment{SegmentKind::kMid, entry.frame_id,
                                  all_tokens(tokens_per_frame())});
    }
  }
  for (FrameId id : window_) {
    out.push_back(LoadedSegment{SegmentKind::kMid, id, all_tokens(tokens_per_frame())});
  }
}

std::uint64_t RecentKPolicy::section_tokens(std::size_t layer) const {
  const std::size_t blocks = (banks_.empty() ? 0 : banks_[layer].size()) + window_.size();
  return blocks * tokens_per_frame();
}

void RecentKPolicy::per_frame(std::size_t layer,
                              std::vector<std::pair<FrameId, std::uint64_t>>& out) const {
  if (!banks_.empty()) {
    for (const auto& entry : banks_[layer].retained()) {
      out.emplace_back(entry.frame_id, tokens_per_frame());
    }
  }
  for (FrameId id : window_) out.emplace_back(id, tokens_per_frame());
}

void RecentKPolicy::collect_live(std::set<FrameId>& out) const {
  for (const auto& bank : banks_) {
    for (const auto& entry : bank.retained()) out.insert(entry.frame_id);
  }
  for (FrameId id : window_) out.insert(id);
}

void RecentKPolicy::restore_window(std::deque<FrameId> window,
                                   std::map<FrameId, std::vector<Prototype>> window_protos) {
  for (FrameId id : window) {
    check_structural(window_protos.count(id) == 1,
                     "restore_window: missing prototypes for frame " + std::to_string(id));
  }
  window_ = std::move(window);
  window_protos_ = std::move(window_protos);
}

// ---------------------------------------------------------------------------
// TokenLevelPolicy

TokenLevelPolicy::TokenLevelPolicy(const ManagerParams& params)
    : RetentionPolicy(params), retained_(params.stream.num_layers) {}

void TokenLevelPolicy::ingest(const BlockRecord& rec, bool promoted, std::uint64_t step,
                              RetentionTrace& trace, StepResult& out) {
  check_structural(!promoted, "token-level policy does not combine with anchors");
  const FrameId id = rec.block->frame_id();
  const std::uint32_t n = tokens_per_frame();
  const std::size_t budget = params().token_budget;

  for (std::size_t l = 0; l < num_layers(); ++l) {
    std::vector<Retained> pool = std::move(retained_[l]);
    pool.reserve(pool.size() + n);
    const std::size_t old_count = pool.size();
    for (std::uint32_t t = 0; t < n; ++t) {
      pool.push_back(Retained{TokenRef{id, t}, rec.token_protos[l][t]});
    }

    if (pool.size() <= budget) {
      out.current_retained[l] = n;
      retained_[l] = std::move(pool);
      continue;
    }

    // Seed: the new frame's token closest to its own mean-key direction,
    // ties toward the smaller token index.
    std::uint32_t seed_token = 0;
    double seed_dist = 3.0;
    for (std::uint32_t t = 0; t < n; ++t) {
      const double d = cosine_distance(rec.token_protos[l][t], rec.prototypes[l]);
      if (d < seed_dist) {
        seed_dist = d;
        seed_token = t;
      }
    }

    std::vector<kcenter::Item<TokenRef>> items;
    items.reserve(pool.size());
    for (const Retained& r : pool) items.push_back({r.ref, &r.proto});

    kcenter::Stats stats;
    const auto picks = kcenter::greedy_select_indices(
        std::span<const kcenter::Item<TokenRef>>(items), budget,
        old_count + seed_token, &stats);

    std::vector<bool> keep(pool.size(), false);
    for (std::size_t i : picks) keep[i] = true;

    std::vector<Retained> survivors;
    survivors.reserve(picks.size());
    std::uint64_t current_kept = 0;
    std::vector<TokenRef> evicted;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (keep[i]) {
        if (i >= old_count) {
          ++current_kept;
          out.current_tokens[l].push_back(pool[i].ref.token);
        }
        survivors.push_back(std::move(pool[i]));
      } else if (i < old_count) {
        evicted.push_back(pool[i].ref);
      }
    }
    out.current_retained[l] = current_kept;
    trace.evict_tokens(step, static_cast<int>(l), evicted.size());
    trace.degenerate(step, static_cast<int>(l), stats.degenerate_calls);
    out.evicted_tokens[l] = std::move(evicted);
    retained_[l] = std::move(survivors);
  }
}

void TokenLevelPolicy::section_segments(std::size_t layer,
                                        std::vector<LoadedSegment>& out) const {
  const auto& tokens = retained_[layer];
  std::size_t i = 0;
  while (i < tokens.size()) {
    LoadedSegment seg;
    seg.kind = SegmentKind::kTokens;
    seg.frame_id = tokens[i].ref.frame;
    while (i < tokens.size() && tokens[i].ref.frame == seg.frame_id) {
      seg.tokens.push_back(tokens[i].ref.token);
      ++i;
    }
    out.push_back(std::move(seg));
  }
}

std::uint64_t TokenLevelPolicy::section_tokens(std::size_t layer) const {
  return retained_[layer].size();
}

void TokenLevelPolicy::per_frame(std::size_t layer,
                                 std::vector<std::pair<FrameId, std::uint64_t>>& out) const {
  const auto& tokens = retained_[layer];
  std::size_t i = 0;
  while (i < tokens.size()) {
    const FrameId frame = tokens[i].ref.frame;
    std::uint64_t count = 0;
    while (i < tokens.size() && tokens[i].ref.frame == frame) {
      ++count;
      ++i;
    }
    out.emplace_back(frame, count);
  }
}

void TokenLevelPolicy::collect_live(std::set<FrameId>& out) const {
  for (const auto& layer : retained_) {
    for (const auto& r : layer) out.insert(r.ref.frame);
  }
}

void TokenLevelPolicy::restore_retained(std::vector<std::vector<Retained>> retained) {
  check_structural(retained.size() == num_layers(),
                   "TokenLevelPolicy::restore_retained: layer count mismatch");
  retained_ = std::move(retained);
}

// ---------------------------------------------------------------------------
// FullCachePolicy

FullCachePolicy::FullCachePolicy(const ManagerParams& params)
    : RetentionPolicy(params) {}

void FullCachePolicy::ingest(const BlockRecord& rec, bool promoted, std::uint64_t,
                             RetentionTrace&, StepResult& out) {
  check_structural(!promoted, "full-cache policy does not combine with anchors");
  frames_.push_back(rec.block->frame_id());
  for (std::size_t l = 0; l < num_layers(); ++l) out.current_retained[l] = tokens_per_frame();
}

void FullCachePolicy::section_segments(std::size_t,
                                       std::vector<LoadedSegment>& out) const {
  for (FrameId id : frames_) {
    out.push_back(LoadedSegment{SegmentKind::kMid, id, all_tokens(tokens_per_frame())});
  }
}

std::uint64_t FullCachePolicy::section_tokens(std::size_t) const {
  return frames_.size() * tokens_per_frame();
}

void FullCachePolicy::per_frame(std::size_t,
                                std::vector<std::pair<FrameId, std::uint64_t>>& out) const {
  for (FrameId id : frames_) out.emplace_back(id, tokens_per_frame());
}

void FullCachePolicy::collect_live(std::set<FrameId>& out) const {
  for (FrameId id : frames_) out.insert(id);
}

std::unique_ptr<RetentionPolicy> make_policy(const ManagerParams& params) {
  switch (params.policy) {
    case PolicyKind::kFrameKCenter: return std::make_unique<FrameKCenterPolicy>(params);
    case PolicyKind::kRecentK: return std::make_unique<RecentKPolicy>(params);
    case PolicyKind::kTokenLevel: return std::make_unique<TokenLevelPolicy>(params);
    case PolicyKind::kFullCache: return std::make_unique<FullCachePolicy>(params);
  }
  throw ConfigError("unknown policy kind");
}

}  // namespace framebank
