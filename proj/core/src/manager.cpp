// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/manager.hpp"

#include <algorithm>
#include <string>

#include "framebank/policies.hpp"

namespace framebank {

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kFrameKCenter: return "frame-kcenter";
    case PolicyKind::kRecentK: return "recent-k";
    case PolicyKind::kTokenLevel: return "token-level";
    case PolicyKind::kFullCache: return "full-cache";
  }
  return "unknown";
}

PolicyKind policy_from_name(std::string_view name) {
  if (name == "frame-kcenter") return PolicyKind::kFrameKCenter;
  if (name == "recent-k") return PolicyKind::kRecentK;
  if (name == "token-level") return PolicyKind::kTokenLevel;
  if (name == "full-cache") return PolicyKind::kFullCache;
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

void ManagerParams::validate() const {
  stream.validate();
  const bool frame_granularity =
      policy == PolicyKind::kFrameKCenter || policy == PolicyKind::kRecentK;
  if (frame_granularity) {
    check_config(mid_capacity >= 1, "mid_capacity must be >= 1");
  }
  check_config(gap >= 1, "gap must be >= 1");
  check_config(phi_min >= 0.0 && phi_min <= 1.0, "phi_min must lie in [0,1]");
  check_config(nu_min >= 0.0 && nu_min <= 2.0, "nu_min must lie in [0,2]");
  if (policy == PolicyKind::kRecentK) {
    check_config(recent_k <= mid_capacity, "recent_k must not exceed mid_capacity");
  } else {
    check_config(recent_k == 0, "recent_k requires the recent-k policy");
  }
  if (policy == PolicyKind::kTokenLevel) {
    check_config(token_budget >= stream.tokens_per_frame,
                 "token_budget must be at least one frame of tokens");
    check_config(anchor_capacity == 0, "token-level policy does not use anchors");
  } else {
    check_config(token_budget == 0, "token_budget requires the token-level policy");
  }
  if (policy == PolicyKind::kFullCache) {
    check_config(anchor_capacity == 0, "full-cache policy does not use anchors");
  }
}

std::optional<std::uint64_t> ManagerParams::layer_token_budget() const {
  switch (policy) {
    case PolicyKind::kFrameKCenter:
    case PolicyKind::kRecentK:
      return (mid_capacity + anchor_capacity + 1) *
             static_cast<std::uint64_t>(stream.tokens_per_frame);
    case PolicyKind::kTokenLevel:
      return token_budget;
    case PolicyKind::kFullCache:
      return std::nullopt;
  }
  return std::nullopt;
}

BlockRecord make_block_record(std::shared_ptr<const FrameBlock> block) {
  BlockRecord rec;
  rec.block = std::move(block);
  const std::size_t layers = rec.block->num_layers();
  const std::size_t tokens = rec.block->tokens();
  rec.prototypes.reserve(layers);
  rec.token_protos.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    rec.prototypes.push_back(compute_prototype(*rec.block, l));
    rec.token_protos[l].reserve(tokens);
    for (std::size_t t = 0; t < tokens; ++t) {
      rec.token_protos[l].push_back(compute_token_prototype(*rec.block, l, t));
    }
  }
  return rec;
}

std::uint64_t LayerCache::token_count() const {
  std::uint64_t n = 0;
  for (const auto& seg : segments) n += seg.tokens.size();
  return n;
}

MemoryManager::MemoryManager(ManagerParams params) : params_(std::move(params)) {
  params_.validate();
  tier_ = std::make_unique<AnchorTier>(AnchorTier::Params{
      params_.anchor_capacity, params_.gap, params_.phi_min, params_.nu_min});
  policy_ = make_policy(params_);
  loaded_tokens_.assign(params_.stream.num_layers, 0);
  last_cache_.layers.resize(params_.stream.num_layers);
}

MemoryManager::~MemoryManager() = default;

namespace {

std::vector<std::uint32_t> full_frame_tokens(std::uint32_t n) {
  std::vector<std::uint32_t> t(n);
  for (std::uint32_t i = 0; i < n; ++i) t[i] = i;
  return t;
}

}  // namespace

StepResult MemoryManager::step(FrameBlock block, RetentionTrace& trace) {
  check_structural(block.frame_id() == next_frame_,
                   "out-of-order frame: expected " + std::to_string(next_frame_) +
                       ", got " + std::to_string(block.frame_id()));
  block.validate(params_.stream);

  const std::uint64_t step_index = next_frame_;
  auto owned = std::make_shared<const FrameBlock>(std::move(block));
  const FrameId id = owned->frame_id();

  BlockRecord rec = make_block_record(owned);

  StepResult result;
  result.evicted_blocks.resize(params_.stream.num_layers);
  result.evicted_tokens.resize(params_.stream.num_layers);
  result.current_retained.assign(params_.stream.num_layers, 0);
  result.current_tokens.resize(params_.stream.num_layers);

  // Frame-level promotion decision, shared across layers.
  const AnchorTier::Outcome outcome = tier_->consider(owned, rec.prototypes);
  if (outcome.prototype_novelty) trace.novelty_fallback(step_index, id);
  if (outcome.promoted) trace.promote(step_index, id, outcome.evicted);
  result.promoted = outcome.promoted;
  result.anchor_evicted = outcome.evicted;

  auto [it, inserted] = store_.emplace(id, std::move(rec));
  check_structural(inserted, "duplicate frame id in block store");

  policy_->ingest(it->second, outcome.promoted, step_index, trace, result);

  assemble(id);

  // Hard budget and disjointness, checked on every step.
  const auto budget = params_.layer_token_budget();
  for (std::size_t l = 0; l < params_.stream.num_layers; ++l) {
    if (budget) {
      if (params_.policy == PolicyKind::kTokenLevel) {
        check_invariant(retained_tokens(l) <= *budget,
                        "token budget violated at layer " + std::to_string(l));
      } else {
        check_invariant(loaded_tokens_[l] <= *budget,
                        "layer token budget violated at layer " + std::to_string(l));
      }
    }
    std::vector<std::pair<FrameId, std::uint64_t>> section;
    policy_->per_frame(l, section);
    for (const auto& slot : tier_->slots()) {
      for (const auto& [frame, count] : section) {
        check_invariant(frame != slot.frame_id,
                        "frame " + std::to_string(frame) +
                            " retained by both the anchor tier and the bounded section");
      }
    }
  }

  for (std::size_t l = 0; l < params_.stream.num_layers; ++l) {
    trace.layer_state(step_index, static_cast<int>(l), retained_blocks(l),
                      retained_tokens(l));
  }

  sweep_store();
  ++next_frame_;
  return result;
}

void MemoryManager::assemble(FrameId current) {
  const auto n = static_cast<std::uint32_t>(params_.stream.tokens_per_frame);
  for (std::size_t l = 0; l < params_.stream.num_layers; ++l) {
    LayerCache& cache = last_cache_.layers[l];
    cache.segments.clear();
    for (const auto& slot : tier_->slots()) {
      cache.segments.push_back(
          LoadedSegment{SegmentKind::kAnchor, slot.frame_id, full_frame_tokens(n)});
    }
    policy_->section_segments(l, cache.segments);
    cache.segments.push_back(
        LoadedSegment{SegmentKind::kCurrent, current, full_frame_tokens(n)});
    loaded_tokens_[l] = cache.token_count();
  }
}

void MemoryManager::sweep_store() {
  std::set<FrameId> live;
  policy_->collect_live(live);
  for (const auto& slot : tier_->slots()) live.insert(slot.frame_id);
  for (auto it = store_.begin(); it != store_.end();) {
    if (live.count(it->first) == 0) {
      it = store_.erase(it);
    } else {
      ++it;
    }
  }
}

const BlockRecord* MemoryManager::record(FrameId id) const {
  const auto it = store_.find(id);
  return it == store_.end() ? nullptr : &it->second;
}

std::uint64_t MemoryManager::loaded_tokens(std::size_t layer) const {
  return loaded_tokens_[layer];
}

std::uint64_t MemoryManager::retained_tokens(std::size_t layer) const {
  return tier_->slots().size() * params_.stream.tokens_per_frame +
         policy_->section_tokens(layer);
}

std::uint64_t MemoryManager::retained_blocks(std::size_t layer) const {
  std::vector<std::pair<FrameId, std::uint64_t>> section;
  policy_->per_frame(layer, section);
  return tier_->slots().size() + section.size();
}

std::vector<std::pair<FrameId, std::uint64_t>> MemoryManager::retained_per_frame(
    std::size_t layer) const {
  std::vector<std::pair<FrameId, std::uint64_t>> anchors;
  anchors.reserve(tier_->slots().size());
  for (const auto& slot : tier_->slots()) {
    anchors.emplace_back(slot.frame_id, params_.stream.tokens_per_frame);
  }
  std::vector<std::pair<FrameId, std::uint64_t>> section;
  policy_->per_frame(layer, section);

  std::vector<std::pair<FrameId, std::uint64_t>> merged;
  merged.reserve(anchors.size() + section.size());
  std::merge(anchors.begin(), anchors.end(), section.begin(), section.end(),
             std::back_inserter(merged));
  return merged;
}

std::uint64_t MemoryManager::memory_bytes(std::size_t layer) const {
  return kv_bytes(params_.stream.heads[layer], loaded_tokens_[layer],
                  params_.stream.key_dim[layer], params_.stream.bytes_per_element);
}

std::uint64_t MemoryManager::memory_bytes_total() const {
  std::uint64_t total = 0;
  for (std::size_t l = 0; l < params_.stream.num_layers; ++l) total += memory_bytes(l);
  return total;
}

void MemoryManager::for_each_retained_token(
    std::size_t layer,
    const std::function<void(FrameId, std::uint32_t, std::span<const double>)>& fn) const {
  if (params_.policy == PolicyKind::kTokenLevel) {
    const auto& token_policy = static_cast<const TokenLevelPolicy&>(*policy_);
    for (const auto& r : token_policy.retained(layer)) {
      fn(r.ref.frame, r.ref.token, std::span<const double>(r.proto.unit));
    }
    return;
  }
  const auto n = static_cast<std::uint32_t>(params_.stream.tokens_per_frame);
  auto emit_frame = [&](FrameId id) {
    const BlockRecord* rec = record(id);
    check_invariant(rec != nullptr, "retained frame missing from block store");
    for (std::uint32_t t = 0; t < n; ++t) {
      fn(id, t, std::span<const double>(rec->token_protos[layer][t].unit));
    }
  };
  for (const auto& slot : tier_->slots()) emit_frame(slot.frame_id);
  std::vector<std::pair<FrameId, std::uint64_t>> section;
  policy_->per_frame(layer, section);
  for (const auto& [id, count] : section) emit_frame(id);
}

std::vector<const Prototype*> MemoryManager::radius_centers(std::size_t layer) const {
  std::vector<const Prototype*> centers;
  if (params_.policy == PolicyKind::kTokenLevel) {
    const auto& token_policy = static_cast<const TokenLevelPolicy&>(*policy_);
    centers.reserve(token_policy.retained(layer).size());
    for (const auto& r : token_policy.retained(layer)) centers.push_back(&r.proto);
    return centers;
  }
  for (const auto& slot : tier_->slots()) centers.push_back(&slot.prototypes[layer]);
  std::vector<std::pair<FrameId, std::uint64_t>> section;
  policy_->per_frame(layer, section);
  for (const auto& [id, count] : section) {
    const BlockRecord* rec = record(id);
    check_invariant(rec != nullptr, "retained frame missing from block store");
    centers.push_back(&rec->prototypes[layer]);
  }
  return centers;
}

void MemoryManager::restore_store(std::vector<BlockRecord> records) {
  store_.clear();
  for (auto& rec : records) {
    const FrameId id = rec.block->frame_id();
    store_.emplace(id, std::move(rec));
  }
}

void MemoryManager::restore_counters(std::uint64_t next_frame) {
  next_frame_ = next_frame;
}

void MemoryManager::rebuild_cache_summary() {
  if (next_frame_ == 0) return;
  assemble(next_frame_ - 1);
}

}  // namespace framebank
