// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "framebank/anchor_tier.hpp"
#include "framebank/mid_bank.hpp"
#include "framebank/prototype.hpp"
#include "framebank/trace.hpp"
#include "framebank/types.hpp"

namespace framebank {

enum class PolicyKind { kFrameKCenter, kRecentK, kTokenLevel, kFullCache };

std::string_view policy_name(PolicyKind kind);
PolicyKind policy_from_name(std::string_view name);

/// Construction-time knobs of a managed stream. Validation enforces the
/// cross-field rules (recent_k only with the recent-k policy, token_budget
/// only with the token-level policy and at least one frame's worth, anchors
/// only for frame-granularity policies).
struct ManagerParams {
  StreamConfig stream;
  PolicyKind policy = PolicyKind::kFrameKCenter;
  std::size_t mid_capacity = 16;    ///< B_M, blocks per layer
  std::size_t anchor_capacity = 4;  ///< B_A
  std::uint64_t gap = 50;           ///< G
  double phi_min = 0.3;
  double nu_min = 0.05;
  std::size_t recent_k = 0;         ///< K, reserved newest frames
  std::size_t token_budget = 0;     ///< M tokens per layer

  void validate() const;
  /// Per-layer retained-token bound for Proposition-1 style checks; nullopt
  /// for the unbounded full-cache policy.
  std::optional<std::uint64_t> layer_token_budget() const;
};

/// A frame block plus everything derived from it on ingestion: per-layer
/// block prototypes and per-token prototypes. Derivations happen exactly once
/// per block.
struct BlockRecord {
  std::shared_ptr<const FrameBlock> block;
  std::vector<Prototype> prototypes;                 ///< per layer
  std::vector<std::vector<Prototype>> token_protos;  ///< [layer][token]
};

BlockRecord make_block_record(std::shared_ptr<const FrameBlock> block);

enum class SegmentKind { kAnchor, kMid, kCurrent, kTokens };

/// One provenance entry of the loaded cache: a frame and the ascending token
/// ids of it that are loaded.
struct LoadedSegment {
  SegmentKind kind = SegmentKind::kMid;
  FrameId frame_id = 0;
  std::vector<std::uint32_t> tokens;
};

struct LayerCache {
  std::vector<LoadedSegment> segments;
  std::uint64_t token_count() const;
};

/// Per-layer concatenation loaded to condition the next frame: anchors
/// (ascending), then the policy's bounded section (ascending), then the
/// in-flight current frame. The current frame may legitimately appear twice
/// (once retained, once as the current segment); diagnostics deduplicate.
struct LoadedCache {
  std::vector<LayerCache> layers;
};

struct TokenRef {
  FrameId frame = 0;
  std::uint32_t token = 0;

  friend bool operator<(const TokenRef& a, const TokenRef& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.token < b.token;
  }
  friend bool operator==(const TokenRef& a, const TokenRef& b) {
    return a.frame == b.frame && a.token == b.token;
  }
};

/// What changed during one step; deltas feed the trace-level diagnostics.
struct StepResult {
  bool promoted = false;
  std::optional<FrameId> anchor_evicted;
  std::vector<std::vector<FrameId>> evicted_blocks;   ///< per layer
  std::vector<std::vector<TokenRef>> evicted_tokens;  ///< per layer
  std::vector<std::uint64_t> current_retained;        ///< per layer, tokens of the new frame kept
  /// Token ids of the new frame that were kept, per layer; empty means all N.
  std::vector<std::vector<std::uint32_t>> current_tokens;
};

class RetentionPolicy;

/// Per-stream orchestration: runs the anchor promotion decision once per
/// frame, feeds the per-layer bounded sections, assembles the loaded cache,
/// asserts the budget, and reports deltas.
class MemoryManager {
 public:
  explicit MemoryManager(ManagerParams params);
  ~MemoryManager();
  // The policy keeps a pointer to params_, so the manager stays put.
  MemoryManager(const MemoryManager&) = delete;
  MemoryManager& operator=(const MemoryManager&) = delete;

  StepResult step(FrameBlock block, RetentionTrace& trace);

  const ManagerParams& params() const { return params_; }
  /// Frame id expected by the next step (== frames ingested so far).
  std::uint64_t next_frame() const { return next_frame_; }
  const AnchorTier& tier() const { return *tier_; }
  const LoadedCache& last_cache() const { return last_cache_; }
  const BlockRecord* record(FrameId id) const;
  bool unbounded() const { return params_.policy == PolicyKind::kFullCache; }

  /// Token count of the loaded cache (includes the in-flight duplicate).
  std::uint64_t loaded_tokens(std::size_t layer) const;
  /// Tokens retained across distinct frames (no duplicate), i.e. sum of b_t.
  std::uint64_t retained_tokens(std::size_t layer) const;
  std::uint64_t retained_blocks(std::size_t layer) const;
  /// b_t per source frame currently retained at `layer`, ascending frame id.
  std::vector<std::pair<FrameId, std::uint64_t>> retained_per_frame(std::size_t layer) const;

  /// Effective KV footprint of the loaded cache: H * T * D * 2 * width.
  std::uint64_t memory_bytes(std::size_t layer) const;
  std::uint64_t memory_bytes_total() const;

  /// Deduped retained tokens in internal memory order with their unit key
  /// directions (zero vector for degenerate keys).
  void for_each_retained_token(
      std::size_t layer,
      const std::function<void(FrameId, std::uint32_t, std::span<const double>)>& fn) const;

  /// Centers for coverage-radius diagnostics: retained block prototypes for
  /// frame-granularity policies, retained token directions for token-level.
  std::vector<const Prototype*> radius_centers(std::size_t layer) const;

  RetentionPolicy& policy() { return *policy_; }
  const RetentionPolicy& policy() const { return *policy_; }
  AnchorTier& tier_mutable() { return *tier_; }
  /// Checkpoint restore hooks.
  void restore_store(std::vector<BlockRecord> records);
  void restore_counters(std::uint64_t next_frame);
  void rebuild_cache_summary();

 private:
  void assemble(FrameId current);
  void sweep_store();

  ManagerParams params_;
  std::unique_ptr<AnchorTier> tier_;
  std::unique_ptr<RetentionPolicy> policy_;
  std::map<FrameId, BlockRecord> store_;
  LoadedCache last_cache_;
  std::vector<std::uint64_t> loaded_tokens_;
  std::uint64_t next_frame_ = 0;
};

}  // namespace framebank
