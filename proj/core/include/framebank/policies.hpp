// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>
#include <map>
#include <set>
#include <vector>

#include "framebank/manager.hpp"
#include "framebank/mid_bank.hpp"

namespace framebank {

/// A policy owns the bounded section of retained memory (everything except
/// anchors and the in-flight duplicate). One instance per stream; ingestion
/// is strictly in frame order.
class RetentionPolicy {
 public:
  explicit RetentionPolicy(const ManagerParams& params) : params_(&params) {}
  virtual ~RetentionPolicy() = default;

  virtual PolicyKind kind() const = 0;

  /// Ingest the current block. `promoted` blocks bypass the bounded section
  /// so the anchor tier and the section stay disjoint. Appends eviction and
  /// degeneracy events to the trace and fills the per-layer deltas in `out`.
  virtual void ingest(const BlockRecord& rec, bool promoted, std::uint64_t step,
                      RetentionTrace& trace, StepResult& out) = 0;

  /// Section provenance for one layer, ascending frame ids.
  virtual void section_segments(std::size_t layer,
                                std::vector<LoadedSegment>& out) const = 0;
  virtual std::uint64_t section_tokens(std::size_t layer) const = 0;
  virtual void per_frame(std::size_t layer,
                         std::vector<std::pair<FrameId, std::uint64_t>>& out) const = 0;
  /// Frames the block store must keep alive for this policy.
  virtual void collect_live(std::set<FrameId>& out) const = 0;

 protected:
  const ManagerParams& params() const { return *params_; }
  std::size_t num_layers() const { return params_->stream.num_layers; }
  std::uint32_t tokens_per_frame() const {
    return static_cast<std::uint32_t>(params_->stream.tokens_per_frame);
  }

 private:
  const ManagerParams* params_;
};

/// Default policy: one k-center bank per layer over block prototypes.
class FrameKCenterPolicy final : public RetentionPolicy {
 public:
  explicit FrameKCenterPolicy(const ManagerParams& params);
  PolicyKind kind() const override { return PolicyKind::kFrameKCenter; }
  void ingest(const BlockRecord& rec, bool promoted, std::uint64_t step,
              RetentionTrace& trace, StepResult& out) override;
  void section_segments(std::size_t layer, std::vector<LoadedSegment>& out) const override;
  std::uint64_t section_tokens(std::size_t layer) const override;
  void per_frame(std::size_t layer,
                 std::vector<std::pair<FrameId, std::uint64_t>>& out) const override;
  void collect_live(std::set<FrameId>& out) const override;

  const MidBank& bank(std::size_t layer) const { return banks_[layer]; }
  MidBank& bank_mutable(std::size_t layer) { return banks_[layer]; }

 private:
  std::vector<MidBank> banks_;
};

/// Recency hybrid: the newest K frames are reserved unconditionally; blocks
/// aging out of the window feed per-layer k-center banks of capacity B_M - K,
/// seeded by the newest non-reserved block. K = 0 degenerates to the default
/// policy and must produce an identical trace.
class RecentKPolicy final : public RetentionPolicy {
 public:
  explicit RecentKPolicy(const ManagerParams& params);
  PolicyKind kind() const override { return PolicyKind::kRecentK; }
  void ingest(const BlockRecord& rec, bool promoted, std::uint64_t step,
              RetentionTrace& trace, StepResult& out) override;
  void section_segments(std::size_t layer, std::vector<LoadedSegment>& out) const override;
  std::uint64_t section_tokens(std::size_t layer) const override;
  void per_frame(std::size_t layer,
                 std::vector<std::pair<FrameId, std::uint64_t>>& out) const override;
  void collect_live(std::set<FrameId>& out) const override;

  const std::deque<FrameId>& window() const { return window_; }
  const MidBank& bank(std::size_t layer) const { return banks_[layer]; }
  MidBank& bank_mutable(std::size_t layer) { return banks_[layer]; }
  /// Checkpoint restore; window prototypes are rebuilt from the records.
  void restore_window(std::deque<FrameId> window,
                      std::map<FrameId, std::vector<Prototype>> window_protos);

 private:
  std::size_t reserved_;
  std::deque<FrameId> window_;   ///< oldest first
  std::vector<MidBank> banks_;   ///< capacity B_M - K, absent when K == B_M
  std::map<FrameId, std::vector<Prototype>> window_protos_;
};

/// Token-granularity proxy baseline: per-layer farthest-first k-center over
/// individual unit-normalized token keys under a global token budget M.
class TokenLevelPolicy final : public RetentionPolicy {
 public:
  struct Retained {
    TokenRef ref;
    Prototype proto;
  };

  explicit TokenLevelPolicy(const ManagerParams& params);
  PolicyKind kind() const override { return PolicyKind::kTokenLevel; }
  void ingest(const BlockRecord& rec, bool promoted, std::uint64_t step,
              RetentionTrace& trace, StepResult& out) override;
  void section_segments(std::size_t layer, std::vector<LoadedSegment>& out) const override;
  std::uint64_t section_tokens(std::size_t layer) const override;
  void per_frame(std::size_t layer,
                 std::vector<std::pair<FrameId, std::uint64_t>>& out) const override;
  void collect_live(std::set<FrameId>& out) const override;

  /// Retained tokens of a layer, ascending (frame, token).
  const std::vector<Retained>& retained(std::size_t layer) const { return retained_[layer]; }
  void restore_retained(std::vector<std::vector<Retained>> retained);

 private:
  std::vector<std::vector<Retained>> retained_;  ///< per layer
};

/// Unbounded reference policy: keeps every block, exempt from budgets.
class FullCachePolicy final : public RetentionPolicy {
 public:
  explicit FullCachePolicy(const ManagerParams& params);
  PolicyKind kind() const override { return PolicyKind::kFullCache; }
  void ingest(const BlockRecord& rec, bool promoted, std::uint64_t step,
              RetentionTrace& trace, StepResult& out) override;
  void section_segments(std::size_t layer, std::vector<LoadedSegment>& out) const override;
  std::uint64_t section_tokens(std::size_t layer) const override;
  void per_frame(std::size_t layer,
                 std::vector<std::pair<FrameId, std::uint64_t>>& out) const override;
  void collect_live(std::set<FrameId>& out) const override;

  void restore_frames(std::vector<FrameId> frames) { frames_ = std::move(frames); }

 private:
  std::vector<FrameId> frames_;
};

std::unique_ptr<RetentionPolicy> make_policy(const ManagerParams& params);

}  // namespace framebank
