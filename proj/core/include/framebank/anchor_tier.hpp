// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "framebank/prototype.hpp"
#include "framebank/types.hpp"

namespace framebank {

/// Geometric reliability of a frame: confidence times sharpness, in [0,1].
inline double reliability(const FrameMeta& meta) {
  return meta.confidence * meta.sharpness;
}

/// Sparse persistent reference frames. The first frame of the stream is
/// pinned into slot 0 and never evicted; later promotions require a minimum
/// frame gap since the last promotion plus reliability and novelty
/// thresholds, and evict the oldest non-pinned slot FIFO when full.
class AnchorTier {
 public:
  struct Params {
    std::size_t capacity = 0;  ///< B_A; 0 disables the tier entirely
    std::uint64_t gap = 1;     ///< G, minimum frames between promotions
    double phi_min = 0.3;
    double nu_min = 0.05;
  };

  struct Slot {
    FrameId frame_id = 0;
    FrameMeta meta;
    std::vector<Prototype> prototypes;  ///< per layer
    std::shared_ptr<const FrameBlock> block;
  };

  struct Outcome {
    bool promoted = false;
    std::optional<FrameId> evicted;
    bool prototype_novelty = false;  ///< novelty fell back to layer-0 prototypes
    double phi = 0.0;
    double nu = 0.0;
  };

  explicit AnchorTier(Params params);

  const Params& params() const { return params_; }
  /// Slots in promotion order; slot 0 is the pinned first frame.
  const std::vector<Slot>& slots() const { return slots_; }
  bool contains(FrameId id) const;
  std::optional<FrameId> last_promotion() const { return t_last_; }

  /// Minimum cosine dissimilarity between the candidate's normalized pose
  /// signature and the anchors'. 2.0 for an empty tier. When the candidate or
  /// any anchor lacks a pose, falls back to layer-0 prototype directions and
  /// sets *prototype_fallback.
  double novelty(const FrameMeta& meta, std::span<const Prototype> prototypes,
                 bool* prototype_fallback = nullptr) const;

  /// Promotion decision for the next in-order frame. The first frame ever
  /// seen is promoted unconditionally (given capacity); afterwards all three
  /// gates must pass and, at capacity, an evictable non-pinned slot must
  /// exist. t_last moves only on actual promotion.
  Outcome consider(const std::shared_ptr<const FrameBlock>& block,
                   std::span<const Prototype> prototypes);

  /// Checkpoint restore.
  void restore(std::vector<Slot> slots, std::optional<FrameId> t_last, bool seen_any);
  bool seen_any() const { return seen_any_; }

 private:
  Params params_;
  std::vector<Slot> slots_;
  std::optional<FrameId> t_last_;
  bool seen_any_ = false;
};

}  // namespace framebank
