// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "framebank/kcenter.hpp"
#include "framebank/prototype.hpp"

namespace framebank {

/// Fixed-capacity bank of frame prototypes for one layer, maintained by
/// greedy farthest-first k-center re-selection on every ingest. The newest
/// block seeds each pass, so it always survives the pass that ingests it.
class MidBank {
 public:
  struct Entry {
    FrameId frame_id = 0;
    Prototype proto;
  };

  struct IngestResult {
    std::vector<FrameId> evicted;  ///< ascending frame_id
    std::size_t degenerate_calls = 0;
  };

  explicit MidBank(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return retained_.size(); }
  bool contains(FrameId id) const;
  /// Retained entries, ascending by frame_id.
  const std::vector<Entry>& retained() const { return retained_; }

  /// Adds a block to the candidate pool (retained + new). If the pool fits
  /// the capacity everything is kept, otherwise a k-center pass seeded at the
  /// new block decides the survivors. Returns exactly the evicted ids.
  IngestResult ingest(FrameId id, Prototype proto);

  /// Replaces the retained set wholesale (checkpoint restore).
  void restore(std::vector<Entry> entries);

  /// Farthest-first selection over an arbitrary pool. The returned ids are in
  /// pick order with selection[0] == seed_id. Ties in the farthest-point
  /// argmax go to the smallest frame_id.
  static std::vector<FrameId> select_k_center(std::span<const Entry> pool,
                                              std::size_t capacity, FrameId seed_id,
                                              kcenter::Stats* stats = nullptr);

  /// Realized k-center objective of `retained` centers against `pool`.
  /// An empty pool yields 0 and sets *empty_pool when given.
  static double coverage_radius(std::span<const Entry> retained,
                                std::span<const Prototype> pool,
                                bool* empty_pool = nullptr);

 private:
  std::size_t capacity_;
  std::vector<Entry> retained_;
};

}  // namespace framebank
