// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "framebank/types.hpp"

namespace framebank {

enum class TraceEventKind {
  kPromote,          ///< anchor promotion (frame, optional eviction)
  kEvictBlocks,      ///< blocks dropped from a layer's bounded section
  kEvictTokens,      ///< token count dropped from a layer (token policy)
  kDegenerate,       ///< degenerate-prototype distance calls in a pass
  kNoveltyFallback,  ///< novelty computed from prototypes instead of poses
  kNote,             ///< free-form diagnostic note
  kLayerState,       ///< per-step per-layer retained blocks/tokens summary
};

struct TraceRecord {
  std::uint64_t step = 0;
  TraceEventKind kind = TraceEventKind::kNote;
  int layer = -1;
  FrameId frame = 0;
  std::optional<FrameId> evicted_frame;
  std::vector<FrameId> frames;   ///< kEvictBlocks payload, ascending
  std::uint64_t count = 0;       ///< kEvictTokens / kDegenerate payload
  std::uint64_t blocks = 0;      ///< kLayerState: retained blocks (dedup)
  std::uint64_t tokens = 0;      ///< kLayerState: retained tokens (dedup)
  std::string note;

  /// Canonical single-line JSON serialization. Field order is fixed so the
  /// byte stream is reproducible.
  void append_line(std::string& out) const;
};

/// In-memory retention event log, serializable as line-delimited JSON. The
/// header records the stream identity but deliberately not the policy or the
/// run config: traces of equivalent policies must serialize identically.
class RetentionTrace {
 public:
  RetentionTrace() = default;
  explicit RetentionTrace(std::string spec_hash) : spec_hash_(std::move(spec_hash)) {}

  const std::string& spec_hash() const { return spec_hash_; }
  const std::vector<TraceRecord>& records() const { return records_; }

  void add(TraceRecord rec) { records_.push_back(std::move(rec)); }

  void promote(std::uint64_t step, FrameId frame, std::optional<FrameId> evicted);
  void evict_blocks(std::uint64_t step, int layer, std::vector<FrameId> frames);
  void evict_tokens(std::uint64_t step, int layer, std::uint64_t count);
  void degenerate(std::uint64_t step, int layer, std::uint64_t count);
  void novelty_fallback(std::uint64_t step, FrameId frame);
  void note(std::uint64_t step, std::string text);
  void layer_state(std::uint64_t step, int layer, std::uint64_t blocks,
                   std::uint64_t tokens);

  std::string serialize() const;
  void write(std::ostream& os) const;
  std::uint64_t content_hash() const;

 private:
  std::string spec_hash_;
  std::vector<TraceRecord> records_;
};

}  // namespace framebank
