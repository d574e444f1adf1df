// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/trace.hpp"

#include "framebank/hash.hpp"

namespace framebank {

namespace {

const char* kind_name(TraceEventKind kind) {
  switch (kind) {
    case TraceEventKind::kPromote: return "promote";
    case TraceEventKind::kEvictBlocks: return "evict_blocks";
    case TraceEventKind::kEvictTokens: return "evict_tokens";
    case TraceEventKind::kDegenerate: return "degenerate";
    case TraceEventKind::kNoveltyFallback: return "novelty_fallback";
    case TraceEventKind::kNote: return "note";
    case TraceEventKind::kLayerState: return "state";
  }
  return "unknown";
}

void append_json_string(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
}

}  // namespace

void TraceRecord::append_line(std::string& out) const {
  out += "{\"step\":";
  out += std::to_string(step);
  out += ",\"ev\":\"";
  out += kind_name(kind);
  out += '"';
  switch (kind) {
    case TraceEventKind::kPromote:
      out += ",\"frame\":" + std::to_string(frame);
      out += ",\"evicted\":";
      out += evicted_frame ? std::to_string(*evicted_frame) : std::string("null");
      break;
    case TraceEventKind::kEvictBlocks: {
      out += ",\"layer\":" + std::to_string(layer) + ",\"frames\":[";
      for (std::size_t i = 0; i < frames.size(); ++i) {
        if (i != 0) out += ',';
        out += std::to_string(frames[i]);
      }
      out += ']';
      break;
    }
    case TraceEventKind::kEvictTokens:
      out += ",\"layer\":" + std::to_string(layer);
      out += ",\"count\":" + std::to_string(count);
      break;
    case TraceEventKind::kDegenerate:
      out += ",\"layer\":" + std::to_string(layer);
      out += ",\"count\":" + std::to_string(count);
      break;
    case TraceEventKind::kNoveltyFallback:
      out += ",\"frame\":" + std::to_string(frame);
      break;
    case TraceEventKind::kNote:
      out += ",\"msg\":";
      append_json_string(out, note);
      break;
    case TraceEventKind::kLayerState:
      out += ",\"layer\":" + std::to_string(layer);
      out += ",\"blocks\":" + std::to_string(blocks);
      out += ",\"tokens\":" + std::to_string(tokens);
      break;
  }
  out += "}\n";
}

void RetentionTrace::promote(std::uint64_t step, FrameId frame,
                             std::optional<FrameId> evicted) {
  TraceRecord rec;
  rec.step = step;
  rec.kind = TraceEventKind::kPromote;
  rec.frame = frame;
  rec.evicted_frame = evicted;
  records_.push_back(std::move(rec));
}

void RetentionTrace::evict_blocks(std::uint64_t step, int layer,
                                  std::vector<FrameId> frames) {
  if (frames.empty()) return;
  TraceRecord rec;
  rec.step = step;
  rec.kind = TraceEventKind::kEvictBlocks;
  rec.layer = layer;
  rec.frames = std::move(frames);
  records_.push_back(std::move(rec));
}

void RetentionTrace::evict_tokens(std::uint64_t step, int layer, std::uint64_t count) {
  if (count == 0) return;
  TraceRecord rec;
  rec.step = step;
  rec.kind = TraceEventKind::kEvictTokens;
  rec.layer = layer;
  rec.count = count;
  records_.push_back(std::move(rec));
}

void RetentionTrace::degenerate(std::uint64_t step, int layer, std::uint64_t count) {
  if (count == 0) return;
  TraceRecord rec;
  rec.step = step;
  rec.kind = TraceEventKind::kDegenerate;
  rec.layer = layer;
  rec.count = count;
  records_.push_back(std::move(rec));
}

void RetentionTrace::novelty_fallback(std::uint64_t step, FrameId frame) {
  TraceRecord rec;
  rec.step = step;
  rec.kind = TraceEventKind::kNoveltyFallback;
  rec.frame = frame;
  records_.push_back(std::move(rec));
}

void RetentionTrace::note(std::uint64_t step, std::string text) {
  TraceRecord rec;
  rec.step = step;
  rec.kind = TraceEventKind::kNote;
  rec.note = std::move(text);
  records_.push_back(std::move(rec));
}

void RetentionTrace::layer_state(std::uint64_t step, int layer, std::uint64_t blocks,
                                 std::uint64_t tokens) {
  TraceRecord rec;
  rec.step = step;
  rec.kind = TraceEventKind::kLayerState;
  rec.layer = layer;
  rec.blocks = blocks;
  rec.tokens = tokens;
  records_.push_back(std::move(rec));
}

std::string RetentionTrace::serialize() const {
  std::string out;
  out.reserve(64 + records_.size() * 48);
  out += "{\"trace\":\"retention\",\"spec_hash\":\"";
  out += spec_hash_;
  out += "\"}\n";
  for (const TraceRecord& rec : records_) rec.append_line(out);
  return out;
}

void RetentionTrace::write(std::ostream& os) const { os << serialize(); }

std::uint64_t RetentionTrace::content_hash() const { return fnv1a64(serialize()); }

}  // namespace framebank
