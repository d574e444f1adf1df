// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "framebank/errors.hpp"

namespace framebank {

using FrameId = std::uint64_t;

/// Static shape of a stream: layer count, per-layer head counts and key
/// dimensions, tokens contributed per frame, and the element width used for
/// byte accounting. Treated as immutable for the lifetime of a stream.
struct StreamConfig {
  std::size_t num_layers = 1;
  std::vector<std::size_t> heads;    ///< per layer, size num_layers
  std::size_t tokens_per_frame = 1;  ///< N
  std::vector<std::size_t> key_dim;  ///< per layer, size num_layers
  std::size_t bytes_per_element = 2;

  void validate() const;
};

/// Camera pose summary attached to a frame: unit quaternion (w, x, y, z) plus
/// translation.
struct PoseSignature {
  std::array<double, 4> quaternion{1.0, 0.0, 0.0, 0.0};
  std::array<double, 3> translation{0.0, 0.0, 0.0};

  /// Unit 7-vector: quaternion concatenated with t/(1+|t|), then normalized.
  /// Bounding the translation keeps the inner product between signatures
  /// well defined regardless of scene scale.
  std::array<double, 7> normalized() const;
};

struct FrameMeta {
  FrameId frame_id = 0;
  double confidence = 1.0;  ///< q in [0,1]
  double sharpness = 1.0;   ///< s in [0,1]
  std::optional<PoseSignature> pose;
  std::vector<std::array<float, 2>> token_positions;  ///< in [0,1]^2, size N

  void validate(std::size_t tokens_per_frame) const;
};

/// One frame's incremental KV contribution: per-layer [H, N, D] key and value
/// tensors (row-major float32) plus frame metadata. Keys and values always
/// share a shape per layer.
class FrameBlock {
 public:
  FrameBlock() = default;
  FrameBlock(FrameMeta meta, const StreamConfig& config);

  const FrameMeta& meta() const { return meta_; }
  FrameMeta& meta() { return meta_; }
  FrameId frame_id() const { return meta_.frame_id; }

  std::size_t num_layers() const { return heads_.size(); }
  std::size_t heads(std::size_t layer) const { return heads_[layer]; }
  std::size_t tokens() const { return tokens_; }
  std::size_t key_dim(std::size_t layer) const { return dims_[layer]; }

  std::span<float> keys(std::size_t layer) { return keys_[layer]; }
  std::span<const float> keys(std::size_t layer) const { return keys_[layer]; }
  std::span<float> values(std::size_t layer) { return values_[layer]; }
  std::span<const float> values(std::size_t layer) const { return values_[layer]; }

  /// One [D] key row for (layer, head, token).
  std::span<const float> key_row(std::size_t layer, std::size_t head,
                                 std::size_t token) const;

  void validate(const StreamConfig& config) const;

 private:
  FrameMeta meta_;
  std::vector<std::size_t> heads_;
  std::vector<std::size_t> dims_;
  std::size_t tokens_ = 0;
  std::vector<std::vector<float>> keys_;
  std::vector<std::vector<float>> values_;
};

/// KV-cache bytes for one layer: heads * tokens * dim * 2 * element width.
/// The factor of 2 covers the key and value planes.
inline std::uint64_t kv_bytes(std::uint64_t heads, std::uint64_t tokens,
                              std::uint64_t dim, std::uint64_t bytes_per_element) {
  return heads * tokens * dim * 2ull * bytes_per_element;
}

}  // namespace framebank
