// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/types.hpp"

#include <cmath>
#include <string>

namespace framebank {

void StreamConfig::validate() const {
  check_structural(num_layers >= 1, "StreamConfig.num_layers must be >= 1");
  check_structural(heads.size() == num_layers,
                   "StreamConfig.heads must have one entry per layer");
  check_structural(key_dim.size() == num_layers,
                   "StreamConfig.key_dim must have one entry per layer");
  check_structural(tokens_per_frame >= 1, "StreamConfig.tokens_per_frame must be >= 1");
  check_structural(bytes_per_element >= 1, "StreamConfig.bytes_per_element must be >= 1");
  for (std::size_t l = 0; l < num_layers; ++l) {
    check_structural(heads[l] >= 1, "StreamConfig.heads[" + std::to_string(l) + "] must be >= 1");
    check_structural(key_dim[l] >= 1,
                     "StreamConfig.key_dim[" + std::to_string(l) + "] must be >= 1");
  }
}

std::array<double, 7> PoseSignature::normalized() const {
  std::array<double, 7> sig{};
  double tnorm = 0.0;
  for (double v : translation) tnorm += v * v;
  tnorm = std::sqrt(tnorm);
  const double tscale = 1.0 / (1.0 + tnorm);
  for (std::size_t i = 0; i < 4; ++i) sig[i] = quaternion[i];
  for (std::size_t i = 0; i < 3; ++i) sig[4 + i] = translation[i] * tscale;
  double norm = 0.0;
  for (double v : sig) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& v : sig) v /= norm;
  }
  return sig;
}

void FrameMeta::validate(std::size_t tokens_per_frame) const {
  check_structural(confidence >= 0.0 && confidence <= 1.0,
                   "FrameMeta.confidence must lie in [0,1]");
  check_structural(sharpness >= 0.0 && sharpness <= 1.0,
                   "FrameMeta.sharpness must lie in [0,1]");
  if (pose) {
    double qn = 0.0;
    for (double v : pose->quaternion) qn += v * v;
    check_structural(std::abs(std::sqrt(qn) - 1.0) <= 1e-6,
                     "FrameMeta.pose quaternion must be unit norm");
  }
  check_structural(token_positions.empty() || token_positions.size() == tokens_per_frame,
                   "FrameMeta.token_positions must be empty or size N");
}

FrameBlock::FrameBlock(FrameMeta meta, const StreamConfig& config)
    : meta_(std::move(meta)),
      heads_(config.heads),
      dims_(config.key_dim),
      tokens_(config.tokens_per_frame) {
  keys_.resize(config.num_layers);
  values_.resize(config.num_layers);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const std::size_t n = heads_[l] * tokens_ * dims_[l];
    keys_[l].assign(n, 0.0f);
    values_[l].assign(n, 0.0f);
  }
}

std::span<const float> FrameBlock::key_row(std::size_t layer, std::size_t head,
                                           std::size_t token) const {
  const std::size_t d = dims_[layer];
  const std::size_t offset = (head * tokens_ + token) * d;
  return std::span<const float>(keys_[layer]).subspan(offset, d);
}

void FrameBlock::validate(const StreamConfig& config) const {
  check_structural(num_layers() == config.num_layers,
                   "FrameBlock layer count does not match stream config");
  check_structural(tokens_ == config.tokens_per_frame,
                   "FrameBlock token count does not match stream config");
  for (std::size_t l = 0; l < num_layers(); ++l) {
    check_structural(heads_[l] == config.heads[l] && dims_[l] == config.key_dim[l],
                     "FrameBlock shape does not match stream config at layer " +
                         std::to_string(l));
    const std::size_t n = heads_[l] * tokens_ * dims_[l];
    check_structural(keys_[l].size() == n && values_[l].size() == n,
                     "FrameBlock keys/values shape mismatch at layer " + std::to_string(l));
  }
  meta_.validate(tokens_);
}

}  // namespace framebank
