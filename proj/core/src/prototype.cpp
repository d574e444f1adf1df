// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/prototype.hpp"

#include <cmath>
#include <string>

namespace framebank {

Prototype make_prototype(std::span<const double> raw_mean) {
  Prototype p;
  p.raw.assign(raw_mean.begin(), raw_mean.end());
  double norm = 0.0;
  for (double v : p.raw) norm += v * v;
  norm = std::sqrt(norm);
  if (norm < kDegenerateNorm) {
    p.degenerate = true;
    p.unit.assign(p.raw.size(), 0.0);
  } else {
    p.unit.resize(p.raw.size());
    for (std::size_t i = 0; i < p.raw.size(); ++i) p.unit[i] = p.raw[i] / norm;
  }
  return p;
}

Prototype compute_prototype(const FrameBlock& block, std::size_t layer) {
  check_structural(layer < block.num_layers(), "compute_prototype: layer out of range");
  const std::size_t heads = block.heads(layer);
  const std::size_t tokens = block.tokens();
  const std::size_t dim = block.key_dim(layer);
  const auto keys = block.keys(layer);

  std::vector<double> mean(dim, 0.0);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t t = 0; t < tokens; ++t) {
      const std::size_t offset = (h * tokens + t) * dim;
      for (std::size_t i = 0; i < dim; ++i) mean[i] += keys[offset + i];
    }
  }
  const double inv = 1.0 / static_cast<double>(heads * tokens);
  for (double& v : mean) v *= inv;
  return make_prototype(mean);
}

Prototype compute_token_prototype(const FrameBlock& block, std::size_t layer,
                                  std::size_t token) {
  check_structural(layer < block.num_layers(), "compute_token_prototype: layer out of range");
  check_structural(token < block.tokens(), "compute_token_prototype: token out of range");
  const std::size_t heads = block.heads(layer);
  const std::size_t dim = block.key_dim(layer);

  std::vector<double> mean(dim, 0.0);
  for (std::size_t h = 0; h < heads; ++h) {
    const auto row = block.key_row(layer, h, token);
    for (std::size_t i = 0; i < dim; ++i) mean[i] += row[i];
  }
  const double inv = 1.0 / static_cast<double>(heads);
  for (double& v : mean) v *= inv;
  return make_prototype(mean);
}

double cosine_distance(const Prototype& a, const Prototype& b,
                       bool* degenerate_involved) {
  check_structural(a.dim() == b.dim(), "cosine_distance: dimension mismatch");
  if (a.degenerate || b.degenerate) {
    if (degenerate_involved != nullptr) *degenerate_involved = true;
    return 1.0;
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.unit.size(); ++i) dot += a.unit[i] * b.unit[i];
  return 1.0 - dot;
}

}  // namespace framebank
