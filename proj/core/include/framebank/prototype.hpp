// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "framebank/types.hpp"

namespace framebank {

inline constexpr double kDegenerateNorm = 1e-12;

/// Mean key direction of a block for one layer. `raw` is the plain mean,
/// `unit` the L2-normalized copy used by every distance computation. A mean
/// whose norm falls below kDegenerateNorm is flagged degenerate and keeps an
/// all-zero unit vector.
struct Prototype {
  std::vector<double> raw;
  std::vector<double> unit;
  bool degenerate = false;

  std::size_t dim() const { return raw.size(); }
};

/// Builds a prototype from a raw mean vector (normalizes, flags degeneracy).
Prototype make_prototype(std::span<const double> raw_mean);

/// Mean of all (head, token) key rows of `layer`, accumulated in double
/// regardless of the float32 storage, then normalized.
Prototype compute_prototype(const FrameBlock& block, std::size_t layer);

/// Same construction restricted to a single token: mean of that token's key
/// rows across heads. Used by token-granularity retention and diagnostics.
Prototype compute_token_prototype(const FrameBlock& block, std::size_t layer,
                                  std::size_t token);

/// Cosine dissimilarity 1 - <a.unit, b.unit> in [0, 2]. When either side is
/// degenerate the distance is 1.0 by convention (uninformative direction) and
/// *degenerate_involved, when given, is set.
double cosine_distance(const Prototype& a, const Prototype& b,
                       bool* degenerate_involved = nullptr);

}  // namespace framebank
