// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "framebank/mid_bank.hpp"

namespace framebank {

/// Exact k-center solution found by exhaustive subset enumeration. Intended
/// for tests and debugging on small pools only.
struct OracleResult {
  std::vector<FrameId> selected;  ///< ascending frame_id
  double objective = 0.0;
  std::uint64_t enumerated = 0;   ///< subsets evaluated
};

/// Enumerates all C(n, k) center subsets (those containing `pinned` when
/// given) and returns a minimizer of the max-min cosine dissimilarity.
/// Objective ties are broken lexicographically by the sorted id set. Pools
/// larger than 15 are rejected outright rather than silently truncated.
OracleResult exact_k_center(std::span<const MidBank::Entry> pool, std::size_t k,
                            std::optional<FrameId> pinned = std::nullopt);

/// One random greedy-vs-oracle comparison instance: unit prototypes, a
/// center count, and the pinned seed id (the newest pool element).
struct KCenterInstance {
  std::vector<MidBank::Entry> pool;
  std::size_t k = 1;
  FrameId seed_id = 0;
};

KCenterInstance random_kcenter_instance(std::uint64_t seed, std::uint64_t index,
                                        std::size_t max_n, std::size_t max_k,
                                        std::span<const std::size_t> dims);

/// Greedy objective of the farthest-first selection on an instance.
double greedy_objective_on(const KCenterInstance& instance);

}  // namespace framebank
