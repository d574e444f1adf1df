// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "framebank/manager.hpp"
#include "framebank/types.hpp"

namespace framebank {

/// Grid cell of a position in [0,1]^2 (boundary clamped into range).
std::size_t grid_cell(float x, float y, std::size_t grid);

/// Spatial-coverage support proxy: fraction of grid x grid cells holding at
/// least one of the listed tokens.
double support_fraction(std::span<const std::array<float, 2>> positions,
                        std::span<const std::uint32_t> retained, std::size_t grid);

/// Rolling per-layer support bookkeeping over a whole run. Maintains, for
/// every source frame seen so far, the retained-token count b_t and the
/// spatial support of the surviving tokens, under incremental evictions.
/// Mean statistics are O(1) per query; updates are O(changed tokens).
class SupportTracker {
 public:
  SupportTracker(std::size_t num_layers, std::size_t grid, std::uint32_t tokens_per_frame);

  /// Registers frame meta (positions fix S*_t once) and the per-layer token
  /// subsets initially retained.
  void ingest_frame(const FrameMeta& meta,
                    const std::vector<std::vector<std::uint32_t>>& retained_per_layer);
  void evict_block(std::size_t layer, FrameId frame);
  void evict_token(std::size_t layer, FrameId frame, std::uint32_t token);

  struct Means {
    double b = 0.0;       ///< mean retained tokens per source frame
    double c = 0.0;       ///< mean compression ratio 1 - b_t/N
    double s_star = 0.0;  ///< mean support before compression
    double s = 0.0;       ///< mean surviving support
    double d = 0.0;       ///< mean support damage
    double rho = 0.0;     ///< mean effective support ratio
  };
  Means means(std::size_t layer) const;
  std::uint64_t sum_b(std::size_t layer) const;
  std::uint64_t frames_seen() const { return frames_seen_; }

 private:
  struct Live {
    std::uint64_t b = 0;
    std::uint32_t covered = 0;
    std::uint32_t s_star_cells = 0;
    std::vector<std::uint16_t> cell_counts;
    std::vector<std::uint16_t> token_cell;
  };
  struct LayerState {
    std::unordered_map<FrameId, Live> live;
    std::uint64_t sum_b = 0;
    double s_sum = 0.0;
    double rho_sum = 0.0;
  };

  double cell_fraction(std::uint32_t cells) const;
  void drop_contribution(LayerState& state, Live& live);

  std::size_t grid_;
  std::uint32_t tokens_per_frame_;
  std::uint64_t frames_seen_ = 0;
  double s_star_sum_ = 0.0;
  std::vector<LayerState> layers_;
};

struct ProbeResult {
  std::vector<double> logits;
  std::vector<double> weights;
};

/// Attention probe: z_i = <q, k_i>/sqrt(D) over unit keys, max-subtracted
/// softmax weights. Requires at least one key.
ProbeResult attention_probe(std::span<const double> query,
                            const std::vector<std::span<const double>>& unit_keys);

/// Probe query for a step: the per-head mean key of the current block plus a
/// seeded Gaussian perturbation.
std::vector<double> probe_query(const FrameBlock& block, std::size_t layer,
                                std::size_t head, std::uint64_t seed,
                                double sigma = 0.1);

struct ContrastResult {
  std::vector<double> center;  ///< normalized mean of the dominant set
  double delta = 0.0;
};

/// Contrast statistic over unit keys: mean cosine of the dominant subset to
/// its own normalized center minus the mean cosine of the remainder. Empty
/// dominant set, empty remainder, or a degenerate center yield nullopt.
std::optional<ContrastResult> contrast_statistic(
    const std::vector<std::span<const double>>& unit_keys,
    std::span<const std::size_t> dominant);

/// Indices whose value strictly exceeds the nearest-rank percentile of
/// `values` (percentile in (0,1)).
std::vector<std::size_t> above_percentile(std::span<const double> values,
                                          double percentile);

/// Writes the retained-key heatmap matrix for one (layer, head) slice:
/// rows are retained tokens in internal memory order, columns the raw key
/// dimensions, CSV with a one-line JSON header comment.
void heatmap_export(const MemoryManager& manager, std::size_t layer, std::size_t head,
                    std::uint64_t step, std::string_view policy,
                    std::string_view config_hash, std::ostream& os);

}  // namespace framebank
