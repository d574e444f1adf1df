// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "framebank/format.hpp"
#include "framebank/rng.hpp"

namespace framebank {

std::size_t grid_cell(float x, float y, std::size_t grid) {
  auto clamp_idx = [grid](float v) {
    auto idx = static_cast<long>(static_cast<double>(v) * static_cast<double>(grid));
    if (idx < 0) idx = 0;
    if (idx >= static_cast<long>(grid)) idx = static_cast<long>(grid) - 1;
    return static_cast<std::size_t>(idx);
  };
  return clamp_idx(y) * grid + clamp_idx(x);
}

double support_fraction(std::span<const std::array<float, 2>> positions,
                        std::span<const std::uint32_t> retained, std::size_t grid) {
  check_config(grid >= 1, "support grid size must be >= 1");
  std::vector<bool> hit(grid * grid, false);
  std::size_t covered = 0;
  for (std::uint32_t idx : retained) {
    check_structural(idx < positions.size(), "support_fraction: token index out of range");
    const std::size_t cell = grid_cell(positions[idx][0], positions[idx][1], grid);
    if (!hit[cell]) {
      hit[cell] = true;
      ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(grid * grid);
}

SupportTracker::SupportTracker(std::size_t num_layers, std::size_t grid,
                               std::uint32_t tokens_per_frame)
    : grid_(grid), tokens_per_frame_(tokens_per_frame), layers_(num_layers) {
  check_config(grid >= 1, "support grid size must be >= 1");
}

double SupportTracker::cell_fraction(std::uint32_t cells) const {
  return static_cast<double>(cells) / static_cast<double>(grid_ * grid_);
}

void SupportTracker::ingest_frame(
    const FrameMeta& meta, const std::vector<std::vector<std::uint32_t>>& retained_per_layer) {
  check_structural(retained_per_layer.size() == layers_.size(),
                   "SupportTracker::ingest_frame: layer count mismatch");
  ++frames_seen_;

  std::vector<std::uint16_t> token_cell(tokens_per_frame_, 0);
  for (std::uint32_t i = 0; i < tokens_per_frame_; ++i) {
    token_cell[i] = static_cast<std::uint16_t>(
        grid_cell(meta.token_positions[i][0], meta.token_positions[i][1], grid_));
  }
  std::vector<std::uint16_t> star_counts(grid_ * grid_, 0);
  std::uint32_t star_cells = 0;
  for (std::uint32_t i = 0; i < tokens_per_frame_; ++i) {
    if (star_counts[token_cell[i]]++ == 0) ++star_cells;
  }
  s_star_sum_ += cell_fraction(star_cells);

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Live live;
    live.token_cell = token_cell;
    live.s_star_cells = star_cells;
    live.cell_counts.assign(grid_ * grid_, 0);
    for (std::uint32_t tok : retained_per_layer[l]) {
      ++live.b;
      if (live.cell_counts[token_cell[tok]]++ == 0) ++live.covered;
    }
    LayerState& state = layers_[l];
    state.sum_b += live.b;
    state.s_sum += cell_fraction(live.covered);
    state.rho_sum += live.s_star_cells == 0
                         ? 1.0
                         : static_cast<double>(live.covered) /
                               static_cast<double>(live.s_star_cells);
    state.live.emplace(meta.frame_id, std::move(live));
  }
}

void SupportTracker::drop_contribution(LayerState& state, Live& live) {
  state.sum_b -= live.b;
  state.s_sum -= cell_fraction(live.covered);
  state.rho_sum -= live.s_star_cells == 0
                       ? 1.0
                       : static_cast<double>(live.covered) /
                             static_cast<double>(live.s_star_cells);
}

void SupportTracker::evict_block(std::size_t layer, FrameId frame) {
  LayerState& state = layers_[layer];
  auto it = state.live.find(frame);
  check_structural(it != state.live.end(), "SupportTracker::evict_block: unknown frame");
  drop_contribution(state, it->second);
  // Fully evicted frames contribute b=0, S=0, rho=0 from here on.
  state.live.erase(it);
}

void SupportTracker::evict_token(std::size_t layer, FrameId frame, std::uint32_t token) {
  LayerState& state = layers_[layer];
  auto it = state.live.find(frame);
  check_structural(it != state.live.end(), "SupportTracker::evict_token: unknown frame");
  Live& live = it->second;
  drop_contribution(state, live);
  check_structural(live.b > 0, "SupportTracker::evict_token: frame already empty");
  --live.b;
  const std::uint16_t cell = live.token_cell[token];
  check_structural(live.cell_counts[cell] > 0, "SupportTracker::evict_token: bad cell count");
  if (--live.cell_counts[cell] == 0) --live.covered;
  state.sum_b += live.b;
  state.s_sum += cell_fraction(live.covered);
  state.rho_sum += live.s_star_cells == 0
                       ? 1.0
                       : static_cast<double>(live.covered) /
                             static_cast<double>(live.s_star_cells);
  if (live.b == 0) state.live.erase(it);
}

SupportTracker::Means SupportTracker::means(std::size_t layer) const {
  Means m;
  if (frames_seen_ == 0) return m;
  const auto frames = static_cast<double>(frames_seen_);
  const LayerState& state = layers_[layer];
  m.b = static_cast<double>(state.sum_b) / frames;
  m.c = 1.0 - m.b / static_cast<double>(tokens_per_frame_);
  m.s_star = s_star_sum_ / frames;
  m.s = state.s_sum / frames;
  m.d = m.s_star - m.s;
  m.rho = state.rho_sum / frames;  // fully evicted frames contribute 0
  return m;
}

std::uint64_t SupportTracker::sum_b(std::size_t layer) const {
  return layers_[layer].sum_b;
}

ProbeResult attention_probe(std::span<const double> query,
                            const std::vector<std::span<const double>>& unit_keys) {
  check_structural(!unit_keys.empty(), "attention_probe: needs at least one key");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(query.size()));
  ProbeResult out;
  out.logits.reserve(unit_keys.size());
  for (const auto& key : unit_keys) {
    check_structural(key.size() == query.size(), "attention_probe: dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < key.size(); ++i) dot += query[i] * key[i];
    out.logits.push_back(dot * inv_sqrt_d);
  }
  const double zmax = *std::max_element(out.logits.begin(), out.logits.end());
  double denom = 0.0;
  out.weights.reserve(out.logits.size());
  for (double z : out.logits) {
    const double e = std::exp(z - zmax);
    out.weights.push_back(e);
    denom += e;
  }
  for (double& w : out.weights) w /= denom;
  return out;
}

std::vector<double> probe_query(const FrameBlock& block, std::size_t layer,
                                std::size_t head, std::uint64_t seed, double sigma) {
  check_structural(layer < block.num_layers(), "probe_query: layer out of range");
  check_structural(head < block.heads(layer), "probe_query: head out of range");
  const std::size_t dim = block.key_dim(layer);
  std::vector<double> q(dim, 0.0);
  for (std::size_t t = 0; t < block.tokens(); ++t) {
    const auto row = block.key_row(layer, head, t);
    for (std::size_t i = 0; i < dim; ++i) q[i] += row[i];
  }
  for (double& v : q) v /= static_cast<double>(block.tokens());
  rng::Counter counter(rng::derive_key(seed, rng::Tag::kProbe, block.frame_id(), layer, head));
  for (double& v : q) v += sigma * counter.next_gaussian();
  return q;
}

std::optional<ContrastResult> contrast_statistic(
    const std::vector<std::span<const double>>& unit_keys,
    std::span<const std::size_t> dominant) {
  if (dominant.empty() || dominant.size() >= unit_keys.size()) return std::nullopt;
  const std::size_t dim = unit_keys.front().size();

  std::vector<bool> in_dominant(unit_keys.size(), false);
  for (std::size_t idx : dominant) {
    check_structural(idx < unit_keys.size(), "contrast_statistic: index out of range");
    in_dominant[idx] = true;
  }

  std::vector<double> center(dim, 0.0);
  for (std::size_t idx : dominant) {
    for (std::size_t i = 0; i < dim; ++i) center[i] += unit_keys[idx][i];
  }
  double cn = 0.0;
  for (double v : center) cn += v * v;
  cn = std::sqrt(cn);
  if (cn < kDegenerateNorm) return std::nullopt;
  for (double& v : center) v /= cn;

  double mean_dominant = 0.0;
  double mean_rest = 0.0;
  std::size_t rest = 0;
  for (std::size_t i = 0; i < unit_keys.size(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < dim; ++j) dot += unit_keys[i][j] * center[j];
    if (in_dominant[i]) {
      mean_dominant += dot;
    } else {
      mean_rest += dot;
      ++rest;
    }
  }
  mean_dominant /= static_cast<double>(dominant.size());
  mean_rest /= static_cast<double>(rest);

  ContrastResult out;
  out.center = std::move(center);
  out.delta = mean_dominant - mean_rest;
  return out;
}

std::vector<std::size_t> above_percentile(std::span<const double> values,
                                          double percentile) {
  check_config(percentile > 0.0 && percentile < 1.0,
               "percentile must lie strictly between 0 and 1");
  if (values.empty()) return {};
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank: smallest value whose rank fraction reaches the percentile.
  const auto rank = static_cast<std::size_t>(
      std::ceil(percentile * static_cast<double>(sorted.size())));
  const double threshold = sorted[std::min(rank, sorted.size()) - 1];
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > threshold) out.push_back(i);
  }
  return out;
}

void heatmap_export(const MemoryManager& manager, std::size_t layer, std::size_t head,
                    std::uint64_t step, std::string_view policy,
                    std::string_view config_hash, std::ostream& os) {
  const StreamConfig& cfg = manager.params().stream;
  check_structural(layer < cfg.num_layers, "heatmap_export: layer out of range");
  check_structural(head < cfg.heads[layer], "heatmap_export: head out of range");

  struct Row {
    FrameId frame;
    std::uint32_t token;
  };
  std::vector<Row> rows;
  manager.for_each_retained_token(
      layer, [&rows](FrameId frame, std::uint32_t token, std::span<const double>) {
        rows.push_back({frame, token});
      });

  os << "# {\"step\":" << step << ",\"layer\":" << layer << ",\"head\":" << head
     << ",\"policy\":\"" << policy << "\",\"rows\":" << rows.size()
     << ",\"config_hash\":\"" << config_hash << "\"}\n";
  for (const Row& row : rows) {
    const BlockRecord* rec = manager.record(row.frame);
    check_invariant(rec != nullptr, "heatmap_export: retained frame missing");
    const auto key = rec->block->key_row(layer, head, row.token);
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (i != 0) os << ',';
      os << format_float(key[i]);
    }
    os << '\n';
  }
}

}  // namespace framebank
