// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "framebank/manager.hpp"
#include "framebank/stream_sim.hpp"
#include "framebank/trace.hpp"

namespace framebank {

/// One run: a stream, a policy, and its knobs. `stream` is a scenario name
/// (optionally prefixed "scenario:"), a stream-spec JSON path, or a recorded
/// stream container path.
struct RunConfig {
  std::string stream = "slow-pan";
  PolicyKind policy = PolicyKind::kFrameKCenter;
  std::size_t mid = 16;
  std::size_t anchors = 4;
  std::uint64_t gap = 50;
  double phi_min = 0.3;
  double nu_min = 0.05;
  std::size_t recent_k = 0;
  std::size_t token_budget = 0;
  std::size_t grid_size = 8;
  double contrast_percentile = 0.9;
  std::optional<std::uint64_t> seed;    ///< overrides the spec seed
  std::optional<std::uint64_t> frames;  ///< overrides the spec length
  std::string out_dir;                  ///< empty: in-memory run, no files
  std::uint64_t checkpoint_every = 0;   ///< 0: no checkpoints
  std::uint64_t metrics_every = 1;      ///< row cadence in steps
  std::uint64_t radius_every = 1;       ///< coverage-radius cadence in rows
  bool heatmaps_at_checkpoints = false;
  std::size_t heatmap_layer = 0;
  std::size_t heatmap_head = 0;
  std::string label;  ///< column label in comparisons
};

struct MetricRow {
  std::uint64_t t = 0;
  std::size_t layer = 0;
  double b = 0.0;
  double c = 0.0;
  double s_star = 0.0;
  double s = 0.0;
  double d = 0.0;
  double rho = 0.0;
  std::optional<double> delta;
  std::optional<double> radius;
  std::uint64_t bytes = 0;
};

struct RunResult {
  std::string config_hash;
  std::string spec_hash;
  std::string config_json;
  std::string resolved_label;
  PolicyKind policy = PolicyKind::kFrameKCenter;
  std::uint64_t frames_run = 0;
  std::vector<MetricRow> rows;
  std::shared_ptr<RetentionTrace> trace;
  std::uint64_t trace_hash = 0;
  std::uint64_t metrics_hash = 0;  ///< hash of the metrics CSV bytes

  std::optional<std::uint64_t> layer_budget;    ///< per-layer token bound
  std::vector<std::uint64_t> final_sum_b;       ///< per layer, exact integers
  std::vector<std::uint64_t> max_retained;      ///< per layer, max over steps
  std::vector<std::uint64_t> max_loaded;        ///< per layer, max over steps
  std::vector<double> final_radius;             ///< per layer
  std::vector<std::uint64_t> final_bytes;       ///< per layer
  std::uint64_t final_bytes_total = 0;
  std::uint64_t budget_checks = 0;   ///< (step, layer) pairs verified
  std::uint64_t prop1_checks = 0;    ///< per-step sum_b <= budget verifications
  std::vector<std::uint32_t> cluster_ids;  ///< ground-truth cluster per frame
  /// Retained blocks with prototypes at the final step (frame policies).
  std::vector<std::vector<std::pair<FrameId, Prototype>>> final_retained;

  std::string metrics_path;
  std::string trace_path;
  std::string manifest_path;
};

RunResult run(const RunConfig& config);

/// Resolves the stream reference of a config to a spec (scenario or JSON).
/// Recorded containers have no spec; this throws for them.
StreamSpec resolve_spec(const RunConfig& config);

std::string config_hash(const RunConfig& config);
std::string canonical_config_json(const RunConfig& config);

struct SweepResult {
  std::vector<std::size_t> mids;
  std::vector<RunResult> runs;
  std::string summary_path;
};

/// Runs `base` once per mid capacity (workers run in parallel) and writes a
/// summary CSV with the final byte accounting per capacity.
SweepResult sweep(const RunConfig& base, const std::vector<std::size_t>& mids);

struct CompareResult {
  std::vector<std::string> labels;
  std::vector<RunResult> runs;
  std::string table_path;
  std::string table_csv;
};

/// Runs every config over the same stream and emits a per-step table of the
/// comparison metrics, aligned by (t, layer).
CompareResult compare(std::vector<RunConfig> configs, const std::string& out_dir);

}  // namespace framebank
