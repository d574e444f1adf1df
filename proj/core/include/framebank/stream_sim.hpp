// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "framebank/types.hpp"

namespace framebank {

/// One key-space cluster the stream dwells in. Frame directions jitter around
/// the (possibly drifted) center with `frame_spread`; individual token keys
/// jitter around the frame direction with `token_spread`.
struct ClusterSpec {
  /// Unit center direction per layer. Empty means derived from the seed.
  std::vector<std::vector<double>> centers;
  double frame_spread = 0.1;
  double token_spread = 0.05;
  std::uint64_t dwell = 1;
};

struct MetaSchedule {
  enum class Kind { kConstant, kUniform, kDip };
  Kind kind = Kind::kConstant;
  double q = 1.0;
  double s = 1.0;
  double q_low = 0.5, q_high = 1.0;  ///< kUniform bounds
  double s_low = 0.5, s_high = 1.0;
  std::uint64_t dip_begin = 0, dip_end = 0;  ///< kDip interval [begin, end)
  double dip_q = 0.0, dip_s = 0.0;
};

struct PoseTrajectory {
  enum class Kind { kNone, kCircular, kRandomWalk };
  Kind kind = Kind::kCircular;
  double angular_step = 0.01;  ///< kCircular: radians per frame about z
  double radius = 1.0;
  double walk_sigma = 0.01;    ///< kRandomWalk step scale
};

enum class PositionLayout { kGrid, kRandom };

/// Full description of a synthetic stream. The same spec always produces a
/// bit-identical stream: every draw comes from a counter generator keyed by
/// (seed, purpose tag, frame, layer, head, token), so values do not depend on
/// evaluation order.
struct StreamSpec {
  std::uint64_t seed = 0;
  std::uint64_t frames = 1;  ///< T
  StreamConfig config;
  std::vector<ClusterSpec> clusters;
  double drift_rate = 0.0;   ///< radians/frame applied to cluster centers
  double noise_sigma = 0.0;  ///< isotropic key noise
  MetaSchedule meta;
  PoseTrajectory pose;
  PositionLayout layout = PositionLayout::kGrid;
  std::vector<std::uint64_t> zero_key_frames;  ///< frames emitted with all-zero keys
  std::uint64_t value_salt = 0;  ///< perturbs value draws only; selection must not notice

  void validate() const;
};

struct GeneratedFrame {
  FrameBlock block;
  std::uint32_t cluster_id = 0;
};

/// Sequential frame generator. Pure per (spec, t) except the random-walk pose
/// trajectory, whose state accumulates in frame order.
class StreamCursor {
 public:
  explicit StreamCursor(StreamSpec spec);

  const StreamSpec& spec() const { return spec_; }
  const StreamConfig& config() const { return spec_.config; }
  std::uint64_t total_frames() const { return spec_.frames; }
  std::uint64_t position() const { return next_; }
  bool done() const { return next_ >= spec_.frames; }

  GeneratedFrame next();

 private:
  StreamSpec spec_;
  std::vector<std::vector<std::vector<double>>> centers_;  ///< [cluster][layer][dim]
  std::vector<std::vector<std::vector<double>>> drift_axes_;
  std::uint64_t next_ = 0;
  std::array<double, 4> walk_quat_{1.0, 0.0, 0.0, 0.0};
  std::array<double, 3> walk_translation_{0.0, 0.0, 0.0};
};

/// Index of the cluster active at frame t under the dwell cycle.
std::uint32_t active_cluster(const StreamSpec& spec, std::uint64_t t);

struct Scenario {
  std::string name;
  std::string description;
  StreamSpec spec;
};

/// Named stream presets covering the regimes the retention policies react
/// to: redundancy, separated clusters, revisits, degraded metadata, and long
/// horizons.
const std::vector<Scenario>& scenario_library();
StreamSpec scenario_spec(std::string_view name);

}  // namespace framebank
