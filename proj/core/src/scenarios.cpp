// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "framebank/stream_sim.hpp"

namespace framebank {

namespace {

StreamConfig default_config() {
  StreamConfig cfg;
  cfg.num_layers = 2;
  cfg.heads = {2, 2};
  cfg.tokens_per_frame = 16;
  cfg.key_dim = {16, 16};
  cfg.bytes_per_element = 2;
  return cfg;
}

std::vector<Scenario> build_library() {
  std::vector<Scenario> lib;

  {
    // High redundancy: a single slowly panning viewpoint.
    StreamSpec spec;
    spec.seed = 1001;
    spec.frames = 600;
    spec.config = default_config();
    spec.clusters = {ClusterSpec{{}, 0.05, 0.05, 600}};
    spec.drift_rate = 0.002;
    spec.noise_sigma = 0.02;
    spec.meta = {MetaSchedule::Kind::kConstant, 0.9, 0.9};
    spec.pose = {PoseTrajectory::Kind::kCircular, 0.005, 2.0};
    lib.push_back({"slow-pan", "single cluster, slow drift, high redundancy", spec});
  }
  {
    // Sixteen separated clusters visited cyclically. With a 16-slot budget
    // every reserved recency slot forces a whole room out of coverage, so
    // coverage degrades sharply as recency reservations grow.
    StreamSpec spec;
    spec.seed = 1002;
    spec.frames = 720;
    spec.config = default_config();
    spec.clusters.assign(16, ClusterSpec{{}, 0.35, 0.10, 20});
    spec.drift_rate = 0.0;
    spec.noise_sigma = 0.01;
    spec.meta = {MetaSchedule::Kind::kConstant, 0.9, 0.9};
    spec.pose = {PoseTrajectory::Kind::kCircular, 0.01, 2.0};
    lib.push_back({"multi-room", "sixteen separated clusters, cyclic visits", spec});
  }
  {
    // A -> B -> A -> ... with long dwells; exercises anchors on the return.
    StreamSpec spec;
    spec.seed = 1003;
    spec.frames = 600;
    spec.config = default_config();
    spec.clusters.assign(2, ClusterSpec{{}, 0.10, 0.08, 100});
    spec.drift_rate = 0.0;
    spec.noise_sigma = 0.02;
    spec.meta = {MetaSchedule::Kind::kConstant, 0.9, 0.9};
    spec.pose = {PoseTrajectory::Kind::kCircular, 0.02, 3.0};
    lib.push_back({"revisit", "two clusters with long dwells and returns", spec});
  }
  {
    // Confidence/sharpness collapse over a mid-stream interval.
    StreamSpec spec;
    spec.seed = 1004;
    spec.frames = 600;
    spec.config = default_config();
    spec.clusters = {ClusterSpec{{}, 0.08, 0.05, 600}};
    spec.drift_rate = 0.002;
    spec.noise_sigma = 0.02;
    spec.meta.kind = MetaSchedule::Kind::kDip;
    spec.meta.q = 0.9;
    spec.meta.s = 0.9;
    spec.meta.dip_begin = 200;
    spec.meta.dip_end = 300;
    spec.meta.dip_q = 0.1;
    spec.meta.dip_s = 0.1;
    spec.pose = {PoseTrajectory::Kind::kCircular, 0.01, 2.0};
    lib.push_back({"degraded-interval",
                   "metadata quality dips in [200,300); gates promotions", spec});
  }
  {
    // Long horizon: one slowly drifting cluster with heavy per-token noise.
    // Token keys carry substantial outlier mass that frame prototypes average
    // away, separating token-level from block-level retention behavior.
    StreamSpec spec;
    spec.seed = 1005;
    spec.frames = 5000;
    spec.config.num_layers = 1;
    spec.config.heads = {1};
    spec.config.tokens_per_frame = 16;
    spec.config.key_dim = {16};
    spec.config.bytes_per_element = 2;
    spec.clusters = {ClusterSpec{{}, 0.08, 0.05, 5000}};
    spec.drift_rate = 0.0002;
    spec.noise_sigma = 1.0;
    spec.meta = {MetaSchedule::Kind::kConstant, 0.9, 0.9};
    spec.pose = {PoseTrajectory::Kind::kCircular, 0.002, 2.0};
    lib.push_back({"long-horizon", "5000 frames, slow drift, noisy keys", spec});
  }
  return lib;
}

}  // namespace

const std::vector<Scenario>& scenario_library() {
  static const std::vector<Scenario> lib = build_library();
  return lib;
}

StreamSpec scenario_spec(std::string_view name) {
  for (const Scenario& s : scenario_library()) {
    if (s.name == name) return s.spec;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

}  // namespace framebank
