// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/stream_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "framebank/rng.hpp"

namespace framebank {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  return d;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void normalize(std::vector<double>& v) {
  const double n = norm(v);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
}

std::vector<double> gaussian_vector(std::uint64_t key, std::size_t dim) {
  rng::Counter counter(key);
  std::vector<double> v(dim);
  for (double& x : v) x = counter.next_gaussian();
  return v;
}

// Gaussian offset with expected squared norm scale^2, i.e. `scale` acts as an
// angular jitter scale regardless of the key dimension.
std::vector<double> jitter_vector(std::uint64_t key, std::size_t dim, double scale) {
  auto v = gaussian_vector(key, dim);
  const double s = scale / std::sqrt(static_cast<double>(dim));
  for (double& x : v) x *= s;
  return v;
}

// Unit direction orthogonal to `center`, derived from the seed. Spans the
// plane the cluster center rotates in under drift.
std::vector<double> drift_axis(std::uint64_t key, std::span<const double> center) {
  std::vector<double> axis = gaussian_vector(key, center.size());
  const double along = dot(axis, center);
  for (std::size_t i = 0; i < axis.size(); ++i) axis[i] -= along * center[i];
  const double n = norm(axis);
  if (n < 1e-9) {
    // Center happened to align with the draw; fall back to a basis swap.
    std::fill(axis.begin(), axis.end(), 0.0);
    axis[0] = center.size() > 1 ? -center[1] : 1.0;
    if (center.size() > 1) axis[1] = center[0];
    normalize(axis);
  } else {
    for (double& x : axis) x /= n;
  }
  return axis;
}

}  // namespace

void StreamSpec::validate() const {
  config.validate();
  check_config(!clusters.empty(), "StreamSpec.clusters must not be empty");
  check_config(frames >= 1, "StreamSpec.frames must be >= 1");
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const ClusterSpec& cluster = clusters[c];
    check_config(cluster.dwell >= 1, "cluster dwell must be >= 1");
    check_config(cluster.frame_spread >= 0.0 && cluster.token_spread >= 0.0,
                 "cluster spreads must be non-negative");
    if (!cluster.centers.empty()) {
      check_structural(cluster.centers.size() == config.num_layers,
                       "cluster centers must cover every layer");
      for (std::size_t l = 0; l < cluster.centers.size(); ++l) {
        check_structural(cluster.centers[l].size() == config.key_dim[l],
                         "cluster center dimension mismatch");
        const double n = norm(cluster.centers[l]);
        check_structural(std::abs(n - 1.0) <= 1e-6, "cluster centers must be unit norm");
      }
    }
  }
  check_config(noise_sigma >= 0.0, "noise_sigma must be non-negative");
}

std::uint32_t active_cluster(const StreamSpec& spec, std::uint64_t t) {
  std::uint64_t cycle = 0;
  for (const auto& c : spec.clusters) cycle += c.dwell;
  std::uint64_t r = t % cycle;
  for (std::size_t i = 0; i < spec.clusters.size(); ++i) {
    if (r < spec.clusters[i].dwell) return static_cast<std::uint32_t>(i);
    r -= spec.clusters[i].dwell;
  }
  return 0;
}

StreamCursor::StreamCursor(StreamSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const std::size_t layers = spec_.config.num_layers;
  centers_.resize(spec_.clusters.size());
  drift_axes_.resize(spec_.clusters.size());
  for (std::size_t c = 0; c < spec_.clusters.size(); ++c) {
    centers_[c].resize(layers);
    drift_axes_[c].resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      if (!spec_.clusters[c].centers.empty()) {
        centers_[c][l] = spec_.clusters[c].centers[l];
      } else {
        centers_[c][l] = gaussian_vector(
            rng::derive_key(spec_.seed, rng::Tag::kClusterCenter, c, l),
            spec_.config.key_dim[l]);
        normalize(centers_[c][l]);
      }
      drift_axes_[c][l] = drift_axis(
          rng::derive_key(spec_.seed, rng::Tag::kClusterCenter, c, l, 1), centers_[c][l]);
    }
  }
}

GeneratedFrame StreamCursor::next() {
  check_structural(!done(), "StreamCursor::next past end of stream");
  const std::uint64_t t = next_++;
  const std::uint32_t cluster_id = active_cluster(spec_, t);
  const ClusterSpec& cluster = spec_.clusters[cluster_id];
  const StreamConfig& cfg = spec_.config;
  const auto n = static_cast<std::uint32_t>(cfg.tokens_per_frame);

  FrameMeta meta;
  meta.frame_id = t;

  switch (spec_.meta.kind) {
    case MetaSchedule::Kind::kConstant:
      meta.confidence = spec_.meta.q;
      meta.sharpness = spec_.meta.s;
      break;
    case MetaSchedule::Kind::kUniform: {
      rng::Counter cq(rng::derive_key(spec_.seed, rng::Tag::kMetaQ, t));
      rng::Counter cs(rng::derive_key(spec_.seed, rng::Tag::kMetaS, t));
      meta.confidence =
          spec_.meta.q_low + (spec_.meta.q_high - spec_.meta.q_low) * cq.next_uniform();
      meta.sharpness =
          spec_.meta.s_low + (spec_.meta.s_high - spec_.meta.s_low) * cs.next_uniform();
      break;
    }
    case MetaSchedule::Kind::kDip:
      if (t >= spec_.meta.dip_begin && t < spec_.meta.dip_end) {
        meta.confidence = spec_.meta.dip_q;
        meta.sharpness = spec_.meta.dip_s;
      } else {
        meta.confidence = spec_.meta.q;
        meta.sharpness = spec_.meta.s;
      }
      break;
  }

  switch (spec_.pose.kind) {
    case PoseTrajectory::Kind::kNone:
      break;
    case PoseTrajectory::Kind::kCircular: {
      const double theta = spec_.pose.angular_step * static_cast<double>(t);
      PoseSignature pose;
      pose.quaternion = {std::cos(theta / 2.0), 0.0, 0.0, std::sin(theta / 2.0)};
      pose.translation = {spec_.pose.radius * std::cos(theta),
                          spec_.pose.radius * std::sin(theta), 0.0};
      meta.pose = pose;
      break;
    }
    case PoseTrajectory::Kind::kRandomWalk: {
      rng::Counter walk(rng::derive_key(spec_.seed, rng::Tag::kPose, t));
      for (double& q : walk_quat_) q += spec_.pose.walk_sigma * walk.next_gaussian();
      double qn = 0.0;
      for (double q : walk_quat_) qn += q * q;
      qn = std::sqrt(qn);
      if (qn < 1e-9) {
        walk_quat_ = {1.0, 0.0, 0.0, 0.0};
      } else {
        for (double& q : walk_quat_) q /= qn;
      }
      for (double& x : walk_translation_) x += spec_.pose.walk_sigma * walk.next_gaussian();
      PoseSignature pose;
      pose.quaternion = walk_quat_;
      pose.translation = walk_translation_;
      meta.pose = pose;
      break;
    }
  }

  meta.token_positions.resize(n);
  if (spec_.layout == PositionLayout::kGrid) {
    const auto side = static_cast<std::uint32_t>(
        std::ceil(std::sqrt(static_cast<double>(n))));
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint32_t row = i / side;
      const std::uint32_t col = i % side;
      meta.token_positions[i] = {
          (static_cast<float>(col) + 0.5f) / static_cast<float>(side),
          (static_cast<float>(row) + 0.5f) / static_cast<float>(side)};
    }
  } else {
    for (std::uint32_t i = 0; i < n; ++i) {
      rng::Counter cp(rng::derive_key(spec_.seed, rng::Tag::kPosition, t, i));
      meta.token_positions[i] = {static_cast<float>(cp.next_uniform()),
                                 static_cast<float>(cp.next_uniform())};
    }
  }

  FrameBlock block(std::move(meta), cfg);
  const bool zero_keys = std::find(spec_.zero_key_frames.begin(),
                                   spec_.zero_key_frames.end(),
                                   t) != spec_.zero_key_frames.end();

  const double angle = spec_.drift_rate * static_cast<double>(t);
  const double cos_a = std::cos(angle);
  const double sin_a = std::sin(angle);

  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    const std::size_t dim = cfg.key_dim[l];
    const auto& base = centers_[cluster_id][l];
    const auto& axis = drift_axes_[cluster_id][l];

    std::vector<double> center(dim);
    for (std::size_t i = 0; i < dim; ++i) center[i] = base[i] * cos_a + axis[i] * sin_a;

    std::vector<double> frame_dir = center;
    if (cluster.frame_spread > 0.0) {
      const auto jitter = jitter_vector(
          rng::derive_key(spec_.seed, rng::Tag::kKeyFrameJitter, t, l), dim,
          cluster.frame_spread);
      for (std::size_t i = 0; i < dim; ++i) frame_dir[i] += jitter[i];
      const double fn = norm(frame_dir);
      if (fn < 1e-9) {
        frame_dir = center;
      } else {
        for (double& x : frame_dir) x /= fn;
      }
    }

    auto keys = block.keys(l);
    auto values = block.values(l);
    for (std::size_t h = 0; h < cfg.heads[l]; ++h) {
      for (std::uint32_t tok = 0; tok < n; ++tok) {
        const std::size_t offset = (h * n + tok) * dim;
        rng::Counter cv(rng::derive_key(spec_.seed ^ (spec_.value_salt * rng::kGolden),
                                        rng::Tag::kValue, t, l, h, tok));
        for (std::size_t i = 0; i < dim; ++i) {
          values[offset + i] = static_cast<float>(cv.next_gaussian());
        }
        if (zero_keys) continue;

        std::vector<double> key = frame_dir;
        if (cluster.token_spread > 0.0) {
          const double s = cluster.token_spread / std::sqrt(static_cast<double>(dim));
          rng::Counter cj(
              rng::derive_key(spec_.seed, rng::Tag::kKeyTokenSpread, t, l, h, tok));
          for (std::size_t i = 0; i < dim; ++i) key[i] += s * cj.next_gaussian();
        }
        if (spec_.noise_sigma > 0.0) {
          const double s = spec_.noise_sigma / std::sqrt(static_cast<double>(dim));
          rng::Counter cn(rng::derive_key(spec_.seed, rng::Tag::kKeyNoise, t, l, h, tok));
          for (std::size_t i = 0; i < dim; ++i) key[i] += s * cn.next_gaussian();
        }
        const double kn = norm(key);
        if (kn < 1e-9) key = frame_dir;  // keep key norms non-zero unless asked
        const double scale = kn < 1e-9 ? 1.0 : 1.0 / kn;
        for (std::size_t i = 0; i < dim; ++i) {
          keys[offset + i] = static_cast<float>(key[i] * scale);
        }
      }
    }
  }

  return GeneratedFrame{std::move(block), cluster_id};
}

}  // namespace framebank
