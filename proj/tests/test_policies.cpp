// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "framebank/manager.hpp"
#include "framebank/policies.hpp"
#include "framebank/stream_sim.hpp"
#include "test_helpers.hpp"

using namespace framebank;
using test::tiny_config;

namespace {

StreamSpec two_cluster_stream(std::uint64_t frames, const StreamConfig& cfg,
                              std::uint64_t dwell, double frame_spread = 0.05) {
  StreamSpec spec;
  spec.seed = 99;
  spec.frames = frames;
  spec.config = cfg;
  spec.clusters.assign(2, ClusterSpec{{}, frame_spread, 0.05, dwell});
  spec.meta = {MetaSchedule::Kind::kConstant, 0.9, 0.9};
  spec.pose = {PoseTrajectory::Kind::kCircular, 0.01, 1.0};
  return spec;
}

ManagerParams params_for(PolicyKind policy, const StreamConfig& cfg, std::size_t mid,
                         std::size_t recent_k = 0, std::size_t token_budget = 0) {
  ManagerParams p;
  p.stream = cfg;
  p.policy = policy;
  p.mid_capacity = mid;
  p.anchor_capacity = 0;
  p.recent_k = recent_k;
  p.token_budget = token_budget;
  return p;
}

}  // namespace

TEST_CASE("recent-k: K=0 produces a byte-identical trace to frame-kcenter") {
  const auto cfg = tiny_config(2, 1, 4, 8);
  const StreamSpec spec = two_cluster_stream(160, cfg, 20);

  RetentionTrace trace_default("shared");
  RetentionTrace trace_recent("shared");
  MemoryManager a(params_for(PolicyKind::kFrameKCenter, cfg, 6));
  MemoryManager b(params_for(PolicyKind::kRecentK, cfg, 6, 0));

  StreamCursor ca(spec);
  StreamCursor cb(spec);
  while (!ca.done()) {
    a.step(ca.next().block, trace_default);
    b.step(cb.next().block, trace_recent);
  }
  CHECK(trace_default.serialize() == trace_recent.serialize());
  CHECK(trace_default.content_hash() == trace_recent.content_hash());
}

TEST_CASE("recent-k: K=B_M is a pure FIFO sliding window") {
  const auto cfg = tiny_config(1, 1, 4, 8);
  MemoryManager manager(params_for(PolicyKind::kRecentK, cfg, 5, 5));
  RetentionTrace trace("test");
  StreamCursor cursor(two_cluster_stream(40, cfg, 10));
  while (!cursor.done()) {
    manager.step(cursor.next().block, trace);
    const FrameId t = manager.next_frame() - 1;
    const auto retained = manager.retained_per_frame(0);
    if (t >= 4) {
      REQUIRE(retained.size() == 5);
      // Exactly the last five frames, in order.
      for (std::size_t i = 0; i < 5; ++i) {
        CHECK(retained[i].first == t - 4 + i);
      }
    }
  }
}

TEST_CASE("recent-k: reserved frames plus k-center coverage of older clusters") {
  // Two far clusters, alternating slowly. The reserved window holds
  // near-duplicates; the k-center slots keep at least one block per cluster.
  const auto cfg = tiny_config(1, 1, 4, 16);
  const StreamSpec spec = two_cluster_stream(120, cfg, 15, 0.02);
  MemoryManager manager(params_for(PolicyKind::kRecentK, cfg, 4, 2));
  RetentionTrace trace("test");

  StreamCursor cursor(spec);
  std::vector<std::uint32_t> cluster_of;
  while (!cursor.done()) {
    auto frame = cursor.next();
    cluster_of.push_back(frame.cluster_id);
    manager.step(std::move(frame.block), trace);
  }

  const auto& policy = static_cast<const RecentKPolicy&>(manager.policy());
  REQUIRE(policy.window().size() == 2);
  // Window = the two newest frames.
  CHECK(policy.window()[0] == 118);
  CHECK(policy.window()[1] == 119);
  // k-center section covers both clusters.
  std::set<std::uint32_t> covered;
  for (const auto& e : policy.bank(0).retained()) {
    covered.insert(cluster_of[e.frame_id]);
  }
  CHECK(covered.size() == 2);
}

TEST_CASE("token-level: first frame fully retained when the budget allows") {
  const auto cfg = tiny_config(1, 1, 8, 8);
  MemoryManager manager(params_for(PolicyKind::kTokenLevel, cfg, 16, 0, 24));
  RetentionTrace trace("test");
  StreamCursor cursor(two_cluster_stream(10, cfg, 5));

  auto result = manager.step(cursor.next().block, trace);
  CHECK(result.current_retained[0] == 8);
  CHECK(manager.retained_tokens(0) == 8);

  // Budget 24 = 3 frames; from frame 3 on the pool exceeds it.
  for (int i = 0; i < 5; ++i) {
    result = manager.step(cursor.next().block, trace);
    CHECK(manager.retained_tokens(0) <= 24);
    CHECK(result.current_retained[0] >= 1);  // the seed token always survives
  }
}

TEST_CASE("token-level: retention masks shrink monotonically per source frame") {
  const auto cfg = tiny_config(1, 1, 6, 8);
  MemoryManager manager(params_for(PolicyKind::kTokenLevel, cfg, 16, 0, 18));
  RetentionTrace trace("test");
  StreamCursor cursor(two_cluster_stream(60, cfg, 10));

  std::map<FrameId, std::uint64_t> last_count;
  while (!cursor.done()) {
    manager.step(cursor.next().block, trace);
    std::map<FrameId, std::uint64_t> now;
    std::uint64_t total = 0;
    for (const auto& [id, count] : manager.retained_per_frame(0)) {
      now[id] = count;
      total += count;
    }
    CHECK(total <= 18);
    for (const auto& [id, count] : now) {
      const auto it = last_count.find(id);
      if (it != last_count.end()) CHECK(count <= it->second);
    }
    last_count = std::move(now);
  }
}

TEST_CASE("token-level: selection ignores value tensors entirely") {
  const auto cfg = tiny_config(2, 1, 4, 8);
  StreamSpec spec = two_cluster_stream(80, cfg, 10);
  StreamSpec salted = spec;
  salted.value_salt = 12345;  // different values, identical keys

  for (PolicyKind policy : {PolicyKind::kTokenLevel, PolicyKind::kFrameKCenter}) {
    const std::size_t budget = policy == PolicyKind::kTokenLevel ? 12 : 0;
    RetentionTrace t1("shared");
    RetentionTrace t2("shared");
    MemoryManager m1(params_for(policy, cfg, 4, 0, budget));
    MemoryManager m2(params_for(policy, cfg, 4, 0, budget));
    StreamCursor c1(spec);
    StreamCursor c2(salted);
    while (!c1.done()) {
      m1.step(c1.next().block, t1);
      m2.step(c2.next().block, t2);
    }
    CHECK(t1.serialize() == t2.serialize());
  }
}

TEST_CASE("full-cache: unbounded growth and zero self-radius") {
  const auto cfg = tiny_config(1, 1, 4, 8);
  MemoryManager manager(params_for(PolicyKind::kFullCache, cfg, 16));
  RetentionTrace trace("test");
  StreamCursor cursor(two_cluster_stream(50, cfg, 10));

  std::uint64_t prev_bytes = 0;
  std::optional<std::uint64_t> byte_step;
  while (!cursor.done()) {
    manager.step(cursor.next().block, trace);
    const FrameId t = manager.next_frame() - 1;
    CHECK(manager.retained_tokens(0) == (t + 1) * 4);
    // Bytes grow exactly linearly in the frame count.
    const std::uint64_t bytes = manager.memory_bytes(0);
    if (prev_bytes > 0) {
      if (!byte_step) byte_step = bytes - prev_bytes;
      CHECK(bytes - prev_bytes == *byte_step);
    }
    prev_bytes = bytes;
  }
  CHECK(manager.unbounded());

  // Retained set against its own prototypes: radius 0.
  const auto centers = manager.radius_centers(0);
  double radius = 0.0;
  for (const Prototype* c : centers) {
    double best = 3.0;
    for (const Prototype* d : centers) best = std::min(best, cosine_distance(*c, *d));
    radius = std::max(radius, best);
  }
  CHECK(radius == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("token and frame policies retain matching totals at a matched budget") {
  // M = B_M * N tokens: once both policies reach steady state their retained
  // totals agree within one frame of tokens.
  const auto cfg = tiny_config(1, 1, 8, 8);
  const StreamSpec spec = two_cluster_stream(80, cfg, 10);
  MemoryManager frames(params_for(PolicyKind::kFrameKCenter, cfg, 6));
  MemoryManager tokens(params_for(PolicyKind::kTokenLevel, cfg, 6, 0, 6 * 8));
  RetentionTrace ta("t");
  RetentionTrace tb("t");
  StreamCursor ca(spec);
  StreamCursor cb(spec);
  while (!ca.done()) {
    frames.step(ca.next().block, ta);
    tokens.step(cb.next().block, tb);
  }
  const auto diff = static_cast<std::int64_t>(frames.retained_tokens(0)) -
                    static_cast<std::int64_t>(tokens.retained_tokens(0));
  CHECK(std::abs(diff) <= 8);
}

TEST_CASE("policies: per-frame retention feeds Proposition-1 sums") {
  // For every bounded policy, the retained-token sum never exceeds the
  // layer budget; exact integer arithmetic.
  const auto cfg = tiny_config(1, 1, 4, 8);
  const StreamSpec spec = two_cluster_stream(120, cfg, 15);

  struct Case {
    PolicyKind policy;
    std::size_t recent_k;
    std::size_t token_budget;
  };
  for (const Case c : {Case{PolicyKind::kFrameKCenter, 0, 0},
                       Case{PolicyKind::kRecentK, 2, 0},
                       Case{PolicyKind::kTokenLevel, 0, 20}}) {
    ManagerParams params = params_for(c.policy, cfg, 5, c.recent_k, c.token_budget);
    MemoryManager manager(params);
    RetentionTrace trace("test");
    StreamCursor cursor(spec);
    const auto budget = params.layer_token_budget();
    REQUIRE(budget.has_value());
    while (!cursor.done()) {
      manager.step(cursor.next().block, trace);
      std::uint64_t sum = 0;
      for (const auto& [id, count] : manager.retained_per_frame(0)) sum += count;
      CHECK(sum <= *budget);
      CHECK(sum == manager.retained_tokens(0));
    }
  }
}
