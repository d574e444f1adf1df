// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "framebank/serialize.hpp"
#include "test_helpers.hpp"

using namespace framebank;
using test::tiny_config;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("framebank_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

StreamSpec checkpoint_stream(const StreamConfig& cfg, std::uint64_t frames) {
  StreamSpec spec;
  spec.seed = 404;
  spec.frames = frames;
  spec.config = cfg;
  spec.clusters.assign(2, ClusterSpec{{}, 0.25, 0.1, 12});
  spec.drift_rate = 0.003;
  spec.noise_sigma = 0.05;
  spec.meta = {MetaSchedule::Kind::kConstant, 0.9, 0.8};
  spec.pose = {PoseTrajectory::Kind::kCircular, 0.02, 1.5};
  return spec;
}

// Drives `manager` over frames [from, to) of the spec.
void drive(MemoryManager& manager, const StreamSpec& spec, std::uint64_t from,
           std::uint64_t to, RetentionTrace& trace) {
  StreamCursor cursor(spec);
  for (std::uint64_t t = 0; t < to; ++t) {
    auto frame = cursor.next();
    if (t < from) continue;
    manager.step(std::move(frame.block), trace);
  }
}

}  // namespace

TEST_CASE("stream spec: JSON round trip preserves the hash") {
  StreamSpec spec = scenario_spec("multi-room");
  const std::string text = dump_stream_spec(spec);
  const StreamSpec parsed = parse_stream_spec(text);
  CHECK(dump_stream_spec(parsed) == text);
  CHECK(stream_spec_hash(parsed) == stream_spec_hash(spec));

  StreamSpec other = spec;
  other.seed += 1;
  CHECK(stream_spec_hash(other) != stream_spec_hash(spec));
  CHECK_THROWS_AS(parse_stream_spec("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_stream_spec("{\"seed\": 1}"), ConfigError);
}

TEST_CASE("recorded stream: container replays the generator bit-exactly") {
  const auto cfg = tiny_config(2, 2, 6, 8);
  const StreamSpec spec = checkpoint_stream(cfg, 25);
  TempDir dir;
  const std::string path = dir.file("stream.fbs");
  record_stream(spec, path);
  CHECK(is_recorded_stream(path));

  RecordedStream recorded(path);
  CHECK(recorded.total_frames() == 25);
  CHECK(recorded.spec_hash() == stream_spec_hash(spec));

  StreamCursor cursor(spec);
  while (!recorded.done()) {
    const auto a = cursor.next();
    const auto b = recorded.next();
    CHECK(a.cluster_id == b.cluster_id);
    CHECK(a.block.meta().confidence == b.block.meta().confidence);
    REQUIRE(b.block.meta().pose.has_value());
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
      const auto ka = a.block.keys(l);
      const auto kb = b.block.keys(l);
      REQUIRE(ka.size() == kb.size());
      CHECK(std::memcmp(ka.data(), kb.data(), ka.size() * sizeof(float)) == 0);
      const auto va = a.block.values(l);
      const auto vb = b.block.values(l);
      CHECK(std::memcmp(va.data(), vb.data(), va.size() * sizeof(float)) == 0);
    }
  }
  CHECK_THROWS_AS(RecordedStream(dir.file("missing.fbs")), IoError);
}

TEST_CASE("recorded stream: bad magic is rejected") {
  TempDir dir;
  const std::string path = dir.file("junk.fbs");
  std::ofstream os(path, std::ios::binary);
  os << "NOTMAGIC junk";
  os.close();
  CHECK_FALSE(is_recorded_stream(path));
  CHECK_THROWS_AS(RecordedStream{path}, ConfigError);
}

TEST_CASE("checkpoint: restored manager continues identically") {
  const auto cfg = tiny_config(2, 1, 4, 8);
  const StreamSpec spec = checkpoint_stream(cfg, 80);

  for (const PolicyKind policy :
       {PolicyKind::kFrameKCenter, PolicyKind::kRecentK, PolicyKind::kTokenLevel}) {
    CAPTURE(policy_name(policy));
    ManagerParams params;
    params.stream = cfg;
    params.policy = policy;
    params.mid_capacity = 5;
    params.anchor_capacity = policy == PolicyKind::kFrameKCenter ? 2 : 0;
    params.gap = 10;
    params.nu_min = 0.01;
    params.recent_k = policy == PolicyKind::kRecentK ? 2 : 0;
    params.token_budget = policy == PolicyKind::kTokenLevel ? 20 : 0;

    // Live run to frame 40, checkpoint, then continue to 80.
    MemoryManager live(params);
    RetentionTrace live_trace("t");
    drive(live, spec, 0, 40, live_trace);

    TempDir dir;
    const std::string path = dir.file("ckpt.fbc");
    save_checkpoint(live, path);
    auto restored = load_checkpoint(path);
    REQUIRE(restored != nullptr);
    CHECK(restored->next_frame() == 40);

    // The restored state matches the live state exactly.
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
      CHECK(restored->retained_per_frame(l) == live.retained_per_frame(l));
      CHECK(restored->loaded_tokens(l) == live.loaded_tokens(l));
    }

    // Both managers process the remaining frames identically.
    RetentionTrace tail_a("t");
    RetentionTrace tail_b("t");
    drive(live, spec, 40, 80, tail_a);
    drive(*restored, spec, 40, 80, tail_b);
    CHECK(tail_a.serialize() == tail_b.serialize());
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
      CHECK(restored->retained_per_frame(l) == live.retained_per_frame(l));
    }
  }
}

TEST_CASE("checkpoint: refuses foreign magics and versions") {
  TempDir dir;
  const std::string path = dir.file("bad.fbc");
  {
    std::ofstream os(path, std::ios::binary);
    os << "WRONGMAG";
    std::uint32_t len = 2;
    os.write(reinterpret_cast<const char*>(&len), 4);
    os << "{}";
  }
  CHECK_THROWS_AS(load_checkpoint(path), ConfigError);

  {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << "FBCKPT01";
    const std::string header = "{\"version\": 99}";
    const auto len = static_cast<std::uint32_t>(header.size());
    os.write(reinterpret_cast<const char*>(&len), 4);
    os << header;
  }
  CHECK_THROWS_AS(load_checkpoint(path), ConfigError);
  CHECK_THROWS_AS(load_checkpoint(dir.file("absent.fbc")), IoError);
}
