// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "framebank/manager.hpp"
#include "framebank/stream_sim.hpp"

namespace framebank {

/// Canonical JSON round-trips. Dumps use alphabetically ordered keys, so the
/// same spec always yields the same bytes (and hence the same hash).
std::string dump_stream_spec(const StreamSpec& spec);
StreamSpec parse_stream_spec(const std::string& text);
std::string stream_spec_hash(const StreamSpec& spec);

/// Versioned checkpoint container: 8-byte magic "FBCKPT01", u32 header
/// length, JSON header (params, tier, policy state, block metadata), then raw
/// little-endian float32 sections (positions, keys, values per block).
/// Loading refuses unknown magics or header versions.
void save_checkpoint(const MemoryManager& manager, const std::string& path);
std::unique_ptr<MemoryManager> load_checkpoint(const std::string& path);

/// Recorded stream container: 8-byte magic "FBSTRM01", u32 manifest length,
/// JSON manifest (config, frame count, spec hash, per-frame metadata), then
/// per-frame little-endian float32 payloads: positions [N,2], then keys and
/// values [H,N,D] per layer.
void record_stream(const StreamSpec& spec, const std::string& path);

class RecordedStream {
 public:
  explicit RecordedStream(const std::string& path);
  ~RecordedStream();

  const StreamConfig& config() const { return config_; }
  std::uint64_t total_frames() const { return frames_; }
  const std::string& spec_hash() const { return spec_hash_; }
  bool done() const { return next_ >= frames_; }
  GeneratedFrame next();

 private:
  struct FrameInfo {
    double q = 1.0;
    double s = 1.0;
    bool has_pose = false;
    std::array<double, 7> pose{};
    std::uint32_t cluster = 0;
  };

  StreamConfig config_;
  std::uint64_t frames_ = 0;
  std::string spec_hash_;
  std::vector<FrameInfo> frame_info_;
  std::ifstream file_;
  std::uint64_t next_ = 0;
};

/// True when the file at `path` starts with the recorded-stream magic.
bool is_recorded_stream(const std::string& path);

}  // namespace framebank
