// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/serialize.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "framebank/hash.hpp"
#include "framebank/policies.hpp"
#include "framebank/version.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialized containers assume a little-endian host");

namespace framebank {

namespace {

using nlohmann::json;

constexpr char kCheckpointMagic[9] = "FBCKPT01";
constexpr char kStreamMagic[9] = "FBSTRM01";

json config_to_json(const StreamConfig& cfg) {
  return json{{"num_layers", cfg.num_layers},
              {"heads", cfg.heads},
              {"tokens_per_frame", cfg.tokens_per_frame},
              {"key_dim", cfg.key_dim},
              {"bytes_per_element", cfg.bytes_per_element}};
}

StreamConfig config_from_json(const json& j) {
  StreamConfig cfg;
  cfg.num_layers = j.at("num_layers").get<std::size_t>();
  cfg.tokens_per_frame = j.at("tokens_per_frame").get<std::size_t>();
  cfg.bytes_per_element = j.at("bytes_per_element").get<std::size_t>();
  // heads/key_dim accept a scalar broadcast over layers or a per-layer array.
  auto read_dims = [&](const char* field) {
    const json& v = j.at(field);
    if (v.is_array()) return v.get<std::vector<std::size_t>>();
    return std::vector<std::size_t>(cfg.num_layers, v.get<std::size_t>());
  };
  cfg.heads = read_dims("heads");
  cfg.key_dim = read_dims("key_dim");
  cfg.validate();
  return cfg;
}

json meta_schedule_to_json(const MetaSchedule& m) {
  switch (m.kind) {
    case MetaSchedule::Kind::kConstant:
      return json{{"kind", "constant"}, {"q", m.q}, {"s", m.s}};
    case MetaSchedule::Kind::kUniform:
      return json{{"kind", "uniform"},
                  {"q_low", m.q_low},
                  {"q_high", m.q_high},
                  {"s_low", m.s_low},
                  {"s_high", m.s_high}};
    case MetaSchedule::Kind::kDip:
      return json{{"kind", "dip"},      {"q", m.q},
                  {"s", m.s},           {"dip_begin", m.dip_begin},
                  {"dip_end", m.dip_end}, {"dip_q", m.dip_q},
                  {"dip_s", m.dip_s}};
  }
  throw ConfigError("unknown meta schedule kind");
}

MetaSchedule meta_schedule_from_json(const json& j) {
  MetaSchedule m;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    m.kind = MetaSchedule::Kind::kConstant;
    m.q = j.at("q").get<double>();
    m.s = j.at("s").get<double>();
  } else if (kind == "uniform") {
    m.kind = MetaSchedule::Kind::kUniform;
    m.q_low = j.at("q_low").get<double>();
    m.q_high = j.at("q_high").get<double>();
    m.s_low = j.at("s_low").get<double>();
    m.s_high = j.at("s_high").get<double>();
  } else if (kind == "dip") {
    m.kind = MetaSchedule::Kind::kDip;
    m.q = j.at("q").get<double>();
    m.s = j.at("s").get<double>();
    m.dip_begin = j.at("dip_begin").get<std::uint64_t>();
    m.dip_end = j.at("dip_end").get<std::uint64_t>();
    m.dip_q = j.at("dip_q").get<double>();
    m.dip_s = j.at("dip_s").get<double>();
  } else {
    throw ConfigError("unknown meta schedule kind '" + kind + "'");
  }
  return m;
}

json pose_to_json(const PoseTrajectory& p) {
  switch (p.kind) {
    case PoseTrajectory::Kind::kNone:
      return json{{"kind", "none"}};
    case PoseTrajectory::Kind::kCircular:
      return json{{"kind", "circular"},
                  {"angular_step", p.angular_step},
                  {"radius", p.radius}};
    case PoseTrajectory::Kind::kRandomWalk:
      return json{{"kind", "random-walk"}, {"walk_sigma", p.walk_sigma}};
  }
  throw ConfigError("unknown pose trajectory kind");
}

PoseTrajectory pose_from_json(const json& j) {
  PoseTrajectory p;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") {
    p.kind = PoseTrajectory::Kind::kNone;
  } else if (kind == "circular") {
    p.kind = PoseTrajectory::Kind::kCircular;
    p.angular_step = j.at("angular_step").get<double>();
    p.radius = j.at("radius").get<double>();
  } else if (kind == "random-walk") {
    p.kind = PoseTrajectory::Kind::kRandomWalk;
    p.walk_sigma = j.at("walk_sigma").get<double>();
  } else {
    throw ConfigError("unknown pose trajectory kind '" + kind + "'");
  }
  return p;
}

json spec_to_json(const StreamSpec& spec) {
  json clusters = json::array();
  for (const ClusterSpec& c : spec.clusters) {
    json jc{{"frame_spread", c.frame_spread},
            {"token_spread", c.token_spread},
            {"dwell", c.dwell}};
    if (!c.centers.empty()) jc["centers"] = c.centers;
    clusters.push_back(std::move(jc));
  }
  json j{{"seed", spec.seed},
         {"frames", spec.frames},
         {"config", config_to_json(spec.config)},
         {"clusters", clusters},
         {"drift_rate", spec.drift_rate},
         {"noise_sigma", spec.noise_sigma},
         {"meta", meta_schedule_to_json(spec.meta)},
         {"pose", pose_to_json(spec.pose)},
         {"layout", spec.layout == PositionLayout::kGrid ? "grid" : "random"},
         {"value_salt", spec.value_salt}};
  if (!spec.zero_key_frames.empty()) j["zero_key_frames"] = spec.zero_key_frames;
  return j;
}

StreamSpec spec_from_json(const json& j) {
  StreamSpec spec;
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.frames = j.at("frames").get<std::uint64_t>();
  spec.config = config_from_json(j.at("config"));
  for (const json& jc : j.at("clusters")) {
    ClusterSpec c;
    c.frame_spread = jc.at("frame_spread").get<double>();
    c.token_spread = jc.at("token_spread").get<double>();
    c.dwell = jc.at("dwell").get<std::uint64_t>();
    if (jc.contains("centers")) c.centers = jc.at("centers").get<std::vector<std::vector<double>>>();
    spec.clusters.push_back(std::move(c));
  }
  spec.drift_rate = j.at("drift_rate").get<double>();
  spec.noise_sigma = j.at("noise_sigma").get<double>();
  spec.meta = meta_schedule_from_json(j.at("meta"));
  spec.pose = pose_from_json(j.at("pose"));
  const std::string layout = j.at("layout").get<std::string>();
  if (layout == "grid") {
    spec.layout = PositionLayout::kGrid;
  } else if (layout == "random") {
    spec.layout = PositionLayout::kRandom;
  } else {
    throw ConfigError("unknown position layout '" + layout + "'");
  }
  if (j.contains("zero_key_frames")) {
    spec.zero_key_frames = j.at("zero_key_frames").get<std::vector<std::uint64_t>>();
  }
  spec.value_salt = j.at("value_salt").get<std::uint64_t>();
  spec.validate();
  return spec;
}

void write_bytes(std::ofstream& os, const void* data, std::size_t size) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!os) throw IoError("write failed");
}

void write_floats(std::ofstream& os, std::span<const float> data) {
  write_bytes(os, data.data(), data.size() * sizeof(float));
}

void read_bytes(std::ifstream& is, void* data, std::size_t size) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (is.gcount() != static_cast<std::streamsize>(size)) {
    throw IoError("truncated container");
  }
}

json block_meta_to_json(const FrameBlock& block) {
  const FrameMeta& meta = block.meta();
  json j{{"id", meta.frame_id}, {"q", meta.confidence}, {"s", meta.sharpness}};
  if (meta.pose) {
    j["pose"] = json::array({meta.pose->quaternion[0], meta.pose->quaternion[1],
                             meta.pose->quaternion[2], meta.pose->quaternion[3],
                             meta.pose->translation[0], meta.pose->translation[1],
                             meta.pose->translation[2]});
  } else {
    j["pose"] = nullptr;
  }
  return j;
}

void block_meta_from_json(const json& j, FrameMeta& meta) {
  meta.frame_id = j.at("id").get<FrameId>();
  meta.confidence = j.at("q").get<double>();
  meta.sharpness = j.at("s").get<double>();
  if (!j.at("pose").is_null()) {
    const auto pose = j.at("pose").get<std::vector<double>>();
    check_structural(pose.size() == 7, "pose signature must have 7 entries");
    PoseSignature sig;
    for (std::size_t i = 0; i < 4; ++i) sig.quaternion[i] = pose[i];
    for (std::size_t i = 0; i < 3; ++i) sig.translation[i] = pose[4 + i];
    meta.pose = sig;
  }
}

}  // namespace

std::string dump_stream_spec(const StreamSpec& spec) { return spec_to_json(spec).dump(); }

StreamSpec parse_stream_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid stream spec JSON: ") + e.what());
  }
  try {
    return spec_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid stream spec: ") + e.what());
  }
}

std::string stream_spec_hash(const StreamSpec& spec) {
  return hex64(fnv1a64(dump_stream_spec(spec)));
}

void save_checkpoint(const MemoryManager& manager, const std::string& path) {
  const ManagerParams& params = manager.params();
  json header;
  header["version"] = 1;
  header["tool"] = std::string(kToolVersion);
  header["params"] = json{{"policy", std::string(policy_name(params.policy))},
                          {"stream", config_to_json(params.stream)},
                          {"mid_capacity", params.mid_capacity},
                          {"anchor_capacity", params.anchor_capacity},
                          {"gap", params.gap},
                          {"phi_min", params.phi_min},
                          {"nu_min", params.nu_min},
                          {"recent_k", params.recent_k},
                          {"token_budget", params.token_budget}};
  header["next_frame"] = manager.next_frame();

  const AnchorTier& tier = manager.tier();
  json tier_json;
  tier_json["slots"] = json::array();
  for (const auto& slot : tier.slots()) tier_json["slots"].push_back(slot.frame_id);
  tier_json["t_last"] = tier.last_promotion() ? json(*tier.last_promotion()) : json(nullptr);
  tier_json["seen_any"] = tier.seen_any();
  header["tier"] = tier_json;

  json policy_state;
  const RetentionPolicy& policy = manager.policy();
  switch (policy.kind()) {
    case PolicyKind::kFrameKCenter: {
      const auto& p = static_cast<const FrameKCenterPolicy&>(policy);
      json banks = json::array();
      for (std::size_t l = 0; l < params.stream.num_layers; ++l) {
        json ids = json::array();
        for (const auto& e : p.bank(l).retained()) ids.push_back(e.frame_id);
        banks.push_back(std::move(ids));
      }
      policy_state["banks"] = std::move(banks);
      break;
    }
    case PolicyKind::kRecentK: {
      const auto& p = static_cast<const RecentKPolicy&>(policy);
      json banks = json::array();
      if (params.mid_capacity > params.recent_k) {
        for (std::size_t l = 0; l < params.stream.num_layers; ++l) {
          json ids = json::array();
          for (const auto& e : p.bank(l).retained()) ids.push_back(e.frame_id);
          banks.push_back(std::move(ids));
        }
      }
      policy_state["banks"] = std::move(banks);
      policy_state["window"] = json::array();
      for (FrameId id : p.window()) policy_state["window"].push_back(id);
      break;
    }
    case PolicyKind::kTokenLevel: {
      const auto& p = static_cast<const TokenLevelPolicy&>(policy);
      json layers = json::array();
      for (std::size_t l = 0; l < params.stream.num_layers; ++l) {
        json refs = json::array();
        for (const auto& r : p.retained(l)) {
          refs.push_back(json::array({r.ref.frame, r.ref.token}));
        }
        layers.push_back(std::move(refs));
      }
      policy_state["tokens"] = std::move(layers);
      break;
    }
    case PolicyKind::kFullCache: {
      json ids = json::array();
      std::vector<std::pair<FrameId, std::uint64_t>> per_frame;
      policy.per_frame(0, per_frame);
      for (const auto& [id, count] : per_frame) ids.push_back(id);
      policy_state["frames"] = std::move(ids);
      break;
    }
  }
  header["policy_state"] = std::move(policy_state);

  // Blocks stored ascending by id; binary payload follows in the same order.
  std::set<FrameId> live;
  manager.policy().collect_live(live);
  for (const auto& slot : tier.slots()) live.insert(slot.frame_id);
  json blocks = json::array();
  for (FrameId id : live) {
    const BlockRecord* rec = manager.record(id);
    check_invariant(rec != nullptr, "save_checkpoint: live frame missing from store");
    blocks.push_back(block_meta_to_json(*rec->block));
  }
  header["blocks"] = std::move(blocks);

  const std::string header_text = header.dump();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  write_bytes(os, kCheckpointMagic, 8);
  const auto len = static_cast<std::uint32_t>(header_text.size());
  write_bytes(os, &len, sizeof(len));
  write_bytes(os, header_text.data(), header_text.size());

  for (FrameId id : live) {
    const BlockRecord* rec = manager.record(id);
    const FrameMeta& meta = rec->block->meta();
    std::vector<float> positions;
    positions.reserve(meta.token_positions.size() * 2);
    for (const auto& p : meta.token_positions) {
      positions.push_back(p[0]);
      positions.push_back(p[1]);
    }
    write_floats(os, positions);
    for (std::size_t l = 0; l < params.stream.num_layers; ++l) {
      write_floats(os, rec->block->keys(l));
      write_floats(os, rec->block->values(l));
    }
  }
  if (!os) throw IoError("checkpoint write failed: " + path);
}

std::unique_ptr<MemoryManager> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  read_bytes(is, magic, 8);
  check_config(std::memcmp(magic, kCheckpointMagic, 8) == 0,
               "not a checkpoint container (bad magic): " + path);
  std::uint32_t len = 0;
  read_bytes(is, &len, sizeof(len));
  std::string header_text(len, '\0');
  read_bytes(is, header_text.data(), len);

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    throw IoError(std::string("corrupt checkpoint header: ") + e.what());
  }
  check_config(header.at("version").get<int>() == 1,
               "unsupported checkpoint version " + header.at("version").dump());

  const json& jp = header.at("params");
  ManagerParams params;
  params.policy = policy_from_name(jp.at("policy").get<std::string>());
  params.stream = config_from_json(jp.at("stream"));
  params.mid_capacity = jp.at("mid_capacity").get<std::size_t>();
  params.anchor_capacity = jp.at("anchor_capacity").get<std::size_t>();
  params.gap = jp.at("gap").get<std::uint64_t>();
  params.phi_min = jp.at("phi_min").get<double>();
  params.nu_min = jp.at("nu_min").get<double>();
  params.recent_k = jp.at("recent_k").get<std::size_t>();
  params.token_budget = jp.at("token_budget").get<std::size_t>();

  auto manager = std::make_unique<MemoryManager>(params);

  // Blocks and their derived records.
  std::vector<BlockRecord> records;
  std::map<FrameId, const BlockRecord*> by_id;
  const auto n = params.stream.tokens_per_frame;
  for (const json& jb : header.at("blocks")) {
    FrameMeta meta;
    block_meta_from_json(jb, meta);
    meta.token_positions.resize(n);
    std::vector<float> positions(n * 2);
    read_bytes(is, positions.data(), positions.size() * sizeof(float));
    for (std::size_t i = 0; i < n; ++i) {
      meta.token_positions[i] = {positions[2 * i], positions[2 * i + 1]};
    }
    FrameBlock block(std::move(meta), params.stream);
    for (std::size_t l = 0; l < params.stream.num_layers; ++l) {
      read_bytes(is, block.keys(l).data(), block.keys(l).size() * sizeof(float));
      read_bytes(is, block.values(l).data(), block.values(l).size() * sizeof(float));
    }
    records.push_back(make_block_record(std::make_shared<const FrameBlock>(std::move(block))));
  }
  manager->restore_store(std::move(records));
  auto record_of = [&](FrameId id) {
    const BlockRecord* rec = manager->record(id);
    check_structural(rec != nullptr, "checkpoint references missing block " + std::to_string(id));
    return rec;
  };

  // Tier.
  const json& jt = header.at("tier");
  std::vector<AnchorTier::Slot> slots;
  for (const json& jid : jt.at("slots")) {
    const auto id = jid.get<FrameId>();
    const BlockRecord* rec = record_of(id);
    slots.push_back(AnchorTier::Slot{id, rec->block->meta(), rec->prototypes, rec->block});
  }
  std::optional<FrameId> t_last;
  if (!jt.at("t_last").is_null()) t_last = jt.at("t_last").get<FrameId>();
  manager->tier_mutable().restore(std::move(slots), t_last, jt.at("seen_any").get<bool>());

  // Policy state.
  const json& js = header.at("policy_state");
  switch (params.policy) {
    case PolicyKind::kFrameKCenter: {
      auto& p = static_cast<FrameKCenterPolicy&>(manager->policy());
      const json& banks = js.at("banks");
      for (std::size_t l = 0; l < params.stream.num_layers; ++l) {
        std::vector<MidBank::Entry> entries;
        for (const json& jid : banks.at(l)) {
          const auto id = jid.get<FrameId>();
          entries.push_back(MidBank::Entry{id, record_of(id)->prototypes[l]});
        }
        p.bank_mutable(l).restore(std::move(entries));
      }
      break;
    }
    case PolicyKind::kRecentK: {
      auto& p = static_cast<RecentKPolicy&>(manager->policy());
      const json& banks = js.at("banks");
      if (params.mid_capacity > params.recent_k) {
        for (std::size_t l = 0; l < params.stream.num_layers; ++l) {
          std::vector<MidBank::Entry> entries;
          for (const json& jid : banks.at(l)) {
            const auto id = jid.get<FrameId>();
            entries.push_back(MidBank::Entry{id, record_of(id)->prototypes[l]});
          }
          p.bank_mutable(l).restore(std::move(entries));
        }
      }
      std::deque<FrameId> window;
      std::map<FrameId, std::vector<Prototype>> window_protos;
      for (const json& jid : js.at("window")) {
        const auto id = jid.get<FrameId>();
        window.push_back(id);
        window_protos[id] = record_of(id)->prototypes;
      }
      p.restore_window(std::move(window), std::move(window_protos));
      break;
    }
    case PolicyKind::kTokenLevel: {
      auto& p = static_cast<TokenLevelPolicy&>(manager->policy());
      std::vector<std::vector<TokenLevelPolicy::Retained>> retained(params.stream.num_layers);
      const json& layers = js.at("tokens");
      for (std::size_t l = 0; l < params.stream.num_layers; ++l) {
        for (const json& jr : layers.at(l)) {
          const auto frame = jr.at(0).get<FrameId>();
          const auto token = jr.at(1).get<std::uint32_t>();
          retained[l].push_back(TokenLevelPolicy::Retained{
              TokenRef{frame, token}, record_of(frame)->token_protos[l][token]});
        }
      }
      p.restore_retained(std::move(retained));
      break;
    }
    case PolicyKind::kFullCache: {
      auto& p = static_cast<FullCachePolicy&>(manager->policy());
      std::vector<FrameId> frames;
      for (const json& jid : js.at("frames")) frames.push_back(jid.get<FrameId>());
      p.restore_frames(std::move(frames));
      break;
    }
  }

  manager->restore_counters(header.at("next_frame").get<std::uint64_t>());
  manager->rebuild_cache_summary();
  return manager;
}

void record_stream(const StreamSpec& spec, const std::string& path) {
  StreamCursor cursor(spec);
  json manifest;
  manifest["version"] = 1;
  manifest["config"] = config_to_json(spec.config);
  manifest["frames"] = spec.frames;
  manifest["spec_hash"] = stream_spec_hash(spec);

  std::string payload;
  json frame_meta = json::array();
  while (!cursor.done()) {
    GeneratedFrame frame = cursor.next();
    const FrameBlock& block = frame.block;
    json jf = block_meta_to_json(block);
    jf["cluster"] = frame.cluster_id;
    frame_meta.push_back(std::move(jf));

    auto append_floats = [&payload](std::span<const float> data) {
      const auto* bytes = reinterpret_cast<const char*>(data.data());
      payload.append(bytes, data.size() * sizeof(float));
    };
    std::vector<float> positions;
    positions.reserve(block.meta().token_positions.size() * 2);
    for (const auto& p : block.meta().token_positions) {
      positions.push_back(p[0]);
      positions.push_back(p[1]);
    }
    append_floats(positions);
    for (std::size_t l = 0; l < spec.config.num_layers; ++l) {
      append_floats(block.keys(l));
      append_floats(block.values(l));
    }
  }
  manifest["frame_meta"] = std::move(frame_meta);

  const std::string manifest_text = manifest.dump();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open stream container for writing: " + path);
  write_bytes(os, kStreamMagic, 8);
  const auto len = static_cast<std::uint32_t>(manifest_text.size());
  write_bytes(os, &len, sizeof(len));
  write_bytes(os, manifest_text.data(), manifest_text.size());
  write_bytes(os, payload.data(), payload.size());
  if (!os) throw IoError("stream container write failed: " + path);
}

RecordedStream::RecordedStream(const std::string& path) : file_(path, std::ios::binary) {
  if (!file_) throw IoError("cannot open stream container: " + path);
  char magic[8];
  read_bytes(file_, magic, 8);
  check_config(std::memcmp(magic, kStreamMagic, 8) == 0,
               "not a stream container (bad magic): " + path);
  std::uint32_t len = 0;
  read_bytes(file_, &len, sizeof(len));
  std::string manifest_text(len, '\0');
  read_bytes(file_, manifest_text.data(), len);
  json manifest;
  try {
    manifest = json::parse(manifest_text);
  } catch (const json::exception& e) {
    throw IoError(std::string("corrupt stream manifest: ") + e.what());
  }
  check_config(manifest.at("version").get<int>() == 1, "unsupported stream container version");
  config_ = config_from_json(manifest.at("config"));
  frames_ = manifest.at("frames").get<std::uint64_t>();
  spec_hash_ = manifest.at("spec_hash").get<std::string>();
  for (const json& jf : manifest.at("frame_meta")) {
    FrameInfo info;
    info.q = jf.at("q").get<double>();
    info.s = jf.at("s").get<double>();
    if (!jf.at("pose").is_null()) {
      info.has_pose = true;
      const auto pose = jf.at("pose").get<std::vector<double>>();
      check_structural(pose.size() == 7, "pose signature must have 7 entries");
      for (std::size_t i = 0; i < 7; ++i) info.pose[i] = pose[i];
    }
    info.cluster = jf.at("cluster").get<std::uint32_t>();
    frame_info_.push_back(info);
  }
  check_structural(frame_info_.size() == frames_, "stream manifest frame count mismatch");
}

RecordedStream::~RecordedStream() = default;

GeneratedFrame RecordedStream::next() {
  check_structural(!done(), "RecordedStream::next past end of stream");
  const FrameInfo& info = frame_info_[next_];
  FrameMeta meta;
  meta.frame_id = next_;
  meta.confidence = info.q;
  meta.sharpness = info.s;
  if (info.has_pose) {
    PoseSignature sig;
    for (std::size_t i = 0; i < 4; ++i) sig.quaternion[i] = info.pose[i];
    for (std::size_t i = 0; i < 3; ++i) sig.translation[i] = info.pose[4 + i];
    meta.pose = sig;
  }
  const std::size_t n = config_.tokens_per_frame;
  std::vector<float> positions(n * 2);
  read_bytes(file_, positions.data(), positions.size() * sizeof(float));
  meta.token_positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    meta.token_positions[i] = {positions[2 * i], positions[2 * i + 1]};
  }
  FrameBlock block(std::move(meta), config_);
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    read_bytes(file_, block.keys(l).data(), block.keys(l).size() * sizeof(float));
    read_bytes(file_, block.values(l).data(), block.values(l).size() * sizeof(float));
  }
  ++next_;
  return GeneratedFrame{std::move(block), info.cluster};
}

bool is_recorded_stream(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char magic[8];
  is.read(magic, 8);
  return is.gcount() == 8 && std::memcmp(magic, kStreamMagic, 8) == 0;
}

}  // namespace framebank
