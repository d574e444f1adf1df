// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include <json.hpp>

#include "framebank/diagnostics.hpp"
#include "framebank/format.hpp"
#include "framebank/hash.hpp"
#include "framebank/policies.hpp"
#include "framebank/serialize.hpp"
#include "framebank/version.hpp"

namespace framebank {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Uniform interface over generated and recorded streams.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual const StreamConfig& config() const = 0;
  virtual std::uint64_t total_frames() const = 0;
  virtual std::string spec_hash() const = 0;
  virtual GeneratedFrame next() = 0;
};

class SimSource final : public FrameSource {
 public:
  explicit SimSource(StreamSpec spec) : cursor_(std::move(spec)) {}
  const StreamConfig& config() const override { return cursor_.config(); }
  std::uint64_t total_frames() const override { return cursor_.total_frames(); }
  std::string spec_hash() const override { return stream_spec_hash(cursor_.spec()); }
  GeneratedFrame next() override { return cursor_.next(); }

 private:
  StreamCursor cursor_;
};

class RecordSource final : public FrameSource {
 public:
  explicit RecordSource(const std::string& path) : stream_(path) {}
  const StreamConfig& config() const override { return stream_.config(); }
  std::uint64_t total_frames() const override { return stream_.total_frames(); }
  std::string spec_hash() const override { return stream_.spec_hash(); }
  GeneratedFrame next() override { return stream_.next(); }

 private:
  RecordedStream stream_;
};

std::string strip_scenario_prefix(const std::string& ref) {
  constexpr std::string_view prefix = "scenario:";
  if (ref.rfind(prefix, 0) == 0) return ref.substr(prefix.size());
  return ref;
}

bool looks_like_path(const std::string& ref) {
  return ref.find('/') != std::string::npos || ref.find('.') != std::string::npos;
}

std::unique_ptr<FrameSource> open_source(const RunConfig& config) {
  const std::string ref = config.stream;
  if (looks_like_path(ref) && fs::exists(ref)) {
    if (is_recorded_stream(ref)) {
      check_config(!config.seed.has_value(),
                   "seed override is not applicable to a recorded stream");
      return std::make_unique<RecordSource>(ref);
    }
    std::ifstream is(ref);
    if (!is) throw IoError("cannot open stream spec: " + ref);
    std::stringstream buf;
    buf << is.rdbuf();
    StreamSpec spec = parse_stream_spec(buf.str());
    if (config.seed) spec.seed = *config.seed;
    if (config.frames) spec.frames = *config.frames;
    return std::make_unique<SimSource>(std::move(spec));
  }
  StreamSpec spec = scenario_spec(strip_scenario_prefix(ref));
  if (config.seed) spec.seed = *config.seed;
  if (config.frames) spec.frames = *config.frames;
  return std::make_unique<SimSource>(std::move(spec));
}

ManagerParams manager_params(const RunConfig& config, const StreamConfig& stream) {
  ManagerParams params;
  params.stream = stream;
  params.policy = config.policy;
  params.mid_capacity = config.mid;
  params.anchor_capacity = config.anchors;
  params.gap = config.gap;
  params.phi_min = config.phi_min;
  params.nu_min = config.nu_min;
  params.recent_k = config.recent_k;
  params.token_budget = config.token_budget;
  return params;
}

json config_to_json_obj(const RunConfig& config, const std::string& spec_hash) {
  json j;
  j["tool_version"] = std::string(kToolVersion);
  j["stream"] = config.stream;
  j["spec_hash"] = spec_hash;
  j["policy"] = std::string(policy_name(config.policy));
  j["mid"] = config.mid;
  j["anchors"] = config.anchors;
  j["gap"] = config.gap;
  j["phi_min"] = config.phi_min;
  j["nu_min"] = config.nu_min;
  j["recent_k"] = config.recent_k;
  j["token_budget"] = config.token_budget;
  j["grid_size"] = config.grid_size;
  j["contrast_percentile"] = config.contrast_percentile;
  j["seed"] = config.seed ? json(*config.seed) : json(nullptr);
  j["frames"] = config.frames ? json(*config.frames) : json(nullptr);
  j["checkpoint_every"] = config.checkpoint_every;
  j["metrics_every"] = config.metrics_every;
  j["radius_every"] = config.radius_every;
  return j;
}

std::string default_label(const RunConfig& config) {
  if (!config.label.empty()) return config.label;
  std::string label(policy_name(config.policy));
  if (config.policy == PolicyKind::kRecentK) {
    label += "-" + std::to_string(config.recent_k);
  }
  return label;
}

void append_cell(std::string& line, const std::optional<double>& v) {
  line += ',';
  if (v) line += format_double(*v);
}

double radius_against(const std::vector<Prototype>& history,
                      const std::vector<const Prototype*>& centers) {
  if (centers.empty()) return 0.0;
  double worst = 0.0;
  for (const Prototype& h : history) {
    double best = 3.0;
    for (const Prototype* c : centers) best = std::min(best, cosine_distance(h, *c));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

StreamSpec resolve_spec(const RunConfig& config) {
  const std::string ref = config.stream;
  StreamSpec spec;
  if (looks_like_path(ref) && fs::exists(ref)) {
    check_config(!is_recorded_stream(ref), "recorded streams carry no spec");
    std::ifstream is(ref);
    if (!is) throw IoError("cannot open stream spec: " + ref);
    std::stringstream buf;
    buf << is.rdbuf();
    spec = parse_stream_spec(buf.str());
  } else {
    spec = scenario_spec(strip_scenario_prefix(ref));
  }
  if (config.seed) spec.seed = *config.seed;
  if (config.frames) spec.frames = *config.frames;
  return spec;
}

std::string canonical_config_json(const RunConfig& config) {
  std::string spec_hash;
  if (looks_like_path(config.stream) && fs::exists(config.stream) &&
      is_recorded_stream(config.stream)) {
    RecordedStream rec(config.stream);
    spec_hash = rec.spec_hash();
  } else {
    spec_hash = stream_spec_hash(resolve_spec(config));
  }
  return config_to_json_obj(config, spec_hash).dump();
}

std::string config_hash(const RunConfig& config) {
  return hex64(fnv1a64(canonical_config_json(config)));
}

RunResult run(const RunConfig& config) {
  check_config(config.metrics_every >= 1, "metrics_every must be >= 1");
  check_config(config.radius_every >= 1, "radius_every must be >= 1");
  check_config(config.grid_size >= 1, "grid_size must be >= 1");
  check_config(config.contrast_percentile > 0.0 && config.contrast_percentile < 1.0,
               "contrast_percentile must lie strictly between 0 and 1");

  std::unique_ptr<FrameSource> source = open_source(config);
  const StreamConfig& stream = source->config();
  const std::size_t layers = stream.num_layers;
  const auto n = static_cast<std::uint32_t>(stream.tokens_per_frame);

  ManagerParams params = manager_params(config, stream);
  params.validate();
  MemoryManager manager(params);

  RunResult result;
  result.policy = config.policy;
  result.spec_hash = source->spec_hash();
  result.config_json = config_to_json_obj(config, result.spec_hash).dump();
  result.config_hash = hex64(fnv1a64(result.config_json));
  result.resolved_label = default_label(config);
  result.layer_budget = params.layer_token_budget();
  result.trace = std::make_shared<RetentionTrace>(result.spec_hash);
  result.final_sum_b.assign(layers, 0);
  result.max_retained.assign(layers, 0);
  result.max_loaded.assign(layers, 0);
  result.final_radius.assign(layers, 0.0);
  result.final_bytes.assign(layers, 0);

  std::uint64_t total = source->total_frames();
  if (config.frames) total = std::min(total, *config.frames);
  check_config(total >= 1, "run needs at least one frame");

  SupportTracker tracker(layers, config.grid_size, n);
  std::vector<std::vector<Prototype>> history(layers);  // all prototypes seen

  // File outputs.
  const bool writing = !config.out_dir.empty();
  std::ofstream metrics_file;
  std::string metrics_bytes;
  auto emit_metrics_line = [&](const std::string& line) {
    metrics_bytes += line;
    metrics_bytes += '\n';
    if (writing) metrics_file << line << '\n';
  };
  if (writing) {
    fs::create_directories(config.out_dir);
    if (config.checkpoint_every > 0) {
      fs::create_directories(fs::path(config.out_dir) / "checkpoints");
      if (config.heatmaps_at_checkpoints) {
        fs::create_directories(fs::path(config.out_dir) / "heatmaps");
      }
    }
    result.metrics_path = (fs::path(config.out_dir) / "metrics.csv").string();
    metrics_file.open(result.metrics_path, std::ios::trunc);
    if (!metrics_file) throw IoError("cannot open metrics file: " + result.metrics_path);
  }
  {
    char pct[16];
    std::snprintf(pct, sizeof(pct), "p%g", config.contrast_percentile * 100.0);
    emit_metrics_line("# framebank-metrics-v1 config_hash=" + result.config_hash +
                      " spec_hash=" + result.spec_hash + " policy=" +
                      std::string(policy_name(config.policy)) + " support=grid" +
                      std::to_string(config.grid_size) + " r_k=" + pct);
  }
  emit_metrics_line("t,policy,layer,b,c,s_star,s,d,rho,delta_k,coverage_radius,bytes");

  std::vector<std::uint32_t> all_token_ids(n);
  for (std::uint32_t i = 0; i < n; ++i) all_token_ids[i] = i;

  std::uint64_t rows_emitted = 0;
  for (std::uint64_t t = 0; t < total; ++t) {
    GeneratedFrame frame = source->next();
    result.cluster_ids.push_back(frame.cluster_id);
    const FrameMeta meta_copy = frame.block.meta();
    const FrameId current = frame.block.frame_id();

    StepResult delta = manager.step(std::move(frame.block), *result.trace);

    {
      const BlockRecord* cur = manager.record(current);
      check_invariant(cur != nullptr, "current frame missing from store");
      for (std::size_t l = 0; l < layers; ++l) history[l].push_back(cur->prototypes[l]);
    }

    std::vector<std::vector<std::uint32_t>> retained0(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      retained0[l] = delta.current_tokens[l].empty() && delta.current_retained[l] == n
                         ? all_token_ids
                         : delta.current_tokens[l];
    }
    tracker.ingest_frame(meta_copy, retained0);
    for (std::size_t l = 0; l < layers; ++l) {
      for (FrameId f : delta.evicted_blocks[l]) tracker.evict_block(l, f);
      for (const TokenRef& ref : delta.evicted_tokens[l]) {
        tracker.evict_token(l, ref.frame, ref.token);
      }
      if (delta.anchor_evicted) tracker.evict_block(l, *delta.anchor_evicted);
    }

    // Cross-check the rolled-up retention against the manager's own view,
    // and the budget, every step.
    for (std::size_t l = 0; l < layers; ++l) {
      const std::uint64_t retained = manager.retained_tokens(l);
      check_invariant(tracker.sum_b(l) == retained,
                      "trace-tracked retention disagrees with manager state");
      if (result.layer_budget) {
        check_invariant(retained <= *result.layer_budget, "retained tokens over budget");
        ++result.prop1_checks;
        if (params.policy != PolicyKind::kTokenLevel) {
          check_invariant(manager.loaded_tokens(l) <=
                              (params.mid_capacity + params.anchor_capacity + 1) *
                                  static_cast<std::uint64_t>(n),
                          "loaded tokens over budget");
        }
        ++result.budget_checks;
      }
      result.max_retained[l] = std::max(result.max_retained[l], retained);
      result.max_loaded[l] = std::max(result.max_loaded[l], manager.loaded_tokens(l));
    }

    const bool is_final = t + 1 == total;
    const bool row_due = (t % config.metrics_every == 0) || is_final;
    if (row_due) {
      const bool radius_due = (rows_emitted % config.radius_every == 0) || is_final;
      ++rows_emitted;
      for (std::size_t l = 0; l < layers; ++l) {
        MetricRow row;
        row.t = t;
        row.layer = l;
        const auto means = tracker.means(l);
        row.b = means.b;
        row.c = means.c;
        row.s_star = means.s_star;
        row.s = means.s;
        row.d = means.d;
        row.rho = means.rho;
        row.bytes = manager.memory_bytes(l);

        // Contrast statistic relative to the current frame's prototype.
        const BlockRecord* cur = manager.record(current);
        check_invariant(cur != nullptr, "current frame missing from store");
        if (cur->prototypes[l].degenerate) {
          result.trace->note(t, "delta skipped: degenerate current prototype");
        } else {
          std::vector<std::span<const double>> units;
          manager.for_each_retained_token(
              l, [&units](FrameId, std::uint32_t, std::span<const double> unit) {
                units.push_back(unit);
              });
          std::vector<double> cosines(units.size(), 0.0);
          const auto& proto = cur->prototypes[l].unit;
          for (std::size_t i = 0; i < units.size(); ++i) {
            double dot = 0.0;
            for (std::size_t d2 = 0; d2 < proto.size(); ++d2) {
              dot += units[i][d2] * proto[d2];
            }
            cosines[i] = dot;
          }
          const auto dominant =
              above_percentile(cosines, config.contrast_percentile);
          const auto contrast = contrast_statistic(units, dominant);
          if (contrast) {
            row.delta = contrast->delta;
          } else {
            result.trace->note(t, "delta skipped: empty dominant set or remainder");
          }
        }

        if (radius_due) {
          if (manager.unbounded()) {
            row.radius = 0.0;  // every pool block is its own center
          } else {
            bool empty_pool = history[l].empty();
            row.radius = empty_pool ? 0.0
                                    : radius_against(history[l], manager.radius_centers(l));
          }
          if (is_final) result.final_radius[l] = *row.radius;
        }

        std::string line = std::to_string(row.t);
        line += ',';
        line += policy_name(config.policy);
        line += ',' + std::to_string(row.layer);
        line += ',' + format_double(row.b);
        line += ',' + format_double(row.c);
        line += ',' + format_double(row.s_star);
        line += ',' + format_double(row.s);
        line += ',' + format_double(row.d);
        line += ',' + format_double(row.rho);
        append_cell(line, row.delta);
        append_cell(line, row.radius);
        line += ',' + std::to_string(row.bytes);
        emit_metrics_line(line);
        result.rows.push_back(std::move(row));
      }
    }

    if (writing && config.checkpoint_every > 0 &&
        (t + 1) % config.checkpoint_every == 0) {
      const auto ckpt = fs::path(config.out_dir) / "checkpoints" /
                        ("step_" + std::to_string(t) + ".fbc");
      save_checkpoint(manager, ckpt.string());
      if (config.heatmaps_at_checkpoints) {
        const auto hm = fs::path(config.out_dir) / "heatmaps" /
                        ("step_" + std::to_string(t) + "_l" +
                         std::to_string(config.heatmap_layer) + "_h" +
                         std::to_string(config.heatmap_head) + ".csv");
        std::ofstream os(hm.string(), std::ios::trunc);
        if (!os) throw IoError("cannot open heatmap file: " + hm.string());
        heatmap_export(manager, config.heatmap_layer, config.heatmap_head, t,
                       policy_name(config.policy), result.config_hash, os);
      }
    }
  }

  result.frames_run = total;
  for (std::size_t l = 0; l < layers; ++l) {
    result.final_sum_b[l] = tracker.sum_b(l);
    result.final_bytes[l] = manager.memory_bytes(l);
    result.final_retained.push_back({});
    if (config.policy != PolicyKind::kTokenLevel) {
      for (const auto& [id, count] : manager.retained_per_frame(l)) {
        const BlockRecord* rec = manager.record(id);
        check_invariant(rec != nullptr, "retained frame missing from store");
        result.final_retained[l].emplace_back(id, rec->prototypes[l]);
      }
    }
  }
  result.final_bytes_total = manager.memory_bytes_total();
  result.trace_hash = result.trace->content_hash();
  result.metrics_hash = fnv1a64(metrics_bytes);

  if (writing) {
    result.trace_path = (fs::path(config.out_dir) / "trace.jsonl").string();
    std::ofstream trace_file(result.trace_path, std::ios::trunc);
    if (!trace_file) throw IoError("cannot open trace file: " + result.trace_path);
    result.trace->write(trace_file);

    json manifest;
    manifest["tool"] = std::string(kToolName);
    manifest["tool_version"] = std::string(kToolVersion);
    manifest["config"] = json::parse(result.config_json);
    manifest["config_hash"] = result.config_hash;
    manifest["spec_hash"] = result.spec_hash;
    manifest["frames_run"] = result.frames_run;
    manifest["trace_hash"] = hex64(result.trace_hash);
    manifest["metrics_hash"] = hex64(result.metrics_hash);
    char pct[16];
    std::snprintf(pct, sizeof(pct), "%g", config.contrast_percentile * 100.0);
    manifest["r_k_rule"] = std::string("cosine to current prototype above the p") + pct +
                           " nearest-rank percentile";
    manifest["support_proxy"] = "grid" + std::to_string(config.grid_size) + "x" +
                                std::to_string(config.grid_size) + " coverage";
    manifest["outputs"] = json{{"metrics", "metrics.csv"}, {"trace", "trace.jsonl"}};
    result.manifest_path = (fs::path(config.out_dir) / "manifest.json").string();
    std::ofstream manifest_file(result.manifest_path, std::ios::trunc);
    if (!manifest_file) throw IoError("cannot open manifest: " + result.manifest_path);
    manifest_file << manifest.dump(2) << '\n';
  }
  return result;
}

SweepResult sweep(const RunConfig& base, const std::vector<std::size_t>& mids) {
  check_config(!mids.empty(), "sweep needs at least one mid capacity");
  SweepResult result;
  result.mids = mids;

  std::vector<std::future<RunResult>> futures;
  futures.reserve(mids.size());
  for (std::size_t mid : mids) {
    RunConfig config = base;
    config.mid = mid;
    config.label = "mid" + std::to_string(mid);
    if (!base.out_dir.empty()) {
      config.out_dir =
          (fs::path(base.out_dir) / ("mid" + std::to_string(mid))).string();
    }
    futures.push_back(std::async(std::launch::async,
                                 [config]() { return run(config); }));
  }
  for (auto& f : futures) result.runs.push_back(f.get());

  std::string csv = "mid,total_bytes,";
  const std::size_t layers = result.runs.front().final_bytes.size();
  for (std::size_t l = 0; l < layers; ++l) {
    csv += "bytes_l" + std::to_string(l) + (l + 1 < layers ? "," : "\n");
  }
  for (std::size_t i = 0; i < mids.size(); ++i) {
    csv += std::to_string(mids[i]) + ',' + std::to_string(result.runs[i].final_bytes_total);
    for (std::size_t l = 0; l < layers; ++l) {
      csv += ',' + std::to_string(result.runs[i].final_bytes[l]);
    }
    csv += '\n';
  }
  if (!base.out_dir.empty()) {
    fs::create_directories(base.out_dir);
    result.summary_path = (fs::path(base.out_dir) / "sweep.csv").string();
    std::ofstream os(result.summary_path, std::ios::trunc);
    if (!os) throw IoError("cannot open sweep summary: " + result.summary_path);
    os << csv;
  }
  return result;
}

CompareResult compare(std::vector<RunConfig> configs, const std::string& out_dir) {
  check_config(configs.size() >= 2, "compare needs at least two configs");

  // All runs must share the stream, seed, length, and row cadence.
  std::vector<std::string> spec_hashes;
  for (auto& config : configs) {
    if (!out_dir.empty() && config.out_dir.empty()) {
      config.out_dir = (fs::path(out_dir) / default_label(config)).string();
    }
  }
  CompareResult result;
  std::vector<std::future<RunResult>> futures;
  for (const auto& config : configs) {
    futures.push_back(std::async(std::launch::async,
                                 [config]() { return run(config); }));
  }
  for (auto& f : futures) result.runs.push_back(f.get());

  const std::string& spec_hash = result.runs.front().spec_hash;
  for (const auto& r : result.runs) {
    check_config(r.spec_hash == spec_hash, "compare requires a shared stream and seed");
    check_config(r.frames_run == result.runs.front().frames_run,
                 "compare requires equal stream lengths");
  }

  // Unique labels.
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    std::string label = result.runs[i].resolved_label;
    for (std::size_t j = 0; j < i; ++j) {
      if (result.labels[j] == label) {
        label += "#" + std::to_string(i);
        break;
      }
    }
    result.labels.push_back(label);
  }

  // Align rows by (t, layer); every run shares the cadence, so the row sets
  // match; verify as we join.
  const auto& base_rows = result.runs.front().rows;
  std::string csv = "t,layer";
  for (const std::string& label : result.labels) {
    csv += "," + label + "_b," + label + "_rho," + label + "_delta_k," + label +
           "_coverage_radius," + label + "_bytes";
  }
  csv += '\n';
  for (std::size_t i = 0; i < base_rows.size(); ++i) {
    csv += std::to_string(base_rows[i].t) + ',' + std::to_string(base_rows[i].layer);
    for (const auto& r : result.runs) {
      check_config(i < r.rows.size() && r.rows[i].t == base_rows[i].t &&
                       r.rows[i].layer == base_rows[i].layer,
                   "compare requires aligned metric cadences");
      const MetricRow& row = r.rows[i];
      csv += ',' + format_double(row.b);
      csv += ',' + format_double(row.rho);
      std::string cell;
      append_cell(cell, row.delta);
      csv += cell;
      cell.clear();
      append_cell(cell, row.radius);
      csv += cell;
      csv += ',' + std::to_string(row.bytes);
    }
    csv += '\n';
  }
  result.table_csv = csv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    result.table_path = (fs::path(out_dir) / "comparison.csv").string();
    std::ofstream os(result.table_path, std::ios::trunc);
    if (!os) throw IoError("cannot open comparison table: " + result.table_path);
    os << csv;
  }
  return result;
}

}  // namespace framebank
