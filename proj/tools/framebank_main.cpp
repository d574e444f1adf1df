// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: run retention policies over synthetic or recorded
// streams, sweep budgets, compare policies, export heatmaps, and sanity-check
// the greedy selector against the exhaustive solver.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "framebank/diagnostics.hpp"
#include "framebank/oracle.hpp"
#include "framebank/rng.hpp"
#include "framebank/runner.hpp"
#include "framebank/serialize.hpp"
#include "framebank/version.hpp"

namespace fb = framebank;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitIo = 4;

// FRAMEBANK_OUT_ROOT reroots every relative output directory.
std::string apply_out_root(const std::string& out_dir) {
  if (out_dir.empty()) return out_dir;
  const char* root = std::getenv("FRAMEBANK_OUT_ROOT");
  if (root == nullptr || *root == '\0') return out_dir;
  fs::path p(out_dir);
  if (p.is_absolute()) return out_dir;
  return (fs::path(root) / p).string();
}

void add_run_options(CLI::App* cmd, fb::RunConfig& config, std::string& policy,
                     std::string& scenario, std::string& stream_path,
                     bool with_mid = true) {
  cmd->add_option("--scenario", scenario, "scenario name (see scenario-list)");
  cmd->add_option("--stream", stream_path, "stream spec JSON or recorded container path");
  cmd->add_option("--policy", policy,
                  "frame-kcenter | recent-k | token-level | full-cache")
      ->default_val("frame-kcenter");
  if (with_mid) cmd->add_option("--mid", config.mid, "mid bank capacity B_M per layer");
  cmd->add_option("--anchors", config.anchors, "anchor slots B_A (frame policies)");
  cmd->add_option("--gap", config.gap, "minimum frames between promotions G");
  cmd->add_option("--phi-min", config.phi_min, "reliability promotion threshold");
  cmd->add_option("--nu-min", config.nu_min, "novelty promotion threshold");
  cmd->add_option("--recent-k", config.recent_k, "reserved newest frames K");
  cmd->add_option("--token-budget", config.token_budget, "token budget M per layer");
  cmd->add_option("--grid-size", config.grid_size, "support proxy grid size");
  cmd->add_option("--contrast-percentile", config.contrast_percentile,
                  "dominant-set percentile for the contrast statistic");
  cmd->add_option("--metrics-every", config.metrics_every, "metric row cadence in steps");
  cmd->add_option("--radius-every", config.radius_every,
                  "coverage radius cadence in emitted rows");
}

void finish_config(CLI::App* cmd, fb::RunConfig& config, const std::string& policy,
                   const std::string& scenario, const std::string& stream_path,
                   std::uint64_t seed, std::uint64_t frames) {
  config.policy = fb::policy_from_name(policy);
  fb::check_config(scenario.empty() != stream_path.empty(),
                   "exactly one of --scenario / --stream is required");
  config.stream = scenario.empty() ? stream_path : scenario;
  auto option_set = [cmd](const char* name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (option_set("--seed")) config.seed = seed;
  if (option_set("--frames")) config.frames = frames;
  // Anchor slots make no sense for token/full policies; drop the default
  // silently unless the user asked for them explicitly.
  if ((config.policy == fb::PolicyKind::kTokenLevel ||
       config.policy == fb::PolicyKind::kFullCache) &&
      !option_set("--anchors")) {
    config.anchors = 0;
  }
  config.out_dir = apply_out_root(config.out_dir);
}

// Deterministic default output directory when --out is omitted.
std::string default_out_dir(const std::string& kind, const fb::RunConfig& config) {
  return apply_out_root("out/" + kind + "-" + fb::config_hash(config).substr(0, 8));
}

void report_error(const std::string& kind, const std::string& what) {
  nlohmann::json err{{"error", kind}, {"message", what}};
  std::cerr << err.dump() << std::endl;
}

int run_command(const fb::RunConfig& config, bool quiet) {
  const fb::RunResult result = fb::run(config);
  if (!quiet) {
    std::cout << "run " << fb::policy_name(config.policy) << " over " << config.stream
              << ": " << result.frames_run << " frames, config " << result.config_hash
              << "\n";
    if (!result.metrics_path.empty()) {
      std::cout << "  metrics: " << result.metrics_path << "\n";
      std::cout << "  trace:   " << result.trace_path << "\n";
      std::cout << "  bytes:   " << result.final_bytes_total << " total at final step\n";
    }
  }
  return kExitOk;
}

std::vector<std::size_t> parse_size_list(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  fb::check_config(!out.empty(), "empty capacity list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bounded rolling KV-cache retention over synthetic streams"};
  app.set_version_flag("--version", std::string(fb::kToolVersion));
  app.require_subcommand(1);

  // run ----------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "run one policy over one stream");
  fb::RunConfig run_config;
  std::string run_policy, run_scenario, run_stream;
  std::uint64_t run_seed = 0, run_frames = 0;
  add_run_options(run_cmd, run_config, run_policy, run_scenario, run_stream);
  run_cmd->add_option("--seed", run_seed, "stream seed override");
  run_cmd->add_option("--frames", run_frames, "frame count override");
  run_cmd->add_option("--out", run_config.out_dir,
                      "output directory (default: out/run-<confighash>)");
  run_cmd->add_option("--checkpoint-every", run_config.checkpoint_every,
                      "checkpoint cadence in frames (0 = off)");
  run_cmd->add_flag("--heatmaps", run_config.heatmaps_at_checkpoints,
                    "write heatmap CSVs at checkpoints");
  run_cmd->add_option("--heatmap-layer", run_config.heatmap_layer, "heatmap layer");
  run_cmd->add_option("--heatmap-head", run_config.heatmap_head, "heatmap head");

  // sweep --------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "run a mid-capacity sweep");
  fb::RunConfig sweep_config;
  std::string sweep_policy, sweep_scenario, sweep_stream, sweep_mids = "12,16,20,24";
  std::uint64_t sweep_seed = 0, sweep_frames = 0;
  add_run_options(sweep_cmd, sweep_config, sweep_policy, sweep_scenario, sweep_stream,
                  /*with_mid=*/false);
  sweep_cmd->add_option("--seed", sweep_seed, "stream seed override");
  sweep_cmd->add_option("--frames", sweep_frames, "frame count override");
  sweep_cmd->add_option("--mid,--mids", sweep_mids, "comma list of mid capacities");
  sweep_cmd->add_option("--out", sweep_config.out_dir,
                        "output directory (default: out/sweep-<confighash>)");

  // compare ------------------------------------------------------------
  auto* compare_cmd =
      app.add_subcommand("compare", "run several configs over one stream");
  std::string compare_file, compare_out;
  compare_cmd
      ->add_option("--configs", compare_file,
                   "JSON file: array of run configs sharing a stream")
      ->required();
  compare_cmd->add_option("--out", compare_out, "output directory")->required();

  // heatmap ------------------------------------------------------------
  auto* heatmap_cmd =
      app.add_subcommand("heatmap", "run to a step and export the retained-key matrix");
  fb::RunConfig hm_config;
  std::string hm_policy, hm_scenario, hm_stream, hm_out;
  std::uint64_t hm_seed = 0, hm_step = 0;
  add_run_options(heatmap_cmd, hm_config, hm_policy, hm_scenario, hm_stream);
  heatmap_cmd->add_option("--seed", hm_seed, "stream seed override");
  heatmap_cmd->add_option("--at-step", hm_step, "step to snapshot")->required();
  heatmap_cmd->add_option("--layer", hm_config.heatmap_layer, "layer slice");
  heatmap_cmd->add_option("--head", hm_config.heatmap_head, "head slice");
  heatmap_cmd->add_option("--out", hm_out, "output CSV path")->required();

  // oracle-check ---------------------------------------------------------
  auto* oracle_cmd = app.add_subcommand(
      "oracle-check", "compare greedy selection against the exhaustive solver");
  std::uint64_t oc_instances = 100, oc_seed = 7;
  std::size_t oc_max_n = 12, oc_max_k = 5;
  std::string oc_dims = "4,64";
  oracle_cmd->add_option("--instances", oc_instances, "random instances");
  oracle_cmd->add_option("--seed", oc_seed, "instance seed");
  oracle_cmd->add_option("--max-n", oc_max_n, "max pool size (<= 15)");
  oracle_cmd->add_option("--max-k", oc_max_k, "max centers");
  oracle_cmd->add_option("--dims", oc_dims, "comma list of key dimensions");

  // scenario-list --------------------------------------------------------
  app.add_subcommand("scenario-list", "list the built-in stream scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      finish_config(run_cmd, run_config, run_policy, run_scenario, run_stream, run_seed,
                    run_frames);
      if (run_config.out_dir.empty()) run_config.out_dir = default_out_dir("run", run_config);
      return run_command(run_config, false);
    }

    if (sweep_cmd->parsed()) {
      finish_config(sweep_cmd, sweep_config, sweep_policy, sweep_scenario, sweep_stream,
                    sweep_seed, sweep_frames);
      if (sweep_config.out_dir.empty()) {
        sweep_config.out_dir = default_out_dir("sweep", sweep_config);
      }
      const auto mids = parse_size_list(sweep_mids);
      const fb::SweepResult result = fb::sweep(sweep_config, mids);
      std::cout << "sweep over mids " << sweep_mids << ":\n";
      for (std::size_t i = 0; i < result.mids.size(); ++i) {
        std::cout << "  mid " << result.mids[i] << ": "
                  << result.runs[i].final_bytes_total << " bytes\n";
      }
      if (!result.summary_path.empty()) {
        std::cout << "  summary: " << result.summary_path << "\n";
      }
      return kExitOk;
    }

    if (compare_cmd->parsed()) {
      std::ifstream is(compare_file);
      if (!is) throw fb::IoError("cannot open compare config: " + compare_file);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(is);
      } catch (const nlohmann::json::exception& e) {
        throw fb::ConfigError(std::string("invalid compare config JSON: ") + e.what());
      }
      fb::check_config(j.is_array(), "compare config must be a JSON array");
      std::vector<fb::RunConfig> configs;
      for (const auto& jc : j) {
        fb::RunConfig c;
        c.stream = jc.at("stream").get<std::string>();
        c.policy = fb::policy_from_name(jc.at("policy").get<std::string>());
        if (jc.contains("mid")) c.mid = jc.at("mid").get<std::size_t>();
        if (jc.contains("anchors")) c.anchors = jc.at("anchors").get<std::size_t>();
        else if (c.policy == fb::PolicyKind::kTokenLevel ||
                 c.policy == fb::PolicyKind::kFullCache)
          c.anchors = 0;
        if (jc.contains("gap")) c.gap = jc.at("gap").get<std::uint64_t>();
        if (jc.contains("phi_min")) c.phi_min = jc.at("phi_min").get<double>();
        if (jc.contains("nu_min")) c.nu_min = jc.at("nu_min").get<double>();
        if (jc.contains("recent_k")) c.recent_k = jc.at("recent_k").get<std::size_t>();
        if (jc.contains("token_budget"))
          c.token_budget = jc.at("token_budget").get<std::size_t>();
        if (jc.contains("grid_size")) c.grid_size = jc.at("grid_size").get<std::size_t>();
        if (jc.contains("seed")) c.seed = jc.at("seed").get<std::uint64_t>();
        if (jc.contains("frames")) c.frames = jc.at("frames").get<std::uint64_t>();
        if (jc.contains("metrics_every"))
          c.metrics_every = jc.at("metrics_every").get<std::uint64_t>();
        if (jc.contains("radius_every"))
          c.radius_every = jc.at("radius_every").get<std::uint64_t>();
        if (jc.contains("label")) c.label = jc.at("label").get<std::string>();
        configs.push_back(std::move(c));
      }
      const fb::CompareResult result =
          fb::compare(std::move(configs), apply_out_root(compare_out));
      std::cout << "compared " << result.runs.size() << " configs";
      if (!result.table_path.empty()) std::cout << ", table: " << result.table_path;
      std::cout << "\n";
      return kExitOk;
    }

    if (heatmap_cmd->parsed()) {
      finish_config(heatmap_cmd, hm_config, hm_policy, hm_scenario, hm_stream, hm_seed, 0);
      hm_config.frames = hm_step + 1;
      hm_config.out_dir.clear();
      // Re-run to the snapshot step, then export directly from a fresh
      // manager fed by the same stream prefix.
      fb::StreamSpec spec = fb::resolve_spec(hm_config);
      fb::StreamCursor cursor(spec);
      fb::ManagerParams params;
      params.stream = spec.config;
      params.policy = hm_config.policy;
      params.mid_capacity = hm_config.mid;
      params.anchor_capacity = hm_config.anchors;
      params.gap = hm_config.gap;
      params.phi_min = hm_config.phi_min;
      params.nu_min = hm_config.nu_min;
      params.recent_k = hm_config.recent_k;
      params.token_budget = hm_config.token_budget;
      fb::MemoryManager manager(params);
      fb::RetentionTrace trace(fb::stream_spec_hash(spec));
      for (std::uint64_t t = 0; t <= hm_step; ++t) {
        fb::check_config(!cursor.done(), "--at-step beyond the stream length");
        manager.step(cursor.next().block, trace);
      }
      const std::string out_path = apply_out_root(hm_out);
      std::ofstream os(out_path, std::ios::trunc);
      if (!os) throw fb::IoError("cannot open heatmap output: " + out_path);
      fb::heatmap_export(manager, hm_config.heatmap_layer, hm_config.heatmap_head,
                         hm_step, fb::policy_name(hm_config.policy),
                         fb::config_hash(hm_config), os);
      std::cout << "heatmap written to " << out_path << "\n";
      return kExitOk;
    }

    if (oracle_cmd->parsed()) {
      const auto dims = parse_size_list(oc_dims);
      std::uint64_t equal = 0;
      double worst_ratio = 0.0;
      for (std::uint64_t i = 0; i < oc_instances; ++i) {
        const auto instance =
            fb::random_kcenter_instance(oc_seed, i, oc_max_n, oc_max_k, dims);
        const double greedy_obj = fb::greedy_objective_on(instance);
        const auto exact =
            fb::exact_k_center(instance.pool, instance.k, instance.seed_id);
        const double ratio = exact.objective > 0.0 ? greedy_obj / exact.objective : 1.0;
        worst_ratio = std::max(worst_ratio, ratio);
        if (greedy_obj <= exact.objective + 1e-12) ++equal;
      }
      std::cout << "oracle-check: " << oc_instances << " instances, worst ratio "
                << worst_ratio << ", optimal on "
                << (100.0 * static_cast<double>(equal) / static_cast<double>(oc_instances))
                << "%\n";
      return worst_ratio <= 2.0 ? kExitOk : kExitInvariant;
    }

    // scenario-list
    for (const auto& s : fb::scenario_library()) {
      std::cout << s.name << ": " << s.description << " (frames=" << s.spec.frames
                << ", seed=" << s.spec.seed << ")\n";
    }
    return kExitOk;
  } catch (const fb::ConfigError& e) {
    report_error("config", e.what());
    return kExitConfig;
  } catch (const fb::StructuralError& e) {
    report_error("structural", e.what());
    return kExitInvariant;
  } catch (const fb::InvariantError& e) {
    report_error("invariant", e.what());
    return kExitInvariant;
  } catch (const fb::IoError& e) {
    report_error("io", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
}
