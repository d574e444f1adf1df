// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "framebank/manager.hpp"
#include "framebank/mid_bank.hpp"
#include "framebank/rng.hpp"
#include "framebank/stream_sim.hpp"

namespace fb = framebank;

namespace {

std::vector<fb::MidBank::Entry> random_pool(std::size_t n, std::size_t dim) {
  fb::rng::Counter counter(fb::rng::derive_key(1, fb::rng::Tag::kInstance));
  std::vector<fb::MidBank::Entry> pool;
  pool.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (double& x : v) x = counter.next_gaussian();
    pool.push_back({i, fb::make_prototype(v)});
  }
  return pool;
}

fb::StreamSpec bench_stream(std::uint64_t frames, std::size_t tokens, std::size_t dim) {
  fb::StreamSpec spec;
  spec.seed = 2;
  spec.frames = frames;
  spec.config.num_layers = 1;
  spec.config.heads = {1};
  spec.config.tokens_per_frame = tokens;
  spec.config.key_dim = {dim};
  spec.config.bytes_per_element = 2;
  spec.clusters = {fb::ClusterSpec{{}, 0.1, 0.05, frames}};
  spec.noise_sigma = 0.2;
  return spec;
}

void BM_SelectKCenter(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto pool = random_pool(n, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fb::MidBank::select_k_center(pool, k, n - 1));
  }
}
BENCHMARK(BM_SelectKCenter)->Args({17, 16})->Args({25, 24})->Args({64, 16})->Args({256, 16});

void BM_BankIngestSteadyState(benchmark::State& state) {
  const auto capacity = static_cast<std::size_t>(state.range(0));
  const auto pool = random_pool(4096, 64);
  fb::MidBank bank(capacity);
  std::size_t next = 0;
  for (const auto& e : pool) {
    bank.ingest(next++, e.proto);
    if (next > capacity + 1) break;
  }
  for (auto _ : state) {
    bank.ingest(next, pool[next % pool.size()].proto);
    ++next;
  }
}
BENCHMARK(BM_BankIngestSteadyState)->Arg(16)->Arg(32);

void BM_PrototypeCompute(benchmark::State& state) {
  const auto tokens = static_cast<std::size_t>(state.range(0));
  fb::StreamCursor cursor(bench_stream(2, tokens, 64));
  const auto frame = cursor.next();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fb::compute_prototype(frame.block, 0));
  }
}
BENCHMARK(BM_PrototypeCompute)->Arg(64)->Arg(1024);

void BM_ManagerStepFrameKCenter(benchmark::State& state) {
  fb::ManagerParams params;
  params.stream = bench_stream(1, 64, 64).config;
  params.policy = fb::PolicyKind::kFrameKCenter;
  params.mid_capacity = 16;
  params.anchor_capacity = 0;
  fb::MemoryManager manager(params);
  fb::RetentionTrace trace("bench");
  fb::StreamCursor cursor(bench_stream(1 << 22, 64, 64));
  std::size_t steps = 0;
  for (auto _ : state) {
    manager.step(cursor.next().block, trace);
    if (++steps % 8192 == 0) trace = fb::RetentionTrace("bench");  // bound memory
  }
}
BENCHMARK(BM_ManagerStepFrameKCenter);

void BM_ManagerStepTokenLevel(benchmark::State& state) {
  const auto budget = static_cast<std::size_t>(state.range(0));
  fb::ManagerParams params;
  params.stream = bench_stream(1, 16, 16).config;
  params.policy = fb::PolicyKind::kTokenLevel;
  params.mid_capacity = 16;
  params.anchor_capacity = 0;
  params.token_budget = budget;
  fb::MemoryManager manager(params);
  fb::RetentionTrace trace("bench");
  fb::StreamCursor cursor(bench_stream(1 << 22, 16, 16));
  std::size_t steps = 0;
  for (auto _ : state) {
    manager.step(cursor.next().block, trace);
    if (++steps % 8192 == 0) trace = fb::RetentionTrace("bench");  // bound memory
  }
}
BENCHMARK(BM_ManagerStepTokenLevel)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
