// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "framebank/diagnostics.hpp"
#include "framebank/policies.hpp"
#include "framebank/stream_sim.hpp"
#include "test_helpers.hpp"

using namespace framebank;
using test::tiny_config;

namespace {

std::vector<std::array<float, 2>> grid_positions(std::size_t side) {
  std::vector<std::array<float, 2>> positions;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      positions.push_back({(static_cast<float>(c) + 0.5f) / static_cast<float>(side),
                           (static_cast<float>(r) + 0.5f) / static_cast<float>(side)});
    }
  }
  return positions;
}

std::vector<std::uint32_t> iota_tokens(std::uint32_t n) {
  std::vector<std::uint32_t> t(n);
  for (std::uint32_t i = 0; i < n; ++i) t[i] = i;
  return t;
}

}  // namespace

TEST_CASE("support proxy: full grid, empty set, one quadrant") {
  const auto positions = grid_positions(8);
  CHECK(support_fraction(positions, iota_tokens(64), 8) == doctest::Approx(1.0));
  CHECK(support_fraction(positions, {}, 8) == doctest::Approx(0.0));

  // Tokens restricted to the lower-left quadrant of an 8x8 grid: 16/64 cells.
  std::vector<std::uint32_t> quadrant;
  for (std::uint32_t r = 0; r < 4; ++r) {
    for (std::uint32_t c = 0; c < 4; ++c) quadrant.push_back(r * 8 + c);
  }
  CHECK(support_fraction(positions, quadrant, 8) == doctest::Approx(0.25));
  CHECK_THROWS_AS(support_fraction(positions, quadrant, 0), ConfigError);
}

TEST_CASE("support proxy: monotone under adding tokens") {
  rng::Counter counter(rng::derive_key(71, rng::Tag::kInstance));
  std::vector<std::array<float, 2>> positions;
  for (int i = 0; i < 40; ++i) {
    positions.push_back({static_cast<float>(counter.next_uniform()),
                         static_cast<float>(counter.next_uniform())});
  }
  std::vector<std::uint32_t> subset;
  double prev = 0.0;
  for (std::uint32_t i = 0; i < 40; ++i) {
    subset.push_back(i);
    const double s = support_fraction(positions, subset, 8);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("contrast statistic: hand-checked extremes") {
  std::vector<double> e1{1.0, 0.0};
  std::vector<double> e2{0.0, 1.0};
  std::vector<double> ne1{-1.0, 0.0};

  {
    // R = {e1, e1}, complement = {e2}: delta = 1 - 0 = 1.
    std::vector<std::span<const double>> keys{e1, e1, e2};
    std::vector<std::size_t> dominant{0, 1};
    const auto result = contrast_statistic(keys, dominant);
    REQUIRE(result.has_value());
    CHECK(result->center[0] == doctest::Approx(1.0));
    CHECK(result->delta == doctest::Approx(1.0));
  }
  {
    // R = {e1}, complement = {-e1}: delta = 1 - (-1) = 2 (extremal).
    std::vector<std::span<const double>> keys{e1, ne1};
    std::vector<std::size_t> dominant{0};
    const auto result = contrast_statistic(keys, dominant);
    REQUIRE(result.has_value());
    CHECK(result->delta == doctest::Approx(2.0));
  }
  {
    // Empty dominant set or empty complement: skipped.
    std::vector<std::span<const double>> keys{e1, e2};
    CHECK_FALSE(contrast_statistic(keys, {}).has_value());
    std::vector<std::size_t> all{0, 1};
    CHECK_FALSE(contrast_statistic(keys, all).has_value());
  }
}

TEST_CASE("contrast statistic: near zero when both sides share a distribution") {
  // 10^4 uniform unit keys in D=64, random split: |delta| stays below 0.05.
  rng::Counter counter(rng::derive_key(73, rng::Tag::kInstance));
  std::vector<std::vector<double>> storage;
  storage.reserve(10000);
  for (int i = 0; i < 10000; ++i) storage.push_back(test::random_unit(counter, 64));
  std::vector<std::span<const double>> keys(storage.begin(), storage.end());
  std::vector<std::size_t> dominant;
  for (std::size_t i = 0; i < 1000; ++i) dominant.push_back(i * 7 % keys.size());
  std::sort(dominant.begin(), dominant.end());
  dominant.erase(std::unique(dominant.begin(), dominant.end()), dominant.end());
  const auto result = contrast_statistic(keys, dominant);
  REQUIRE(result.has_value());
  CHECK(std::abs(result->delta) < 0.05);
}

TEST_CASE("contrast statistic: invariant under a global rotation") {
  rng::Counter counter(rng::derive_key(79, rng::Tag::kInstance));
  const std::size_t dim = 6;

  // Random orthogonal matrix via Gram-Schmidt on a Gaussian matrix.
  std::vector<std::vector<double>> q;
  for (std::size_t r = 0; r < dim; ++r) {
    std::vector<double> v(dim);
    for (double& x : v) x = counter.next_gaussian();
    for (const auto& u : q) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += v[i] * u[i];
      for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * u[i];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    q.push_back(std::move(v));
  }
  auto rotate = [&](const std::vector<double>& v) {
    std::vector<double> out(dim, 0.0);
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < dim; ++c) out[r] += q[r][c] * v[c];
    }
    return out;
  };

  std::vector<std::vector<double>> base, rotated;
  for (int i = 0; i < 50; ++i) {
    base.push_back(test::random_unit(counter, dim));
    rotated.push_back(rotate(base.back()));
  }
  std::vector<std::span<const double>> keys_a(base.begin(), base.end());
  std::vector<std::span<const double>> keys_b(rotated.begin(), rotated.end());
  std::vector<std::size_t> dominant{0, 3, 7, 11, 19};
  const auto ra = contrast_statistic(keys_a, dominant);
  const auto rb = contrast_statistic(keys_b, dominant);
  REQUIRE(ra.has_value());
  REQUIRE(rb.has_value());
  CHECK(ra->delta == doctest::Approx(rb->delta).epsilon(1e-6));
}

TEST_CASE("attention probe: trivial weight distributions") {
  std::vector<double> e1{1.0, 0.0, 0.0, 0.0};
  std::vector<double> e2{0.0, 1.0, 0.0, 0.0};
  {
    std::vector<std::span<const double>> keys{e1};
    const auto probe = attention_probe(e1, keys);
    REQUIRE(probe.weights.size() == 1);
    CHECK(probe.weights[0] == doctest::Approx(1.0));
  }
  {
    std::vector<std::span<const double>> keys{e1, e1};
    const auto probe = attention_probe(e1, keys);
    CHECK(probe.weights[0] == doctest::Approx(0.5));
    CHECK(probe.weights[1] == doctest::Approx(0.5));
  }
  {
    // q aligned with one of two orthogonal keys in D=4: z = (0.5, 0),
    // softmax = (0.62246, 0.37754).
    std::vector<std::span<const double>> keys{e1, e2};
    const auto probe = attention_probe(e1, keys);
    CHECK(probe.logits[0] == doctest::Approx(0.5));
    CHECK(probe.logits[1] == doctest::Approx(0.0));
    CHECK(probe.weights[0] == doctest::Approx(0.6224593312).epsilon(1e-6));
    CHECK(probe.weights[1] == doctest::Approx(0.3775406688).epsilon(1e-6));
  }
}

TEST_CASE("attention probe: weights form a probability vector") {
  rng::Counter counter(rng::derive_key(83, rng::Tag::kInstance));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> storage;
    const std::size_t n = 1 + counter.next_u64() % 30;
    for (std::size_t i = 0; i < n; ++i) storage.push_back(test::random_unit(counter, 16));
    std::vector<std::span<const double>> keys(storage.begin(), storage.end());
    const auto query = test::random_unit(counter, 16);
    const auto probe = attention_probe(query, keys);
    double sum = 0.0;
    for (double w : probe.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("above_percentile: nearest-rank threshold, strict comparison") {
  std::vector<double> values{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const auto top = above_percentile(values, 0.9);
  REQUIRE(top.size() == 1);
  CHECK(top[0] == 9);

  // All values equal: nothing is strictly above the percentile value.
  std::vector<double> flat(8, 0.5);
  CHECK(above_percentile(flat, 0.9).empty());
  CHECK_THROWS_AS(above_percentile(values, 1.5), ConfigError);
}

TEST_CASE("support tracker: means match direct recomputation") {
  const std::size_t grid = 4;
  SupportTracker tracker(1, grid, 4);
  const auto positions = grid_positions(2);  // 4 tokens over a 2x2 grid

  FrameMeta meta;
  meta.frame_id = 0;
  meta.token_positions = positions;
  tracker.ingest_frame(meta, {{0, 1, 2, 3}});
  // Frame 0 fully retained: every position in its own 4x4-grid cell? The 2x2
  // grid positions land in 4 distinct cells of the 4x4 grid.
  auto means = tracker.means(0);
  CHECK(means.b == doctest::Approx(4.0));
  CHECK(means.c == doctest::Approx(0.0));
  CHECK(means.rho == doctest::Approx(1.0));
  CHECK(tracker.sum_b(0) == 4);

  meta.frame_id = 1;
  tracker.ingest_frame(meta, {{0, 1}});
  means = tracker.means(0);
  CHECK(means.b == doctest::Approx(3.0));       // (4 + 2) / 2
  CHECK(means.c == doctest::Approx(0.25));      // mean of 0 and 0.5
  CHECK(tracker.sum_b(0) == 6);
  // Frame 1 covers 2 of its 4 star cells: rho = (1 + 0.5) / 2.
  CHECK(means.rho == doctest::Approx(0.75));

  tracker.evict_token(0, 1, 0);
  means = tracker.means(0);
  CHECK(tracker.sum_b(0) == 5);
  CHECK(means.rho == doctest::Approx((1.0 + 0.25) / 2.0));

  tracker.evict_block(0, 0);
  means = tracker.means(0);
  CHECK(tracker.sum_b(0) == 1);
  CHECK(means.rho == doctest::Approx(0.125));  // (0 + 0.25) / 2
  CHECK(means.s_star == doctest::Approx(0.25));  // 4/16 cells, both frames
}

TEST_CASE("heatmap export: row counts and header") {
  const auto cfg = tiny_config(1, 1, 4, 8);
  ManagerParams params;
  params.stream = cfg;
  params.policy = PolicyKind::kFrameKCenter;
  params.mid_capacity = 3;
  params.anchor_capacity = 0;
  MemoryManager manager(params);
  RetentionTrace trace("test");

  StreamSpec spec;
  spec.seed = 21;
  spec.frames = 10;
  spec.config = cfg;
  spec.clusters = {ClusterSpec{{}, 0.1, 0.1, 10}};
  StreamCursor cursor(spec);
  while (!cursor.done()) manager.step(cursor.next().block, trace);

  std::ostringstream os;
  heatmap_export(manager, 0, 0, 9, "frame-kcenter", "cafebabe", os);
  const std::string text = os.str();
  CHECK(text.rfind("# {\"step\":9,\"layer\":0,\"head\":0,", 0) == 0);

  std::size_t rows = 0;
  std::size_t pos = 0;
  while ((pos = text.find('\n', pos)) != std::string::npos) {
    ++rows;
    ++pos;
  }
  // Header line + 3 retained blocks x 4 tokens.
  CHECK(rows == 1 + 12);
  CHECK_THROWS_AS(heatmap_export(manager, 5, 0, 9, "p", "h", os), StructuralError);
  CHECK_THROWS_AS(heatmap_export(manager, 0, 3, 9, "p", "h", os), StructuralError);
}

TEST_CASE("heatmap export: empty memory writes a header-only matrix") {
  const auto cfg = tiny_config(1, 1, 4, 8);
  ManagerParams params;
  params.stream = cfg;
  params.policy = PolicyKind::kFrameKCenter;
  params.mid_capacity = 3;
  params.anchor_capacity = 0;
  MemoryManager manager(params);
  std::ostringstream os;
  heatmap_export(manager, 0, 0, 0, "frame-kcenter", "cafebabe", os);
  const std::string text = os.str();
  CHECK(text.rfind("# {\"step\":0", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  CHECK(text.find("\"rows\":0") != std::string::npos);
}

TEST_CASE("probe query: per-head mean key plus seeded perturbation") {
  const auto cfg = tiny_config(1, 2, 4, 8);
  StreamSpec spec;
  spec.seed = 33;
  spec.frames = 2;
  spec.config = cfg;
  spec.clusters = {ClusterSpec{{}, 0.05, 0.05, 2}};
  StreamCursor cursor(spec);
  const auto frame = cursor.next();

  const auto q1 = probe_query(frame.block, 0, 0, 77);
  const auto q2 = probe_query(frame.block, 0, 0, 77);
  CHECK(q1 == q2);  // same seed, same query
  const auto q3 = probe_query(frame.block, 0, 0, 78);
  CHECK(q1 != q3);
  const auto q0 = probe_query(frame.block, 0, 0, 77, 0.0);
  // With sigma 0 the query is exactly the per-head token mean.
  std::vector<double> mean(8, 0.0);
  for (std::size_t t = 0; t < 4; ++t) {
    const auto row = frame.block.key_row(0, 0, t);
    for (std::size_t i = 0; i < 8; ++i) mean[i] += row[i];
  }
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(q0[i] == doctest::Approx(mean[i] / 4.0).epsilon(1e-12));
  }
}
