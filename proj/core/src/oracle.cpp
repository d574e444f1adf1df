// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "framebank/rng.hpp"

namespace framebank {

namespace {

constexpr std::size_t kMaxPool = 15;

}  // namespace

OracleResult exact_k_center(std::span<const MidBank::Entry> pool, std::size_t k,
                            std::optional<FrameId> pinned) {
  check_structural(!pool.empty(), "exact_k_center: empty pool");
  check_config(pool.size() <= kMaxPool,
               "exact_k_center: pool size " + std::to_string(pool.size()) +
                   " exceeds enumeration guard of " + std::to_string(kMaxPool));
  check_structural(k >= 1 && k <= pool.size(), "exact_k_center: k out of range");

  const std::size_t n = pool.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pool[a].frame_id < pool[b].frame_id;
  });

  std::size_t pinned_index = n;
  if (pinned) {
    for (std::size_t i = 0; i < n; ++i) {
      if (pool[order[i]].frame_id == *pinned) {
        pinned_index = i;
        break;
      }
    }
    check_structural(pinned_index < n, "exact_k_center: pinned id not in pool");
  }

  // Pairwise distances once; enumeration then only does lookups.
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = cosine_distance(pool[order[i]].proto, pool[order[j]].proto);
      dist[i * n + j] = d;
      dist[j * n + i] = d;
    }
  }

  OracleResult best;
  best.objective = 4.0;
  std::vector<std::size_t> subset(k);

  auto evaluate = [&]() {
    ++best.enumerated;
    double worst = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      double nearest = 4.0;
      for (std::size_t c : subset) nearest = std::min(nearest, dist[p * n + c]);
      worst = std::max(worst, nearest);
      if (worst > best.objective) return;  // cannot improve
    }
    std::vector<FrameId> ids;
    ids.reserve(k);
    for (std::size_t c : subset) ids.push_back(pool[order[c]].frame_id);
    std::sort(ids.begin(), ids.end());
    if (worst < best.objective ||
        (worst == best.objective && ids < best.selected)) {
      best.objective = worst;
      best.selected = std::move(ids);
    }
  };

  // Lexicographic combinations of k indices out of n, with the pinned index
  // forced into every subset when present.
  std::vector<std::size_t> comb;
  auto recurse = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
    if (depth == k) {
      subset = comb;
      evaluate();
      return;
    }
    for (std::size_t i = start; i + (k - depth) <= n; ++i) {
      if (pinned_index < n && i == pinned_index) continue;
      comb.push_back(i);
      self(self, i + 1, depth + 1);
      comb.pop_back();
    }
  };
  if (pinned_index < n) {
    comb.push_back(pinned_index);
    recurse(recurse, 0, 1);
  } else {
    recurse(recurse, 0, 0);
  }

  // Recompute the objective of the winner independently of the pruning path.
  double check = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double nearest = 4.0;
    for (FrameId id : best.selected) {
      for (std::size_t i = 0; i < n; ++i) {
        if (pool[order[i]].frame_id == id) {
          nearest = std::min(nearest, dist[p * n + i]);
          break;
        }
      }
    }
    check = std::max(check, nearest);
  }
  best.objective = check;
  return best;
}

KCenterInstance random_kcenter_instance(std::uint64_t seed, std::uint64_t index,
                                        std::size_t max_n, std::size_t max_k,
                                        std::span<const std::size_t> dims) {
  check_config(max_n >= 2 && max_n <= kMaxPool, "instance pool size out of range");
  check_config(!dims.empty(), "instance needs at least one dimension choice");
  rng::Counter counter(rng::derive_key(seed, rng::Tag::kInstance, index));
  KCenterInstance instance;
  const std::size_t n = 2 + counter.next_u64() % (max_n - 1);
  instance.k = 1 + counter.next_u64() % std::min(max_k, n);
  const std::size_t dim = dims[counter.next_u64() % dims.size()];
  for (std::size_t p = 0; p < n; ++p) {
    std::vector<double> v(dim);
    double norm = 0.0;
    for (double& x : v) {
      x = counter.next_gaussian();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    instance.pool.push_back({p, make_prototype(v)});
  }
  instance.seed_id = n - 1;
  return instance;
}

double greedy_objective_on(const KCenterInstance& instance) {
  const auto picks =
      MidBank::select_k_center(instance.pool, instance.k, instance.seed_id);
  std::vector<kcenter::Item<FrameId>> pool_items, center_items;
  pool_items.reserve(instance.pool.size());
  for (const auto& e : instance.pool) pool_items.push_back({e.frame_id, &e.proto});
  for (FrameId id : picks) center_items.push_back({id, &instance.pool[id].proto});
  return kcenter::objective(std::span<const kcenter::Item<FrameId>>(pool_items),
                            std::span<const kcenter::Item<FrameId>>(center_items));
}

}  // namespace framebank
