// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "framebank/errors.hpp"
#include "framebank/prototype.hpp"

namespace framebank::kcenter {

template <typename Id>
struct Item {
  Id id;
  const Prototype* proto;
};

struct Stats {
  std::size_t degenerate_calls = 0;
};

// Greedy farthest-first selection. `pool` must be sorted ascending by id; the
// argmax over coverage scores breaks ties toward the smallest id. Coverage
// scores are rebuilt from scratch for the pass and updated with
// m(B) <- min(m(B), d(B, B_new)) after each pick. O(k*n*D) time, O(n) extra
// space. `observer(pick_index, coverage)` is invoked after seeding and after
// every pick; pass nullptr-like lambda when not needed.
template <typename Id, typename Observer>
std::vector<std::size_t> greedy_select_indices(std::span<const Item<Id>> pool,
                                               std::size_t capacity,
                                               std::size_t seed_index, Stats* stats,
                                               Observer&& observer) {
  check_structural(!pool.empty(), "k-center selection over an empty pool");
  check_structural(capacity >= 1, "k-center capacity must be >= 1");
  check_structural(seed_index < pool.size(), "k-center seed not in pool");

  const std::size_t n = pool.size();
  const std::size_t target = std::min(capacity, n);

  std::vector<double> coverage(n, 0.0);
  std::vector<bool> picked(n, false);
  std::vector<std::size_t> selection;
  selection.reserve(target);

  auto dist = [&](std::size_t i, std::size_t j) {
    bool degenerate = false;
    const double d = cosine_distance(*pool[i].proto, *pool[j].proto, &degenerate);
    if (degenerate && stats != nullptr) ++stats->degenerate_calls;
    return d;
  };

  selection.push_back(seed_index);
  picked[seed_index] = true;
  for (std::size_t i = 0; i < n; ++i) {
    coverage[i] = picked[i] ? 0.0 : dist(i, seed_index);
  }
  observer(std::size_t{0}, std::span<const double>(coverage));

  while (selection.size() < target) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (picked[i]) continue;
      if (best == n || coverage[i] > coverage[best]) best = i;
    }
    picked[best] = true;
    selection.push_back(best);
    for (std::size_t i = 0; i < n; ++i) {
      if (picked[i]) {
        coverage[i] = 0.0;
        continue;
      }
      coverage[i] = std::min(coverage[i], dist(i, best));
    }
    observer(selection.size() - 1, std::span<const double>(coverage));
  }
  return selection;
}

template <typename Id>
std::vector<std::size_t> greedy_select_indices(std::span<const Item<Id>> pool,
                                               std::size_t capacity,
                                               std::size_t seed_index,
                                               Stats* stats = nullptr) {
  return greedy_select_indices(pool, capacity, seed_index, stats,
                               [](std::size_t, std::span<const double>) {});
}

// Realized k-center objective: max over `pool` of min distance to `centers`.
template <typename Id>
double objective(std::span<const Item<Id>> pool, std::span<const Item<Id>> centers,
                 Stats* stats = nullptr) {
  check_structural(!centers.empty(), "k-center objective needs at least one center");
  double worst = 0.0;
  for (const auto& p : pool) {
    double best = 2.0 + 1.0;
    for (const auto& c : centers) {
      bool degenerate = false;
      const double d = cosine_distance(*p.proto, *c.proto, &degenerate);
      if (degenerate && stats != nullptr) ++stats->degenerate_calls;
      best = std::min(best, d);
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace framebank::kcenter
