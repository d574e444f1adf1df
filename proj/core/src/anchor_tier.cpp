// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#include "framebank/anchor_tier.hpp"

#include <algorithm>
#include <cmath>

namespace framebank {

AnchorTier::AnchorTier(Params params) : params_(params) {
  check_structural(params_.gap >= 1, "AnchorTier gap must be >= 1");
}

bool AnchorTier::contains(FrameId id) const {
  return std::any_of(slots_.begin(), slots_.end(),
                     [id](const Slot& s) { return s.frame_id == id; });
}

namespace {

double signature_dissimilarity(const std::array<double, 7>& a,
                               const std::array<double, 7>& b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < 7; ++i) dot += a[i] * b[i];
  return 1.0 - dot;
}

}  // namespace

double AnchorTier::novelty(const FrameMeta& meta,
                           std::span<const Prototype> prototypes,
                           bool* prototype_fallback) const {
  if (slots_.empty()) return 2.0;

  bool poses_available = meta.pose.has_value();
  for (const Slot& s : slots_) poses_available = poses_available && s.meta.pose.has_value();

  if (!poses_available) {
    if (prototype_fallback != nullptr) *prototype_fallback = true;
    check_structural(!prototypes.empty(), "novelty fallback needs layer-0 prototype");
    double best = 2.0;
    for (const Slot& s : slots_) {
      check_structural(!s.prototypes.empty(), "anchor slot missing prototypes");
      best = std::min(best, cosine_distance(prototypes[0], s.prototypes[0]));
    }
    return best;
  }

  const auto candidate = meta.pose->normalized();
  double best = 2.0;
  for (const Slot& s : slots_) {
    best = std::min(best, signature_dissimilarity(candidate, s.meta.pose->normalized()));
  }
  return best;
}

AnchorTier::Outcome AnchorTier::consider(const std::shared_ptr<const FrameBlock>& block,
                                         std::span<const Prototype> prototypes) {
  Outcome out;
  const FrameMeta& meta = block->meta();
  const bool first_frame = !seen_any_;
  seen_any_ = true;

  if (params_.capacity == 0) return out;

  out.phi = reliability(meta);
  out.nu = novelty(meta, prototypes, &out.prototype_novelty);

  if (first_frame) {
    // Pin: unconditional promotion of the stream's first frame into slot 0.
    slots_.insert(slots_.begin(),
                  Slot{meta.frame_id, meta,
                       std::vector<Prototype>(prototypes.begin(), prototypes.end()),
                       block});
    t_last_ = meta.frame_id;
    out.promoted = true;
    return out;
  }

  check_structural(!t_last_ || meta.frame_id > *t_last_,
                   "AnchorTier::consider: frames must arrive in order");

  const std::uint64_t elapsed = t_last_ ? meta.frame_id - *t_last_ : params_.gap;
  if (elapsed < params_.gap) return out;
  if (out.phi < params_.phi_min) return out;
  if (out.nu < params_.nu_min) return out;

  if (slots_.size() == params_.capacity) {
    if (slots_.size() <= 1) return out;  // only the pin left, nothing evictable
    out.evicted = slots_[1].frame_id;
    slots_.erase(slots_.begin() + 1);
  }
  slots_.push_back(Slot{meta.frame_id, meta,
                        std::vector<Prototype>(prototypes.begin(), prototypes.end()),
                        block});
  t_last_ = meta.frame_id;
  out.promoted = true;
  return out;
}

void AnchorTier::restore(std::vector<Slot> slots, std::optional<FrameId> t_last,
                         bool seen_any) {
  check_structural(slots.size() <= params_.capacity, "AnchorTier::restore: over capacity");
  slots_ = std::move(slots);
  t_last_ = t_last;
  seen_any_ = seen_any;
}

}  // namespace framebank
