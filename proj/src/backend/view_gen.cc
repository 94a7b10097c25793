// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include "edl/backend.h"

namespace edl::backend {

std::size_t ViewKeySet::size() const {
  std::size_t n = 0;
  for (const auto& k : keys) n += k.size();
  return n;
}

ViewKeySet view_gen(const planner::CanonicalView& view, const SymKey& family_key,
                    std::uint8_t tag_length) {
  ViewKeySet out;
  out.family_id = view.family_id;
  out.tag_length = tag_length;
  out.keys.resize(view.values.size());
  for (std::size_t j = 0; j < view.values.size(); ++j) {
    if (view.values[j].empty()) continue;
    const Aes128 pred(predicate_key(family_key, static_cast<std::uint32_t>(j)));
    // Values arrive sorted and unique from the planner; keep that order.
    const Bytes* previous = nullptr;
    for (const Bytes& x : view.values[j]) {
      if (previous != nullptr && *previous == x) continue;
      out.keys[j].push_back({x, crypto::prf_var(pred, x)});
      previous = &x;
    }
  }
  return out;
}

}  // namespace edl::backend
