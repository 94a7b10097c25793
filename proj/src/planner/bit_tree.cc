// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include "edl/planner.h"

namespace edl::planner {
namespace {

U256 max_value(unsigned total_bits) {
  if (total_bits == 256) return ~U256(0);
  return (U256(1) << total_bits) - 1;
}

// Walks the tree top-down. A node at depth d covers the values whose top
// d*b bits equal its prefix; only partially covered nodes are descended.
void cover_node(const U256& prefix, unsigned depth, const U256& lo, const U256& hi,
                unsigned total_bits, unsigned b, std::vector<LevelCover>& out) {
  const unsigned child_depth = depth + 1;
  const unsigned child_shift = total_bits - child_depth * b;
  const U256 child_span_minus_1 = child_shift == 0 ? U256(0) : (U256(1) << child_shift) - 1;
  const U256 node_lo = depth == 0 ? U256(0) : prefix << (total_bits - depth * b);
  const std::uint64_t fanout = std::uint64_t{1} << b;
  const U256 clip_lo = lo > node_lo ? lo : node_lo;
  const std::uint64_t first = static_cast<std::uint64_t>((clip_lo - node_lo) >> child_shift);
  for (std::uint64_t i = first; i < fanout; ++i) {
    const U256 child_prefix = (prefix << b) | i;
    const U256 c_lo = child_prefix << child_shift;
    if (c_lo > hi) break;
    const U256 c_hi = c_lo + child_span_minus_1;
    if (c_lo >= lo && c_hi <= hi) {
      out[child_depth - 1].prefixes.push_back(child_prefix);
    } else {
      cover_node(child_prefix, child_depth, lo, hi, total_bits, b, out);
    }
  }
}

}  // namespace

std::vector<LevelCover> bit_tree_cover(const U256& lo, const U256& hi, unsigned total_bits,
                                       unsigned branching_bits) {
  if (branching_bits == 0 || total_bits == 0 || total_bits > 256 ||
      total_bits % branching_bits != 0 || branching_bits > 16) {
    throw PlanError("branching bits " + std::to_string(branching_bits) +
                    " must be in 1..16 and divide the domain width " +
                    std::to_string(total_bits));
  }
  const unsigned levels = total_bits / branching_bits;
  std::vector<LevelCover> out(levels);
  for (unsigned d = 0; d < levels; ++d) out[d].bits = (d + 1) * branching_bits;
  if (lo > hi || hi > max_value(total_bits)) return out;
  cover_node(U256(0), 0, lo, hi, total_bits, branching_bits, out);
  return out;
}

Bytes int_prefix_value(std::uint64_t prefix) {
  Bytes out(9);
  out[0] = kPresentTag;
  for (int i = 0; i < 8; ++i) out[1 + i] = static_cast<std::uint8_t>(prefix >> (56 - 8 * i));
  return out;
}

Bytes int_null_value() { return Bytes{kNullTag}; }

Bytes hash_prefix_value(const U256& prefix) {
  Bytes out(32);
  U256 v = prefix;
  for (int i = 31; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  return out;
}

U256 u256_from_be(ByteView bytes) {
  U256 v = 0;
  for (std::uint8_t b : bytes) v = (v << 8) | b;
  return v;
}

}  // namespace edl::planner
