// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "edl/planner.h"

namespace edl::planner {
namespace {

const U256 kIntMax = (U256(1) << 64) - 1;
const U256 kHashMax = ~U256(0);

CmpOp negate_op(CmpOp op) {
  switch (op) {
    case CmpOp::kEq:
      return CmpOp::kNe;
    case CmpOp::kNe:
      return CmpOp::kEq;
    case CmpOp::kIn:
      return CmpOp::kNotIn;
    case CmpOp::kNotIn:
      return CmpOp::kIn;
    case CmpOp::kLt:
      return CmpOp::kGe;
    case CmpOp::kGe:
      return CmpOp::kLt;
    case CmpOp::kLe:
      return CmpOp::kGt;
    case CmpOp::kGt:
      return CmpOp::kLe;
  }
  return op;
}

Expr push(Expr e, bool negate) {
  switch (e.kind) {
    case Expr::Kind::kNot:
      return push(std::move(e.children.at(0)), !negate);
    case Expr::Kind::kAnd:
    case Expr::Kind::kOr: {
      if (negate) e.kind = e.kind == Expr::Kind::kAnd ? Expr::Kind::kOr : Expr::Kind::kAnd;
      for (Expr& c : e.children) c = push(std::move(c), negate);
      return e;
    }
    case Expr::Kind::kCompare: {
      if (!negate) return e;
      Comparison c = std::get<Comparison>(std::move(e.leaf));
      c.op = negate_op(c.op);
      if (is_range_op(c.op)) c.null_matches = !c.null_matches;
      return Expr::compare(std::move(c));
    }
    case Expr::Kind::kRange:
    case Expr::Kind::kIn:
      if (negate) throw PlanError("NOT over a rewritten leaf; run push_not_down first");
      return e;
  }
  return e;
}

// Sorts and merges overlapping or adjacent intervals.
std::vector<Interval> normalize(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (Interval& iv : v) {
    if (iv.lo > iv.hi) continue;
    if (!out.empty() && (out.back().hi == kHashMax || iv.lo <= out.back().hi + 1)) {
      if (iv.hi > out.back().hi) out.back().hi = iv.hi;
      continue;
    }
    out.push_back(std::move(iv));
  }
  return out;
}

std::vector<Interval> complement(const std::vector<Interval>& sorted, const U256& max) {
  std::vector<Interval> out;
  U256 next = 0;
  bool exhausted = false;
  for (const Interval& iv : sorted) {
    if (iv.lo > next) out.push_back({next, iv.lo - 1});
    if (iv.hi == max) {
      exhausted = true;
      break;
    }
    next = iv.hi + 1;
  }
  if (!exhausted) out.push_back({next, max});
  return out;
}

std::vector<Interval> intersect(const std::vector<Interval>& a, const std::vector<Interval>& b) {
  std::vector<Interval> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const U256 lo = std::max(a[i].lo, b[j].lo);
    const U256 hi = std::min(a[i].hi, b[j].hi);
    if (lo <= hi) out.push_back({lo, hi});
    if (a[i].hi < b[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

void sort_unique(std::vector<Bytes>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void append_unique(std::vector<std::string>& into, const std::vector<std::string>& from) {
  for (const std::string& s : from) {
    if (std::find(into.begin(), into.end(), s) == into.end()) into.push_back(s);
  }
}

RangeLeaf leaf_from_comparison(const Comparison& c, const Schema& schema) {
  const Column& col = schema[c.column];
  RangeLeaf leaf;
  leaf.column = c.column;
  const bool positive = c.op == CmpOp::kEq || c.op == CmpOp::kIn;
  const bool negative = c.op == CmpOp::kNe || c.op == CmpOp::kNotIn;
  if (col.type == ColumnType::kUtf8) {
    if (is_range_op(c.op)) throw PlanError("range comparison on string column '" + col.name + "'");
    leaf.domain = positive ? RangeDomain::kByteSet : RangeDomain::kHashTree;
  } else {
    leaf.domain = RangeDomain::kIntTree;
    leaf.points_only = positive;
  }
  if (c.unbound) return leaf;
  if (c.wildcard) {
    leaf.wildcards.push_back(*c.wildcard);
    return leaf;
  }
  if (is_range_op(c.op) && c.values.size() != 1) {
    throw PlanError(std::string("comparison ") + op_symbol(c.op) + " on '" + col.name +
                    "' takes exactly one value");
  }
  bool has_null = false;
  std::vector<Interval> points;
  for (const Value& v : c.values) {
    if (is_null(v)) {
      if (!col.nullable) throw PlanError("NULL compared with non-nullable column '" + col.name + "'");
      if (is_range_op(c.op)) throw PlanError("NULL cannot bound a range comparison");
      has_null = true;
      if (col.type == ColumnType::kInt64) continue;
    }
    if (col.type == ColumnType::kUtf8) {
      if (!is_null(v) && !std::holds_alternative<std::string>(v)) {
        throw PlanError("integer value bound to string column '" + col.name + "'");
      }
      Bytes enc = encode_cell(v, col);
      if (positive) {
        leaf.byte_values.push_back(std::move(enc));
      } else {
        const crypto::Digest256 d = crypto::hash_string(enc);
        const U256 h = u256_from_be(d);
        points.push_back({h, h});
      }
      continue;
    }
    if (!std::holds_alternative<std::int64_t>(v)) {
      throw PlanError("string value bound to integer column '" + col.name + "'");
    }
    const U256 u(int64_to_ordered(std::get<std::int64_t>(v)));
    points.push_back({u, u});
  }
  if (col.type == ColumnType::kUtf8) {
    if (positive) {
      sort_unique(leaf.byte_values);
    } else {
      leaf.intervals = complement(normalize(std::move(points)), kHashMax);
    }
    return leaf;
  }
  points = normalize(std::move(points));
  if (positive) {
    leaf.intervals = std::move(points);
    leaf.null_matches = has_null;
    return leaf;
  }
  if (negative) {
    leaf.intervals = complement(points, kIntMax);
    leaf.null_matches = col.nullable && !has_null;
    return leaf;
  }
  const U256 u = points.at(0).lo;
  switch (c.op) {
    case CmpOp::kLt:
      if (u > 0) leaf.intervals.push_back({0, u - 1});
      break;
    case CmpOp::kLe:
      leaf.intervals.push_back({0, u});
      break;
    case CmpOp::kGt:
      if (u < kIntMax) leaf.intervals.push_back({u + 1, kIntMax});
      break;
    case CmpOp::kGe:
      leaf.intervals.push_back({u, kIntMax});
      break;
    default:
      break;
  }
  leaf.null_matches = col.nullable && c.null_matches;
  return leaf;
}

void merge_into(RangeLeaf& into, const RangeLeaf& other, bool is_or) {
  if (into.domain == RangeDomain::kByteSet) {
    if (is_or) {
      into.byte_values.insert(into.byte_values.end(), other.byte_values.begin(),
                              other.byte_values.end());
      sort_unique(into.byte_values);
    } else {
      std::vector<Bytes> both;
      std::set_intersection(into.byte_values.begin(), into.byte_values.end(),
                            other.byte_values.begin(), other.byte_values.end(),
                            std::back_inserter(both));
      into.byte_values = std::move(both);
    }
  } else if (is_or) {
    std::vector<Interval> all = into.intervals;
    all.insert(all.end(), other.intervals.begin(), other.intervals.end());
    into.intervals = normalize(std::move(all));
  } else {
    into.intervals = intersect(into.intervals, other.intervals);
  }
  if (is_or) {
    into.null_matches = into.null_matches || other.null_matches;
    into.points_only = into.points_only && other.points_only;
  } else {
    into.null_matches = into.null_matches && other.null_matches;
    into.points_only = into.points_only || other.points_only;
  }
  append_unique(into.wildcards, other.wildcards);
}

Expr make_in(Atom atom, std::vector<Bytes> values, std::vector<std::string> wildcards) {
  sort_unique(values);
  return Expr::in(InLeaf{atom, std::move(values), std::move(wildcards)});
}

Expr leaf_to_in(const RangeLeaf& leaf, unsigned b) {
  const auto col = static_cast<std::uint32_t>(leaf.column);
  if (leaf.is_false()) return Expr::junction(Expr::Kind::kOr, {});
  if (leaf.domain == RangeDomain::kByteSet) {
    return make_in(Atom{AtomKind::kFieldBytes, col, 0, 0}, leaf.byte_values, leaf.wildcards);
  }
  if (leaf.domain == RangeDomain::kIntTree && leaf.points_only) {
    std::vector<Bytes> values;
    for (const Interval& iv : leaf.intervals) {
      if (iv.hi - iv.lo >= U256(std::size_t{1} << 22)) {
        throw PlanError("equality leaf expands to too many points");
      }
      for (U256 u = iv.lo;; ++u) {
        values.push_back(int_prefix_value(static_cast<std::uint64_t>(u)));
        if (u == iv.hi) break;
      }
    }
    if (leaf.null_matches) values.push_back(int_null_value());
    return make_in(Atom{AtomKind::kTopBits, col, 64, 64}, std::move(values), leaf.wildcards);
  }
  const bool hashed = leaf.domain == RangeDomain::kHashTree;
  const unsigned total = hashed ? 256 : 64;
  const unsigned levels = total / b;
  std::vector<std::vector<Bytes>> per_level(levels);
  for (const Interval& iv : leaf.intervals) {
    std::vector<LevelCover> cover = bit_tree_cover(iv.lo, iv.hi, total, b);
    for (unsigned d = 0; d < levels; ++d) {
      for (const U256& p : cover[d].prefixes) {
        per_level[d].push_back(hashed ? hash_prefix_value(p)
                                      : int_prefix_value(static_cast<std::uint64_t>(p)));
      }
    }
  }
  if (leaf.null_matches && !hashed) per_level[levels - 1].push_back(int_null_value());
  std::vector<Expr> children;
  for (unsigned d = 0; d < levels; ++d) {
    if (per_level[d].empty() && leaf.wildcards.empty()) continue;
    Atom atom{hashed ? AtomKind::kHashTopBits : AtomKind::kTopBits, col,
              static_cast<std::uint16_t>((d + 1) * b), static_cast<std::uint16_t>(total)};
    children.push_back(make_in(atom, std::move(per_level[d]), leaf.wildcards));
  }
  if (children.size() == 1) return std::move(children[0]);
  return Expr::junction(Expr::Kind::kOr, std::move(children));
}

using Conjunct = std::vector<Expr>;

std::vector<Conjunct> dnf_of(const Expr& e, std::size_t cap) {
  if (e.is_leaf()) return {Conjunct{e}};
  if (e.kind == Expr::Kind::kNot) throw PlanError("NOT remains in expression; push it down first");
  std::vector<Conjunct> out;
  if (e.kind == Expr::Kind::kOr) {
    for (const Expr& c : e.children) {
      std::vector<Conjunct> sub = dnf_of(c, cap);
      out.insert(out.end(), std::make_move_iterator(sub.begin()), std::make_move_iterator(sub.end()));
      if (out.size() > cap) break;
    }
  } else {
    out.push_back({});
    for (const Expr& c : e.children) {
      std::vector<Conjunct> sub = dnf_of(c, cap);
      std::vector<Conjunct> next;
      if (out.size() * sub.size() > cap) {
        throw PlanError("disjunctive normal form exceeds " + std::to_string(cap) +
                        " conjuncts; use a larger branching factor (more bits) or split the "
                        "family");
      }
      next.reserve(out.size() * sub.size());
      for (const Conjunct& left : out) {
        for (const Conjunct& right : sub) {
          Conjunct joined = left;
          joined.insert(joined.end(), right.begin(), right.end());
          next.push_back(std::move(joined));
        }
      }
      out = std::move(next);
    }
  }
  if (out.size() > cap) {
    throw PlanError("disjunctive normal form exceeds " + std::to_string(cap) +
                    " conjuncts; use a larger branching factor (more bits) or split the family");
  }
  return out;
}

}  // namespace

Expr push_not_down(Expr e) { return push(std::move(e), false); }

Expr to_ranges(Expr e, const Schema& schema) {
  if (e.kind == Expr::Kind::kCompare) return Expr::range(leaf_from_comparison(e.cmp(), schema));
  if (e.kind == Expr::Kind::kNot) throw PlanError("NOT remains in expression; push it down first");
  for (Expr& c : e.children) c = to_ranges(std::move(c), schema);
  return e;
}

Expr consolidate(Expr e) {
  if (e.is_leaf()) return e;
  if (e.kind == Expr::Kind::kNot) throw PlanError("NOT remains in expression; push it down first");
  std::vector<Expr> flat;
  for (Expr& c : e.children) {
    Expr child = consolidate(std::move(c));
    if (child.kind == e.kind) {
      for (Expr& g : child.children) flat.push_back(std::move(g));
    } else {
      flat.push_back(std::move(child));
    }
  }
  const bool is_or = e.kind == Expr::Kind::kOr;
  std::vector<Expr> merged;
  for (Expr& c : flat) {
    if (c.kind == Expr::Kind::kRange) {
      const RangeLeaf& leaf = c.rng();
      auto same = std::find_if(merged.begin(), merged.end(), [&](const Expr& m) {
        return m.kind == Expr::Kind::kRange && m.rng().column == leaf.column &&
               m.rng().domain == leaf.domain;
      });
      if (same != merged.end()) {
        merge_into(std::get<RangeLeaf>(same->leaf), leaf, is_or);
        continue;
      }
    }
    merged.push_back(std::move(c));
  }
  if (merged.size() == 1) return std::move(merged[0]);
  e.children = std::move(merged);
  return e;
}

Expr ranges_to_in(Expr e, unsigned branching_bits) {
  if (branching_bits == 0 || branching_bits > 16 || 64 % branching_bits != 0) {
    throw PlanError("branching bits must be one of 1, 2, 4, 8, 16");
  }
  if (e.kind == Expr::Kind::kRange) return leaf_to_in(e.rng(), branching_bits);
  for (Expr& c : e.children) c = ranges_to_in(std::move(c), branching_bits);
  return e;
}

Expr to_dnf(Expr e, std::size_t cap) {
  std::vector<Conjunct> conjuncts = dnf_of(e, cap);
  std::vector<Expr> terms;
  terms.reserve(conjuncts.size());
  for (Conjunct& c : conjuncts) terms.push_back(Expr::junction(Expr::Kind::kAnd, std::move(c)));
  return Expr::junction(Expr::Kind::kOr, std::move(terms));
}

}  // namespace edl::planner
