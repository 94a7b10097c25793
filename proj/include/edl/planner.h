// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "edl/crypto.h"
#include "edl/table.h"

namespace edl::planner {

/// Rejected SQL or a family/view the planner cannot rewrite.
class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public PlanError {
 public:
  using PlanError::PlanError;
};

using U256 = boost::multiprecision::uint256_t;

enum class CmpOp { kEq, kNe, kLt, kLe, kGt, kGe, kIn, kNotIn };

const char* op_symbol(CmpOp op);
bool is_range_op(CmpOp op);

/// Which operand forms a statement may use.
enum class ParseMode {
  kFamily,  // wildcards only (?name)
  kView,    // literal constants only
  kAny,     // either; used for plan inspection
};

/// A parsed leaf: `column op operand`. NULL rows match `=`/IN iff NULL is
/// among the values, `<>`/NOT IN iff it is not, and range comparisons iff
/// `null_matches` (set only by NOT push-down).
struct Comparison {
  std::size_t column = 0;
  CmpOp op = CmpOp::kEq;
  std::optional<std::string> wildcard;
  std::vector<Value> values;
  bool null_matches = false;
  // A wildcard left without a binding; the leaf selects nothing.
  bool unbound = false;
};

struct Interval {
  U256 lo;
  U256 hi;
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class RangeDomain {
  kIntTree,   // offset-encoded Int64, 64-bit tree
  kHashTree,  // SHA-256 of the tagged string encoding, 256-bit tree
  kByteSet,   // exact encoded strings
};

/// A leaf after range conversion: a set of values over one column's domain.
struct RangeLeaf {
  std::size_t column = 0;
  RangeDomain domain = RangeDomain::kIntTree;
  // Only exact points can ever be bound; covered at full depth.
  bool points_only = false;
  std::vector<Interval> intervals;  // sorted, disjoint, non-adjacent
  bool null_matches = false;        // int tree only
  std::vector<Bytes> byte_values;   // byte set only; sorted, unique
  std::vector<std::string> wildcards;

  bool is_false() const {
    return wildcards.empty() && intervals.empty() && byte_values.empty() && !null_matches;
  }
};

enum class AtomKind : std::uint8_t { kFieldBytes = 1, kTopBits = 2, kHashTopBits = 3 };

/// One component of a predicate function g_j.
struct Atom {
  AtomKind kind = AtomKind::kFieldBytes;
  std::uint32_t column = 0;
  std::uint16_t bits = 0;        // prefix length for TopBits/HashTopBits
  std::uint16_t total_bits = 0;  // 64 (Int64) or 256 (hash)

  auto operator<=>(const Atom& o) const {
    return std::tie(column, kind, bits, total_bits) <=>
           std::tie(o.column, o.kind, o.bits, o.total_bits);
  }
  bool operator==(const Atom&) const = default;
};

/// `atom IN values`.
struct InLeaf {
  Atom atom;
  std::vector<Bytes> values;  // sorted, unique
  std::vector<std::string> wildcards;
};

struct Expr {
  enum class Kind { kCompare, kRange, kIn, kAnd, kOr, kNot };

  Kind kind = Kind::kAnd;
  std::variant<std::monostate, Comparison, RangeLeaf, InLeaf> leaf;
  std::vector<Expr> children;

  static Expr compare(Comparison c) { return Expr{Kind::kCompare, std::move(c), {}}; }
  static Expr range(RangeLeaf r) { return Expr{Kind::kRange, std::move(r), {}}; }
  static Expr in(InLeaf l) { return Expr{Kind::kIn, std::move(l), {}}; }
  static Expr junction(Kind k, std::vector<Expr> children) {
    return Expr{k, std::monostate{}, std::move(children)};
  }
  static Expr negate(Expr e) {
    std::vector<Expr> c;
    c.push_back(std::move(e));
    return Expr{Kind::kNot, std::monostate{}, std::move(c)};
  }

  bool is_leaf() const { return kind == Kind::kCompare || kind == Kind::kRange || kind == Kind::kIn; }
  const Comparison& cmp() const { return std::get<Comparison>(leaf); }
  const RangeLeaf& rng() const { return std::get<RangeLeaf>(leaf); }
  const InLeaf& in_leaf() const { return std::get<InLeaf>(leaf); }
};

struct ViewFamilyAst {
  std::string table;
  bool star = false;
  std::vector<std::size_t> projection;  // schema order when star
  Expr where;
};

/// Parses the supported SELECT ... FROM ... WHERE subset against `schema`.
ViewFamilyAst parse(std::string_view sql, const Schema& schema, ParseMode mode);

/// Deterministic SQL text for an AST (whitespace and keyword case normalized).
std::string render_sql(const ViewFamilyAst& ast, const Schema& schema);
std::string render_expr(const Expr& e, const Schema& schema);

struct PlannerParams {
  std::uint8_t branching_bits = 8;
  std::size_t dnf_cap = 4096;
  std::size_t max_view_values = std::size_t{1} << 22;
};

// Rewrite passes, in pipeline order. Each is idempotent.
Expr push_not_down(Expr e);
Expr to_ranges(Expr e, const Schema& schema);
Expr consolidate(Expr e);
Expr ranges_to_in(Expr e, unsigned branching_bits);
Expr to_dnf(Expr e, std::size_t cap);

struct LevelCover {
  unsigned bits = 0;  // prefix length of this tree level
  std::vector<U256> prefixes;
};

/// Minimal aligned-subtree cover of [lo, hi] in a tree over `total_bits`-bit
/// integers with 2^b children per node. Returns one entry per level
/// (bits = b, 2b, ..., total_bits); the root is expressed by its children.
std::vector<LevelCover> bit_tree_cover(const U256& lo, const U256& hi, unsigned total_bits,
                                       unsigned branching_bits);

/// g_j: evaluated as secure_concat of its atoms' outputs.
struct PredicateFn {
  std::vector<Atom> atoms;
  std::vector<std::string> wildcards;  // wildcard names feeding this predicate

  bool operator==(const PredicateFn&) const = default;
};

struct CanonicalFamily {
  static constexpr std::uint16_t kFormatVersion = 1;

  std::vector<std::size_t> projection;
  std::uint32_t n_columns = 0;
  std::vector<PredicateFn> predicates;
  std::uint8_t branching_bits = 8;
  std::string sql;  // normalized source

  Bytes serialize() const;
  static CanonicalFamily deserialize(ByteView bytes);
  /// First 16 hex digits of SHA-256 over the serialization.
  std::string family_id() const;

  bool operator==(const CanonicalFamily&) const = default;
};

/// Wildcard values per predicate (X^j), aligned with the family's predicates.
struct CanonicalView {
  std::string family_id;
  std::vector<std::vector<Bytes>> values;

  std::size_t total_values() const;
};

struct CanonicalPlan {
  CanonicalFamily family;
  std::vector<std::vector<Bytes>> values;
};

CanonicalPlan eliminate_ands(const Expr& dnf, const ViewFamilyAst& ast, std::uint32_t n_columns,
                             const PlannerParams& params);

/// Full pass pipeline over an AST; values are empty for wildcard leaves.
CanonicalPlan plan(const ViewFamilyAst& ast, const Schema& schema, const PlannerParams& params);

CanonicalFamily plan_family(std::string_view sql, const Schema& schema,
                            const PlannerParams& params = {});

/// Plans a literal view and maps its predicates onto the family's. Throws
/// PlanError when a non-empty view predicate has no counterpart.
CanonicalView plan_view(std::string_view sql, const CanonicalFamily& family, const Schema& schema,
                        const PlannerParams& params = {});

using Bindings = std::map<std::string, std::vector<Value>>;

/// Substitutes wildcard bindings into the family's source SQL. Unbound
/// wildcards select nothing.
ViewFamilyAst bind_wildcards(const CanonicalFamily& family, const Schema& schema,
                             const Bindings& bindings);
CanonicalView plan_view_bindings(const CanonicalFamily& family, const Schema& schema,
                                 const Bindings& bindings, const PlannerParams& params = {});

// Atom output encodings shared by view planning and row evaluation.
Bytes int_prefix_value(std::uint64_t prefix);
Bytes int_null_value();
Bytes hash_prefix_value(const U256& prefix);
U256 u256_from_be(ByteView bytes);

/// Evaluates predicates over one row's encoded cells. Caches per-column
/// SHA-256 digests, so reuse it across the predicates of a row.
class RowEvaluator {
 public:
  explicit RowEvaluator(std::size_t n_columns) : hashed_(n_columns, false), digests_(n_columns) {}

  void reset_row() { std::fill(hashed_.begin(), hashed_.end(), false); }
  // Writes secure_concat of the atoms' outputs into `out`.
  void evaluate(const PredicateFn& pred, std::span<const ByteView> cells, Bytes& out);

 private:
  std::vector<bool> hashed_;
  std::vector<crypto::Digest256> digests_;
};

}  // namespace edl::planner
