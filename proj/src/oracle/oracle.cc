// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include "edl/oracle.h"

#include <algorithm>

namespace edl::oracle {
namespace {

using planner::CmpOp;
using planner::Expr;
using planner::U256;

bool contains(const std::vector<Value>& values, const Value& v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

bool eval_compare(const planner::Comparison& c, const Row& row) {
  if (c.wildcard || c.unbound) throw planner::PlanError("oracle needs bound values");
  const Value& v = row.at(c.column);
  switch (c.op) {
    case CmpOp::kEq:
    case CmpOp::kIn:
      return contains(c.values, v);
    case CmpOp::kNe:
    case CmpOp::kNotIn:
      return !contains(c.values, v);
    default:
      break;
  }
  if (is_null(v)) return c.null_matches;
  const std::int64_t a = std::get<std::int64_t>(v);
  const std::int64_t b = std::get<std::int64_t>(c.values.at(0));
  switch (c.op) {
    case CmpOp::kLt:
      return a < b;
    case CmpOp::kLe:
      return a <= b;
    case CmpOp::kGt:
      return a > b;
    case CmpOp::kGe:
      return a >= b;
    default:
      return false;
  }
}

Row project(const std::vector<std::size_t>& projection, const Row& row) {
  Row out;
  out.reserve(projection.size());
  for (std::size_t c : projection) out.push_back(row[c]);
  return out;
}

Bytes be_bytes(U256 v, std::size_t n) {
  Bytes out(n);
  for (std::size_t i = n; i-- > 0;) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  return out;
}

}  // namespace

bool eval_where(const Expr& where, const Row& row) {
  switch (where.kind) {
    case Expr::Kind::kCompare:
      return eval_compare(where.cmp(), row);
    case Expr::Kind::kNot:
      return !eval_where(where.children.at(0), row);
    case Expr::Kind::kAnd:
      return std::all_of(where.children.begin(), where.children.end(),
                         [&](const Expr& e) { return eval_where(e, row); });
    case Expr::Kind::kOr:
      return std::any_of(where.children.begin(), where.children.end(),
                         [&](const Expr& e) { return eval_where(e, row); });
    default:
      throw planner::PlanError("oracle evaluates parsed expressions only");
  }
}

std::vector<Row> eval_ast(const planner::ViewFamilyAst& ast, const std::vector<Row>& rows) {
  std::vector<Row> out;
  for (const Row& row : rows) {
    if (eval_where(ast.where, row)) out.push_back(project(ast.projection, row));
  }
  return out;
}

std::vector<Row> eval_view(std::string_view sql, const Schema& schema,
                           const std::vector<Row>& rows) {
  return eval_ast(planner::parse(sql, schema, planner::ParseMode::kView), rows);
}

Bytes eval_predicate(const planner::PredicateFn& pred, const Schema& schema, const Row& row) {
  std::vector<Bytes> outputs;
  for (const planner::Atom& a : pred.atoms) {
    const Column& col = schema[a.column];
    const Value& v = row.at(a.column);
    switch (a.kind) {
      case planner::AtomKind::kFieldBytes:
        outputs.push_back(encode_cell(v, col));
        break;
      case planner::AtomKind::kTopBits: {
        if (is_null(v)) {
          outputs.push_back(Bytes{0x00});
          break;
        }
        const U256 u = U256(int64_to_ordered(std::get<std::int64_t>(v)));
        Bytes b{0x01};
        const Bytes prefix = be_bytes(u >> (a.total_bits - a.bits), 8);
        b.insert(b.end(), prefix.begin(), prefix.end());
        outputs.push_back(std::move(b));
        break;
      }
      case planner::AtomKind::kHashTopBits: {
        const crypto::Digest256 d = crypto::hash_string(encode_cell(v, col));
        U256 h = 0;
        for (std::uint8_t byte : d) h = h * 256 + byte;
        outputs.push_back(be_bytes(h >> (256 - a.bits), 32));
        break;
      }
    }
  }
  std::vector<ByteView> parts(outputs.begin(), outputs.end());
  return crypto::secure_concat(parts);
}

std::vector<Row> eval_canonical(const planner::CanonicalFamily& family,
                                const planner::CanonicalView& view, const Schema& schema,
                                const std::vector<Row>& rows) {
  if (view.values.size() != family.predicates.size()) {
    throw planner::PlanError("view does not align with family predicates");
  }
  std::vector<Row> out;
  for (const Row& row : rows) {
    bool match = false;
    for (std::size_t j = 0; j < family.predicates.size() && !match; ++j) {
      if (view.values[j].empty()) continue;
      const Bytes g = eval_predicate(family.predicates[j], schema, row);
      match = std::find(view.values[j].begin(), view.values[j].end(), g) != view.values[j].end();
    }
    if (match) out.push_back(project(family.projection, row));
  }
  return out;
}

}  // namespace edl::oracle
