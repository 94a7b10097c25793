// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstring>

#include "edl/planner.h"

namespace edl::planner {
namespace {

constexpr char kFamilyMagic[4] = {'M', 'C', 'F', '1'};

void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }
void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}
void put_u32(Bytes& out, std::uint64_t v) {
  if (v > 0xffffffffu) throw PlanError("value exceeds u32 field");
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Cursor {
 public:
  explicit Cursor(ByteView in) : in_(in) {}
  ByteView take(std::size_t n) {
    if (in_.size() - pos_ < n) throw FormatError("truncated canonical family");
    ByteView v = in_.subspan(pos_, n);
    pos_ += n;
    return v;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    ByteView b = take(2);
    return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
  }
  std::uint32_t u32() {
    ByteView b = take(4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           b[3];
  }
  std::string str(std::size_t n) {
    ByteView b = take(n);
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

void sort_unique(std::vector<Bytes>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void append_unique(std::vector<std::string>& into, const std::vector<std::string>& from) {
  for (const std::string& s : from) {
    if (std::find(into.begin(), into.end(), s) == into.end()) into.push_back(s);
  }
}

struct MergedAtom {
  Atom atom;
  std::vector<Bytes> values;
  std::vector<std::string> wildcards;
};

std::vector<MergedAtom> merge_conjunct(const Expr& conjunct) {
  std::vector<const Expr*> leaves;
  if (conjunct.kind == Expr::Kind::kIn) {
    leaves.push_back(&conjunct);
  } else if (conjunct.kind == Expr::Kind::kAnd) {
    for (const Expr& c : conjunct.children) {
      if (c.kind != Expr::Kind::kIn) throw PlanError("conjunct holds a non-IN leaf");
      leaves.push_back(&c);
    }
  } else {
    throw PlanError("expected a DNF conjunct");
  }
  std::vector<MergedAtom> out;
  for (const Expr* e : leaves) {
    const InLeaf& leaf = e->in_leaf();
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const MergedAtom& m) { return m.atom == leaf.atom; });
    if (it == out.end()) {
      out.push_back({leaf.atom, leaf.values, leaf.wildcards});
      continue;
    }
    // Both constrain the same function of the row: intersect.
    std::vector<Bytes> both;
    std::set_intersection(it->values.begin(), it->values.end(), leaf.values.begin(),
                          leaf.values.end(), std::back_inserter(both));
    it->values = std::move(both);
    append_unique(it->wildcards, leaf.wildcards);
  }
  std::sort(out.begin(), out.end(),
            [](const MergedAtom& a, const MergedAtom& b) { return a.atom < b.atom; });
  return out;
}

// `budget` is what remains of `limit` after earlier conjuncts.
void cross_product(const std::vector<MergedAtom>& atoms, std::vector<Bytes>& out,
                   std::size_t budget, std::size_t limit) {
  std::size_t count = 1;
  for (const MergedAtom& a : atoms) {
    if (a.values.empty()) return;
    if (count > budget / a.values.size()) {
      throw PlanError("view expands to more than " + std::to_string(limit) +
                      " wildcard values; narrow the view or change the branching factor");
    }
    count *= a.values.size();
  }
  std::vector<std::size_t> idx(atoms.size(), 0);
  std::vector<ByteView> parts(atoms.size());
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t i = 0; i < atoms.size(); ++i) parts[i] = atoms[i].values[idx[i]];
    out.push_back(crypto::secure_concat(parts));
    for (std::size_t i = atoms.size(); i-- > 0;) {
      if (++idx[i] < atoms[i].values.size()) break;
      idx[i] = 0;
    }
  }
}

void check_branching(unsigned b) {
  if (b == 0 || b > 16 || 64 % b != 0) {
    throw PlanError("branching bits must be one of 1, 2, 4, 8, 16 (got " + std::to_string(b) + ")");
  }
}

CanonicalView align(const CanonicalPlan& view_plan, const CanonicalFamily& family) {
  if (view_plan.family.projection != family.projection) {
    throw PlanError("view projection does not match the family's projection");
  }
  CanonicalView view;
  view.family_id = family.family_id();
  view.values.resize(family.predicates.size());
  for (std::size_t i = 0; i < view_plan.family.predicates.size(); ++i) {
    const std::vector<Bytes>& values = view_plan.values[i];
    if (values.empty()) continue;
    const PredicateFn& p = view_plan.family.predicates[i];
    auto it = std::find_if(family.predicates.begin(), family.predicates.end(),
                           [&](const PredicateFn& f) { return f.atoms == p.atoms; });
    if (it == family.predicates.end()) {
      throw PlanError("view does not belong to this family: a view predicate has no "
                      "counterpart among the family's predicates");
    }
    auto& dst = view.values[static_cast<std::size_t>(it - family.predicates.begin())];
    dst.insert(dst.end(), values.begin(), values.end());
  }
  for (auto& v : view.values) sort_unique(v);
  return view;
}

void bind_expr(Expr& e, const Bindings& bindings, const Schema& schema,
               std::vector<std::string>& used) {
  if (e.kind != Expr::Kind::kCompare) {
    for (Expr& c : e.children) bind_expr(c, bindings, schema, used);
    return;
  }
  Comparison& c = std::get<Comparison>(e.leaf);
  if (!c.wildcard) return;
  auto it = bindings.find(*c.wildcard);
  if (it == bindings.end()) {
    c.unbound = true;
  } else {
    used.push_back(*c.wildcard);
    c.values = it->second;
    if (is_range_op(c.op) && c.values.size() != 1) {
      throw PlanError("wildcard ?" + *c.wildcard + " bounds a " + op_symbol(c.op) +
                      " comparison and takes exactly one value");
    }
    const Column& col = schema[c.column];
    for (const Value& v : c.values) {
      const bool ok = is_null(v) ? col.nullable && !is_range_op(c.op)
                                 : (col.type == ColumnType::kInt64
                                        ? std::holds_alternative<std::int64_t>(v)
                                        : std::holds_alternative<std::string>(v));
      if (!ok) {
        throw PlanError("value " + value_to_string(v) + " does not fit column '" + col.name +
                        "' for wildcard ?" + *c.wildcard);
      }
    }
  }
  c.wildcard.reset();
}

}  // namespace

Bytes CanonicalFamily::serialize() const {
  Bytes out(kFamilyMagic, kFamilyMagic + 4);
  put_u16(out, kFormatVersion);
  put_u8(out, branching_bits);
  put_u32(out, n_columns);
  put_u32(out, projection.size());
  for (std::size_t c : projection) put_u32(out, c);
  put_u32(out, predicates.size());
  for (const PredicateFn& p : predicates) {
    put_u16(out, static_cast<std::uint16_t>(p.atoms.size()));
    for (const Atom& a : p.atoms) {
      put_u8(out, static_cast<std::uint8_t>(a.kind));
      put_u32(out, a.column);
      put_u16(out, a.bits);
      put_u16(out, a.total_bits);
    }
    put_u16(out, static_cast<std::uint16_t>(p.wildcards.size()));
    for (const std::string& w : p.wildcards) {
      put_u16(out, static_cast<std::uint16_t>(w.size()));
      out.insert(out.end(), w.begin(), w.end());
    }
  }
  put_u32(out, sql.size());
  out.insert(out.end(), sql.begin(), sql.end());
  return out;
}

CanonicalFamily CanonicalFamily::deserialize(ByteView bytes) {
  Cursor in(bytes);
  if (std::memcmp(in.take(4).data(), kFamilyMagic, 4) != 0) {
    throw FormatError("bad canonical family magic");
  }
  if (in.u16() != kFormatVersion) throw FormatError("unsupported canonical family version");
  CanonicalFamily f;
  f.branching_bits = in.u8();
  f.n_columns = in.u32();
  const std::uint32_t nproj = in.u32();
  for (std::uint32_t i = 0; i < nproj; ++i) {
    const std::uint32_t c = in.u32();
    if (c >= f.n_columns) throw FormatError("projected column out of range");
    f.projection.push_back(c);
  }
  const std::uint32_t npred = in.u32();
  for (std::uint32_t j = 0; j < npred; ++j) {
    PredicateFn p;
    const std::uint16_t natoms = in.u16();
    for (std::uint16_t i = 0; i < natoms; ++i) {
      Atom a;
      const std::uint8_t kind = in.u8();
      if (kind < 1 || kind > 3) throw FormatError("unknown atom kind");
      a.kind = static_cast<AtomKind>(kind);
      a.column = in.u32();
      if (a.column >= f.n_columns) throw FormatError("atom column out of range");
      a.bits = in.u16();
      a.total_bits = in.u16();
      p.atoms.push_back(a);
    }
    const std::uint16_t nwild = in.u16();
    for (std::uint16_t i = 0; i < nwild; ++i) p.wildcards.push_back(in.str(in.u16()));
    f.predicates.push_back(std::move(p));
  }
  f.sql = in.str(in.u32());
  if (!in.done()) throw FormatError("trailing bytes after canonical family");
  return f;
}

std::string CanonicalFamily::family_id() const {
  const crypto::Digest256 d = crypto::hash_string(serialize());
  return to_hex(ByteView(d.data(), 8));
}

std::size_t CanonicalView::total_values() const {
  std::size_t n = 0;
  for (const auto& v : values) n += v.size();
  return n;
}

CanonicalPlan eliminate_ands(const Expr& dnf, const ViewFamilyAst& ast, std::uint32_t n_columns,
                             const PlannerParams& params) {
  CanonicalPlan out;
  out.family.projection = ast.projection;
  out.family.n_columns = n_columns;
  out.family.branching_bits = params.branching_bits;
  std::vector<const Expr*> conjuncts;
  if (dnf.kind == Expr::Kind::kOr) {
    for (const Expr& c : dnf.children) conjuncts.push_back(&c);
  } else {
    conjuncts.push_back(&dnf);
  }
  std::size_t total = 0;
  std::size_t produced = 0;
  for (const Expr* conj : conjuncts) {
    std::vector<MergedAtom> atoms = merge_conjunct(*conj);
    PredicateFn fn;
    bool wild = false;
    for (const MergedAtom& a : atoms) {
      fn.atoms.push_back(a.atom);
      append_unique(fn.wildcards, a.wildcards);
      wild = wild || !a.wildcards.empty();
    }
    std::vector<Bytes> values;
    // Budget across conjuncts so memory stays bounded before the final check.
    if (!wild) {
      cross_product(atoms, values, params.max_view_values - std::min(produced, params.max_view_values),
                    params.max_view_values);
    }
    produced += values.size();
    auto it = std::find_if(out.family.predicates.begin(), out.family.predicates.end(),
                           [&](const PredicateFn& p) { return p.atoms == fn.atoms; });
    if (it == out.family.predicates.end()) {
      out.family.predicates.push_back(std::move(fn));
      out.values.push_back(std::move(values));
    } else {
      const auto j = static_cast<std::size_t>(it - out.family.predicates.begin());
      append_unique(it->wildcards, fn.wildcards);
      out.values[j].insert(out.values[j].end(), std::make_move_iterator(values.begin()),
                           std::make_move_iterator(values.end()));
    }
  }
  for (auto& v : out.values) {
    sort_unique(v);
    total += v.size();
  }
  if (total > params.max_view_values) {
    throw PlanError("view expands to " + std::to_string(total) + " wildcard values, above the " +
                    std::to_string(params.max_view_values) + " limit");
  }
  return out;
}

CanonicalPlan plan(const ViewFamilyAst& ast, const Schema& schema, const PlannerParams& params) {
  check_branching(params.branching_bits);
  Expr e = push_not_down(ast.where);
  e = to_ranges(std::move(e), schema);
  e = consolidate(std::move(e));
  e = ranges_to_in(std::move(e), params.branching_bits);
  e = to_dnf(std::move(e), params.dnf_cap);
  CanonicalPlan out =
      eliminate_ands(e, ast, static_cast<std::uint32_t>(schema.size()), params);
  out.family.sql = render_sql(ast, schema);
  return out;
}

CanonicalFamily plan_family(std::string_view sql, const Schema& schema,
                            const PlannerParams& params) {
  ViewFamilyAst ast = parse(sql, schema, ParseMode::kFamily);
  CanonicalPlan p = plan(ast, schema, params);
  if (p.family.predicates.empty()) throw PlanError("family has no predicates");
  return std::move(p.family);
}

CanonicalView plan_view(std::string_view sql, const CanonicalFamily& family, const Schema& schema,
                        const PlannerParams& params) {
  if (family.n_columns != schema.size()) throw PlanError("family was planned for another schema");
  ViewFamilyAst ast = parse(sql, schema, ParseMode::kView);
  PlannerParams p = params;
  p.branching_bits = family.branching_bits;
  return align(plan(ast, schema, p), family);
}

ViewFamilyAst bind_wildcards(const CanonicalFamily& family, const Schema& schema,
                             const Bindings& bindings) {
  ViewFamilyAst ast = parse(family.sql, schema, ParseMode::kFamily);
  std::vector<std::string> used;
  bind_expr(ast.where, bindings, schema, used);
  for (const auto& [name, values] : bindings) {
    if (std::find(used.begin(), used.end(), name) == used.end()) {
      throw PlanError("family has no wildcard ?" + name);
    }
  }
  return ast;
}

CanonicalView plan_view_bindings(const CanonicalFamily& family, const Schema& schema,
                                 const Bindings& bindings, const PlannerParams& params) {
  ViewFamilyAst ast = bind_wildcards(family, schema, bindings);
  PlannerParams p = params;
  p.branching_bits = family.branching_bits;
  return align(plan(ast, schema, p), family);
}

void RowEvaluator::evaluate(const PredicateFn& pred, std::span<const ByteView> cells, Bytes& out) {
  auto be32 = [&out](std::size_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  out.clear();
  be32(pred.atoms.size());
  for (const Atom& a : pred.atoms) {
    const ByteView cell = cells[a.column];
    switch (a.kind) {
      case AtomKind::kFieldBytes:
        be32(cell.size());
        out.insert(out.end(), cell.begin(), cell.end());
        break;
      case AtomKind::kTopBits: {
        if (cell.size() == 9 && cell[0] == kNullTag) {
          be32(1);
          out.push_back(kNullTag);
          break;
        }
        const ByteView payload = cell.last(8);
        std::uint64_t u = 0;
        for (std::uint8_t b : payload) u = (u << 8) | b;
        if (a.bits < 64) u >>= (64 - a.bits);
        be32(9);
        out.push_back(kPresentTag);
        for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
        break;
      }
      case AtomKind::kHashTopBits: {
        if (!hashed_[a.column]) {
          digests_[a.column] = crypto::hash_string(cell);
          hashed_[a.column] = true;
        }
        const crypto::Digest256& d = digests_[a.column];
        const unsigned shift = 256u - a.bits;
        const unsigned byte_shift = shift / 8;
        const unsigned bit_shift = shift % 8;
        be32(32);
        for (unsigned i = 0; i < 32; ++i) {
          if (i < byte_shift) {
            out.push_back(0);
            continue;
          }
          const unsigned src = i - byte_shift;
          unsigned v = d[src] >> bit_shift;
          if (bit_shift != 0 && src > 0) v |= (d[src - 1] << (8 - bit_shift)) & 0xff;
          out.push_back(static_cast<std::uint8_t>(v));
        }
        break;
      }
    }
  }
}

}  // namespace edl::planner
