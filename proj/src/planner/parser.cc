// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "edl/planner.h"

namespace edl::planner {
namespace {

enum class Tok { kIdent, kNumber, kString, kSymbol, kWildcard, kEnd };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  auto is_ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < sql.size()) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_ident_start(c)) {
      while (i < sql.size() && is_ident(sql[i])) ++i;
      out.push_back({Tok::kIdent, std::string(sql.substr(start, i - start)), start});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      if (i < sql.size() && (is_ident(sql[i]) || sql[i] == '.')) {
        throw ParseError("malformed numeric literal at offset " + std::to_string(start) +
                         " (only integers are supported)");
      }
      out.push_back({Tok::kNumber, std::string(sql.substr(start, i - start)), start});
    } else if (c == '\'' || c == '"') {
      std::string text;
      ++i;
      bool closed = false;
      while (i < sql.size()) {
        if (sql[i] == c) {
          if (i + 1 < sql.size() && sql[i + 1] == c) {
            text.push_back(c);
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        text.push_back(sql[i++]);
      }
      if (!closed) throw ParseError("unterminated string literal at offset " + std::to_string(start));
      out.push_back({Tok::kString, std::move(text), start});
    } else if (c == '?') {
      ++i;
      const std::size_t name_start = i;
      while (i < sql.size() && is_ident(sql[i])) ++i;
      if (i == name_start) throw ParseError("wildcard needs a name, e.g. ?x");
      out.push_back({Tok::kWildcard, std::string(sql.substr(name_start, i - name_start)), start});
    } else {
      static const char* const kTwo[] = {"<=", ">=", "<>", "!=", "||"};
      std::string sym(1, c);
      for (const char* two : kTwo) {
        if (sql.substr(i, 2) == two) sym = two;
      }
      i += sym.size();
      static const std::string kSingles = "=<>(),*;+-/%.";
      if (sym.size() == 1 && kSingles.find(c) == std::string::npos) {
        throw ParseError(std::string("unexpected character '") + c + "' at offset " +
                         std::to_string(start));
      }
      out.push_back({Tok::kSymbol, sym, start});
    }
  }
  out.push_back({Tok::kEnd, "", sql.size()});
  return out;
}

class Parser {
 public:
  Parser(std::string_view sql, const Schema& schema, ParseMode mode)
      : toks_(tokenize(sql)), schema_(schema), mode_(mode) {}

  ViewFamilyAst parse() {
    ViewFamilyAst ast;
    expect_keyword("SELECT");
    parse_projection(ast);
    expect_keyword("FROM");
    const Token& table = next();
    if (table.kind != Tok::kIdent) fail("expected table name after FROM", table);
    ast.table = table.text;
    if (peek_symbol(",") || peek_keyword("JOIN") || peek_keyword("INNER") ||
        peek_keyword("LEFT") || peek_keyword("RIGHT") || peek_keyword("CROSS") ||
        peek_keyword("NATURAL")) {
      throw ParseError("joins are not supported");
    }
    if (!peek_keyword("WHERE")) {
      if (peek().kind == Tok::kEnd) throw ParseError("a WHERE clause is required");
      throw ParseError("unsupported clause '" + peek().text + "'; expected WHERE");
    }
    next();
    ast.where = parse_or();
    if (peek_symbol(";")) next();
    if (peek().kind != Tok::kEnd) {
      const std::string kw = upper(peek().text);
      if (kw == "GROUP" || kw == "ORDER" || kw == "LIMIT" || kw == "HAVING" || kw == "UNION") {
        throw ParseError("unsupported clause '" + peek().text + "'");
      }
      fail("unexpected trailing input", peek());
    }
    check_projection_covers_where(ast);
    return ast;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool peek_keyword(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kIdent && upper(peek(ahead).text) == kw;
  }
  bool peek_symbol(std::string_view s) const {
    return peek().kind == Tok::kSymbol && peek().text == s;
  }
  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg + " at offset " + std::to_string(at.pos) +
                     (at.kind == Tok::kEnd ? " (end of input)" : " near '" + at.text + "'"));
  }
  void expect_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) fail("expected " + std::string(kw), peek());
    next();
  }
  void expect_symbol(std::string_view s) {
    if (!peek_symbol(s)) fail("expected '" + std::string(s) + "'", peek());
    next();
  }

  std::size_t resolve_column(const Token& t) const {
    if (t.kind != Tok::kIdent) fail("expected a column name", t);
    auto idx = schema_.index_of(t.text);
    if (!idx) throw ParseError("unknown column '" + t.text + "'");
    return *idx;
  }

  void parse_projection(ViewFamilyAst& ast) {
    if (peek_symbol("*")) {
      next();
      ast.star = true;
      for (std::size_t i = 0; i < schema_.size(); ++i) ast.projection.push_back(i);
      return;
    }
    std::set<std::size_t> seen;
    while (true) {
      const Token& t = next();
      if (t.kind == Tok::kIdent && peek_symbol("(")) {
        static const std::set<std::string> kAggregates = {"COUNT", "SUM", "AVG", "MIN", "MAX"};
        if (kAggregates.count(upper(t.text))) throw ParseError("aggregates are not supported");
        throw ParseError("field expressions such as " + t.text + "(...) are not supported");
      }
      if (t.kind == Tok::kIdent && upper(t.text) == "DISTINCT") {
        throw ParseError("DISTINCT is not supported");
      }
      const std::size_t col = resolve_column(t);
      if (!seen.insert(col).second) throw ParseError("column '" + t.text + "' projected twice");
      ast.projection.push_back(col);
      if (!peek_symbol(",")) break;
      next();
    }
    if (ast.projection.size() == schema_.size()) {
      // Projecting every column in any order is SELECT *.
      std::vector<std::size_t> sorted = ast.projection;
      std::sort(sorted.begin(), sorted.end());
      ast.star = sorted == ast.projection;
    }
  }

  Expr parse_or() {
    std::vector<Expr> terms;
    terms.push_back(parse_and());
    while (peek_keyword("OR")) {
      next();
      terms.push_back(parse_and());
    }
    if (terms.size() == 1) return std::move(terms[0]);
    return Expr::junction(Expr::Kind::kOr, std::move(terms));
  }

  Expr parse_and() {
    std::vector<Expr> terms;
    terms.push_back(parse_not());
    while (peek_keyword("AND")) {
      next();
      terms.push_back(parse_not());
    }
    if (terms.size() == 1) return std::move(terms[0]);
    return Expr::junction(Expr::Kind::kAnd, std::move(terms));
  }

  Expr parse_not() {
    if (peek_keyword("NOT")) {
      next();
      return Expr::negate(parse_not());
    }
    if (peek_symbol("(")) {
      next();
      if (peek_keyword("SELECT")) throw ParseError("subqueries are not supported");
      Expr e = parse_or();
      expect_symbol(")");
      return e;
    }
    return parse_comparison();
  }

  Value parse_literal(const Column& col) {
    const Token& t = next();
    if (t.kind == Tok::kSymbol && t.text == "-" && peek().kind == Tok::kNumber) {
      return parse_int("-" + next().text, col, t);
    }
    if (t.kind == Tok::kNumber) return parse_int(t.text, col, t);
    if (t.kind == Tok::kString) {
      if (col.type != ColumnType::kUtf8) {
        throw ParseError("string literal compared with integer column '" + col.name + "'");
      }
      return t.text;
    }
    if (t.kind == Tok::kIdent && upper(t.text) == "NULL") {
      if (!col.nullable) {
        throw ParseError("NULL compared with non-nullable column '" + col.name + "'");
      }
      return std::monostate{};
    }
    if (t.kind == Tok::kIdent && peek_symbol("(")) {
      throw ParseError("field expressions such as " + t.text + "(...) are not supported");
    }
    fail("expected a literal", t);
  }

  Value parse_int(const std::string& text, const Column& col, const Token& at) {
    if (col.type != ColumnType::kInt64) {
      throw ParseError("integer literal compared with string column '" + col.name + "'");
    }
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail("integer literal out of Int64 range", at);
    }
    return v;
  }

  void set_operand(Comparison& c, const Column& col) {
    if (peek().kind == Tok::kWildcard) {
      if (mode_ == ParseMode::kView) {
        throw ParseError("views bind literal values; wildcard ?" + peek().text + " not allowed");
      }
      c.wildcard = next().text;
      return;
    }
    if (mode_ == ParseMode::kFamily) {
      fail("view families use wildcards (?name) in place of literals", peek());
    }
    c.values.push_back(parse_literal(col));
  }

  Expr parse_comparison() {
    const Token& field = next();
    if (field.kind == Tok::kIdent && peek_symbol("(")) {
      const std::string name = upper(field.text);
      if (name == "COUNT" || name == "SUM" || name == "AVG" || name == "MIN" || name == "MAX") {
        throw ParseError("aggregates are not supported");
      }
      throw ParseError("field expressions such as " + field.text +
                       "(...) are not supported; predicates compare plain columns");
    }
    Comparison c;
    c.column = resolve_column(field);
    const Column& col = schema_[c.column];
    if (peek().kind == Tok::kSymbol &&
        (peek().text == "+" || peek().text == "-" || peek().text == "*" || peek().text == "/" ||
         peek().text == "%" || peek().text == "||")) {
      throw ParseError("arithmetic field expressions are not supported");
    }
    bool negated_in = false;
    if (peek_keyword("IS")) {
      next();
      bool is_not = false;
      if (peek_keyword("NOT")) {
        next();
        is_not = true;
      }
      expect_keyword("NULL");
      if (!col.nullable) throw ParseError("column '" + col.name + "' is not nullable");
      if (mode_ == ParseMode::kFamily) {
        throw ParseError("view families use wildcards; IS NULL is a literal test");
      }
      c.op = is_not ? CmpOp::kNe : CmpOp::kEq;
      c.values.push_back(std::monostate{});
      return Expr::compare(std::move(c));
    }
    if (peek_keyword("NOT") && peek_keyword("IN", 1)) {
      next();
      negated_in = true;
    }
    if (peek_keyword("IN")) {
      next();
      c.op = negated_in ? CmpOp::kNotIn : CmpOp::kIn;
      if (peek().kind == Tok::kWildcard) {
        set_operand(c, col);
        return Expr::compare(std::move(c));
      }
      expect_symbol("(");
      if (peek_keyword("SELECT")) throw ParseError("subqueries are not supported");
      if (mode_ == ParseMode::kFamily) {
        fail("view families use wildcards (?name) in place of literals", peek());
      }
      if (!peek_symbol(")")) {
        while (true) {
          c.values.push_back(parse_literal(col));
          if (!peek_symbol(",")) break;
          next();
        }
      }
      expect_symbol(")");
      return Expr::compare(std::move(c));
    }
    if (peek_keyword("BETWEEN")) {
      next();
      if (col.type != ColumnType::kInt64) {
        throw ParseError("string column '" + col.name + "' supports only =, <>, IN and NOT IN");
      }
      Comparison lo = c;
      lo.op = CmpOp::kGe;
      set_operand(lo, col);
      expect_keyword("AND");
      Comparison hi = c;
      hi.op = CmpOp::kLe;
      set_operand(hi, col);
      check_range_operand(lo, col);
      check_range_operand(hi, col);
      std::vector<Expr> both;
      both.push_back(Expr::compare(std::move(lo)));
      both.push_back(Expr::compare(std::move(hi)));
      return Expr::junction(Expr::Kind::kAnd, std::move(both));
    }
    const Token& op = next();
    if (op.kind == Tok::kIdent) {
      throw ParseError("unsupported operator '" + op.text + "'");
    }
    if (op.kind != Tok::kSymbol) fail("expected a comparison operator", op);
    if (op.text == "=") {
      c.op = CmpOp::kEq;
    } else if (op.text == "<>" || op.text == "!=") {
      c.op = CmpOp::kNe;
    } else if (op.text == "<") {
      c.op = CmpOp::kLt;
    } else if (op.text == "<=") {
      c.op = CmpOp::kLe;
    } else if (op.text == ">") {
      c.op = CmpOp::kGt;
    } else if (op.text == ">=") {
      c.op = CmpOp::kGe;
    } else {
      throw ParseError("unsupported operator '" + op.text + "'");
    }
    if (is_range_op(c.op) && col.type == ColumnType::kUtf8) {
      throw ParseError("string column '" + col.name + "' supports only =, <>, IN and NOT IN");
    }
    set_operand(c, col);
    check_range_operand(c, col);
    return Expr::compare(std::move(c));
  }

  static void check_range_operand(const Comparison& c, const Column& col) {
    if (is_range_op(c.op) && !c.values.empty() && is_null(c.values[0])) {
      throw ParseError("NULL can only be compared with =, <>, IN or NOT IN (column '" +
                       col.name + "')");
    }
  }

  void collect_columns(const Expr& e, std::set<std::size_t>& out) const {
    if (e.kind == Expr::Kind::kCompare) {
      out.insert(e.cmp().column);
      return;
    }
    for (const Expr& c : e.children) collect_columns(c, out);
  }

  void check_projection_covers_where(const ViewFamilyAst& ast) const {
    std::set<std::size_t> used;
    collect_columns(ast.where, used);
    for (std::size_t col : used) {
      if (std::find(ast.projection.begin(), ast.projection.end(), col) == ast.projection.end()) {
        throw ParseError("column '" + schema_[col].name +
                         "' is used in WHERE but not projected; the projection must include "
                         "every WHERE field");
      }
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Schema& schema_;
  ParseMode mode_;
};

std::string render_value(const Value& v) {
  if (is_null(v)) return "NULL";
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  std::string out = "'";
  for (char ch : std::get<std::string>(v)) {
    if (ch == '\'') out.push_back('\'');
    out.push_back(ch);
  }
  out.push_back('\'');
  return out;
}

}  // namespace

const char* op_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::kEq:
      return "=";
    case CmpOp::kNe:
      return "<>";
    case CmpOp::kLt:
      return "<";
    case CmpOp::kLe:
      return "<=";
    case CmpOp::kGt:
      return ">";
    case CmpOp::kGe:
      return ">=";
    case CmpOp::kIn:
      return "IN";
    case CmpOp::kNotIn:
      return "NOT IN";
  }
  return "?";
}

bool is_range_op(CmpOp op) {
  return op == CmpOp::kLt || op == CmpOp::kLe || op == CmpOp::kGt || op == CmpOp::kGe;
}

ViewFamilyAst parse(std::string_view sql, const Schema& schema, ParseMode mode) {
  return Parser(sql, schema, mode).parse();
}

std::string render_expr(const Expr& e, const Schema& schema) {
  switch (e.kind) {
    case Expr::Kind::kCompare: {
      const Comparison& c = e.cmp();
      CmpOp op = c.op;
      // A bound equality with several values reads back as IN.
      if (!c.wildcard && c.values.size() != 1) {
        if (op == CmpOp::kEq) op = CmpOp::kIn;
        if (op == CmpOp::kNe) op = CmpOp::kNotIn;
      }
      std::string out = schema[c.column].name + " " + op_symbol(op) + " ";
      if (c.wildcard) return out + "?" + *c.wildcard;
      if (op == CmpOp::kIn || op == CmpOp::kNotIn) {
        out += "(";
        for (std::size_t i = 0; i < c.values.size(); ++i) {
          if (i > 0) out += ", ";
          out += render_value(c.values[i]);
        }
        return out + ")";
      }
      return out + render_value(c.values.at(0));
    }
    case Expr::Kind::kNot:
      return "NOT (" + render_expr(e.children.at(0), schema) + ")";
    case Expr::Kind::kAnd:
    case Expr::Kind::kOr: {
      const char* sep = e.kind == Expr::Kind::kAnd ? " AND " : " OR ";
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i > 0) out += sep;
        const Expr& child = e.children[i];
        if (child.kind == Expr::Kind::kAnd || child.kind == Expr::Kind::kOr) {
          out += "(" + render_expr(child, schema) + ")";
        } else {
          out += render_expr(child, schema);
        }
      }
      return out;
    }
    case Expr::Kind::kRange:
    case Expr::Kind::kIn:
      break;
  }
  throw PlanError("only parsed (pre-rewrite) expressions can be rendered as SQL");
}

std::string render_sql(const ViewFamilyAst& ast, const Schema& schema) {
  std::string out = "SELECT ";
  if (ast.star) {
    out += "*";
  } else {
    for (std::size_t i = 0; i < ast.projection.size(); ++i) {
      if (i > 0) out += ", ";
      out += schema[ast.projection[i]].name;
    }
  }
  out += " FROM " + ast.table + " WHERE " + render_expr(ast.where, schema);
  return out;
}

}  // namespace edl::planner
