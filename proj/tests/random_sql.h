// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

// Random tables, view families and wildcard bindings for property tests.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "edl/planner.h"
#include "edl/table.h"

namespace edl::testing {

struct RandomCase {
  Schema schema;
  std::vector<Row> rows;
  std::string family_sql;
  planner::Bindings bindings;
  unsigned branching_bits = 8;
};

class CaseGenerator {
 public:
  explicit CaseGenerator(std::uint64_t seed) : rng_(seed) {}

  RandomCase next(std::size_t max_rows = 64, std::size_t max_columns = 6) {
    RandomCase c;
    c.schema = random_schema(max_columns);
    const std::size_t n = uniform(0, max_rows);
    for (std::size_t i = 0; i < n; ++i) c.rows.push_back(random_row(c.schema));
    wildcards_.clear();
    used_.assign(c.schema.size(), false);
    const std::string where = random_where(c.schema, 0);
    c.family_sql = "SELECT " + projection(c.schema) + " FROM t WHERE " + where;
    for (const Wildcard& w : wildcards_) c.bindings[w.name] = random_binding(c.schema[w.column], w.op);
    static constexpr unsigned kBits[] = {2, 4, 8};
    c.branching_bits = kBits[uniform(0, 2)];
    return c;
  }

  // Fresh bindings for the wildcards of the last generated family.
  planner::Bindings rebind(const Schema& schema) {
    planner::Bindings b;
    for (const Wildcard& w : wildcards_) b[w.name] = random_binding(schema[w.column], w.op);
    return b;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  struct Wildcard {
    std::string name;
    std::size_t column;
    std::string op;
  };

  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  Schema random_schema(std::size_t max_columns) {
    std::vector<Column> cols;
    const std::size_t n = uniform(1, max_columns);
    for (std::size_t i = 0; i < n; ++i) {
      cols.push_back({"c" + std::to_string(i), chance(0.6) ? ColumnType::kInt64 : ColumnType::kUtf8,
                      chance(0.5)});
    }
    return Schema(std::move(cols));
  }

  Value int_value() {
    if (chance(0.05)) return chance(0.5) ? INT64_MIN : INT64_MAX;
    return static_cast<std::int64_t>(uniform(0, 8)) - 4;
  }
  Value string_value() {
    static const char* kPool[] = {"", "a", "b", "ab", "zz", "hello"};
    return std::string(kPool[uniform(0, 5)]);
  }

  Row random_row(const Schema& schema) {
    Row row;
    for (const Column& col : schema.columns()) {
      if (col.nullable && chance(0.15)) {
        row.emplace_back(std::monostate{});
      } else {
        row.push_back(col.type == ColumnType::kInt64 ? int_value() : string_value());
      }
    }
    return row;
  }

  std::string random_where(const Schema& schema, int depth) {
    if (depth >= 3 || chance(depth == 0 ? 0.3 : 0.5)) return random_leaf(schema);
    switch (uniform(0, 2)) {
      case 0:
        return "(" + random_where(schema, depth + 1) + " AND " + random_where(schema, depth + 1) + ")";
      case 1:
        return "(" + random_where(schema, depth + 1) + " OR " + random_where(schema, depth + 1) + ")";
      default:
        return "NOT (" + random_where(schema, depth + 1) + ")";
    }
  }

  std::string random_leaf(const Schema& schema) {
    const std::size_t col = uniform(0, schema.size() - 1);
    used_[col] = true;
    static const char* kIntOps[] = {"=", "<", ">=", "<>", "IN"};
    static const char* kStrOps[] = {"=", "<>", "IN"};
    const std::string op = schema[col].type == ColumnType::kInt64 ? kIntOps[uniform(0, 4)]
                                                                  : kStrOps[uniform(0, 2)];
    const std::string name = "w" + std::to_string(wildcards_.size());
    wildcards_.push_back({name, col, op});
    return schema[col].name + " " + op + " ?" + name;
  }

  std::string projection(const Schema& schema) {
    if (chance(0.5)) return "*";
    std::string out;
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (used_[c] || chance(0.5)) out += (out.empty() ? "" : ", ") + schema[c].name;
    }
    return out;
  }

  std::vector<Value> random_binding(const Column& col, const std::string& op) {
    const bool is_int = col.type == ColumnType::kInt64;
    if (op == "<" || op == ">=") return {is_int ? int_value() : string_value()};
    std::vector<Value> out;
    const std::size_t n = op == "IN" ? uniform(0, 3) : 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (col.nullable && chance(0.2)) {
        out.emplace_back(std::monostate{});
      } else {
        out.push_back(is_int ? int_value() : string_value());
      }
    }
    return out;
  }

  std::mt19937_64 rng_;
  std::vector<Wildcard> wildcards_;
  std::vector<bool> used_;
};

}  // namespace edl::testing
