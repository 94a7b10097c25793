// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>

#include "edl/table.h"

namespace edl {

const char* column_type_name(ColumnType t) {
  switch (t) {
    case ColumnType::kInt64:
      return "int64";
    case ColumnType::kUtf8:
      return "utf8";
  }
  return "unknown";
}

ColumnType column_type_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "int64" || lower == "int" || lower == "bigint") return ColumnType::kInt64;
  if (lower == "utf8" || lower == "string" || lower == "text") return ColumnType::kUtf8;
  throw FormatError("unknown column type '" + std::string(name) + "'");
}

Schema::Schema(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw FormatError("schema needs at least one column");
  std::set<std::string> seen;
  for (const Column& c : columns_) {
    if (c.name.empty()) throw FormatError("column names must be non-empty");
    if (!seen.insert(c.name).second) throw FormatError("duplicate column name '" + c.name + "'");
  }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::string value_to_string(const Value& v) {
  if (is_null(v)) return "NULL";
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

void encode_cell_append(const Value& value, const Column& column, Bytes& out) {
  if (column.type == ColumnType::kInt64) {
    if (is_null(value)) {
      if (!column.nullable) throw FormatError("NULL in non-nullable column '" + column.name + "'");
      out.push_back(kNullTag);
      out.insert(out.end(), 8, 0);
      return;
    }
    const auto* v = std::get_if<std::int64_t>(&value);
    if (v == nullptr) throw FormatError("column '" + column.name + "' expects an integer");
    if (column.nullable) out.push_back(kPresentTag);
    const std::uint64_t u = int64_to_ordered(*v);
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    return;
  }
  if (is_null(value)) {
    if (!column.nullable) throw FormatError("NULL in non-nullable column '" + column.name + "'");
    out.push_back(kNullTag);
    return;
  }
  const auto* s = std::get_if<std::string>(&value);
  if (s == nullptr) throw FormatError("column '" + column.name + "' expects a string");
  out.push_back(kPresentTag);
  out.insert(out.end(), s->begin(), s->end());
}

Bytes encode_cell(const Value& value, const Column& column) {
  Bytes out;
  encode_cell_append(value, column, out);
  return out;
}

Value decode_cell(ByteView bytes, const Column& column) {
  if (column.type == ColumnType::kInt64) {
    ByteView payload = bytes;
    if (column.nullable) {
      if (bytes.size() != 9) throw FormatError("nullable int64 cell must be 9 bytes");
      if (bytes[0] == kNullTag) {
        if (std::any_of(bytes.begin() + 1, bytes.end(), [](std::uint8_t b) { return b != 0; })) {
          throw FormatError("malformed NULL int64 cell");
        }
        return std::monostate{};
      }
      if (bytes[0] != kPresentTag) throw FormatError("malformed cell tag byte");
      payload = bytes.subspan(1);
    } else if (bytes.size() != 8) {
      throw FormatError("int64 cell must be 8 bytes");
    }
    std::uint64_t u = 0;
    for (std::uint8_t b : payload) u = (u << 8) | b;
    return ordered_to_int64(u);
  }
  if (bytes.empty()) throw FormatError("empty utf8 cell");
  if (bytes[0] == kNullTag) {
    if (bytes.size() != 1 || !column.nullable) throw FormatError("malformed NULL utf8 cell");
    return std::monostate{};
  }
  if (bytes[0] != kPresentTag) throw FormatError("malformed cell tag byte");
  return std::string(reinterpret_cast<const char*>(bytes.data()) + 1, bytes.size() - 1);
}

void validate_partition(const PlainPartition& part, const Schema& schema) {
  if (part.partition_id == 0) throw FormatError("partition ids start at 1");
  for (std::size_t r = 0; r < part.rows.size(); ++r) {
    const Row& row = part.rows[r];
    if (row.size() != schema.size()) {
      throw FormatError("row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                        " cells, schema has " + std::to_string(schema.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const Column& col = schema[c];
      const Value& v = row[c];
      const bool ok = is_null(v) ? col.nullable
                                 : (col.type == ColumnType::kInt64
                                        ? std::holds_alternative<std::int64_t>(v)
                                        : std::holds_alternative<std::string>(v));
      if (!ok) {
        throw FormatError("row " + std::to_string(r + 1) + " column '" + col.name +
                          "' does not match schema");
      }
    }
  }
}

const FamilyColumns* EncryptedPartition::find_family(std::string_view id) const {
  for (const FamilyColumns& f : families) {
    if (f.family_id == id) return &f;
  }
  return nullptr;
}

void EncryptedPartition::add_family(FamilyColumns family) {
  if (find_family(family.family_id) != nullptr) {
    throw FormatError("family " + family.family_id + " already present in partition");
  }
  auto pos = std::lower_bound(
      families.begin(), families.end(), family.family_id,
      [](const FamilyColumns& f, const std::string& id) { return f.family_id < id; });
  families.insert(pos, std::move(family));
}

void EncryptedPartition::remove_family(std::string_view id) {
  std::erase_if(families, [&](const FamilyColumns& f) { return f.family_id == id; });
}

}  // namespace edl
