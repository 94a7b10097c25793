// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>

#include "edl/table.h"

namespace edl {
namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

std::vector<std::vector<Field>> parse_fields(std::string_view text) {
  std::vector<std::vector<Field>> records;
  std::vector<Field> record;
  Field field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field = Field{};
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.text.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        continue;
      }
      field.text.push_back(c);
      ++i;
      continue;
    }
    if (c == '"') {
      if (field_started && !field.quoted) throw FormatError("stray quote inside unquoted CSV field");
      if (field.quoted) throw FormatError("unexpected quote after closing quote");
      field.quoted = true;
      field_started = true;
      in_quotes = true;
      ++i;
    } else if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_record();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
    } else {
      if (field.quoted) throw FormatError("characters after closing quote in CSV field");
      field.text.push_back(c);
      field_started = true;
      ++i;
    }
  }
  if (in_quotes) throw FormatError("unterminated quoted CSV field");
  if (field_started || !record.empty()) end_record();
  return records;
}

Value parse_value(const Field& f, const Column& col, std::size_t line) {
  const std::string where = " (record " + std::to_string(line) + ", column '" + col.name + "')";
  if (!f.quoted && f.text == "NULL") {
    if (!col.nullable) throw FormatError("NULL in non-nullable column" + where);
    return std::monostate{};
  }
  if (col.type == ColumnType::kUtf8) return f.text;
  std::int64_t v = 0;
  const char* first = f.text.data();
  const char* last = first + f.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (f.text.empty() || ec != std::errc() || ptr != last) {
    throw FormatError("invalid integer '" + f.text + "'" + where);
  }
  return v;
}

bool needs_quotes(std::string_view s) {
  return s.empty() || s == "NULL" || s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, const std::string& s) {
  if (!needs_quotes(s)) {
    out += s;
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  for (auto& rec : parse_fields(text)) {
    std::vector<std::string> r;
    for (auto& f : rec) r.push_back(std::move(f.text));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::optional<std::string>> parse_csv_record_with_nulls(std::string_view line) {
  auto records = parse_fields(line);
  if (records.size() != 1) throw FormatError("expected exactly one CSV record");
  std::vector<std::optional<std::string>> out;
  for (auto& f : records[0]) {
    if (!f.quoted && f.text == "NULL") {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(std::move(f.text));
    }
  }
  return out;
}

PlainPartition read_csv_partition(std::string_view text, const Schema& schema,
                                  std::uint32_t partition_id, bool has_header) {
  auto records = parse_fields(text);
  PlainPartition part;
  part.partition_id = partition_id;
  std::size_t first = 0;
  if (has_header) {
    if (records.empty()) throw FormatError("CSV header missing");
    const auto& header = records[0];
    if (header.size() != schema.size()) throw FormatError("CSV header does not match schema");
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c].text != schema[c].name) {
        throw FormatError("CSV header column '" + header[c].text + "' does not match schema '" +
                          schema[c].name + "'");
      }
    }
    first = 1;
  }
  part.rows.reserve(records.size() - first);
  for (std::size_t i = first; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != schema.size()) {
      throw FormatError("CSV record " + std::to_string(i + 1) + " has " +
                        std::to_string(rec.size()) + " fields, schema has " +
                        std::to_string(schema.size()));
    }
    Row row;
    row.reserve(rec.size());
    for (std::size_t c = 0; c < rec.size(); ++c) row.push_back(parse_value(rec[c], schema[c], i + 1));
    part.rows.push_back(std::move(row));
  }
  validate_partition(part, schema);
  return part;
}

std::string write_csv(const std::vector<Row>& rows, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c > 0) out.push_back(',');
    append_field(out, header[c]);
  }
  if (!header.empty()) out += "\r\n";
  for (const Row& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out.push_back(',');
      if (is_null(row[c])) {
        out += "NULL";
      } else {
        append_field(out, value_to_string(row[c]));
      }
    }
    out += "\r\n";
  }
  return out;
}

}  // namespace edl
