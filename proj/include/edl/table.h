// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "edl/crypto.h"

namespace edl {

/// Malformed input data: partition files, manifests, CSV, key blobs.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ColumnType : std::uint8_t { kInt64 = 1, kUtf8 = 2 };

const char* column_type_name(ColumnType t);
ColumnType column_type_from_name(std::string_view name);

struct Column {
  std::string name;
  ColumnType type = ColumnType::kInt64;
  bool nullable = false;

  friend bool operator==(const Column&, const Column&) = default;
};

class Schema {
 public:
  Schema() = default;
  // Throws FormatError on empty, duplicate or blank column names.
  explicit Schema(std::vector<Column> columns);

  const std::vector<Column>& columns() const { return columns_; }
  std::size_t size() const { return columns_.size(); }
  const Column& operator[](std::size_t i) const { return columns_[i]; }
  std::optional<std::size_t> index_of(std::string_view name) const;

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<Column> columns_;
};

/// A plaintext cell. std::monostate is NULL.
using Value = std::variant<std::monostate, std::int64_t, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }
std::string value_to_string(const Value& v);

using Row = std::vector<Value>;

// Cell encodings. Int64 maps to big-endian (v XOR 2^63) so byte order is
// numeric order; nullable Int64 columns prepend a presence byte (9 bytes,
// NULL = 00 + eight zero bytes). Utf8 is a presence byte then the text.
inline constexpr std::uint8_t kNullTag = 0x00;
inline constexpr std::uint8_t kPresentTag = 0x01;

Bytes encode_cell(const Value& value, const Column& column);
void encode_cell_append(const Value& value, const Column& column, Bytes& out);
Value decode_cell(ByteView bytes, const Column& column);

/// Offset mapping of a signed integer onto the unsigned order.
inline std::uint64_t int64_to_ordered(std::int64_t v) {
  return static_cast<std::uint64_t>(v) ^ 0x8000000000000000ull;
}
inline std::int64_t ordered_to_int64(std::uint64_t u) {
  return static_cast<std::int64_t>(u ^ 0x8000000000000000ull);
}

/// Flat storage for a sequence of variable-length byte strings.
class ByteColumn {
 public:
  void reserve(std::size_t entries, std::size_t bytes) {
    offsets_.reserve(entries + 1);
    data_.reserve(bytes);
  }
  void push_back(ByteView v) {
    data_.insert(data_.end(), v.begin(), v.end());
    offsets_.push_back(data_.size());
  }
  // Appends an entry of `len` bytes and returns a pointer to fill it.
  std::uint8_t* append(std::size_t len) {
    data_.resize(data_.size() + len);
    offsets_.push_back(data_.size());
    return data_.data() + data_.size() - len;
  }
  std::size_t size() const { return offsets_.size() - 1; }
  ByteView operator[](std::size_t i) const {
    return ByteView(data_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]);
  }
  std::size_t byte_size() const { return data_.size(); }

  friend bool operator==(const ByteColumn&, const ByteColumn&) = default;

 private:
  std::vector<std::uint8_t> data_;
  std::vector<std::size_t> offsets_{0};
};

struct PlainPartition {
  std::uint32_t partition_id = 1;
  std::vector<Row> rows;

  friend bool operator==(const PlainPartition&, const PlainPartition&) = default;
};

/// Checks that every row conforms to `schema` and the id is non-zero.
void validate_partition(const PlainPartition& part, const Schema& schema);

/// Projection, selection and tagging columns one family adds to a partition.
struct FamilyColumns {
  std::string family_id;
  std::uint8_t tag_length = 4;
  std::uint32_t n_pred = 0;
  ByteColumn projection;             // one entry per row
  std::vector<std::uint8_t> selection;  // rows * n_pred * 16 bytes
  std::vector<std::uint8_t> tags;       // rows * n_pred * tag_length bytes

  ByteView selection_entry(std::size_t row, std::size_t j) const {
    return ByteView(selection.data() + (row * n_pred + j) * crypto::kBlockSize,
                    crypto::kBlockSize);
  }
  ByteView tag(std::size_t row, std::size_t j) const {
    return ByteView(tags.data() + (row * n_pred + j) * tag_length, tag_length);
  }
  std::size_t byte_size() const {
    return projection.byte_size() + selection.size() + tags.size();
  }

  friend bool operator==(const FamilyColumns&, const FamilyColumns&) = default;
};

struct EncryptedPartition {
  std::uint32_t partition_id = 1;
  std::uint32_t row_count = 0;
  std::uint16_t column_count = 0;
  ByteColumn cells;  // row-major, row_count * column_count entries
  std::vector<FamilyColumns> families;  // sorted by family_id

  ByteView cell(std::size_t row, std::size_t column) const {
    return cells[row * column_count + column];
  }
  const FamilyColumns* find_family(std::string_view id) const;
  void add_family(FamilyColumns family);
  void remove_family(std::string_view id);

  friend bool operator==(const EncryptedPartition&, const EncryptedPartition&) = default;
};

// Partition file layout ("MEP1"), all integers big-endian:
//   magic[4] version:u16 partition_id:u32 row_count:u32 column_count:u16
//   per column: name_len:u16 name type:u8 nullable:u8
//   per cell, row-major: len:u32 bytes
//   family_count:u16, then per family in family_id order:
//     id_len:u16 id tag_length:u8 n_pred:u32
//     per row: proj_len:u32 proj
//     selection block (rows * n_pred * 16), tag block (rows * n_pred * tag_length)
inline constexpr std::uint16_t kPartitionFormatVersion = 1;

Bytes serialize_partition(const EncryptedPartition& part, const Schema& schema);
/// Parses a partition file. If `expected` is given the embedded column
/// descriptors must equal it.
EncryptedPartition parse_partition(ByteView file, const Schema* expected = nullptr,
                                   Schema* schema_out = nullptr);

/// Plaintext partitions share the layout; cells hold encode_cell bytes.
Bytes serialize_plain_partition(const PlainPartition& part, const Schema& schema);
PlainPartition parse_plain_partition(ByteView file, const Schema& schema);

// CSV with RFC 4180 quoting; the unquoted token NULL denotes a null cell.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view text);
std::vector<std::optional<std::string>> parse_csv_record_with_nulls(std::string_view line);
PlainPartition read_csv_partition(std::string_view text, const Schema& schema,
                                  std::uint32_t partition_id, bool has_header);
std::string write_csv(const std::vector<Row>& rows, const std::vector<std::string>& header);

struct FamilyRecord {
  std::string family_id;
  std::string canonical_hex;  // serialized CanonicalFamily
  std::string sql;
  std::uint8_t tag_length_bytes = 4;
  std::uint8_t branching_factor_bits = 8;

  friend bool operator==(const FamilyRecord&, const FamilyRecord&) = default;
};

struct PartitionInfo {
  std::uint32_t id = 0;
  std::uint32_t rows = 0;

  friend bool operator==(const PartitionInfo&, const PartitionInfo&) = default;
};

struct TableManifest {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  std::string table_name;
  Schema schema;
  std::vector<PartitionInfo> partitions;
  std::vector<FamilyRecord> families;

  const FamilyRecord* find_family(std::string_view id) const;
  std::string to_json() const;
  static TableManifest from_json(std::string_view text);

  friend bool operator==(const TableManifest&, const TableManifest&) = default;
};

std::string schema_to_json(const Schema& schema);
Schema schema_from_json(std::string_view text);

}  // namespace edl
