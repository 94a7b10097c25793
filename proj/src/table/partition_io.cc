// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>

#include "edl/table.h"

namespace edl {
namespace {

constexpr char kMagic[4] = {'M', 'E', 'P', '1'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint64_t v) {
    if (v > 0xffffffffu) throw FormatError("value exceeds u32 field");
    for (int i = 3; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void raw(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void str16(std::string_view s) {
    if (s.size() > 0xffff) throw FormatError("string exceeds u16 length field");
    u16(static_cast<std::uint16_t>(s.size()));
    raw(as_bytes(s));
  }
  void reserve(std::size_t n) { out_.reserve(n); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}
  ByteView take(std::size_t n) {
    if (in_.size() - pos_ < n) throw FormatError("truncated partition file");
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
  std::string str16() {
    ByteView b = take(u16());
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

void write_header(Writer& w, std::uint32_t id, std::uint32_t rows, const Schema& schema) {
  w.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  w.u16(kPartitionFormatVersion);
  w.u32(id);
  w.u32(rows);
  if (schema.size() > 0xffff) throw FormatError("too many columns");
  w.u16(static_cast<std::uint16_t>(schema.size()));
  for (const Column& c : schema.columns()) {
    w.str16(c.name);
    w.u8(static_cast<std::uint8_t>(c.type));
    w.u8(c.nullable ? 1 : 0);
  }
}

struct Header {
  std::uint32_t id;
  std::uint32_t rows;
  Schema schema;
};

Header read_header(Reader& r, const Schema* expected) {
  ByteView magic = r.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad partition magic");
  const std::uint16_t version = r.u16();
  if (version != kPartitionFormatVersion) {
    throw FormatError("unsupported partition format version " + std::to_string(version));
  }
  Header h{r.u32(), r.u32(), {}};
  const std::uint16_t ncols = r.u16();
  std::vector<Column> cols;
  cols.reserve(ncols);
  for (std::uint16_t i = 0; i < ncols; ++i) {
    Column c;
    c.name = r.str16();
    const std::uint8_t type = r.u8();
    if (type != static_cast<std::uint8_t>(ColumnType::kInt64) &&
        type != static_cast<std::uint8_t>(ColumnType::kUtf8)) {
      throw FormatError("unknown column type byte");
    }
    c.type = static_cast<ColumnType>(type);
    const std::uint8_t nullable = r.u8();
    if (nullable > 1) throw FormatError("bad nullable flag");
    c.nullable = nullable == 1;
    cols.push_back(std::move(c));
  }
  h.schema = Schema(std::move(cols));
  if (expected != nullptr && !(h.schema == *expected)) {
    throw FormatError("partition schema does not match manifest");
  }
  return h;
}

}  // namespace

Bytes serialize_partition(const EncryptedPartition& part, const Schema& schema) {
  if (part.column_count != schema.size()) throw FormatError("column count mismatch");
  Writer w;
  std::size_t estimate = 64 + part.cells.byte_size() + 4 * part.cells.size();
  for (const FamilyColumns& f : part.families) estimate += f.byte_size() + 4 * part.row_count + 32;
  w.reserve(estimate);
  write_header(w, part.partition_id, part.row_count, schema);
  for (std::size_t i = 0; i < part.cells.size(); ++i) {
    w.u32(part.cells[i].size());
    w.raw(part.cells[i]);
  }
  if (part.families.size() > 0xffff) throw FormatError("too many families");
  w.u16(static_cast<std::uint16_t>(part.families.size()));
  for (const FamilyColumns& f : part.families) {
    w.str16(f.family_id);
    w.u8(f.tag_length);
    w.u32(f.n_pred);
    for (std::size_t r = 0; r < f.projection.size(); ++r) {
      w.u32(f.projection[r].size());
      w.raw(f.projection[r]);
    }
    w.raw(f.selection);
    w.raw(f.tags);
  }
  return w.take();
}

EncryptedPartition parse_partition(ByteView file, const Schema* expected, Schema* schema_out) {
  Reader r(file);
  Header h = read_header(r, expected);
  EncryptedPartition part;
  part.partition_id = h.id;
  part.row_count = h.rows;
  part.column_count = static_cast<std::uint16_t>(h.schema.size());
  const std::size_t ncells = std::size_t{h.rows} * h.schema.size();
  part.cells.reserve(ncells, file.size());
  for (std::size_t i = 0; i < ncells; ++i) part.cells.push_back(r.take(r.u32()));
  const std::uint16_t nfam = r.u16();
  std::string previous;
  for (std::uint16_t i = 0; i < nfam; ++i) {
    FamilyColumns f;
    f.family_id = r.str16();
    if (i > 0 && f.family_id <= previous) throw FormatError("families not in family_id order");
    previous = f.family_id;
    f.tag_length = r.u8();
    if (f.tag_length < 1 || f.tag_length > 16) throw FormatError("bad tag length");
    f.n_pred = r.u32();
    for (std::uint32_t row = 0; row < h.rows; ++row) f.projection.push_back(r.take(r.u32()));
    ByteView sel = r.take(std::size_t{h.rows} * f.n_pred * crypto::kBlockSize);
    f.selection.assign(sel.begin(), sel.end());
    ByteView tags = r.take(std::size_t{h.rows} * f.n_pred * f.tag_length);
    f.tags.assign(tags.begin(), tags.end());
    part.families.push_back(std::move(f));
  }
  if (!r.done()) throw FormatError("trailing bytes in partition file");
  if (schema_out != nullptr) *schema_out = std::move(h.schema);
  return part;
}

Bytes serialize_plain_partition(const PlainPartition& part, const Schema& schema) {
  validate_partition(part, schema);
  Writer w;
  write_header(w, part.partition_id, static_cast<std::uint32_t>(part.rows.size()), schema);
  Bytes cell;
  for (const Row& row : part.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      cell.clear();
      encode_cell_append(row[c], schema[c], cell);
      w.u32(cell.size());
      w.raw(cell);
    }
  }
  w.u16(0);
  return w.take();
}

PlainPartition parse_plain_partition(ByteView file, const Schema& schema) {
  EncryptedPartition raw = parse_partition(file, &schema);
  if (!raw.families.empty()) throw FormatError("plaintext partition carries family columns");
  PlainPartition part;
  part.partition_id = raw.partition_id;
  part.rows.resize(raw.row_count);
  for (std::uint32_t r = 0; r < raw.row_count; ++r) {
    part.rows[r].reserve(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      part.rows[r].push_back(decode_cell(raw.cell(r, c), schema[c]));
    }
  }
  return part;
}

}  // namespace edl
