// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include "edl/backend.h"

namespace edl::backend {

SymKey row_key(const SymKey& table_key, std::uint32_t partition, std::uint32_t row) {
  return crypto::prf(table_key, crypto::pack_u32_pair(partition, row + 1));
}

SymKey cell_key(const SymKey& row_key, std::uint32_t column) {
  return crypto::prf(row_key, crypto::pack_u32(column + 1));
}

EncryptedPartition encrypt_partition(const PlainPartition& plain, const Schema& schema,
                                     const SymKey& table_key) {
  validate_partition(plain, schema);
  EncryptedPartition out;
  out.partition_id = plain.partition_id;
  out.row_count = static_cast<std::uint32_t>(plain.rows.size());
  out.column_count = static_cast<std::uint16_t>(schema.size());
  out.cells.reserve(plain.rows.size() * schema.size(), plain.rows.size() * schema.size() * 12);
  const Aes128 table(table_key);
  Bytes encoded;
  for (std::uint32_t r = 0; r < out.row_count; ++r) {
    const Aes128 kr(crypto::prf(table, crypto::pack_u32_pair(plain.partition_id, r + 1)));
    for (std::size_t c = 0; c < schema.size(); ++c) {
      encoded.clear();
      encode_cell_append(plain.rows[r][c], schema[c], encoded);
      const SymKey krc = crypto::prf(kr, crypto::pack_u32(static_cast<std::uint32_t>(c + 1)));
      crypto::ote_xor_into(krc, encoded, out.cells.append(encoded.size()));
    }
  }
  return out;
}

PlainPartition decrypt_partition(const EncryptedPartition& enc, const Schema& schema,
                                 const SymKey& table_key) {
  if (enc.column_count != schema.size()) throw FormatError("column count mismatch");
  PlainPartition out;
  out.partition_id = enc.partition_id;
  out.rows.resize(enc.row_count);
  const Aes128 table(table_key);
  for (std::uint32_t r = 0; r < enc.row_count; ++r) {
    const Aes128 kr(crypto::prf(table, crypto::pack_u32_pair(enc.partition_id, r + 1)));
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const SymKey krc = crypto::prf(kr, crypto::pack_u32(static_cast<std::uint32_t>(c + 1)));
      out.rows[r].push_back(decode_cell(crypto::ote_dec(krc, enc.cell(r, c)), schema[c]));
    }
  }
  return out;
}

}  // namespace edl::backend
