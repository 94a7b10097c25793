// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <list>
#include <optional>
#include <unordered_map>

#include "edl/crypto.h"
#include "edl/planner.h"
#include "edl/table.h"

namespace edl::backend {

using crypto::Aes128;
using crypto::SymKey;

/// Row key k_r and cell key k_{r,c}; rows and columns are 0-based here and
/// shifted to 1-based PRF inputs internally.
SymKey row_key(const SymKey& table_key, std::uint32_t partition, std::uint32_t row);
SymKey cell_key(const SymKey& row_key, std::uint32_t column);

EncryptedPartition encrypt_partition(const PlainPartition& plain, const Schema& schema,
                                     const SymKey& table_key);

/// Owner-side inverse of encrypt_partition (ignores family columns).
PlainPartition decrypt_partition(const EncryptedPartition& enc, const Schema& schema,
                                 const SymKey& table_key);

/// Bounded LRU from selection key s to prepared schedules for PRF(s, 0) and
/// the tagging key PRF(s, p). Confined to one partition's worker.
class SelectionCache {
 public:
  struct Material {
    Aes128 selection;  // encrypts the projection key into the selection column
    Aes128 tagging;    // tau
  };

  SelectionCache(std::size_t capacity, std::uint32_t partition)
      : capacity_(capacity), partition_(partition) {}

  // Returns material for `s`, deriving it on a miss. The reference is valid
  // until the next call.
  const Material& get(const SymKey& s);

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  using Entry = std::pair<SymKey, Material>;
  std::size_t capacity_;
  std::uint32_t partition_;
  std::list<Entry> lru_;
  std::unordered_map<SymKey, std::list<Entry>::iterator, crypto::SymKeyHash> index_;
  std::optional<Material> scratch_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

struct AddFamilyOptions {
  std::uint8_t tag_length = 4;
  std::size_t cache_capacity = 512;
  // Seed for random projection keys; drawn fresh per partition when unset.
  std::optional<SymKey> projection_seed;
};

struct AddFamilyStats {
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  // Final count per selection key, keyed by the key's hex.
  std::unordered_map<std::string, std::uint32_t> counts;
};

/// Computes the projection, selection and tagging columns of `family` for one
/// partition. Only WHERE-referenced cells are decrypted.
FamilyColumns add_family_partition(const EncryptedPartition& enc, const Schema& schema,
                                   const SymKey& table_key,
                                   const planner::CanonicalFamily& family,
                                   const SymKey& family_key, const AddFamilyOptions& options = {},
                                   AddFamilyStats* stats = nullptr);

/// Predicate key k^pred_j for a 0-based predicate index.
SymKey predicate_key(const SymKey& family_key, std::uint32_t j);

struct ViewKeySet {
  struct Entry {
    Bytes value;
    SymKey key;
  };
  std::string family_id;
  std::uint8_t tag_length = 4;
  std::vector<std::vector<Entry>> keys;  // per predicate

  std::size_t size() const;
};

ViewKeySet view_gen(const planner::CanonicalView& view, const SymKey& family_key,
                    std::uint8_t tag_length);

struct RevealOptions {
  bool use_tags = true;
};

struct RevealStats {
  std::uint64_t block_ops = 0;  // AES block encryptions
  std::uint64_t decrypt_attempts = 0;
  std::uint64_t false_positives = 0;
  std::uint64_t rows_emitted = 0;
};

struct RevealResult {
  std::vector<std::uint32_t> row_indices;
  std::vector<Row> rows;  // projected plaintext, in row order
  // Successful decryptions per key, aligned with ViewKeySet::keys.
  std::vector<std::vector<std::uint32_t>> counts;
};

RevealResult reveal_view_partition(const EncryptedPartition& enc, const Schema& schema,
                                   const planner::CanonicalFamily& family, const ViewKeySet& keys,
                                   const RevealOptions& options = {},
                                   RevealStats* stats = nullptr);

/// Recovers the projection key of row `row` from its predicate-j entry with
/// selection key `s`, or nullopt if `s` is not that row's key.
std::optional<SymKey> decrypt_row_key(const EncryptedPartition& enc, const FamilyColumns& fam,
                                      const planner::CanonicalFamily& family, std::uint32_t row,
                                      std::uint32_t j, const SymKey& s);
/// Decrypts the projected cells of a row given its projection key.
Row decrypt_projected(const EncryptedPartition& enc, const FamilyColumns& fam,
                      const planner::CanonicalFamily& family, const Schema& schema,
                      std::uint32_t row, const SymKey& pk);

// Key files: versioned binary blobs ("MKEY" for single keys, "MVKS" for view
// key sets) with a hex text form.
enum class KeyKind : std::uint8_t { kTable = 1, kFamily = 2 };

struct KeyBlob {
  KeyKind kind = KeyKind::kTable;
  std::string family_id;  // family keys only
  SymKey key;
};

Bytes serialize_key(const KeyBlob& blob);
KeyBlob parse_key(ByteView bytes);
Bytes serialize_view_keys(const ViewKeySet& keys);
ViewKeySet parse_view_keys(ByteView bytes);
/// Accepts a binary blob or its hex text form.
Bytes key_file_bytes(ByteView file);

}  // namespace edl::backend
