// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstring>
#include <set>

#include "edl/backend.h"

namespace edl::backend {
namespace {

SelectionCache::Material derive_material(const SymKey& s, std::uint32_t partition) {
  const Aes128 sk(s);
  return {Aes128(crypto::prf(sk, crypto::Block{})),
          Aes128(crypto::prf(sk, crypto::pack_u32(partition)))};
}

enum class ProjectionMode { kSingleColumn, kWholeRow, kKeyBlob };

}  // namespace

const SelectionCache::Material& SelectionCache::get(const SymKey& s) {
  if (capacity_ == 0) {
    ++misses_;
    scratch_.emplace(derive_material(s, partition_));
    return *scratch_;
  }
  auto it = index_.find(s);
  if (it != index_.end()) {
    ++hits_;
    lru_.splice(lru_.begin(), lru_, it->second);
    return it->second->second;
  }
  ++misses_;
  lru_.emplace_front(s, derive_material(s, partition_));
  index_.emplace(s, lru_.begin());
  if (lru_.size() > capacity_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  return lru_.front().second;
}

SymKey predicate_key(const SymKey& family_key, std::uint32_t j) {
  return crypto::prf(family_key, crypto::pack_u32(j + 1));
}

FamilyColumns add_family_partition(const EncryptedPartition& enc, const Schema& schema,
                                   const SymKey& table_key,
                                   const planner::CanonicalFamily& family,
                                   const SymKey& family_key, const AddFamilyOptions& options,
                                   AddFamilyStats* stats) {
  if (options.tag_length < 1 || options.tag_length > 16) {
    throw std::invalid_argument("tag length must be 1..16 bytes");
  }
  if (family.n_columns != schema.size() || enc.column_count != schema.size()) {
    throw FormatError("family, schema and partition disagree on the column count");
  }
  if (family.predicates.empty()) throw planner::PlanError("family has no predicates");
  const std::uint32_t p = enc.partition_id;
  const auto n_pred = static_cast<std::uint32_t>(family.predicates.size());
  const std::size_t n_proj = family.projection.size();
  const ProjectionMode mode = n_proj == 1                ? ProjectionMode::kSingleColumn
                              : n_proj == schema.size() ? ProjectionMode::kWholeRow
                                                         : ProjectionMode::kKeyBlob;

  std::set<std::uint32_t> where_columns;
  for (const planner::PredicateFn& pred : family.predicates) {
    for (const planner::Atom& a : pred.atoms) {
      if (a.column >= schema.size()) throw FormatError("family references an unknown column");
      where_columns.insert(a.column);
    }
  }

  FamilyColumns out;
  out.family_id = family.family_id();
  out.tag_length = options.tag_length;
  out.n_pred = n_pred;
  out.selection.resize(std::size_t{enc.row_count} * n_pred * crypto::kBlockSize);
  out.tags.resize(std::size_t{enc.row_count} * n_pred * options.tag_length);
  out.projection.reserve(enc.row_count,
                         enc.row_count * (mode == ProjectionMode::kKeyBlob ? 40 + 16 * n_proj : 16));

  std::vector<Aes128> pred_keys;
  pred_keys.reserve(n_pred);
  for (std::uint32_t j = 0; j < n_pred; ++j) pred_keys.emplace_back(predicate_key(family_key, j));
  const Aes128 table(table_key);
  const SymKey seed = options.projection_seed ? *options.projection_seed : SymKey::random();
  const Aes128 seed_aes(seed);

  SelectionCache cache(options.cache_capacity, p);
  std::unordered_map<SymKey, std::uint32_t, crypto::SymKeyHash> counts;
  planner::RowEvaluator evaluator(schema.size());
  std::vector<Bytes> plain(schema.size());
  std::vector<ByteView> cells(schema.size());
  Bytes g;
  Bytes key_blob;

  for (std::uint32_t r = 0; r < enc.row_count; ++r) {
    const SymKey kr = crypto::prf(table, crypto::pack_u32_pair(p, r + 1));
    const Aes128 kr_aes(kr);
    for (std::uint32_t c : where_columns) {
      const SymKey krc = crypto::prf(kr_aes, crypto::pack_u32(c + 1));
      const ByteView ct = enc.cell(r, c);
      plain[c].resize(ct.size());
      crypto::ote_xor_into(krc, ct, plain[c].data());
      cells[c] = plain[c];
    }

    SymKey pk;
    switch (mode) {
      case ProjectionMode::kSingleColumn:
        pk = crypto::prf(kr_aes, crypto::pack_u32(static_cast<std::uint32_t>(family.projection[0] + 1)));
        break;
      case ProjectionMode::kWholeRow:
        pk = kr;
        break;
      case ProjectionMode::kKeyBlob:
        pk = crypto::prf(seed_aes, crypto::pack_u32_pair(p, r + 1));
        break;
    }
    const Aes128 pk_aes(pk);
    if (mode == ProjectionMode::kKeyBlob) {
      key_blob.clear();
      for (std::size_t c : family.projection) {
        const SymKey krc = crypto::prf(kr_aes, crypto::pack_u32(static_cast<std::uint32_t>(c + 1)));
        key_blob.insert(key_blob.end(), krc.block().begin(), krc.block().end());
      }
      const Bytes blob = crypto::enc(
          pk_aes, {crypto::NonceDomain::kProjectionBlob, p, r + 1, 0}, key_blob);
      crypto::secure_wipe(key_blob.data(), key_blob.size());
      const crypto::Block zero{};
      const Bytes check = crypto::enc(
          pk_aes, {crypto::NonceDomain::kProjectionZeroCheck, p, r + 1, 0}, zero);
      out.projection.push_back(crypto::secure_concat({ByteView(blob), ByteView(check)}));
    } else {
      const crypto::Block check = pk_aes.encrypt(crypto::Block{});
      out.projection.push_back(check);
    }

    evaluator.reset_row();
    for (std::uint32_t j = 0; j < n_pred; ++j) {
      evaluator.evaluate(family.predicates[j], cells, g);
      const SymKey s = crypto::prf_var(pred_keys[j], g);
      const SelectionCache::Material& mat = cache.get(s);
      const std::size_t slot = std::size_t{r} * n_pred + j;
      crypto::enc_into(mat.selection, {crypto::NonceDomain::kSelectionEntry, p, r + 1, j + 1},
                       pk.bytes(), out.selection.data() + slot * crypto::kBlockSize);
      std::uint32_t& count = counts[s];
      const crypto::Block tag = mat.tagging.encrypt(crypto::pack_u32(count));
      ++count;
      std::memcpy(out.tags.data() + slot * options.tag_length, tag.data(), options.tag_length);
    }
  }
  for (Bytes& b : plain) crypto::secure_wipe(b.data(), b.size());

  if (stats != nullptr) {
    stats->cache_hits += cache.hits();
    stats->cache_misses += cache.misses();
    for (const auto& [key, n] : counts) stats->counts[key.hex()] = n;
  }
  return out;
}

}  // namespace edl::backend
