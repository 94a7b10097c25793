// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>

#include "edl/backend.h"

namespace edl::backend {
namespace {

enum class ProjectionMode { kSingleColumn, kWholeRow, kKeyBlob };

ProjectionMode mode_of(const planner::CanonicalFamily& family) {
  if (family.projection.size() == 1) return ProjectionMode::kSingleColumn;
  if (family.projection.size() == family.n_columns) return ProjectionMode::kWholeRow;
  return ProjectionMode::kKeyBlob;
}

std::uint32_t be32_at(ByteView b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | b[at + 3];
}

struct BlobParts {
  ByteView keys;
  ByteView check;
};

BlobParts split_blob(ByteView proj, std::size_t n_proj) {
  const std::size_t key_bytes = 16 * n_proj;
  if (proj.size() != 4 + 4 + key_bytes + 4 + 16 || be32_at(proj, 0) != 2 ||
      be32_at(proj, 4) != key_bytes || be32_at(proj, 8 + key_bytes) != 16) {
    throw FormatError("malformed projection column entry");
  }
  return {proj.subspan(8, key_bytes), proj.subspan(12 + key_bytes, 16)};
}

bool verify_pk(const FamilyColumns& fam, ProjectionMode mode, std::size_t n_proj,
               std::uint32_t partition, std::uint32_t row, const SymKey& pk) {
  const ByteView proj = fam.projection[row];
  const Aes128 pk_aes(pk);
  if (mode != ProjectionMode::kKeyBlob) {
    if (proj.size() != crypto::kBlockSize) throw FormatError("malformed projection column entry");
    const crypto::Block check = pk_aes.encrypt(crypto::Block{});
    return std::memcmp(check.data(), proj.data(), crypto::kBlockSize) == 0;
  }
  const BlobParts parts = split_blob(proj, n_proj);
  crypto::Block zero;
  crypto::enc_into(pk_aes, {crypto::NonceDomain::kProjectionZeroCheck, partition, row + 1, 0},
                   parts.check, zero.data());
  return zero == crypto::Block{};
}

const FamilyColumns& family_columns(const EncryptedPartition& enc,
                                    const planner::CanonicalFamily& family,
                                    std::string_view family_id) {
  const FamilyColumns* fam = enc.find_family(family_id);
  if (fam == nullptr) {
    throw FormatError("family " + std::string(family_id) + " is not instantiated in partition " +
                      std::to_string(enc.partition_id));
  }
  if (fam->n_pred != family.predicates.size() || fam->projection.size() != enc.row_count) {
    throw FormatError("family columns do not match the family definition");
  }
  return *fam;
}

struct TagKey {
  std::uint32_t j = 0;
  std::array<std::uint8_t, 16> tag{};

  bool operator==(const TagKey&) const = default;
};

struct TagKeyHash {
  std::size_t operator()(const TagKey& k) const noexcept {
    std::uint64_t v;
    std::memcpy(&v, k.tag.data(), sizeof(v));
    return static_cast<std::size_t>(v ^ (std::uint64_t{k.j} * 0x9e3779b97f4a7c15ull));
  }
};

struct KeyState {
  std::uint32_t j;
  std::uint32_t index;  // position within keys[j]
  Aes128 selection;
  Aes128 tagging;
  std::uint32_t count = 0;
  TagKey net;
};

}  // namespace

std::optional<SymKey> decrypt_row_key(const EncryptedPartition& enc, const FamilyColumns& fam,
                                      const planner::CanonicalFamily& family, std::uint32_t row,
                                      std::uint32_t j, const SymKey& s) {
  const Aes128 sel(crypto::prf(s, crypto::Block{}));
  crypto::Block pk;
  crypto::enc_into(sel, {crypto::NonceDomain::kSelectionEntry, enc.partition_id, row + 1, j + 1},
                   fam.selection_entry(row, j), pk.data());
  SymKey key(pk);
  if (!verify_pk(fam, mode_of(family), family.projection.size(), enc.partition_id, row, key)) {
    return std::nullopt;
  }
  return key;
}

Row decrypt_projected(const EncryptedPartition& enc, const FamilyColumns& fam,
                      const planner::CanonicalFamily& family, const Schema& schema,
                      std::uint32_t row, const SymKey& pk) {
  Row out;
  out.reserve(family.projection.size());
  Bytes plain;
  auto emit = [&](std::size_t c, const SymKey& krc) {
    const ByteView ct = enc.cell(row, c);
    plain.resize(ct.size());
    crypto::ote_xor_into(krc, ct, plain.data());
    out.push_back(decode_cell(plain, schema[c]));
  };
  switch (mode_of(family)) {
    case ProjectionMode::kSingleColumn:
      emit(family.projection[0], pk);
      break;
    case ProjectionMode::kWholeRow: {
      const Aes128 kr(pk);
      for (std::size_t c : family.projection) {
        emit(c, crypto::prf(kr, crypto::pack_u32(static_cast<std::uint32_t>(c + 1))));
      }
      break;
    }
    case ProjectionMode::kKeyBlob: {
      const BlobParts parts = split_blob(fam.projection[row], family.projection.size());
      Bytes keys = crypto::dec(
          pk, {crypto::NonceDomain::kProjectionBlob, enc.partition_id, row + 1, 0}, parts.keys);
      for (std::size_t i = 0; i < family.projection.size(); ++i) {
        emit(family.projection[i],
             SymKey::from_bytes(ByteView(keys.data() + 16 * i, crypto::kKeySize)));
      }
      crypto::secure_wipe(keys.data(), keys.size());
      break;
    }
  }
  crypto::secure_wipe(plain.data(), plain.size());
  return out;
}

RevealResult reveal_view_partition(const EncryptedPartition& enc, const Schema& schema,
                                   const planner::CanonicalFamily& family, const ViewKeySet& keys,
                                   const RevealOptions& options, RevealStats* stats) {
  const std::string family_id = family.family_id();
  if (keys.family_id != family_id) {
    throw std::invalid_argument("view keys were minted for family " + keys.family_id +
                                ", not " + family_id);
  }
  if (keys.keys.size() != family.predicates.size()) {
    throw std::invalid_argument("view key set does not match the family's predicate count");
  }
  const FamilyColumns& fam = family_columns(enc, family, family_id);
  if (fam.tag_length != keys.tag_length) {
    throw std::invalid_argument("tag length mismatch: partition uses " +
                                std::to_string(fam.tag_length) + " bytes, view keys " +
                                std::to_string(keys.tag_length));
  }
  const std::uint32_t p = enc.partition_id;
  const std::uint8_t L = fam.tag_length;
  const ProjectionMode mode = mode_of(family);
  const std::size_t n_proj = family.projection.size();
  RevealStats local;
  RevealStats& st = stats != nullptr ? *stats : local;

  RevealResult result;
  result.counts.resize(keys.keys.size());
  std::vector<KeyState> states;
  states.reserve(keys.size());
  // States are grouped by predicate; first_state[j] starts predicate j's run.
  std::vector<std::size_t> first_state{0};
  for (std::uint32_t j = 0; j < keys.keys.size(); ++j) {
    first_state.push_back(first_state.back() + keys.keys[j].size());
    result.counts[j].assign(keys.keys[j].size(), 0);
    for (std::uint32_t i = 0; i < keys.keys[j].size(); ++i) {
      const Aes128 k(keys.keys[j][i].key);
      states.push_back({j, i, Aes128(crypto::prf(k, crypto::Block{})),
                        Aes128(crypto::prf(k, crypto::pack_u32(p))), 0, {}});
      st.block_ops += 2;
    }
  }

  auto next_expected = [&](KeyState& ks) {
    const crypto::Block t = ks.tagging.encrypt(crypto::pack_u32(ks.count));
    ++st.block_ops;
    ks.net.j = ks.j;
    ks.net.tag.fill(0);
    std::memcpy(ks.net.tag.data(), t.data(), L);
  };

  std::unordered_map<TagKey, std::vector<std::uint32_t>, TagKeyHash> net;
  if (options.use_tags) {
    net.reserve(states.size() * 2);
    for (std::uint32_t s = 0; s < states.size(); ++s) {
      next_expected(states[s]);
      net[states[s].net].push_back(s);
    }
  }

  std::optional<SymKey> row_pk;
  // Tries one key on (row, j); returns true when it is that row's key.
  auto attempt = [&](std::uint32_t r, std::uint32_t j, KeyState& ks) {
    ++st.decrypt_attempts;
    crypto::Block pk_bytes;
    crypto::enc_into(ks.selection, {crypto::NonceDomain::kSelectionEntry, p, r + 1, j + 1},
                     fam.selection_entry(r, j), pk_bytes.data());
    ++st.block_ops;
    const SymKey pk(pk_bytes);
    if (row_pk) return pk == *row_pk;
    ++st.block_ops;
    if (!verify_pk(fam, mode, n_proj, p, r, pk)) return false;
    row_pk = pk;
    result.row_indices.push_back(r);
    result.rows.push_back(decrypt_projected(enc, fam, family, schema, r, pk));
    ++st.rows_emitted;
    return true;
  };

  TagKey probe;
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t r = 0; r < enc.row_count; ++r) {
    row_pk.reset();
    for (std::uint32_t j = 0; j < fam.n_pred; ++j) {
      if (!options.use_tags) {
        for (std::size_t s = first_state[j]; s < first_state[j + 1]; ++s) {
          KeyState& ks = states[s];
          if (attempt(r, j, ks)) {
            ++ks.count;
            ++result.counts[ks.j][ks.index];
            break;
          }
          ++st.false_positives;
        }
        continue;
      }
      if (net.empty()) break;
      probe.j = j;
      std::memcpy(probe.tag.data(), fam.tag(r, j).data(), L);
      auto it = net.find(probe);
      if (it == net.end()) continue;
      candidates = it->second;
      for (std::uint32_t s : candidates) {
        KeyState& ks = states[s];
        if (!attempt(r, j, ks)) {
          ++st.false_positives;
          continue;
        }
        auto& bucket = net[ks.net];
        bucket.erase(std::find(bucket.begin(), bucket.end(), s));
        if (bucket.empty()) net.erase(ks.net);
        ++ks.count;
        ++result.counts[ks.j][ks.index];
        next_expected(ks);
        net[ks.net].push_back(s);
        break;
      }
    }
  }
  return result;
}

}  // namespace edl::backend
