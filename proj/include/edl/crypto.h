// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edl {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_hex(ByteView bytes);
// Throws std::invalid_argument on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

namespace crypto {

inline constexpr std::size_t kBlockSize = 16;
inline constexpr std::size_t kKeySize = 16;

using Block = std::array<std::uint8_t, kBlockSize>;

/// Overwrites memory in a way the optimizer may not elide.
void secure_wipe(void* data, std::size_t len);

/// A 128-bit symmetric key. Wiped on destruction.
class SymKey {
 public:
  SymKey() : bytes_{} {}
  explicit SymKey(const Block& bytes) : bytes_(bytes) {}
  SymKey(const SymKey&) = default;
  SymKey& operator=(const SymKey&) = default;
  ~SymKey() { secure_wipe(bytes_.data(), bytes_.size()); }

  // Throws std::invalid_argument unless exactly 16 bytes.
  static SymKey from_bytes(ByteView bytes);
  static SymKey from_hex(std::string_view hex);
  // Uniformly random, drawn from the OS CSPRNG.
  static SymKey random();

  const Block& block() const { return bytes_; }
  ByteView bytes() const { return bytes_; }
  std::string hex() const { return to_hex(bytes_); }

  friend bool operator==(const SymKey& a, const SymKey& b) {
    return a.bytes_ == b.bytes_;
  }

 private:
  Block bytes_;
};

struct SymKeyHash {
  std::size_t operator()(const SymKey& k) const noexcept;
};

/// Prepared AES-128 encryption schedule. Uses AES-NI when the CPU has it.
class Aes128 {
 public:
  explicit Aes128(const SymKey& key);
  Aes128(const Aes128&) = default;
  Aes128& operator=(const Aes128&) = default;
  ~Aes128() { secure_wipe(round_keys_.data(), round_keys_.size()); }

  Block encrypt(const Block& in) const;
  void encrypt_blocks(const Block* in, Block* out, std::size_t n) const;
  // XORs `in` with the keystream E(ctr), E(ctr+1), ... into `out`. The counter
  // is the trailing `counter_bytes` of the block, big-endian; the prefix is
  // fixed. `in` and `out` may alias.
  void ctr_xor(const Block& initial_counter, std::size_t counter_bytes,
               ByteView in, std::uint8_t* out) const;

 private:
  alignas(16) std::array<std::uint8_t, 176> round_keys_;
};

namespace detail {
// Portable table-based AES-128, exposed so tests can pin it against the
// accelerated path and an external implementation.
void aes128_expand_portable(const std::uint8_t key[16], std::uint8_t rk[176]);
void aes128_encrypt_portable(const std::uint8_t rk[176], const std::uint8_t in[16],
                             std::uint8_t out[16]);
bool aesni_available();
}  // namespace detail

/// Single-block PRF: AES-128 under `key`.
Block prf_block(const SymKey& key, const Block& input);
inline SymKey prf(const Aes128& prepared, const Block& input) {
  return SymKey(prepared.encrypt(input));
}
inline SymKey prf(const SymKey& key, const Block& input) {
  return SymKey(prf_block(key, input));
}

/// Variable-input PRF: CBC-MAC over AES-128 of be64(len) || input || zero pad.
SymKey prf_var(const SymKey& key, ByteView input);
SymKey prf_var(const Aes128& prepared, ByteView input);

/// Fixed-width PRF inputs: a value right-aligned as big-endian u32, or a pair
/// occupying bytes 8..11 and 12..15.
Block pack_u32(std::uint32_t v);
Block pack_u32_pair(std::uint32_t hi, std::uint32_t lo);

enum class NonceDomain : std::uint8_t {
  kProjectionBlob = 0x01,
  kProjectionZeroCheck = 0x02,
  kSelectionEntry = 0x03,
  kCell = 0x04,  // reserved; cells use OTE, which needs no nonce
};

/// Deterministic counter-mode nonce derived from a cell/entry position.
struct NoncePosition {
  NonceDomain domain;
  std::uint32_t partition = 0;
  std::uint32_t row = 0;
  std::uint32_t slot = 0;

  /// 13-byte big-endian nonce followed by a 3-byte block counter at zero.
  Block counter_block() const;
};

/// Maximum message length for enc/dec: the 24-bit block counter space.
inline constexpr std::size_t kMaxEncLength = (std::size_t{1} << 24) * kBlockSize;

Bytes enc(const SymKey& key, const NoncePosition& pos, ByteView msg);
Bytes enc(const Aes128& key, const NoncePosition& pos, ByteView msg);
Bytes dec(const SymKey& key, const NoncePosition& pos, ByteView ct);
Bytes dec(const Aes128& key, const NoncePosition& pos, ByteView ct);
// In-place variants over caller-provided storage of msg.size() bytes.
void enc_into(const Aes128& key, const NoncePosition& pos, ByteView msg,
              std::uint8_t* out);

/// One-time encryption: pad for <= 16 bytes, zero-nonce CTR otherwise.
Bytes ote_enc(const SymKey& key, ByteView msg);
Bytes ote_dec(const SymKey& key, ByteView ct);
void ote_xor_into(const SymKey& key, ByteView in, std::uint8_t* out);

/// Injective list encoding: be32(count) then be32(len) || bytes per part.
Bytes secure_concat(std::span<const ByteView> parts);
Bytes secure_concat(std::initializer_list<ByteView> parts);
void secure_concat_append(Bytes& out, std::span<const ByteView> parts);

using Digest256 = std::array<std::uint8_t, 32>;
/// SHA-256 digest, read as a big-endian 256-bit integer.
Digest256 hash_string(ByteView s);

}  // namespace crypto
}  // namespace edl
