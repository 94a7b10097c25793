// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <openssl/crypto.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <cstring>
#include <stdexcept>

#include "edl/crypto.h"

namespace edl {

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

namespace crypto {

void secure_wipe(void* data, std::size_t len) { OPENSSL_cleanse(data, len); }

SymKey SymKey::from_bytes(ByteView bytes) {
  if (bytes.size() != kKeySize) {
    throw std::invalid_argument("symmetric key must be exactly 16 bytes");
  }
  Block b;
  std::memcpy(b.data(), bytes.data(), kKeySize);
  return SymKey(b);
}

SymKey SymKey::from_hex(std::string_view hex) {
  Bytes raw = edl::from_hex(hex);
  SymKey k = from_bytes(raw);
  secure_wipe(raw.data(), raw.size());
  return k;
}

SymKey SymKey::random() {
  Block b;
  if (RAND_bytes(b.data(), static_cast<int>(b.size())) != 1) {
    throw std::runtime_error("system CSPRNG failure");
  }
  return SymKey(b);
}

std::size_t SymKeyHash::operator()(const SymKey& k) const noexcept {
  // Keys are pseudorandom; the leading eight bytes hash well enough.
  std::uint64_t v;
  std::memcpy(&v, k.block().data(), sizeof(v));
  return static_cast<std::size_t>(v);
}

Block prf_block(const SymKey& key, const Block& input) {
  return Aes128(key).encrypt(input);
}

SymKey prf_var(const Aes128& prepared, ByteView input) {
  Block state{};
  const std::uint64_t len = input.size();
  // First block: 8-byte length prefix and up to 8 message bytes.
  Block first{};
  for (int i = 0; i < 8; ++i) first[i] = static_cast<std::uint8_t>(len >> (56 - 8 * i));
  std::size_t consumed = std::min<std::size_t>(8, input.size());
  std::memcpy(first.data() + 8, input.data(), consumed);
  state = prepared.encrypt(first);
  while (consumed < input.size()) {
    const std::size_t chunk = std::min(kBlockSize, input.size() - consumed);
    for (std::size_t i = 0; i < chunk; ++i) state[i] ^= input[consumed + i];
    state = prepared.encrypt(state);
    consumed += chunk;
  }
  return SymKey(state);
}

SymKey prf_var(const SymKey& key, ByteView input) { return prf_var(Aes128(key), input); }

Block pack_u32(std::uint32_t v) {
  Block b{};
  b[12] = static_cast<std::uint8_t>(v >> 24);
  b[13] = static_cast<std::uint8_t>(v >> 16);
  b[14] = static_cast<std::uint8_t>(v >> 8);
  b[15] = static_cast<std::uint8_t>(v);
  return b;
}

Block pack_u32_pair(std::uint32_t hi, std::uint32_t lo) {
  Block b = pack_u32(lo);
  b[8] = static_cast<std::uint8_t>(hi >> 24);
  b[9] = static_cast<std::uint8_t>(hi >> 16);
  b[10] = static_cast<std::uint8_t>(hi >> 8);
  b[11] = static_cast<std::uint8_t>(hi);
  return b;
}

Block NoncePosition::counter_block() const {
  Block b{};
  b[0] = static_cast<std::uint8_t>(domain);
  auto put = [&b](std::size_t at, std::uint32_t v) {
    b[at] = static_cast<std::uint8_t>(v >> 24);
    b[at + 1] = static_cast<std::uint8_t>(v >> 16);
    b[at + 2] = static_cast<std::uint8_t>(v >> 8);
    b[at + 3] = static_cast<std::uint8_t>(v);
  };
  put(1, partition);
  put(5, row);
  put(9, slot);
  return b;
}

namespace {

void check_enc_length(std::size_t n) {
  if (n > kMaxEncLength) throw std::length_error("message exceeds counter space");
}

}  // namespace

void enc_into(const Aes128& key, const NoncePosition& pos, ByteView msg, std::uint8_t* out) {
  check_enc_length(msg.size());
  key.ctr_xor(pos.counter_block(), 3, msg, out);
}

Bytes enc(const Aes128& key, const NoncePosition& pos, ByteView msg) {
  Bytes out(msg.size());
  enc_into(key, pos, msg, out.data());
  return out;
}

Bytes enc(const SymKey& key, const NoncePosition& pos, ByteView msg) {
  return enc(Aes128(key), pos, msg);
}

Bytes dec(const Aes128& key, const NoncePosition& pos, ByteView ct) {
  return enc(key, pos, ct);
}

Bytes dec(const SymKey& key, const NoncePosition& pos, ByteView ct) {
  return enc(Aes128(key), pos, ct);
}

void ote_xor_into(const SymKey& key, ByteView in, std::uint8_t* out) {
  if (in.size() <= kKeySize) {
    const Block& pad = key.block();
    for (std::size_t i = 0; i < in.size(); ++i) {
      out[i] = static_cast<std::uint8_t>(in[i] ^ pad[i]);
    }
    return;
  }
  Aes128(key).ctr_xor(Block{}, kBlockSize, in, out);
}

Bytes ote_enc(const SymKey& key, ByteView msg) {
  Bytes out(msg.size());
  ote_xor_into(key, msg, out.data());
  return out;
}

Bytes ote_dec(const SymKey& key, ByteView ct) { return ote_enc(key, ct); }

namespace {

void put_be32(Bytes& out, std::size_t v) {
  if (v > 0xffffffffu) throw std::length_error("secure_concat part exceeds 2^32 bytes");
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

void secure_concat_append(Bytes& out, std::span<const ByteView> parts) {
  put_be32(out, parts.size());
  for (ByteView p : parts) {
    put_be32(out, p.size());
    out.insert(out.end(), p.begin(), p.end());
  }
}

Bytes secure_concat(std::span<const ByteView> parts) {
  Bytes out;
  std::size_t total = 4;
  for (ByteView p : parts) total += 4 + p.size();
  out.reserve(total);
  secure_concat_append(out, parts);
  return out;
}

Bytes secure_concat(std::initializer_list<ByteView> parts) {
  return secure_concat(std::span<const ByteView>(parts.begin(), parts.size()));
}

Digest256 hash_string(ByteView s) {
  Digest256 out;
  SHA256(s.data(), s.size(), out.data());
  return out;
}

}  // namespace crypto
}  // namespace edl
