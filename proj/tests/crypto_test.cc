// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <openssl/evp.h>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "edl/crypto.h"

namespace edl::crypto {
namespace {

Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

Block to_block(const Bytes& b) {
  Block out{};
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

// AES-128-ECB single block through OpenSSL, used as the reference.
Block openssl_aes(const Bytes& key, const Block& in) {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr);
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  Block out{};
  int len = 0;
  EVP_EncryptUpdate(ctx, out.data(), &len, in.data(), 16);
  EVP_CIPHER_CTX_free(ctx);
  return out;
}

// AES-128-CTR with a full 128-bit big-endian counter through OpenSSL.
Bytes openssl_ctr(const Bytes& key, const Block& iv, const Bytes& msg) {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  EVP_EncryptInit_ex(ctx, EVP_aes_128_ctr(), nullptr, key.data(), iv.data());
  Bytes out(msg.size());
  int len = 0;
  EVP_EncryptUpdate(ctx, out.data(), &len, msg.data(), static_cast<int>(msg.size()));
  EVP_CIPHER_CTX_free(ctx);
  return out;
}

// Decodes be32(count) then be32(len) || bytes; nullopt on any slack.
std::optional<std::vector<Bytes>> decode_concat(const Bytes& in) {
  std::size_t pos = 0;
  auto read32 = [&](std::uint32_t& v) {
    if (pos + 4 > in.size()) return false;
    v = (std::uint32_t{in[pos]} << 24) | (std::uint32_t{in[pos + 1]} << 16) |
        (std::uint32_t{in[pos + 2]} << 8) | in[pos + 3];
    pos += 4;
    return true;
  };
  std::uint32_t count = 0;
  if (!read32(count)) return std::nullopt;
  std::vector<Bytes> parts;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t len = 0;
    if (!read32(len) || pos + len > in.size()) return std::nullopt;
    parts.emplace_back(in.begin() + static_cast<long>(pos), in.begin() + static_cast<long>(pos + len));
    pos += len;
  }
  if (pos != in.size()) return std::nullopt;
  return parts;
}

TEST(Aes, Fips197Vector) {
  const SymKey key = SymKey::from_hex("000102030405060708090a0b0c0d0e0f");
  const Block pt = to_block(from_hex("00112233445566778899aabbccddeeff"));
  EXPECT_EQ(to_hex(Aes128(key).encrypt(pt)), "69c4e0d86a7b0430d8cdb78070b4c55a");
  EXPECT_EQ(to_hex(prf_block(key, pt)), "69c4e0d86a7b0430d8cdb78070b4c55a");
}

TEST(Aes, MatchesOpenSslOnRandomInputs) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const Bytes key = random_bytes(rng, 16);
    const Block in = to_block(random_bytes(rng, 16));
    EXPECT_EQ(Aes128(SymKey::from_bytes(key)).encrypt(in), openssl_aes(key, in));
  }
}

TEST(Aes, PortablePathMatchesDispatchedPath) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const Bytes key = random_bytes(rng, 16);
    const Block in = to_block(random_bytes(rng, 16));
    std::uint8_t rk[176];
    detail::aes128_expand_portable(key.data(), rk);
    Block out{};
    detail::aes128_encrypt_portable(rk, in.data(), out.data());
    EXPECT_EQ(out, Aes128(SymKey::from_bytes(key)).encrypt(in));
  }
}

TEST(Aes, BatchMatchesSingleBlocks) {
  std::mt19937_64 rng(9);
  const Aes128 aes(SymKey::from_bytes(random_bytes(rng, 16)));
  std::vector<Block> in(37), out(37);
  for (auto& b : in) b = to_block(random_bytes(rng, 16));
  aes.encrypt_blocks(in.data(), out.data(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(out[i], aes.encrypt(in[i]));
}

TEST(Prf, VariableInputIsCbcMacOverLengthPrefix) {
  // Recompute CBC-MAC over be64(len) || msg || zero pad by hand.
  std::mt19937_64 rng(10);
  for (std::size_t len : {0u, 1u, 15u, 16u, 17u, 40u}) {
    const Bytes key = random_bytes(rng, 16);
    const Bytes msg = random_bytes(rng, len);
    Bytes padded(8);
    for (int i = 0; i < 8; ++i) padded[i] = static_cast<std::uint8_t>(std::uint64_t{len} >> (56 - 8 * i));
    padded.insert(padded.end(), msg.begin(), msg.end());
    padded.resize((padded.size() + 15) / 16 * 16, 0);
    Block state{};
    for (std::size_t off = 0; off < padded.size(); off += 16) {
      for (int i = 0; i < 16; ++i) state[i] ^= padded[off + i];
      state = openssl_aes(key, state);
    }
    EXPECT_EQ(prf_var(SymKey::from_bytes(key), msg).hex(), to_hex(state)) << "len " << len;
  }
}

TEST(Prf, PackingIsBigEndianRightAligned) {
  EXPECT_EQ(to_hex(pack_u32(0x01020304)), "00000000000000000000000001020304");
  EXPECT_EQ(to_hex(pack_u32_pair(7, 9)), "00000000000000000000000700000009");
}

TEST(Enc, CounterModeMatchesOpenSsl) {
  std::mt19937_64 rng(11);
  const Bytes key = random_bytes(rng, 16);
  const NoncePosition pos{NonceDomain::kSelectionEntry, 3, 5, 2};
  const Block iv = pos.counter_block();
  EXPECT_EQ(iv[0], 0x03);
  EXPECT_EQ(iv[13], 0);
  EXPECT_EQ(iv[14], 0);
  EXPECT_EQ(iv[15], 0);
  for (std::size_t len : {0u, 5u, 16u, 33u, 1000u}) {
    const Bytes msg = random_bytes(rng, len);
    const Bytes ct = enc(SymKey::from_bytes(key), pos, msg);
    EXPECT_EQ(ct, openssl_ctr(key, iv, msg));
    EXPECT_EQ(dec(SymKey::from_bytes(key), pos, ct), msg);
  }
}

TEST(Enc, DistinctPositionsGiveDistinctStreams) {
  const SymKey key = SymKey::from_hex("2b7e151628aed2a6abf7158809cf4f3c");
  const Bytes zeros(32, 0);
  const Bytes a = enc(key, {NonceDomain::kProjectionBlob, 1, 1, 0}, zeros);
  const Bytes b = enc(key, {NonceDomain::kProjectionZeroCheck, 1, 1, 0}, zeros);
  const Bytes c = enc(key, {NonceDomain::kProjectionBlob, 1, 2, 0}, zeros);
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
}

TEST(Ote, ShortMessagesArePadXor) {
  const SymKey key = SymKey::from_hex("000102030405060708090a0b0c0d0e0f");
  const Bytes msg = from_hex("0102030405");
  const Bytes ct = ote_enc(key, msg);
  ASSERT_EQ(ct.size(), msg.size());
  for (std::size_t i = 0; i < msg.size(); ++i) EXPECT_EQ(ct[i], msg[i] ^ key.bytes()[i]);
  EXPECT_EQ(ote_dec(key, ct), msg);
}

TEST(Ote, LongMessagesAreZeroNonceCtr) {
  std::mt19937_64 rng(12);
  const Bytes key = random_bytes(rng, 16);
  const Bytes msg = random_bytes(rng, 100);
  EXPECT_EQ(ote_enc(SymKey::from_bytes(key), msg), openssl_ctr(key, Block{}, msg));
}

TEST(SecureConcat, LayoutIsCountThenLengthPrefixedParts) {
  const Bytes a = from_hex("aa");
  const Bytes empty;
  EXPECT_EQ(to_hex(secure_concat({ByteView(a), ByteView(empty)})),
            "0000000200000001aa00000000");
}

TEST(SecureConcat, InjectiveOnRandomLists) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Bytes> parts(rng() % 5);
    for (auto& p : parts) p = random_bytes(rng, rng() % 6);
    std::vector<ByteView> views(parts.begin(), parts.end());
    const auto decoded = decode_concat(secure_concat(views));
    ASSERT_TRUE(decoded.has_value());
    EXPECT_EQ(*decoded, parts);
  }
}

TEST(Hash, Sha256KnownAnswers) {
  EXPECT_EQ(to_hex(hash_string({})),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(to_hex(hash_string(as_bytes("abc"))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Prf, OutputBytesLookUniform) {
  // Chi-square over byte values of 4096 PRF outputs (65536 samples, 255 dof).
  const SymKey key = SymKey::from_hex("0f0e0d0c0b0a09080706050403020100");
  std::array<double, 256> counts{};
  for (std::uint32_t i = 0; i < 4096; ++i) {
    const SymKey out = prf(key, pack_u32(i));
    for (std::uint8_t b : out.bytes()) counts[b] += 1;
  }
  const double expected = 4096.0 * 16 / 256;
  double chi2 = 0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // p = 0.0001 critical value for 255 degrees of freedom is about 347.
  EXPECT_LT(chi2, 347.0);
}

TEST(Hex, RoundTripsAndRejectsJunk) {
  EXPECT_EQ(to_hex(from_hex("00ff10")), "00ff10");
  EXPECT_ANY_THROW(from_hex("abc"));
  EXPECT_ANY_THROW(from_hex("zz"));
  EXPECT_ANY_THROW(SymKey::from_hex("00"));
}

TEST(SymKey, RandomKeysDiffer) { EXPECT_NE(SymKey::random(), SymKey::random()); }

}  // namespace
}  // namespace edl::crypto
