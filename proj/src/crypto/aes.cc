// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstring>

#include "edl/crypto.h"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define EDL_HAVE_X86 1
#endif

namespace edl::crypto {
namespace detail {
namespace {

constexpr std::uint8_t kSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
};

constexpr std::uint8_t kRcon[10] = {0x01, 0x02, 0x04, 0x08, 0x10,
                                    0x20, 0x40, 0x80, 0x1b, 0x36};

inline std::uint8_t xtime(std::uint8_t x) {
  return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0x00));
}

}  // namespace

void aes128_expand_portable(const std::uint8_t key[16], std::uint8_t rk[176]) {
  std::memcpy(rk, key, 16);
  for (int i = 4; i < 44; ++i) {
    std::uint8_t t[4];
    std::memcpy(t, rk + 4 * (i - 1), 4);
    if (i % 4 == 0) {
      const std::uint8_t first = t[0];
      t[0] = static_cast<std::uint8_t>(kSbox[t[1]] ^ kRcon[i / 4 - 1]);
      t[1] = kSbox[t[2]];
      t[2] = kSbox[t[3]];
      t[3] = kSbox[first];
    }
    for (int b = 0; b < 4; ++b) {
      rk[4 * i + b] = static_cast<std::uint8_t>(rk[4 * (i - 4) + b] ^ t[b]);
    }
  }
}

void aes128_encrypt_portable(const std::uint8_t rk[176], const std::uint8_t in[16],
                             std::uint8_t out[16]) {
  std::uint8_t s[16];
  for (int i = 0; i < 16; ++i) s[i] = in[i] ^ rk[i];
  for (int round = 1; round <= 10; ++round) {
    std::uint8_t t[16];
    // SubBytes + ShiftRows; state is column-major.
    for (int c = 0; c < 4; ++c) {
      for (int r = 0; r < 4; ++r) {
        t[4 * c + r] = kSbox[s[4 * ((c + r) % 4) + r]];
      }
    }
    if (round != 10) {
      for (int c = 0; c < 4; ++c) {
        std::uint8_t* col = t + 4 * c;
        const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
        const std::uint8_t all = a0 ^ a1 ^ a2 ^ a3;
        col[0] = static_cast<std::uint8_t>(a0 ^ all ^ xtime(a0 ^ a1));
        col[1] = static_cast<std::uint8_t>(a1 ^ all ^ xtime(a1 ^ a2));
        col[2] = static_cast<std::uint8_t>(a2 ^ all ^ xtime(a2 ^ a3));
        col[3] = static_cast<std::uint8_t>(a3 ^ all ^ xtime(a3 ^ a0));
      }
    }
    for (int i = 0; i < 16; ++i) s[i] = t[i] ^ rk[16 * round + i];
  }
  std::memcpy(out, s, 16);
}

#if EDL_HAVE_X86

bool aesni_available() {
  static const bool available = __builtin_cpu_supports("aes") && __builtin_cpu_supports("sse4.1");
  return available;
}

namespace {

__attribute__((target("aes,sse2"))) inline __m128i expand_step(__m128i key,
                                                               __m128i assist) {
  assist = _mm_shuffle_epi32(assist, _MM_SHUFFLE(3, 3, 3, 3));
  key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
  key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
  key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
  return _mm_xor_si128(key, assist);
}

__attribute__((target("aes,sse2"))) void expand_aesni(const std::uint8_t key[16],
                                                      std::uint8_t rk[176]) {
  __m128i k[11];
  k[0] = _mm_loadu_si128(reinterpret_cast<const __m128i*>(key));
  k[1] = expand_step(k[0], _mm_aeskeygenassist_si128(k[0], 0x01));
  k[2] = expand_step(k[1], _mm_aeskeygenassist_si128(k[1], 0x02));
  k[3] = expand_step(k[2], _mm_aeskeygenassist_si128(k[2], 0x04));
  k[4] = expand_step(k[3], _mm_aeskeygenassist_si128(k[3], 0x08));
  k[5] = expand_step(k[4], _mm_aeskeygenassist_si128(k[4], 0x10));
  k[6] = expand_step(k[5], _mm_aeskeygenassist_si128(k[5], 0x20));
  k[7] = expand_step(k[6], _mm_aeskeygenassist_si128(k[6], 0x40));
  k[8] = expand_step(k[7], _mm_aeskeygenassist_si128(k[7], 0x80));
  k[9] = expand_step(k[8], _mm_aeskeygenassist_si128(k[8], 0x1b));
  k[10] = expand_step(k[9], _mm_aeskeygenassist_si128(k[9], 0x36));
  for (int i = 0; i < 11; ++i) {
    _mm_store_si128(reinterpret_cast<__m128i*>(rk + 16 * i), k[i]);
  }
}

__attribute__((target("aes,sse2"))) void encrypt_blocks_aesni(const std::uint8_t* rk,
                                                              const Block* in, Block* out,
                                                              std::size_t n) {
  __m128i k[11];
  for (int i = 0; i < 11; ++i) {
    k[i] = _mm_load_si128(reinterpret_cast<const __m128i*>(rk + 16 * i));
  }
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m128i b0 = _mm_xor_si128(_mm_loadu_si128(reinterpret_cast<const __m128i*>(in[i].data())), k[0]);
    __m128i b1 = _mm_xor_si128(_mm_loadu_si128(reinterpret_cast<const __m128i*>(in[i + 1].data())), k[0]);
    __m128i b2 = _mm_xor_si128(_mm_loadu_si128(reinterpret_cast<const __m128i*>(in[i + 2].data())), k[0]);
    __m128i b3 = _mm_xor_si128(_mm_loadu_si128(reinterpret_cast<const __m128i*>(in[i + 3].data())), k[0]);
    for (int r = 1; r < 10; ++r) {
      b0 = _mm_aesenc_si128(b0, k[r]);
      b1 = _mm_aesenc_si128(b1, k[r]);
      b2 = _mm_aesenc_si128(b2, k[r]);
      b3 = _mm_aesenc_si128(b3, k[r]);
    }
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out[i].data()), _mm_aesenclast_si128(b0, k[10]));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out[i + 1].data()), _mm_aesenclast_si128(b1, k[10]));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out[i + 2].data()), _mm_aesenclast_si128(b2, k[10]));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out[i + 3].data()), _mm_aesenclast_si128(b3, k[10]));
  }
  for (; i < n; ++i) {
    __m128i b = _mm_xor_si128(_mm_loadu_si128(reinterpret_cast<const __m128i*>(in[i].data())), k[0]);
    for (int r = 1; r < 10; ++r) b = _mm_aesenc_si128(b, k[r]);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out[i].data()), _mm_aesenclast_si128(b, k[10]));
  }
}

}  // namespace

#else

bool aesni_available() { return false; }

#endif

}  // namespace detail

Aes128::Aes128(const SymKey& key) {
#if EDL_HAVE_X86
  if (detail::aesni_available()) {
    detail::expand_aesni(key.block().data(), round_keys_.data());
    return;
  }
#endif
  detail::aes128_expand_portable(key.block().data(), round_keys_.data());
}

Block Aes128::encrypt(const Block& in) const {
  Block out;
  encrypt_blocks(&in, &out, 1);
  return out;
}

void Aes128::encrypt_blocks(const Block* in, Block* out, std::size_t n) const {
#if EDL_HAVE_X86
  if (detail::aesni_available()) {
    detail::encrypt_blocks_aesni(round_keys_.data(), in, out, n);
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) {
    detail::aes128_encrypt_portable(round_keys_.data(), in[i].data(), out[i].data());
  }
}

void Aes128::ctr_xor(const Block& initial_counter, std::size_t counter_bytes,
                     ByteView in, std::uint8_t* out) const {
  constexpr std::size_t kBatch = 8;
  Block counters[kBatch];
  Block stream[kBatch];
  Block ctr = initial_counter;
  std::size_t done = 0;
  while (done < in.size()) {
    const std::size_t remaining_blocks = (in.size() - done + kBlockSize - 1) / kBlockSize;
    const std::size_t n = remaining_blocks < kBatch ? remaining_blocks : kBatch;
    for (std::size_t i = 0; i < n; ++i) {
      counters[i] = ctr;
      // Big-endian increment of the trailing counter bytes.
      for (std::size_t b = 0; b < counter_bytes; ++b) {
        std::uint8_t& byte = ctr[kBlockSize - 1 - b];
        if (++byte != 0) break;
      }
    }
    encrypt_blocks(counters, stream, n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t chunk = std::min(kBlockSize, in.size() - done);
      for (std::size_t b = 0; b < chunk; ++b) {
        out[done + b] = static_cast<std::uint8_t>(in[done + b] ^ stream[i][b]);
      }
      done += chunk;
    }
  }
  secure_wipe(stream, sizeof(stream));
}

}  // namespace edl::crypto
