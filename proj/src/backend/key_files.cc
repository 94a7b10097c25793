// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <cstring>

#include "edl/backend.h"

namespace edl::backend {
namespace {

constexpr char kKeyMagic[4] = {'M', 'K', 'E', 'Y'};
constexpr char kViewMagic[4] = {'M', 'V', 'K', 'S'};
constexpr std::uint16_t kKeyVersion = 1;

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}
void put_u32(Bytes& out, std::uint64_t v) {
  if (v > 0xffffffffu) throw FormatError("value exceeds u32 field");
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_str16(Bytes& out, std::string_view s) {
  if (s.size() > 0xffff) throw FormatError("string too long");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

class Cursor {
 public:
  explicit Cursor(ByteView in) : in_(in) {}
  ByteView take(std::size_t n) {
    if (in_.size() - pos_ < n) throw FormatError("truncated key file");
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
  void expect_magic(const char magic[4], const char* what) {
    if (std::memcmp(take(4).data(), magic, 4) != 0) {
      throw FormatError(std::string("not a ") + what + " file");
    }
    if (u16() != kKeyVersion) throw FormatError(std::string("unsupported ") + what + " version");
  }
  void expect_done() const {
    if (pos_ != in_.size()) throw FormatError("trailing bytes in key file");
  }

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace

Bytes serialize_key(const KeyBlob& blob) {
  Bytes out(kKeyMagic, kKeyMagic + 4);
  put_u16(out, kKeyVersion);
  out.push_back(static_cast<std::uint8_t>(blob.kind));
  if (blob.kind == KeyKind::kFamily) put_str16(out, blob.family_id);
  out.insert(out.end(), blob.key.block().begin(), blob.key.block().end());
  return out;
}

KeyBlob parse_key(ByteView bytes) {
  Cursor in(bytes);
  in.expect_magic(kKeyMagic, "key");
  KeyBlob blob;
  const std::uint8_t kind = in.u8();
  if (kind != static_cast<std::uint8_t>(KeyKind::kTable) &&
      kind != static_cast<std::uint8_t>(KeyKind::kFamily)) {
    throw FormatError("unknown key kind");
  }
  blob.kind = static_cast<KeyKind>(kind);
  if (blob.kind == KeyKind::kFamily) blob.family_id = in.str16();
  blob.key = SymKey::from_bytes(in.take(crypto::kKeySize));
  in.expect_done();
  return blob;
}

Bytes serialize_view_keys(const ViewKeySet& keys) {
  Bytes out(kViewMagic, kViewMagic + 4);
  put_u16(out, kKeyVersion);
  put_str16(out, keys.family_id);
  out.push_back(keys.tag_length);
  put_u32(out, keys.keys.size());
  for (const auto& pred : keys.keys) {
    put_u32(out, pred.size());
    for (const ViewKeySet::Entry& e : pred) {
      put_u32(out, e.value.size());
      out.insert(out.end(), e.value.begin(), e.value.end());
      out.insert(out.end(), e.key.block().begin(), e.key.block().end());
    }
  }
  return out;
}

ViewKeySet parse_view_keys(ByteView bytes) {
  Cursor in(bytes);
  in.expect_magic(kViewMagic, "view key set");
  ViewKeySet keys;
  keys.family_id = in.str16();
  keys.tag_length = in.u8();
  if (keys.tag_length < 1 || keys.tag_length > 16) throw FormatError("bad tag length");
  const std::uint32_t n_pred = in.u32();
  for (std::uint32_t j = 0; j < n_pred; ++j) {
    std::vector<ViewKeySet::Entry> pred;
    const std::uint32_t n = in.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      ByteView value = in.take(in.u32());
      SymKey key = SymKey::from_bytes(in.take(crypto::kKeySize));
      pred.push_back({Bytes(value.begin(), value.end()), key});
    }
    keys.keys.push_back(std::move(pred));
  }
  in.expect_done();
  return keys;
}

Bytes key_file_bytes(ByteView file) {
  if (file.size() >= 4 && (std::memcmp(file.data(), kKeyMagic, 4) == 0 ||
                           std::memcmp(file.data(), kViewMagic, 4) == 0)) {
    return Bytes(file.begin(), file.end());
  }
  std::string hex;
  for (std::uint8_t c : file) {
    if (!std::isspace(c)) hex.push_back(static_cast<char>(c));
  }
  try {
    return from_hex(hex);
  } catch (const std::invalid_argument&) {
    throw FormatError("key file is neither a key blob nor its hex form");
  }
}

}  // namespace edl::backend
