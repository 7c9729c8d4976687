#pragma once

// Byte strings, hex, big-endian framing and the minimal two's-complement
// integer codec shared by every wire format in the library.

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conjsig {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline void append(Bytes& out, ByteView more) { out.insert(out.end(), more.begin(), more.end()); }

inline std::string to_hex(ByteView data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

inline Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  int hi = -1;
  for (char c : hex) {
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    int v = nibble(c);
    if (v < 0) throw std::invalid_argument("from_hex: not a hex digit");
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<std::uint8_t>(hi << 4 | v));
      hi = -1;
    }
  }
  if (hi >= 0) throw std::invalid_argument("from_hex: odd number of digits");
  return out;
}

inline void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

inline void put_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

// Magnitude of a non-negative integer as big-endian bytes; zero gives an empty string.
inline Bytes magnitude_bytes(const mpz_class& v) {
  if (sgn(v) == 0) return {};
  Bytes out((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
  std::size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(written);
  return out;
}

inline mpz_class from_magnitude_bytes(ByteView data) {
  mpz_class v;
  if (!data.empty()) mpz_import(v.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
  return v;
}

// Minimal big-endian two's complement. Zero encodes as the empty string.
inline Bytes encode_integer(const mpz_class& v) {
  if (sgn(v) == 0) return {};
  if (sgn(v) > 0) {
    Bytes mag = magnitude_bytes(v);
    if (mag.front() & 0x80) mag.insert(mag.begin(), 0x00);
    return mag;
  }
  mpz_class m = -v;
  std::size_t len = (mpz_sizeinbase(m.get_mpz_t(), 2) + 7) / 8;
  mpz_class modulus = mpz_class(1) << (8 * len);
  mpz_class twos = modulus - m;
  // Sign bit must be set; otherwise one more byte is needed (e.g. -129).
  if (mpz_tstbit(twos.get_mpz_t(), 8 * len - 1) == 0) {
    ++len;
    twos = (mpz_class(1) << (8 * len)) - m;
  }
  Bytes out(len, 0);
  Bytes mag = magnitude_bytes(twos);
  std::copy(mag.begin(), mag.end(), out.begin() + static_cast<std::ptrdiff_t>(len - mag.size()));
  return out;
}

inline bool is_minimal_integer_encoding(ByteView data) {
  if (data.empty()) return true;
  if (data.size() == 1) return data[0] != 0x00;
  if (data[0] == 0x00 && !(data[1] & 0x80)) return false;
  if (data[0] == 0xff && (data[1] & 0x80)) return false;
  return true;
}

inline mpz_class decode_integer(ByteView data) {
  mpz_class v = from_magnitude_bytes(data);
  if (!data.empty() && (data[0] & 0x80)) v -= mpz_class(1) << (8 * data.size());
  return v;
}

enum class DecodeErrorKind {
  BadMagic,
  UnsupportedVersion,
  MalformedLength,
  TrailingBytes,
  DimensionMismatch,
  NonCanonicalInteger,
  InvalidField,
};

inline const char* to_string(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::BadMagic: return "bad magic";
    case DecodeErrorKind::UnsupportedVersion: return "unsupported version";
    case DecodeErrorKind::MalformedLength: return "malformed length prefix";
    case DecodeErrorKind::TrailingBytes: return "trailing bytes";
    case DecodeErrorKind::DimensionMismatch: return "dimension mismatch";
    case DecodeErrorKind::NonCanonicalInteger: return "non-canonical integer";
    case DecodeErrorKind::InvalidField: return "invalid field";
  }
  return "unknown";
}

class DecodeError : public std::runtime_error {
 public:
  DecodeError(DecodeErrorKind kind, const std::string& where)
      : std::runtime_error(where + ": " + to_string(kind)), kind_(kind) {}
  DecodeErrorKind kind() const noexcept { return kind_; }

 private:
  DecodeErrorKind kind_;
};

// Cursor over an input buffer. Every read is bounds checked and reports
// MalformedLength when the buffer runs short.
class ByteReader {
 public:
  ByteReader(ByteView data, std::string context) : data_(data), context_(std::move(context)) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool done() const noexcept { return pos_ == data_.size(); }

  [[noreturn]] void fail(DecodeErrorKind kind) const { throw DecodeError(kind, context_); }

  ByteView take(std::size_t n) {
    if (n > remaining()) fail(DecodeErrorKind::MalformedLength);
    ByteView out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint8_t u8() { return take(1)[0]; }

  std::uint16_t u16() {
    auto b = take(2);
    return static_cast<std::uint16_t>(b[0] << 8 | b[1]);
  }

  std::uint32_t u32() {
    auto b = take(4);
    return std::uint32_t{b[0]} << 24 | std::uint32_t{b[1]} << 16 | std::uint32_t{b[2]} << 8 | b[3];
  }

  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (auto x : b) v = v << 8 | x;
    return v;
  }

  ByteView record() { return take(u32()); }

  mpz_class integer_record() {
    auto body = record();
    if (!is_minimal_integer_encoding(body)) fail(DecodeErrorKind::NonCanonicalInteger);
    return decode_integer(body);
  }

  void expect_done() const {
    if (!done()) fail(DecodeErrorKind::TrailingBytes);
  }

 private:
  ByteView data_;
  std::string context_;
  std::size_t pos_ = 0;
};

inline void put_record(Bytes& out, ByteView body) {
  if (body.size() > 0xffffffffu) throw std::length_error("record longer than 2^32-1 bytes");
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  append(out, body);
}

inline void put_integer_record(Bytes& out, const mpz_class& v) { put_record(out, encode_integer(v)); }

}  // namespace conjsig
