#pragma once

// Deterministic random bit generator: SHA-256 in counter mode over a 32-byte
// seed. Output is a pure function of the seed on every platform, which is
// what makes seeded key generation and signing reproducible.

#include "conjsig/bytes.hpp"
#include "conjsig/sha256.hpp"

#include <openssl/rand.h>

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace conjsig {

class Drbg {
 public:
  using result_type = std::uint64_t;

  explicit Drbg(const Digest& seed) : seed_(seed) {}

  static Drbg from_u64(std::uint64_t seed) {
    Bytes material = to_bytes("conjsig/drbg/u64");
    put_u64(material, seed);
    return Drbg(sha256(material));
  }

  static Drbg from_os_entropy() {
    Digest seed{};
    if (RAND_bytes(seed.data(), static_cast<int>(seed.size())) != 1)
      throw std::runtime_error("operating system entropy unavailable");
    return Drbg(seed);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | next_byte();
    return v;
  }

  void fill(std::span<std::uint8_t> out) {
    for (auto& b : out) b = next_byte();
  }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }

  // Independent child stream, used so that e.g. key generation and signing
  // draw from separate sequences under one user seed.
  Drbg fork(std::string_view label) {
    Bytes material = to_bytes(label);
    append(material, bytes(32));
    return Drbg(sha256(material));
  }

 private:
  std::uint8_t next_byte() {
    if (pos_ == block_.size()) refill();
    return block_[pos_++];
  }

  void refill() {
    Bytes input(seed_.begin(), seed_.end());
    put_u64(input, counter_++);
    block_ = sha256(input);
    pos_ = 0;
  }

  Digest seed_;
  Digest block_{};
  std::size_t pos_ = 32;
  std::uint64_t counter_ = 0;
};

/// Uniform integer in [0, bound) by rejection sampling on whole bytes.
inline mpz_class uniform_below(Drbg& rng, const mpz_class& bound) {
  if (sgn(bound) <= 0) throw std::invalid_argument("uniform_below: bound must be positive");
  const std::size_t bits = mpz_sizeinbase(mpz_class(bound - 1).get_mpz_t(), 2);
  const std::size_t nbytes = (bits + 7) / 8;
  const unsigned excess = static_cast<unsigned>(nbytes * 8 - bits);
  Bytes buf(nbytes);
  for (;;) {
    rng.fill(buf);
    if (!buf.empty()) buf[0] &= static_cast<std::uint8_t>(0xff >> excess);
    mpz_class v = from_magnitude_bytes(buf);
    if (v < bound) return v;
  }
}

/// Uniform integer in [-half_width, half_width].
inline mpz_class uniform_symmetric(Drbg& rng, const mpz_class& half_width) {
  return uniform_below(rng, 2 * half_width + 1) - half_width;
}

}  // namespace conjsig
