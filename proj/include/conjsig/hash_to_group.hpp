#pragma once

// Hash from byte strings into the platform group:
//
//   D = SHA-256(domain_tag || message || f(y))
//   stream = SHA-256(D || be32(0)) || SHA-256(D || be32(1)) || ...
//
// Each output coordinate with half-width b consumes ceil(bits(2b)/8) + 16
// stream bytes, read as a big-endian integer u, and becomes (u mod (2b+1)) - b.
// The 16 extra bytes hold the reduction bias below 2^-128.

#include "conjsig/bytes.hpp"
#include "conjsig/platform_group.hpp"
#include "conjsig/sha256.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace conjsig {

enum class DigestAlgorithm : std::uint8_t { Sha256 = 0x01 };

struct HashParams {
  DigestAlgorithm digest_algorithm = DigestAlgorithm::Sha256;
  mpz_class exponent_bound;  // translation coordinates land in [-exponent_bound, exponent_bound]
  mpz_class shift_bound;     // shift coordinate lands in [-shift_bound, shift_bound]
  Bytes domain_tag;

  void validate() const {
    if (digest_algorithm != DigestAlgorithm::Sha256) throw std::invalid_argument("HashParams: unsupported digest");
    if (exponent_bound < 2) throw std::invalid_argument("HashParams: exponent_bound must be at least 2");
    if (shift_bound < 1) throw std::invalid_argument("HashParams: shift_bound must be at least 1");
    if (domain_tag.empty()) throw std::invalid_argument("HashParams: domain_tag must be nonempty");
  }

  Bytes encode_fields() const {
    Bytes out;
    const std::uint8_t alg = static_cast<std::uint8_t>(digest_algorithm);
    put_record(out, ByteView(&alg, 1));
    put_integer_record(out, exponent_bound);
    put_integer_record(out, shift_bound);
    put_record(out, domain_tag);
    return out;
  }

  static HashParams decode_fields(ByteReader& in) {
    HashParams p;
    auto alg = in.record();
    if (alg.size() != 1 || alg[0] != static_cast<std::uint8_t>(DigestAlgorithm::Sha256)) in.fail(DecodeErrorKind::InvalidField);
    p.exponent_bound = in.integer_record();
    p.shift_bound = in.integer_record();
    auto tag = in.record();
    p.domain_tag.assign(tag.begin(), tag.end());
    try {
      p.validate();
    } catch (const std::invalid_argument&) {
      in.fail(DecodeErrorKind::InvalidField);
    }
    return p;
  }

  friend bool operator==(const HashParams&, const HashParams&) = default;
};

namespace detail {

class DigestStream {
 public:
  explicit DigestStream(ByteView seed) : seed_(seed.begin(), seed.end()) {}

  void read(std::span<std::uint8_t> out) {
    for (auto& b : out) {
      if (pos_ == block_.size()) {
        Bytes input = seed_;
        put_u32(input, counter_++);
        block_ = sha256(input);
        pos_ = 0;
      }
      b = block_[pos_++];
    }
  }

 private:
  Bytes seed_;
  Digest block_{};
  std::size_t pos_ = 32;
  std::uint32_t counter_ = 0;
};

}  // namespace detail

/// One coordinate per entry of `bounds`, coordinate i in [-bounds[i], bounds[i]].
inline IntVector expand_digest(ByteView digest, std::span<const mpz_class> bounds) {
  if (digest.empty()) throw std::invalid_argument("expand_digest: empty digest");
  detail::DigestStream stream(digest);
  IntVector out;
  out.reserve(bounds.size());
  for (const auto& bound : bounds) {
    if (bound < 0) throw std::invalid_argument("expand_digest: negative bound");
    const mpz_class width = 2 * bound + 1;
    const std::size_t nbytes = (mpz_sizeinbase(mpz_class(width - 1).get_mpz_t(), 2) + 7) / 8 + 16;
    Bytes chunk(nbytes);
    stream.read(chunk);
    mpz_class u = from_magnitude_bytes(chunk);
    mpz_class r;
    mpz_mod(r.get_mpz_t(), u.get_mpz_t(), width.get_mpz_t());
    out.push_back(r - bound);
  }
  return out;
}

inline IntVector expand_digest(ByteView digest, std::size_t count, const mpz_class& bound) {
  std::vector<mpz_class> bounds(count, bound);
  return expand_digest(digest, bounds);
}

/// H(m || f(y)). `y_encoded` must be a valid element encoding for `desc`.
inline GroupElement hash_to_group(ByteView message, ByteView y_encoded, const PlatformDescriptor& desc,
                                  const HashParams& params) {
  (void)decode(y_encoded, desc);
  Digest d = Sha256{}.update(params.domain_tag).update(message).update(y_encoded).finish();
  std::vector<mpz_class> bounds(desc.dimension(), params.exponent_bound);
  bounds.push_back(params.shift_bound);
  IntVector coords = expand_digest(d, bounds);
  GroupElement h;
  h.shift = std::move(coords.back());
  coords.pop_back();
  h.translation = std::move(coords);
  return h;
}

}  // namespace conjsig
