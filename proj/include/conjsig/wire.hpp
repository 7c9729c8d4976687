#pragma once

// Key and signature files.
//
//   "NS" u8 record_type u8 version, then length-prefixed fields.
//
// record_type 0x01 public key:   key_id, descriptor{...}, hash_params{...}, f(x)
// record_type 0x02 private key:  warning, key_id, descriptor{...}, f(g), f(s), n,
//                                factorization{(p, e)*}, policy{...}
// record_type 0x03 signature:    f(y), f(alpha), n_j
//
// Nested groups {...} are a single record whose body is itself a sequence of
// records. Integers are minimal big-endian two's complement.

#include "conjsig/bytes.hpp"
#include "conjsig/keys.hpp"
#include "conjsig/sha256.hpp"

#include <algorithm>
#include <string_view>

namespace conjsig {

inline constexpr std::uint8_t kFileMagic[2] = {0x4E, 0x53};
inline constexpr std::uint8_t kFileVersion = 0x01;

enum class RecordType : std::uint8_t { PublicKey = 0x01, PrivateKey = 0x02, Signature = 0x03 };

inline constexpr std::string_view kPrivateKeyWarning =
    "CONJSIG PRIVATE KEY -- UNENCRYPTED -- DO NOT SHARE OR PUBLISH THIS FILE";

namespace detail {

inline Bytes file_header(RecordType type) {
  return Bytes{kFileMagic[0], kFileMagic[1], static_cast<std::uint8_t>(type), kFileVersion};
}

inline ByteReader open_file(ByteView data, RecordType type, const char* what) {
  ByteReader in(data, what);
  auto magic = in.take(2);
  if (magic[0] != kFileMagic[0] || magic[1] != kFileMagic[1]) in.fail(DecodeErrorKind::BadMagic);
  if (in.u8() != static_cast<std::uint8_t>(type)) in.fail(DecodeErrorKind::InvalidField);
  if (in.u8() != kFileVersion) in.fail(DecodeErrorKind::UnsupportedVersion);
  return in;
}

inline GroupElement element_record(ByteReader& in, const PlatformDescriptor& desc) {
  return decode(in.record(), desc);
}

inline PlatformDescriptor descriptor_record(ByteReader& in) {
  ByteReader sub(in.record(), "descriptor");
  auto d = PlatformDescriptor::decode_fields(sub);
  sub.expect_done();
  return d;
}

inline unsigned long small_unsigned(ByteReader& in) {
  mpz_class v = in.integer_record();
  if (v < 0 || !mpz_fits_ulong_p(v.get_mpz_t())) in.fail(DecodeErrorKind::InvalidField);
  return v.get_ui();
}

}  // namespace detail

inline Bytes encode_signature(const Signature& sig) {
  Bytes out = detail::file_header(RecordType::Signature);
  put_record(out, encode(sig.y));
  put_record(out, encode(sig.alpha));
  put_integer_record(out, sig.n_j);
  return out;
}

inline Signature decode_signature(ByteView data, const PlatformDescriptor& desc) {
  auto in = detail::open_file(data, RecordType::Signature, "signature");
  Signature sig;
  sig.y = detail::element_record(in, desc);
  sig.alpha = detail::element_record(in, desc);
  sig.n_j = in.integer_record();
  in.expect_done();
  return sig;
}

/// SHA-256 of the canonical signature encoding; binds ledger entries to the
/// signature that consumed them.
inline Digest signature_fingerprint(const Signature& sig) { return sha256(encode_signature(sig)); }

inline Bytes encode_public_key(const PublicKey& pk) {
  Bytes out = detail::file_header(RecordType::PublicKey);
  put_record(out, pk.key_id);
  put_record(out, pk.descriptor.encode_fields());
  put_record(out, pk.hash_params.encode_fields());
  put_record(out, encode(pk.x));
  return out;
}

inline PublicKey decode_public_key(ByteView data) {
  auto in = detail::open_file(data, RecordType::PublicKey, "public key");
  auto key_id = in.record();
  if (key_id.empty()) in.fail(DecodeErrorKind::InvalidField);
  auto desc = detail::descriptor_record(in);
  ByteReader hp(in.record(), "hash params");
  auto params = HashParams::decode_fields(hp);
  hp.expect_done();
  auto x = detail::element_record(in, desc);
  in.expect_done();
  return PublicKey{Bytes(key_id.begin(), key_id.end()), std::move(desc), std::move(params), std::move(x)};
}

inline Bytes encode_private_key(const PrivateKey& sk) {
  Bytes out = detail::file_header(RecordType::PrivateKey);
  put_record(out, to_bytes(kPrivateKeyWarning));
  put_record(out, sk.key_id);
  put_record(out, sk.descriptor.encode_fields());
  put_record(out, encode(sk.g));
  put_record(out, encode(sk.s));
  put_integer_record(out, sk.n);

  Bytes fact;
  for (const auto& pp : sk.factorization) {
    put_integer_record(fact, mpz_class(pp.prime));
    put_integer_record(fact, mpz_class(static_cast<unsigned long>(pp.exponent)));
  }
  put_record(out, fact);

  Bytes policy;
  Bytes excluded;
  for (auto p : sk.policy.excluded_primes) put_integer_record(excluded, mpz_class(p));
  put_record(policy, excluded);
  Bytes caps;
  for (auto [p, cap] : sk.policy.max_exponent_in_nj) {
    put_integer_record(caps, mpz_class(p));
    put_integer_record(caps, mpz_class(static_cast<unsigned long>(cap)));
  }
  put_record(policy, caps);
  Bytes uses;
  if (sk.policy.max_uses) put_integer_record(uses, mpz_class(static_cast<unsigned long>(*sk.policy.max_uses)));
  put_record(policy, uses);
  put_record(out, policy);
  return out;
}

inline PrivateKey decode_private_key(ByteView data) {
  auto in = detail::open_file(data, RecordType::PrivateKey, "private key");
  auto warning = in.record();
  if (!std::equal(warning.begin(), warning.end(), kPrivateKeyWarning.begin(), kPrivateKeyWarning.end()))
    in.fail(DecodeErrorKind::InvalidField);
  auto key_id = in.record();
  if (key_id.empty()) in.fail(DecodeErrorKind::InvalidField);
  auto desc = detail::descriptor_record(in);
  auto g = detail::element_record(in, desc);
  auto s = detail::element_record(in, desc);
  mpz_class n = in.integer_record();

  Factorization fact;
  ByteReader fr(in.record(), "factorization");
  while (!fr.done()) {
    PrimePower pp;
    pp.prime = detail::small_unsigned(fr);
    auto e = detail::small_unsigned(fr);
    if (e > 0xffffffffUL) fr.fail(DecodeErrorKind::InvalidField);
    pp.exponent = static_cast<unsigned>(e);
    fact.push_back(pp);
  }

  FactorPolicy policy;
  ByteReader pr(in.record(), "policy");
  ByteReader ex(pr.record(), "policy.excluded_primes");
  while (!ex.done()) policy.excluded_primes.insert(detail::small_unsigned(ex));
  ByteReader cr(pr.record(), "policy.max_exponent_in_nj");
  while (!cr.done()) {
    auto p = detail::small_unsigned(cr);
    auto cap = detail::small_unsigned(cr);
    if (cap > 0xffffffffUL) cr.fail(DecodeErrorKind::InvalidField);
    policy.max_exponent_in_nj[p] = static_cast<unsigned>(cap);
  }
  ByteReader ur(pr.record(), "policy.max_uses");
  if (!ur.done()) policy.max_uses = detail::small_unsigned(ur);
  ur.expect_done();
  pr.expect_done();
  in.expect_done();

  try {
    validate_factorization(fact);
  } catch (const std::invalid_argument&) {
    in.fail(DecodeErrorKind::InvalidField);
  }
  if (product_of(fact) != n) in.fail(DecodeErrorKind::InvalidField);
  return PrivateKey{Bytes(key_id.begin(), key_id.end()), std::move(desc), std::move(g), std::move(s), std::move(n),
                    std::move(fact), std::move(policy)};
}

}  // namespace conjsig
