#pragma once

// The signature protocol over the platform group.
//
//   setup:   pick g (centralizer probed), secret s, highly composite n;
//            publish x = (g^n)^s.
//   sign:    t random, n = n_i n_j a fresh factorization,
//            y = (g^n_i)^t, h = H(m || f(y)), alpha = t^-1 s h y,
//            publish (y, alpha, n_j).
//   verify:  h' = H(m || f(y)); accept iff (y^n_j)^alpha = x^(h' y).
//
// Honest signatures satisfy the verification equation because
// (y^n_j)^alpha = (g^n)^(t t^-1 s h y) = x^(h y).

#include "conjsig/hash_to_group.hpp"
#include "conjsig/keys.hpp"
#include "conjsig/ledger.hpp"
#include "conjsig/platform_group.hpp"
#include "conjsig/wire.hpp"

#include <string>
#include <utility>
#include <vector>

namespace conjsig {

class SetupError : public std::runtime_error {
 public:
  explicit SetupError(const std::string& what) : std::runtime_error(what) {}
};

/// No admissible unused n_j remains for this key; the signer must rekey.
class FactorizationsExhausted : public std::runtime_error {
 public:
  explicit FactorizationsExhausted(const std::string& what) : std::runtime_error(what) {}
};

class KeyMismatch : public std::invalid_argument {
 public:
  explicit KeyMismatch(const std::string& what) : std::invalid_argument(what) {}
};

enum class Verdict { Accept, EquationFailed, ReplayedFactor, Malformed };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Accept: return "Accept";
    case Verdict::EquationFailed: return "EquationFailed";
    case Verdict::ReplayedFactor: return "ReplayedFactor";
    case Verdict::Malformed: return "Malformed";
  }
  return "Unknown";
}

struct VerifyResult {
  Verdict verdict = Verdict::Malformed;
  std::string detail;

  bool accepted() const noexcept { return verdict == Verdict::Accept; }
};

// ---------------------------------------------------------------------------
// Divisors and the factor policy.

/// All divisors of the factored integer, ascending, honouring per-prime caps.
inline std::vector<mpz_class> divisors(const Factorization& f, const FactorPolicy& policy = {}) {
  std::vector<mpz_class> out{1};
  for (const auto& pp : f) {
    const unsigned cap = policy.exponent_cap(pp);
    const std::size_t base = out.size();
    mpz_class pk = 1;
    for (unsigned e = 1; e <= cap; ++e) {
      pk *= pp.prime;
      for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// A factor is burned for a key once it divides some n_j already used: a
/// published signature with exponent N yields an N-th root of x, and hence
/// a d-th root for every d | N.
inline bool is_burned(const mpz_class& n_j, const std::vector<LedgerEntry>& used) {
  for (const auto& e : used)
    if (mpz_divisible_p(e.n_j.get_mpz_t(), n_j.get_mpz_t())) return true;
  return false;
}

/// Candidates for n_j: divisors d >= 2 of n allowed by the policy and not
/// burned in the ledger. d = 1 is never admissible, since x itself is a
/// first root of x.
inline std::vector<mpz_class> admissible_factors(const PrivateKey& sk, const FactorLedger& ledger) {
  const auto used = ledger.iterate(sk.key_id);
  if (sk.policy.max_uses && used.size() >= *sk.policy.max_uses) return {};
  std::vector<mpz_class> out;
  for (auto& d : divisors(sk.factorization, sk.policy))
    if (d >= 2 && !is_burned(d, used)) out.push_back(std::move(d));
  return out;
}

/// Uniform draw of (n_i, n_j) with n_i n_j = n over the admissible n_j.
inline std::pair<mpz_class, mpz_class> choose_factorization(const PrivateKey& sk, const FactorLedger& ledger, Drbg& rng) {
  auto candidates = admissible_factors(sk, ledger);
  if (candidates.empty())
    throw FactorizationsExhausted("no admissible unused factorization of n remains for key " + to_hex(sk.key_id) +
                                  "; rekey required");
  mpz_class idx = uniform_below(rng, mpz_class(static_cast<unsigned long>(candidates.size())));
  mpz_class n_j = candidates[idx.get_ui()];
  mpz_class n_i = sk.n / n_j;
  return {std::move(n_i), std::move(n_j)};
}

inline void validate_policy(const Factorization& f, const FactorPolicy& policy) {
  for (const auto& d : divisors(f, policy))
    if (d >= 2) return;
  throw std::invalid_argument("factor policy leaves no admissible n_j");
}

// ---------------------------------------------------------------------------
// Setup.

inline Bytes derive_key_id(const PlatformDescriptor& desc, const GroupElement& x) {
  Digest d = Sha256{}.update(to_bytes("conjsig/key-id/v1")).update(desc.descriptor_id()).update(encode(x)).finish();
  return Bytes(d.begin(), d.begin() + 16);
}

inline std::pair<PublicKey, PrivateKey> setup(const PlatformDescriptor& desc, const HashParams& hash_params,
                                              const Profile& profile, Drbg& rng) {
  if (!desc.has_exponential_growth()) throw SetupError("descriptor fails growth screening: action matrix has no expanding direction");
  hash_params.validate();
  validate_factorization(profile.factorization);
  const mpz_class n = product_of(profile.factorization);
  if (n < 4 || divisors(profile.factorization).size() < 3)
    throw SetupError("n must be at least 4 and admit at least two factorizations");
  validate_policy(profile.factorization, profile.policy);

  std::optional<GroupElement> g;
  for (std::size_t attempt = 0; attempt < profile.setup_attempts && !g; ++attempt) {
    GroupElement candidate = random_element(desc, rng);
    if (candidate.is_identity()) continue;
    if (centralizer_probe(candidate, desc, rng, profile.probe_samples).empty()) g = std::move(candidate);
  }
  if (!g) throw SetupError("no base element passed the centralizer probe in " + std::to_string(profile.setup_attempts) + " attempts");

  GroupElement s = random_element(desc, rng);
  while (s.is_identity()) s = random_element(desc, rng);

  GroupElement x = conjugate(power(*g, n, desc), s, desc);
  Bytes key_id = derive_key_id(desc, x);
  PublicKey pk{key_id, desc, hash_params, x};
  PrivateKey sk{std::move(key_id), desc, std::move(*g), std::move(s), n, profile.factorization, profile.policy};
  return {std::move(pk), std::move(sk)};
}

inline std::pair<PublicKey, PrivateKey> setup(const Profile& profile, Drbg& rng) {
  return setup(profile.descriptor, profile.hash_params, profile, rng);
}

/// Fresh (g, s, n, key id). The old key's ledger entries stay bound to the
/// old key id.
inline std::pair<PublicKey, PrivateKey> rekey(const PrivateKey& old_sk, const PlatformDescriptor& desc,
                                              const Profile& profile, Drbg& rng) {
  for (;;) {
    auto keys = setup(desc, profile.hash_params, profile, rng);
    if (keys.second.key_id != old_sk.key_id) return keys;
  }
}

// ---------------------------------------------------------------------------
// Signing and verification.

inline Signature sign(const PrivateKey& sk, const PublicKey& pk, ByteView message, FactorLedger& ledger, Drbg& rng) {
  if (sk.key_id != pk.key_id || !(sk.descriptor == pk.descriptor))
    throw KeyMismatch("private key " + to_hex(sk.key_id) + " does not match public key " + to_hex(pk.key_id));
  const PlatformDescriptor& desc = pk.descriptor;

  // A concurrent signer may claim the chosen n_j between choice and record;
  // draw again in that case.
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto [n_i, n_j] = choose_factorization(sk, ledger, rng);
    GroupElement t = random_element(desc, rng);
    GroupElement y = conjugate(power(sk.g, n_i, desc), t, desc);
    GroupElement h = hash_to_group(message, encode(y), desc, pk.hash_params);
    GroupElement alpha = multiply(multiply(multiply(inverse(t, desc), sk.s, desc), h, desc), y, desc);
    Signature sig{std::move(y), std::move(alpha), std::move(n_j)};

    // Record before release: a crash after this point burns n_j, it never
    // leaves a published signature unrecorded.
    Digest fp = signature_fingerprint(sig);
    if (ledger.record(sk.key_id, sig.n_j, fp) == RecordStatus::Ok) return sig;
  }
  throw FactorizationsExhausted("ledger contention: could not claim a fresh n_j");
}

/// The verification equation alone, without any ledger check.
///
/// (y^n_j)^alpha = x^(h'y) is tested in the equivalent form
/// Y beta = beta x with Y = y^n_j and beta = alpha (h'y)^-1: conjugation is a
/// right action, so (Y^beta)^(h'y) = Y^alpha, and conjugation by h'y is a
/// bijection. beta is computed by right division and never needs A to a
/// power larger than |shift(alpha) - shift(h'y)|.
inline VerifyResult verify_equation(const PublicKey& pk, ByteView message, const Signature& sig) {
  const PlatformDescriptor& desc = pk.descriptor;
  if (sig.y.dimension() != desc.dimension() || sig.alpha.dimension() != desc.dimension())
    return {Verdict::Malformed, "signature elements do not match the descriptor dimension"};
  if (sig.n_j < 2) return {Verdict::Malformed, "n_j must be at least 2"};
  try {
    GroupElement h = hash_to_group(message, encode(sig.y), desc, pk.hash_params);
    GroupElement beta = right_divide(sig.alpha, multiply(h, sig.y, desc), desc);
    GroupElement lhs_power = power(sig.y, sig.n_j, desc);
    if (multiply(lhs_power, beta, desc) == multiply(beta, pk.x, desc)) return {Verdict::Accept, {}};
    return {Verdict::EquationFailed, "y^(n_j alpha) != x^(h' y)"};
  } catch (const ShiftOverflow& e) {
    return {Verdict::Malformed, e.what()};
  }
}

/// Full verification. With a ledger, a signature whose equation holds is
/// still rejected as ReplayedFactor when its n_j was consumed by a different
/// signature, or divides an n_j that was consumed earlier.
inline VerifyResult verify(const PublicKey& pk, ByteView message, const Signature& sig, const FactorLedger* ledger = nullptr) {
  VerifyResult raw = verify_equation(pk, message, sig);
  if (!raw.accepted() || ledger == nullptr) return raw;

  const auto entries = ledger->iterate(pk.key_id);
  const Digest fp = signature_fingerprint(sig);
  auto own = std::find_if(entries.begin(), entries.end(), [&](const LedgerEntry& e) { return e.n_j == sig.n_j; });
  if (own != entries.end()) {
    if (!std::equal(own->fingerprint.begin(), own->fingerprint.end(), fp.begin(), fp.end()))
      return {Verdict::ReplayedFactor, "n_j " + sig.n_j.get_str() + " was consumed by a different signature"};
    for (auto it = entries.begin(); it != own; ++it)
      if (mpz_divisible_p(it->n_j.get_mpz_t(), sig.n_j.get_mpz_t()))
        return {Verdict::ReplayedFactor, "n_j " + sig.n_j.get_str() + " divides earlier factor " + it->n_j.get_str()};
    return raw;
  }
  for (const auto& e : entries)
    if (mpz_divisible_p(e.n_j.get_mpz_t(), sig.n_j.get_mpz_t()))
      return {Verdict::ReplayedFactor, "n_j " + sig.n_j.get_str() + " divides used factor " + e.n_j.get_str()};
  return raw;
}

inline VerifyResult verify(const PublicKey& pk, ByteView message, const Signature& sig, const FactorLedger& ledger) {
  return verify(pk, message, sig, &ledger);
}

/// Decodes and verifies; decoding failures map to Malformed.
inline VerifyResult verify_encoded(const PublicKey& pk, ByteView message, ByteView signature_bytes,
                                   const FactorLedger* ledger = nullptr) {
  Signature sig;
  try {
    sig = decode_signature(signature_bytes, pk.descriptor);
  } catch (const DecodeError& e) {
    return {Verdict::Malformed, e.what()};
  }
  return verify(pk, message, sig, ledger);
}

}  // namespace conjsig
