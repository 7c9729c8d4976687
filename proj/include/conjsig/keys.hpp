#pragma once

#include "conjsig/hash_to_group.hpp"
#include "conjsig/platform_group.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conjsig {

struct PrimePower {
  unsigned long prime = 0;
  unsigned exponent = 0;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

using Factorization = std::vector<PrimePower>;

inline mpz_class product_of(const Factorization& f) {
  mpz_class n = 1;
  for (const auto& pp : f) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), pp.prime, pp.exponent);
    n *= p;
  }
  return n;
}

inline void validate_factorization(const Factorization& f) {
  std::set<unsigned long> seen;
  for (const auto& pp : f) {
    if (pp.exponent == 0) throw std::invalid_argument("factorization: zero exponent");
    if (mpz_probab_prime_p(mpz_class(pp.prime).get_mpz_t(), 30) == 0)
      throw std::invalid_argument("factorization: " + std::to_string(pp.prime) + " is not prime");
    if (!seen.insert(pp.prime).second) throw std::invalid_argument("factorization: repeated prime");
  }
}

/// Restrictions on which divisors may be published as n_j.
struct FactorPolicy {
  std::set<unsigned long> excluded_primes;
  std::map<unsigned long, unsigned> max_exponent_in_nj;
  std::optional<std::size_t> max_uses;

  unsigned exponent_cap(const PrimePower& pp) const {
    if (excluded_primes.contains(pp.prime)) return 0;
    auto it = max_exponent_in_nj.find(pp.prime);
    return it == max_exponent_in_nj.end() ? pp.exponent : std::min(pp.exponent, it->second);
  }

  friend bool operator==(const FactorPolicy&, const FactorPolicy&) = default;
};

/// Named parameter set: platform, hash, the protocol integer n and the
/// signer's factor policy.
struct Profile {
  std::string name;
  PlatformDescriptor descriptor;
  HashParams hash_params;
  Factorization factorization;
  FactorPolicy policy;
  std::size_t probe_samples = 256;
  std::size_t setup_attempts = 64;
};

inline Profile make_profile(std::string_view name) {
  auto domain = to_bytes("conjsig/v1");
  if (name == "toy") {
    return Profile{"toy", default_descriptor(8, 8), HashParams{DigestAlgorithm::Sha256, 8, 8, domain},
                   {{2, 2}, {3, 1}, {5, 1}}, {}, 256, 64};
  }
  // desk and demo keep the shift coordinate in [-1, 1]: the cost of every
  // operation is linear in n * |shift(g)| bits.
  const Factorization desk_n{{2, 5}, {3, 3}, {5, 1}, {7, 1}, {11, 1}, {13, 1}};
  if (name == "desk") {
    mpz_class b = mpz_class(1) << 64;
    return Profile{"desk", default_descriptor(b, 1), HashParams{DigestAlgorithm::Sha256, b, 1, domain}, desk_n, {}, 256, 64};
  }
  if (name == "demo") {
    mpz_class b = mpz_class(1) << 256;
    return Profile{"demo", default_descriptor(b, 1), HashParams{DigestAlgorithm::Sha256, b, 1, domain}, desk_n, {}, 256, 64};
  }
  throw std::invalid_argument("unknown profile '" + std::string(name) + "' (expected toy, desk or demo)");
}

inline const std::vector<std::string>& profile_names() {
  static const std::vector<std::string> names{"toy", "desk", "demo"};
  return names;
}

struct PrivateKey {
  Bytes key_id;
  PlatformDescriptor descriptor;
  GroupElement g;  // base element, never published
  GroupElement s;  // secret conjugator
  mpz_class n;
  Factorization factorization;
  FactorPolicy policy;
};

struct PublicKey {
  Bytes key_id;
  PlatformDescriptor descriptor;
  HashParams hash_params;
  GroupElement x;  // (g^n)^s
};

struct Signature {
  GroupElement y;
  GroupElement alpha;
  mpz_class n_j;
  friend bool operator==(const Signature&, const Signature&) = default;
};

}  // namespace conjsig
