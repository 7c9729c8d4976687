#pragma once

// Attacks against the signature scheme, runnable end to end:
//
//   * data forging: swap the message under an honest signature;
//   * root extraction: any honest (m, y, alpha, n_j) yields an n_j-th root of
//     x, namely r = y^(alpha y^-1 h^-1);
//   * factor reuse: with such an r, anyone can sign any message under n_j;
//   * brute-force conjugacy search over a small coordinate box.
//
// The reuse forgery picks a random c and publishes
//   y_f = r^c,  h_f = H(m_f || f(y_f)),  alpha_f = c^-1 h_f y_f,
// which satisfies the verification equation because
//   y_f^(n_j alpha_f) = x^(c alpha_f) = x^(h_f y_f).

#include "conjsig/signature.hpp"

#include <optional>
#include <string>
#include <vector>

namespace conjsig {

class PreconditionViolation : public std::invalid_argument {
 public:
  explicit PreconditionViolation(const std::string& what) : std::invalid_argument(what) {}
};

class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct ForgeryResult {
  Signature forged_signature;
  VerifyResult raw_verify;
  VerifyResult ledgered_verify;
};

/// r = y^(alpha y^-1 h^-1) without checking the signature first.
inline GroupElement extract_root_unchecked(const PublicKey& pk, ByteView message, const Signature& sig) {
  const auto& desc = pk.descriptor;
  GroupElement h = hash_to_group(message, encode(sig.y), desc, pk.hash_params);
  // alpha y^-1 h^-1 = alpha (h y)^-1
  return conjugate(sig.y, right_divide(sig.alpha, multiply(h, sig.y, desc), desc), desc);
}

/// An n_j-th root of pk.x recovered from a valid signature.
inline GroupElement extract_root(const PublicKey& pk, ByteView message, const Signature& sig) {
  if (auto v = verify_equation(pk, message, sig); !v.accepted())
    throw PreconditionViolation(std::string("extract_root: signature does not verify (") + to_string(v.verdict) + ")");
  return extract_root_unchecked(pk, message, sig);
}

/// The forged signature for m_f under exponent n_j, assuming r^n_j = x.
/// Does not check that assumption.
inline Signature build_forgery(const PublicKey& pk, const GroupElement& root, const mpz_class& n_j, ByteView forged_message,
                               Drbg& rng) {
  const auto& desc = pk.descriptor;
  GroupElement c = random_element(desc, rng);
  GroupElement y_f = conjugate(root, c, desc);
  GroupElement h_f = hash_to_group(forged_message, encode(y_f), desc, pk.hash_params);
  GroupElement alpha_f = multiply(multiply(inverse(c, desc), h_f, desc), y_f, desc);
  return Signature{std::move(y_f), std::move(alpha_f), n_j};
}

inline ForgeryResult forge_with_reused_factor(const PublicKey& pk, const GroupElement& root, const mpz_class& n_j,
                                              ByteView forged_message, const FactorLedger& ledger, Drbg& rng) {
  if (power(root, n_j, pk.descriptor) != pk.x)
    throw PreconditionViolation("forge_with_reused_factor: root^n_j != x");
  Signature forged = build_forgery(pk, root, n_j, forged_message, rng);
  VerifyResult raw = verify(pk, forged_message, forged);
  VerifyResult ledgered = verify(pk, forged_message, forged, ledger);
  return ForgeryResult{std::move(forged), std::move(raw), std::move(ledgered)};
}

/// Presents an honest signature with a substituted message.
inline VerifyResult data_forge_attempt(const PublicKey& pk, const Signature& sig, ByteView original_message,
                                       ByteView forged_message) {
  (void)original_message;
  return verify(pk, forged_message, sig);
}

inline constexpr unsigned long kDefaultCspBudget = 10'000'000;

/// (2 box_bound + 1)^(n + 1).
inline mpz_class csp_candidate_count(const PlatformDescriptor& desc, const mpz_class& box_bound) {
  mpz_class count;
  mpz_class side = 2 * box_bound + 1;
  mpz_pow_ui(count.get_mpz_t(), side.get_mpz_t(), desc.dimension() + 1);
  return count;
}

/// Exhaustive search for h in the coordinate box with g^h = x. Candidates are
/// visited in lexicographic order of (translation..., shift), each coordinate
/// ascending from -box_bound, and the first hit is returned.
inline std::optional<GroupElement> brute_force_csp(const PlatformDescriptor& desc, const GroupElement& g,
                                                   const GroupElement& x, long box_bound,
                                                   unsigned long budget = kDefaultCspBudget) {
  if (box_bound < 0) throw std::invalid_argument("brute_force_csp: negative box bound");
  const mpz_class candidates = csp_candidate_count(desc, box_bound);
  if (candidates > budget)
    throw BudgetExceeded("brute_force_csp: " + candidates.get_str() + " candidates exceed the budget of " +
                         std::to_string(budget));

  const std::size_t coords = desc.dimension() + 1;
  std::vector<long> odometer(coords, -box_bound);
  for (;;) {
    GroupElement h;
    h.translation.reserve(desc.dimension());
    for (std::size_t i = 0; i < desc.dimension(); ++i) h.translation.emplace_back(odometer[i]);
    h.shift = odometer.back();
    if (conjugate(g, h, desc) == x) return h;

    std::size_t i = coords;
    while (i > 0 && odometer[i - 1] == box_bound) odometer[--i] = -box_bound;
    if (i == 0) return std::nullopt;
    ++odometer[i - 1];
  }
}

// ---------------------------------------------------------------------------
// Demonstration drivers; each returns one line per checked assertion.

struct ReportLine {
  std::string name;
  std::string expected;
  std::string observed;
  bool pass = false;
};

inline std::string format_report(const std::vector<ReportLine>& lines) {
  std::string out;
  for (const auto& l : lines)
    out += l.name + " | expected=" + l.expected + " | observed=" + l.observed + " | " + (l.pass ? "PASS" : "FAIL") + "\n";
  return out;
}

inline ReportLine verdict_line(std::string name, Verdict expected, const VerifyResult& observed) {
  return ReportLine{std::move(name), to_string(expected), to_string(observed.verdict), observed.verdict == expected};
}

inline std::vector<ReportLine> demo_tamper(const Profile& profile, Drbg& rng) {
  auto [pk, sk] = setup(profile, rng);
  auto ledger = FactorLedger::in_memory();
  Bytes m = to_bytes("transfer 10 coins to bob");
  Signature sig = sign(sk, pk, m, ledger, rng);
  Bytes m_f = m;
  m_f[0] ^= 0x01;
  return {
      verdict_line("honest_signature_accepts", Verdict::Accept, verify(pk, m, sig, ledger)),
      verdict_line("same_message_control_accepts", Verdict::Accept, data_forge_attempt(pk, sig, m, m)),
      verdict_line("flipped_bit_rejects", Verdict::EquationFailed, data_forge_attempt(pk, sig, m, m_f)),
      verdict_line("substituted_message_rejects", Verdict::EquationFailed,
                   data_forge_attempt(pk, sig, m, to_bytes("transfer 10000 coins to eve"))),
  };
}

inline std::vector<ReportLine> demo_root(const Profile& profile, Drbg& rng) {
  auto [pk, sk] = setup(profile, rng);
  auto ledger = FactorLedger::in_memory();
  Bytes m = to_bytes("root extraction demo");
  Signature sig = sign(sk, pk, m, ledger, rng);
  GroupElement r = extract_root(pk, m, sig);
  const bool holds = power(r, sig.n_j, pk.descriptor) == pk.x;

  Signature tampered = sig;
  tampered.alpha = multiply(tampered.alpha, standard_generators(pk.descriptor).back(), pk.descriptor);
  GroupElement bad = extract_root_unchecked(pk, m, tampered);
  const bool bad_holds = power(bad, sig.n_j, pk.descriptor) == pk.x;
  return {
      ReportLine{"root_to_the_n_j_equals_x", "true", holds ? "true" : "false", holds},
      ReportLine{"tampered_alpha_root_fails", "false", bad_holds ? "true" : "false", !bad_holds},
  };
}

inline std::vector<ReportLine> demo_forge(const Profile& profile, Drbg& rng) {
  auto [pk, sk] = setup(profile, rng);
  auto ledger = FactorLedger::in_memory();
  Bytes m = to_bytes("original message signed by the key holder");
  Signature sig = sign(sk, pk, m, ledger, rng);
  GroupElement r = extract_root(pk, m, sig);
  ForgeryResult f = forge_with_reused_factor(pk, r, sig.n_j, to_bytes("forged message"), ledger, rng);

  // A fresh exponent coprime to n: no root is known for it.
  mpz_class fresh = 2;
  while (mpz_divisible_p(sk.n.get_mpz_t(), fresh.get_mpz_t()) || mpz_probab_prime_p(fresh.get_mpz_t(), 30) == 0) ++fresh;
  Signature wrong = build_forgery(pk, r, fresh, to_bytes("forged message"), rng);
  return {
      verdict_line("forgery_raw_verify_accepts", Verdict::Accept, f.raw_verify),
      verdict_line("forgery_ledgered_verify_rejects", Verdict::ReplayedFactor, f.ledgered_verify),
      verdict_line("fresh_exponent_forgery_rejects", Verdict::EquationFailed, verify(pk, to_bytes("forged message"), wrong)),
      verdict_line("original_signature_still_accepts", Verdict::Accept, verify(pk, m, sig, ledger)),
  };
}

inline std::vector<ReportLine> demo_csp(const Profile& profile, Drbg& rng) {
  const auto& desc = profile.descriptor;
  const long box = 2;
  std::vector<ReportLine> lines;

  // Planted instance with the conjugator inside the box.
  PlatformDescriptor toy = make_profile("toy").descriptor;
  GroupElement g = random_element(toy, rng);
  GroupElement h0;
  for (std::size_t i = 0; i < toy.dimension(); ++i) h0.translation.push_back(uniform_symmetric(rng, box));
  h0.shift = uniform_symmetric(rng, box);
  GroupElement x = conjugate(g, h0, toy);
  auto found = brute_force_csp(toy, g, x, box);
  const bool ok = found && conjugate(g, *found, toy) == x;
  lines.push_back({"planted_toy_instance_solved", "conjugator", found ? to_string(*found) : "none", ok});

  // Key-like instance: the conjugator is drawn from the full sampling box and g
  // has a nonzero shift, as setup requires. At toy scale the box can hold a
  // conjugator by chance, so there any sound answer passes.
  GroupElement gd = random_element(desc, rng);
  while (gd.shift == 0) gd = random_element(desc, rng);
  GroupElement xd = conjugate(gd, random_element(desc, rng), desc);
  auto miss = brute_force_csp(desc, gd, xd, box);
  const bool sound = !miss || conjugate(gd, *miss, desc) == xd;
  const bool expect_none = profile.name != "toy";
  lines.push_back({"profile_instance_box2", expect_none ? "none" : "none or conjugator", miss ? to_string(*miss) : "none",
                   expect_none ? !miss : sound});

  mpz_class full = csp_candidate_count(desc, 0);
  for (std::size_t i = 0; i < desc.dimension(); ++i) full *= 2 * desc.sample_bound() + 1;
  full *= 2 * desc.shift_bound() + 1;
  const bool wall = full > kDefaultCspBudget || profile.name == "toy";
  lines.push_back({"sampling_box_candidates_vs_budget", "> " + std::to_string(kDefaultCspBudget) + " (non-toy)",
                   full.get_str(), wall});
  return lines;
}

}  // namespace conjsig
