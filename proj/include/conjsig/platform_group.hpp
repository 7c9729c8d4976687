#pragma once

// The platform group G = Z^n ⋊_A Z for a unimodular integer matrix A.
//
// An element is a pair (v, k) with v in Z^n and k in Z; the pair is its own
// normal form. The group law is
//
//   (v1, k1) · (v2, k2) = (v1 + A^k1 v2, k1 + k2)
//
// so (0, 1) acts on the translation lattice by A. With A hyperbolic the group
// is polycyclic of Hirsch length n + 1 and has exponential growth.
//
// Conjugation follows the right-action convention g^h = h^-1 g h.

#include "conjsig/bytes.hpp"
#include "conjsig/drbg.hpp"
#include "conjsig/matrix.hpp"
#include "conjsig/sha256.hpp"

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace conjsig {

/// Largest |k| for which A^k is ever materialised. Entries of A^k grow like
/// lambda^k, so beyond this the arithmetic is out of reach anyway.
inline constexpr long kMaxActionExponent = 1L << 26;

class ShiftOverflow : public std::range_error {
 public:
  explicit ShiftOverflow(const std::string& what) : std::range_error(what) {}
};

class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

namespace detail {

// Memoised powers A^k, shared by all copies of a descriptor. Small exponents
// stay resident; large ones are kept until the byte budget is exceeded, at
// which point the large entries are dropped wholesale.
class ActionPowerCache {
 public:
  static constexpr long kResidentExponent = 64;
  static constexpr std::size_t kLargeBudgetBytes = std::size_t{256} << 20;

  ActionPowerCache(IntMatrix action, IntMatrix inverse)
      : action_(std::move(action)), inverse_(std::move(inverse)) {}

  std::shared_ptr<const IntMatrix> get(long k) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = entries_.find(k); it != entries_.end()) return it->second;
    }
    auto computed = std::make_shared<const IntMatrix>(compute(k));
    put(k, computed);
    return computed;
  }

  std::shared_ptr<const IntMatrix> peek(long k) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(k);
    return it == entries_.end() ? nullptr : it->second;
  }

  void put(long k, std::shared_ptr<const IntMatrix> m) {
    const std::size_t bytes = approx_bytes(*m);
    std::lock_guard lock(mutex_);
    if (entries_.contains(k)) return;
    const bool resident = k >= -kResidentExponent && k <= kResidentExponent;
    if (!resident) {
      if (large_bytes_ + bytes > kLargeBudgetBytes) evict_large_locked();
      large_bytes_ += bytes;
    }
    entries_.emplace(k, std::move(m));
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  IntMatrix compute(long k) const {
    if (k >= 0) return power(action_, static_cast<unsigned long>(k));
    return power(inverse_, static_cast<unsigned long>(-k));
  }

  static std::size_t approx_bytes(const IntMatrix& m) {
    return m.size() * m.size() * (m.max_entry_bits() / 8 + 16);
  }

  void evict_large_locked() {
    for (auto it = entries_.begin(); it != entries_.end();) {
      if (it->first < -kResidentExponent || it->first > kResidentExponent)
        it = entries_.erase(it);
      else
        ++it;
    }
    large_bytes_ = 0;
  }

  IntMatrix action_;
  IntMatrix inverse_;
  mutable std::mutex mutex_;
  std::unordered_map<long, std::shared_ptr<const IntMatrix>> entries_;
  std::size_t large_bytes_ = 0;
};

inline long checked_exponent(const mpz_class& k) {
  if (!mpz_fits_slong_p(k.get_mpz_t()) || abs(k) > kMaxActionExponent)
    throw ShiftOverflow("shift exponent " + k.get_str() + " exceeds the supported range");
  return k.get_si();
}

}  // namespace detail

/// Defines a concrete platform group: the lattice rank, the action matrix and
/// the sampling box. Immutable; copies share the matrix-power cache.
class PlatformDescriptor {
 public:
  PlatformDescriptor(IntMatrix action, mpz_class sample_bound, mpz_class shift_bound)
      : action_(std::move(action)),
        sample_bound_(std::move(sample_bound)),
        shift_bound_(std::move(shift_bound)) {
    const std::size_t n = action_.size();
    if (n == 0 || n > 0xffff) throw std::invalid_argument("descriptor: dimension must be in [1, 65535]");
    if (abs(determinant(action_)) != 1) throw std::invalid_argument("descriptor: action matrix must have determinant +-1");
    if (sample_bound_ < 2) throw std::invalid_argument("descriptor: sample_bound must be at least 2");
    if (shift_bound_ < 1) throw std::invalid_argument("descriptor: shift_bound must be at least 1");
    inverse_ = unimodular_inverse(action_);
    cache_ = std::make_shared<detail::ActionPowerCache>(action_, inverse_);
    id_ = compute_id();
  }

  std::size_t dimension() const noexcept { return action_.size(); }
  const IntMatrix& action() const noexcept { return action_; }
  const IntMatrix& inverse_action() const noexcept { return inverse_; }
  /// Half-width of the uniform box for translation coordinates.
  const mpz_class& sample_bound() const noexcept { return sample_bound_; }
  /// Half-width of the uniform box for the shift coordinate.
  const mpz_class& shift_bound() const noexcept { return shift_bound_; }
  const Bytes& descriptor_id() const noexcept { return id_; }

  /// True when A has an eigenvalue off the unit circle, detected as
  /// max|A^8| > max|A^4| (finite-order and unipotent-free cases stay flat).
  bool has_exponential_growth() const {
    return power(action_, 8).max_abs_entry() > power(action_, 4).max_abs_entry();
  }

  /// A^k for |k| <= kMaxActionExponent.
  std::shared_ptr<const IntMatrix> action_power(const mpz_class& k) const {
    return cache_->get(detail::checked_exponent(k));
  }

  /// A^k if it is already memoised, otherwise null. Never computes.
  std::shared_ptr<const IntMatrix> cached_action_power(const mpz_class& k) const {
    if (!mpz_fits_slong_p(k.get_mpz_t()) || abs(k) > kMaxActionExponent) return nullptr;
    return cache_->peek(k.get_si());
  }

  void remember_action_power(long k, std::shared_ptr<const IntMatrix> m) const { cache_->put(k, std::move(m)); }

  /// Descriptor fields as a sequence of records (dimension, A row-major,
  /// sample_bound, shift_bound).
  Bytes encode_fields() const {
    Bytes out;
    put_integer_record(out, mpz_class(static_cast<unsigned long>(dimension())));
    for (const auto& v : action_.entries()) put_integer_record(out, v);
    put_integer_record(out, sample_bound_);
    put_integer_record(out, shift_bound_);
    return out;
  }

  static PlatformDescriptor decode_fields(ByteReader& in) {
    mpz_class dim = in.integer_record();
    if (dim < 1 || dim > 0xffff) in.fail(DecodeErrorKind::InvalidField);
    const std::size_t n = dim.get_ui();
    if (in.remaining() / 4 < n * n) in.fail(DecodeErrorKind::MalformedLength);
    IntMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = in.integer_record();
    mpz_class sample = in.integer_record();
    mpz_class shift = in.integer_record();
    try {
      return PlatformDescriptor(std::move(a), std::move(sample), std::move(shift));
    } catch (const std::invalid_argument&) {
      in.fail(DecodeErrorKind::InvalidField);
    }
  }

  friend bool operator==(const PlatformDescriptor& a, const PlatformDescriptor& b) {
    return a.action_ == b.action_ && a.sample_bound_ == b.sample_bound_ && a.shift_bound_ == b.shift_bound_;
  }

 private:
  Bytes compute_id() const {
    Sha256 h;
    h.update(to_bytes("conjsig/descriptor/v1"));
    h.update(encode_fields());
    Digest d = h.finish();
    return Bytes(d.begin(), d.begin() + 8);
  }

  IntMatrix action_;
  IntMatrix inverse_;
  mpz_class sample_bound_;
  mpz_class shift_bound_;
  Bytes id_;
  std::shared_ptr<detail::ActionPowerCache> cache_;
};

/// Z^2 ⋊ Z with A = [[2,1],[1,1]].
inline PlatformDescriptor default_descriptor(const mpz_class& sample_bound, const mpz_class& shift_bound) {
  return PlatformDescriptor(IntMatrix{{2, 1}, {1, 1}}, sample_bound, shift_bound);
}

struct GroupElement {
  IntVector translation;
  mpz_class shift;

  std::size_t dimension() const noexcept { return translation.size(); }
  bool is_identity() const {
    if (shift != 0) return false;
    for (const auto& c : translation)
      if (c != 0) return false;
    return true;
  }

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

inline std::string to_string(const GroupElement& g) {
  std::ostringstream os;
  os << "((";
  for (std::size_t i = 0; i < g.translation.size(); ++i) os << (i ? "," : "") << g.translation[i].get_str();
  os << ")," << g.shift.get_str() << ")";
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const GroupElement& g) { return os << to_string(g); }

inline GroupElement make_element(std::initializer_list<long> translation, long shift) {
  GroupElement g;
  for (long c : translation) g.translation.emplace_back(c);
  g.shift = shift;
  return g;
}

namespace detail {

inline void check_dimension(const GroupElement& g, const PlatformDescriptor& desc) {
  if (g.dimension() != desc.dimension())
    throw DimensionMismatch("element of dimension " + std::to_string(g.dimension()) + " used with descriptor of dimension " +
                            std::to_string(desc.dimension()));
}

inline IntVector apply_action(const PlatformDescriptor& desc, const mpz_class& k, const IntVector& v) {
  if (k == 0) return v;
  return *desc.action_power(k) * v;
}

inline void add_into(IntVector& acc, const IntVector& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

inline void sub_into(IntVector& acc, const IntVector& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] -= v[i];
}

}  // namespace detail

inline GroupElement identity(const PlatformDescriptor& desc) {
  return GroupElement{IntVector(desc.dimension()), mpz_class(0)};
}

inline GroupElement multiply(const GroupElement& a, const GroupElement& b, const PlatformDescriptor& desc) {
  detail::check_dimension(a, desc);
  detail::check_dimension(b, desc);
  GroupElement out{a.translation, a.shift + b.shift};
  detail::add_into(out.translation, detail::apply_action(desc, a.shift, b.translation));
  return out;
}

inline GroupElement inverse(const GroupElement& a, const PlatformDescriptor& desc) {
  detail::check_dimension(a, desc);
  mpz_class k = -a.shift;
  GroupElement out{detail::apply_action(desc, k, a.translation), k};
  for (auto& c : out.translation) c = -c;
  return out;
}

/// a · b^-1, touching only A^(k_a - k_b). Useful when both shifts are large
/// but close.
inline GroupElement right_divide(const GroupElement& a, const GroupElement& b, const PlatformDescriptor& desc) {
  detail::check_dimension(a, desc);
  detail::check_dimension(b, desc);
  mpz_class k = a.shift - b.shift;
  GroupElement out{a.translation, k};
  detail::sub_into(out.translation, detail::apply_action(desc, k, b.translation));
  return out;
}

/// g^h = h^-1 g h. With g = (v, k), h = (w, m) this is (A^-m (v + (A^k - I) w), k).
inline GroupElement conjugate(const GroupElement& g, const GroupElement& h, const PlatformDescriptor& desc) {
  detail::check_dimension(g, desc);
  detail::check_dimension(h, desc);
  IntVector inner = g.translation;
  if (g.shift != 0) {
    detail::add_into(inner, detail::apply_action(desc, g.shift, h.translation));
    detail::sub_into(inner, h.translation);
  }
  return GroupElement{detail::apply_action(desc, -h.shift, inner), g.shift};
}

namespace detail {

// S v with S = I + B + ... + B^(e-1), from B^e via (B - I) S = B^e - I.
// Returns nullopt when B - I is singular.
inline std::optional<IntVector> geometric_sum_from_power(const IntMatrix& base, const IntMatrix& base_to_e,
                                                         const IntVector& v) {
  const std::size_t n = base.size();
  IntMatrix shifted = base;
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= 1;
  const mpz_class det = determinant(shifted);
  if (det == 0) return std::nullopt;

  IntVector w = base_to_e * v;
  sub_into(w, v);

  IntVector out = adjugate(shifted, det) * w;
  // Exact: (B - I) S v = (B^e - I) v has the integral solution S v.
  for (auto& c : out) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), det.get_mpz_t());
  return out;
}

}  // namespace detail

/// g^e for any integer e. For g = (v, k) the result is (S v, e k) with
/// S = I + B + ... + B^(e-1), B = A^k.
///
/// When A^(e k) is already memoised (verification against a fixed public key
/// hits the same total shift every time) S v is solved from B^e directly.
/// Otherwise S v and B^e are built together by left-to-right
/// square-and-multiply and B^e is memoised, since callers usually conjugate
/// the result next.
inline GroupElement power(const GroupElement& g, const mpz_class& e, const PlatformDescriptor& desc) {
  detail::check_dimension(g, desc);
  if (e == 0) return identity(desc);
  if (e < 0) return power(inverse(g, desc), -e, desc);

  if (g.shift == 0) {
    GroupElement out = g;
    for (auto& c : out.translation) c *= e;
    return out;
  }

  const mpz_class total_shift = e * g.shift;
  const long total = detail::checked_exponent(total_shift);
  const auto base = desc.action_power(g.shift);

  if (e > 2) {
    if (auto big = desc.cached_action_power(total_shift)) {
      if (auto sum = detail::geometric_sum_from_power(*base, *big, g.translation))
        return GroupElement{std::move(*sum), total_shift};
    }
  }

  IntVector acc = g.translation;
  IntMatrix step = *base;
  const std::size_t top = mpz_sizeinbase(e.get_mpz_t(), 2) - 1;
  for (std::size_t bit = top; bit-- > 0;) {
    detail::add_into(acc, step * acc);
    step = square(step);
    if (mpz_tstbit(e.get_mpz_t(), bit)) {
      detail::add_into(acc, step * g.translation);
      step = step * *base;
    }
  }
  desc.remember_action_power(total, std::make_shared<const IntMatrix>(std::move(step)));
  return GroupElement{std::move(acc), total_shift};
}

inline bool commute(const GroupElement& a, const GroupElement& b, const PlatformDescriptor& desc) {
  return multiply(a, b, desc) == multiply(b, a, desc);
}

inline GroupElement random_element(const PlatformDescriptor& desc, Drbg& rng) {
  GroupElement g;
  g.translation.reserve(desc.dimension());
  for (std::size_t i = 0; i < desc.dimension(); ++i) g.translation.push_back(uniform_symmetric(rng, desc.sample_bound()));
  g.shift = uniform_symmetric(rng, desc.shift_bound());
  return g;
}

// ---------------------------------------------------------------------------
// Canonical encoding f: "GE" 0x01, u16 dimension, then n+1 length-prefixed
// minimal two's-complement integers (translation coordinates, then shift).

inline constexpr std::uint8_t kElementMagic[2] = {0x47, 0x45};
inline constexpr std::uint8_t kElementVersion = 0x01;

inline Bytes encode(const GroupElement& g) {
  if (g.dimension() == 0 || g.dimension() > 0xffff) throw std::invalid_argument("encode: dimension out of range");
  Bytes out{kElementMagic[0], kElementMagic[1], kElementVersion};
  put_u16(out, static_cast<std::uint16_t>(g.dimension()));
  for (const auto& c : g.translation) put_integer_record(out, c);
  put_integer_record(out, g.shift);
  return out;
}

inline GroupElement decode(ByteView data, const PlatformDescriptor& desc) {
  ByteReader in(data, "group element");
  auto magic = in.take(2);
  if (magic[0] != kElementMagic[0] || magic[1] != kElementMagic[1]) in.fail(DecodeErrorKind::BadMagic);
  if (in.u8() != kElementVersion) in.fail(DecodeErrorKind::UnsupportedVersion);
  if (in.u16() != desc.dimension()) in.fail(DecodeErrorKind::DimensionMismatch);
  GroupElement g;
  g.translation.reserve(desc.dimension());
  for (std::size_t i = 0; i < desc.dimension(); ++i) g.translation.push_back(in.integer_record());
  g.shift = in.integer_record();
  in.expect_done();
  return g;
}

// ---------------------------------------------------------------------------
// Structural probes.

/// Exact membership test h ∈ <g>.
inline bool in_cyclic_subgroup(const GroupElement& h, const GroupElement& g, const PlatformDescriptor& desc) {
  if (g.shift != 0) {
    if (!mpz_divisible_p(h.shift.get_mpz_t(), g.shift.get_mpz_t())) return false;
    mpz_class e = h.shift / g.shift;
    return power(g, e, desc) == h;
  }
  // g = (v, 0) generates {(e v, 0)}.
  if (h.shift != 0) return false;
  std::size_t pivot = 0;
  while (pivot < g.dimension() && g.translation[pivot] == 0) ++pivot;
  if (pivot == g.dimension()) return h.is_identity();
  if (!mpz_divisible_p(h.translation[pivot].get_mpz_t(), g.translation[pivot].get_mpz_t())) return false;
  mpz_class e = h.translation[pivot] / g.translation[pivot];
  for (std::size_t i = 0; i < g.dimension(); ++i)
    if (h.translation[i] != e * g.translation[i]) return false;
  return true;
}

/// The standard generators e_1..e_n (pure translations) and t = (0, 1).
inline std::vector<GroupElement> standard_generators(const PlatformDescriptor& desc) {
  std::vector<GroupElement> gens;
  for (std::size_t i = 0; i < desc.dimension(); ++i) {
    GroupElement e = identity(desc);
    e.translation[i] = 1;
    gens.push_back(std::move(e));
  }
  GroupElement t = identity(desc);
  t.shift = 1;
  gens.push_back(std::move(t));
  return gens;
}

/// Looks for elements commuting with g that lie outside <g>. The candidate set
/// is the standard generators plus `samples` random elements; an empty result
/// means the probe found nothing.
inline std::vector<GroupElement> centralizer_probe(const GroupElement& g, const PlatformDescriptor& desc, Drbg& rng,
                                                   std::size_t samples) {
  detail::check_dimension(g, desc);
  if (g.is_identity()) throw std::invalid_argument("centralizer_probe: g must not be the identity");
  std::vector<GroupElement> candidates = standard_generators(desc);
  candidates.reserve(candidates.size() + samples);
  for (std::size_t i = 0; i < samples; ++i) candidates.push_back(random_element(desc, rng));

  std::vector<GroupElement> offending;
  for (auto& h : candidates)
    if (commute(h, g, desc) && !in_cyclic_subgroup(h, g, desc)) offending.push_back(std::move(h));
  return offending;
}

/// Sizes of the word-metric balls of radius 0..radius for the generating set
/// {e_i^±1, t^±1}, by breadth-first enumeration of normal forms.
inline std::vector<std::size_t> ball_sizes(const PlatformDescriptor& desc, std::size_t radius) {
  std::vector<GroupElement> gens;
  for (const auto& g : standard_generators(desc)) {
    gens.push_back(g);
    gens.push_back(inverse(g, desc));
  }
  auto key = [](const GroupElement& g) {
    Bytes b = encode(g);
    return std::string(b.begin(), b.end());
  };
  std::unordered_set<std::string> seen{key(identity(desc))};
  std::vector<GroupElement> frontier{identity(desc)};
  std::vector<std::size_t> sizes{1};
  for (std::size_t r = 1; r <= radius; ++r) {
    std::vector<GroupElement> next;
    for (const auto& f : frontier) {
      for (const auto& s : gens) {
        GroupElement p = multiply(f, s, desc);
        if (seen.insert(key(p)).second) next.push_back(std::move(p));
      }
    }
    frontier = std::move(next);
    sizes.push_back(seen.size());
  }
  return sizes;
}

}  // namespace conjsig
