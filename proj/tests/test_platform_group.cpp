#include "conjsig/platform_group.hpp"
#include "golden.hpp"
#include "oracle.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace conjsig;

namespace {

PlatformDescriptor toy() { return default_descriptor(8, 8); }

// Small shifts keep the repeated-multiplication oracle cheap.
PlatformDescriptor tiny() { return default_descriptor(8, 3); }

}  // namespace

TEST(GroupLaw, WorkedProducts) {
  auto d = toy();
  EXPECT_EQ(multiply(make_element({1, 0}, 1), make_element({0, 1}, 0), d), make_element({2, 1}, 1));
  EXPECT_EQ(multiply(make_element({1, 0}, 1), make_element({-1, 1}, -1), d), identity(d));
  EXPECT_EQ(inverse(make_element({1, 0}, 1), d), make_element({-1, 1}, -1));
  EXPECT_EQ(conjugate(make_element({1, 0}, 0), make_element({0, 0}, 1), d), make_element({1, -1}, 0));
  EXPECT_EQ(power(make_element({0, 0}, 1), 3, d), make_element({0, 0}, 3));
  EXPECT_EQ(identity(d), make_element({0, 0}, 0));
  EXPECT_EQ(inverse(identity(d), d), identity(d));
}

TEST(GroupLaw, InverseMatrixMatchesHandComputation) {
  auto d = toy();
  EXPECT_EQ(d.inverse_action(), (IntMatrix{{1, -1}, {-1, 2}}));
}

TEST(GroupLaw, AgreesWithRepeatedMultiplicationOracle) {
  auto d = tiny();
  auto o = oracle::default_group();
  Drbg rng = Drbg::from_u64(11);
  for (int i = 0; i < 300; ++i) {
    GroupElement a = random_element(d, rng), b = random_element(d, rng);
    ASSERT_EQ(multiply(a, b, d), o.mul(a, b));
    ASSERT_EQ(inverse(a, d), o.inv(a));
    ASSERT_EQ(conjugate(a, b, d), o.conj(a, b));
    ASSERT_EQ(right_divide(a, b, d), o.mul(a, o.inv(b)));
    long e = static_cast<long>(rng() % 41) - 20;
    ASSERT_EQ(power(a, e, d), o.pow(a, e)) << a << " ^ " << e;
  }
}

TEST(GroupLaw, IdentityAndInvolution) {
  auto d = toy();
  Drbg rng = Drbg::from_u64(12);
  for (int i = 0; i < 500; ++i) {
    GroupElement a = random_element(d, rng);
    ASSERT_EQ(multiply(identity(d), a, d), a);
    ASSERT_EQ(multiply(a, identity(d), d), a);
    ASSERT_EQ(inverse(inverse(a, d), d), a);
    ASSERT_EQ(conjugate(a, identity(d), d), a);
    ASSERT_EQ(power(a, 0, d), identity(d));
    ASSERT_EQ(power(a, -1, d), inverse(a, d));
  }
}

TEST(GroupLaw, RightActionAndHomomorphism) {
  auto d = toy();
  Drbg rng = Drbg::from_u64(13);
  for (int i = 0; i < 500; ++i) {
    GroupElement g = random_element(d, rng), h = random_element(d, rng), k = random_element(d, rng);
    ASSERT_EQ(conjugate(g, multiply(h, k, d), d), conjugate(conjugate(g, h, d), k, d));
    ASSERT_EQ(conjugate(multiply(g, k, d), h, d), multiply(conjugate(g, h, d), conjugate(k, h, d), d));
  }
}

TEST(GroupLaw, PowerCommutesWithConjugation) {
  auto d = toy();
  Drbg rng = Drbg::from_u64(14);
  for (int i = 0; i < 200; ++i) {
    GroupElement g = random_element(d, rng), h = random_element(d, rng);
    mpz_class e = uniform_symmetric(rng, 200);
    ASSERT_EQ(power(conjugate(g, h, d), e, d), conjugate(power(g, e, d), h, d));
  }
  // Exponents beyond 64 bits on pure translations.
  mpz_class big = (mpz_class(1) << 64) + 1;
  GroupElement g = make_element({3, -5}, 0), h = random_element(d, rng);
  GroupElement expected = make_element({0, 0}, 0);
  expected.translation = {3 * big, -5 * big};
  EXPECT_EQ(power(g, big, d), expected);
  EXPECT_EQ(power(conjugate(g, h, d), big, d), conjugate(power(g, big, d), h, d));
}

TEST(GroupLaw, NonCommutativityWitness) {
  for (const auto& d : {toy(), default_descriptor(mpz_class(1) << 64, 1), default_descriptor(mpz_class(1) << 256, 1)}) {
    EXPECT_FALSE(commute(make_element({1, 0}, 0), make_element({0, 0}, 1), d));
  }
}

TEST(Power, CachedGeometricSumMatchesSquareAndMultiply) {
  Drbg rng = Drbg::from_u64(15);
  for (int i = 0; i < 20; ++i) {
    auto fresh = default_descriptor(mpz_class(1) << 64, 1);
    GroupElement g = random_element(fresh, rng);
    if (g.shift == 0) g.shift = 1;
    mpz_class e = 1000 + uniform_below(rng, 100000);
    GroupElement slow = power(g, e, fresh);   // fills the cache with A^(e k)
    GroupElement fast = power(g, e, fresh);   // solves from the cached power
    ASSERT_EQ(slow, fast);
    ASSERT_EQ(fast, multiply(power(g, e - 1, fresh), g, fresh));
  }
}

TEST(Power, ShiftOverflowIsReported) {
  auto d = toy();
  EXPECT_THROW(power(make_element({1, 1}, 1), mpz_class(1) << 40, d), ShiftOverflow);
}

TEST(Power, DimensionMismatchIsReported) {
  auto d = toy();
  EXPECT_THROW(multiply(make_element({1}, 0), make_element({0, 0}, 0), d), DimensionMismatch);
}

TEST(RandomElement, DeterministicAndInRange) {
  auto d = toy();
  Drbg a = Drbg::from_u64(99), b = Drbg::from_u64(99);
  EXPECT_EQ(random_element(d, a), random_element(d, b));

  Drbg rng = Drbg::from_u64(16);
  const long trials = 10000;
  std::vector<std::map<long, long>> counts(3);
  for (long i = 0; i < trials; ++i) {
    GroupElement g = random_element(d, rng);
    for (std::size_t c = 0; c < 2; ++c) {
      ASSERT_LE(abs(g.translation[c]), 8);
      counts[c][g.translation[c].get_si() + 8]++;
    }
    ASSERT_LE(abs(g.shift), 8);
    counts[2][g.shift.get_si() + 8]++;
  }
  for (const auto& c : counts) EXPECT_TRUE(oracle::uniform_within(c, 17, trials, 5.0));
}

TEST(Encoding, IdentityBytes) {
  auto d = toy();
  EXPECT_EQ(to_hex(encode(identity(d))), golden::kIdentityEncoding);
  EXPECT_EQ(to_hex(encode(make_element({1, -1}, 128))), "4745010002"
                                                        "0000000101"
                                                        "00000001ff"
                                                        "000000020080");
}

TEST(Encoding, RoundTripAndInjectivity) {
  auto d = default_descriptor(mpz_class(1) << 64, 1);
  Drbg rng = Drbg::from_u64(17);
  std::set<Bytes> seen;
  std::set<std::string> values;
  for (int i = 0; i < 10000; ++i) {
    GroupElement a = random_element(d, rng);
    Bytes enc = encode(a);
    ASSERT_EQ(decode(enc, d), a);
    seen.insert(enc);
    values.insert(to_string(a));
  }
  EXPECT_EQ(seen.size(), values.size());
}

namespace {

DecodeErrorKind decode_kind(const Bytes& data, const PlatformDescriptor& d) {
  try {
    decode(data, d);
  } catch (const DecodeError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decoded without error: " << to_hex(data);
  return DecodeErrorKind::InvalidField;
}

}  // namespace

TEST(Encoding, DecodeErrorsAreClassified) {
  auto d = toy();
  Bytes good = encode(make_element({1, 2}, 3));

  Bytes magic = good;
  magic[0] = 0x00;
  EXPECT_EQ(decode_kind(magic, d), DecodeErrorKind::BadMagic);

  Bytes version = good;
  version[2] = 0x02;
  EXPECT_EQ(decode_kind(version, d), DecodeErrorKind::UnsupportedVersion);

  Bytes dim = good;
  dim[4] = 0x03;
  EXPECT_EQ(decode_kind(dim, d), DecodeErrorKind::DimensionMismatch);

  Bytes trailing = good;
  trailing.push_back(0x00);
  EXPECT_EQ(decode_kind(trailing, d), DecodeErrorKind::TrailingBytes);

  Bytes shortened(good.begin(), good.end() - 1);
  EXPECT_EQ(decode_kind(shortened, d), DecodeErrorKind::MalformedLength);

  Bytes padded = from_hex("4745010002" "0000000101" "000000020002" "0000000103");
  EXPECT_EQ(decode_kind(padded, d), DecodeErrorKind::NonCanonicalInteger);
}

TEST(CentralizerProbe, RejectsIdentity) {
  auto d = toy();
  Drbg rng = Drbg::from_u64(18);
  EXPECT_THROW(centralizer_probe(identity(d), d, rng, 10), std::invalid_argument);
}

TEST(CentralizerProbe, ShiftGeneratorHasCyclicCentralizer) {
  auto d = toy();
  Drbg rng = Drbg::from_u64(19);
  EXPECT_TRUE(centralizer_probe(make_element({0, 0}, 1), d, rng, 1000).empty());

  // Brute force at tiny bounds: only powers of t commute with t.
  auto o = oracle::default_group();
  GroupElement t = make_element({0, 0}, 1);
  for (long a = -3; a <= 3; ++a)
    for (long b = -3; b <= 3; ++b)
      for (long k = -3; k <= 3; ++k) {
        GroupElement h = make_element({a, b}, k);
        bool commutes = o.mul(h, t) == o.mul(t, h);
        EXPECT_EQ(commutes, a == 0 && b == 0) << h;
      }
}

TEST(CentralizerProbe, AbelianDescriptorIsFlagged) {
  PlatformDescriptor abelian(IntMatrix::identity(2), 8, 8);
  Drbg rng = Drbg::from_u64(20);
  EXPECT_FALSE(centralizer_probe(make_element({1, 2}, 1), abelian, rng, 50).empty());
  EXPECT_FALSE(abelian.has_exponential_growth());
  EXPECT_TRUE(toy().has_exponential_growth());
}

TEST(CentralizerProbe, TranslationsAreRejected) {
  // A pure translation commutes with every other translation.
  auto d = toy();
  Drbg rng = Drbg::from_u64(21);
  EXPECT_FALSE(centralizer_probe(make_element({3, 1}, 0), d, rng, 0).empty());
}

TEST(Growth, BallRatiosExceedThreshold) {
  auto sizes = ball_sizes(toy(), 5);
  ASSERT_EQ(sizes.size(), 6u);
  EXPECT_EQ(sizes[0], 1u);
  EXPECT_EQ(sizes[1], 7u);
  for (std::size_t r = 3; r <= 5; ++r) {
    double ratio = static_cast<double>(sizes[r]) / static_cast<double>(sizes[r - 1]);
    EXPECT_GT(ratio, 1.5) << "r=" << r << " sizes " << sizes[r - 1] << " -> " << sizes[r];
  }
}

TEST(Descriptor, RejectsNonUnimodularAction) {
  EXPECT_THROW(PlatformDescriptor(IntMatrix{{2, 0}, {0, 1}}, 8, 8), std::invalid_argument);
  EXPECT_THROW(PlatformDescriptor(IntMatrix{{2, 1}, {1, 1}}, 1, 8), std::invalid_argument);
}

TEST(Descriptor, FieldsRoundTripAndIdIsStable) {
  auto d = default_descriptor(mpz_class(1) << 64, 1);
  Bytes fields = d.encode_fields();
  ByteReader in(fields, "descriptor");
  auto back = PlatformDescriptor::decode_fields(in);
  EXPECT_TRUE(back == d);
  EXPECT_EQ(back.descriptor_id(), d.descriptor_id());
  EXPECT_NE(toy().descriptor_id(), d.descriptor_id());
}
