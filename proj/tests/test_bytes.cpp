#include "conjsig/bytes.hpp"
#include "conjsig/drbg.hpp"

#include <gtest/gtest.h>

using namespace conjsig;

TEST(IntegerCodec, MinimalTwosComplementVectors) {
  EXPECT_EQ(encode_integer(0), Bytes{});
  EXPECT_EQ(to_hex(encode_integer(1)), "01");
  EXPECT_EQ(to_hex(encode_integer(127)), "7f");
  EXPECT_EQ(to_hex(encode_integer(128)), "0080");
  EXPECT_EQ(to_hex(encode_integer(255)), "00ff");
  EXPECT_EQ(to_hex(encode_integer(256)), "0100");
  EXPECT_EQ(to_hex(encode_integer(-1)), "ff");
  EXPECT_EQ(to_hex(encode_integer(-128)), "80");
  EXPECT_EQ(to_hex(encode_integer(-129)), "ff7f");
  EXPECT_EQ(to_hex(encode_integer(-256)), "ff00");
  EXPECT_EQ(to_hex(encode_integer(-257)), "feff");
}

TEST(IntegerCodec, RejectsRedundantLeadingBytes) {
  EXPECT_FALSE(is_minimal_integer_encoding(from_hex("00")));
  EXPECT_FALSE(is_minimal_integer_encoding(from_hex("0001")));
  EXPECT_FALSE(is_minimal_integer_encoding(from_hex("ff80")));
  EXPECT_TRUE(is_minimal_integer_encoding(from_hex("0080")));
  EXPECT_TRUE(is_minimal_integer_encoding(from_hex("ff7f")));

  Bytes rec;
  put_record(rec, from_hex("0001"));
  ByteReader in(rec, "test");
  try {
    in.integer_record();
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.kind(), DecodeErrorKind::NonCanonicalInteger);
  }
}

TEST(IntegerCodec, RoundTripIsMinimalForRandomIntegers) {
  Drbg rng = Drbg::from_u64(7);
  for (int i = 0; i < 2000; ++i) {
    const unsigned long bits = 1 + rng() % 300;
    mpz_class v = uniform_symmetric(rng, mpz_class(1) << bits);
    Bytes enc = encode_integer(v);
    ASSERT_TRUE(is_minimal_integer_encoding(enc)) << v;
    ASSERT_EQ(decode_integer(enc), v);
  }
}

TEST(Hex, RoundTripAndErrors) {
  Bytes data{0x00, 0x4e, 0x53, 0xff};
  EXPECT_EQ(to_hex(data), "004e53ff");
  EXPECT_EQ(from_hex("004E53FF\n"), data);
  EXPECT_THROW(from_hex("abc"), std::invalid_argument);
  EXPECT_THROW(from_hex("zz"), std::invalid_argument);
}

TEST(ByteReader, ShortInputIsMalformedLength) {
  Bytes data{0x00, 0x00, 0x00, 0x05, 0x01};
  ByteReader in(data, "test");
  try {
    in.record();
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.kind(), DecodeErrorKind::MalformedLength);
  }
}

TEST(Drbg, DeterministicAndSeedSensitive) {
  Drbg a = Drbg::from_u64(1), b = Drbg::from_u64(1), c = Drbg::from_u64(2);
  for (int i = 0; i < 100; ++i) {
    auto x = a();
    EXPECT_EQ(x, b());
    (void)c;
  }
  EXPECT_NE(Drbg::from_u64(1)(), Drbg::from_u64(2)());
}

TEST(Drbg, UniformSymmetricStaysInRange) {
  Drbg rng = Drbg::from_u64(3);
  for (int i = 0; i < 5000; ++i) {
    mpz_class v = uniform_symmetric(rng, 3);
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
  }
}
