#include <doctest.h>

#include <random>

#include "oracle/oracle.hpp"
#include "tensorcore/posit.hpp"
#include "tensorcore/rational.hpp"

using namespace tc;

namespace {

Posit p8(std::uint64_t bits) { return Posit::from_bits(bits, PositConfig(8, 2)); }

}  // namespace

TEST_CASE("config limits") {
  CHECK(kPosit32.max_scale() == 120);
  CHECK(PositConfig(8, 2).max_scale() == 24);
  CHECK(PositConfig(8, 0).max_scale() == 6);
  CHECK_THROWS_AS(PositConfig(2, 0), std::invalid_argument);
  CHECK_THROWS_AS(PositConfig(65, 2), std::invalid_argument);
  CHECK_THROWS_AS(PositConfig(8, 6), std::invalid_argument);
}

TEST_CASE("decode examples") {
  CHECK(to_rational(p8(0x40)) == 1);
  CHECK(p8(0x00).is_zero());
  CHECK(decode(p8(0x00)).kind == DecodedReal::Kind::zero);
  CHECK(p8(0x80).is_nar());
  CHECK(decode(p8(0x80)).kind == DecodedReal::Kind::nar);
  const DecodedReal d = decode(p8(0x70));
  CHECK(d.kind == DecodedReal::Kind::finite);
  CHECK(d.scale == 8);
  CHECK(to_rational(p8(0x70)) == 256);
  CHECK(to_rational(Posit::maxpos(PositConfig(8, 2))) == pow2(24));
  CHECK(to_rational(Posit::minpos(PositConfig(8, 2))) == pow2(-24));
}

TEST_CASE("encode examples") {
  const PositConfig c(8, 2);
  CHECK(encode_round(mpq_class(1), c).bits() == 0x40);
  CHECK(encode_round(pow2(300), c).bits() == 0x7f);
  CHECK(encode_round(-pow2(300), c).bits() == 0x81);
  CHECK(encode_round(pow2(-300), c).bits() == 0x01);
  CHECK(encode_round(mpq_class(0), c).bits() == 0x00);
  CHECK(encode_round(mpq_class(256), c).bits() == 0x70);
}

TEST_CASE("decoder agrees with the bitwise oracle") {
  for (int n : {8, 12, 16}) {
    for (int es : {0, 1, 2}) {
      const PositConfig c(n, es);
      for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
        const Posit p = Posit::from_bits(b, c);
        const auto want = oracle::posit_value(b, n, es);
        if (!want) {
          REQUIRE(p.is_nar());
          continue;
        }
        REQUIRE(to_rational(p) == *want);
      }
    }
  }
}

TEST_CASE("exhaustive round trip, monotonicity and negation") {
  for (int n : {8, 12, 16}) {
    const PositConfig c(n, 2);
    const std::uint64_t count = std::uint64_t{1} << n;
    std::optional<mpq_class> prev;
    // Walk patterns in signed order: most negative to most positive.
    for (std::uint64_t k = 1; k < count; ++k) {
      const std::uint64_t b = (c.nar_bits() + k) & c.mask();
      const Posit p = Posit::from_bits(b, c);
      const mpq_class v = to_rational(p);
      REQUIRE(encode_round(v, c) == p);
      REQUIRE(encode_round(decode(p), c) == p);
      if (prev) REQUIRE(*prev < v);
      prev = v;
      REQUIRE(to_rational(-p) == -v);
      REQUIRE((-p).bits() == ((~b + 1) & c.mask()));
    }
    CHECK((-Posit::nar(c)).is_nar());
    CHECK(encode_round(DecodedReal{DecodedReal::Kind::nar, 1, 0, 0, 0}, c).is_nar());
  }
}

TEST_CASE("ties go to the even pattern") {
  const PositConfig c(8, 2);
  for (std::uint64_t b = 1; b + 1 < c.nar_bits(); ++b) {
    const mpq_class lo = to_rational(Posit::from_bits(b, c));
    const mpq_class hi = to_rational(Posit::from_bits(b + 1, c));
    const auto mid = oracle::posit_value(2 * b + 1, 9, 2);
    REQUIRE(mid);
    REQUIRE(lo < *mid);
    REQUIRE(*mid < hi);
    const std::uint64_t even = (b % 2 == 0) ? b : b + 1;
    REQUIRE(encode_round(*mid, c).bits() == even);
    REQUIRE(encode_round(-*mid, c).bits() == ((~even + 1) & c.mask()));
  }
}

TEST_CASE("arith matches the rational oracle exhaustively for 8 bits") {
  for (int es : {0, 2}) {
    const PositConfig c(8, es);
    for (std::uint64_t a = 0; a < 256; ++a) {
      for (std::uint64_t b = 0; b < 256; ++b) {
        const Posit x = Posit::from_bits(a, c);
        const Posit y = Posit::from_bits(b, c);
        const auto xv = oracle::posit_value(a, 8, es);
        const auto yv = oracle::posit_value(b, 8, es);
        for (ArithOp op : {ArithOp::add, ArithOp::sub, ArithOp::mul, ArithOp::div}) {
          const Posit r = arith(op, x, y);
          if (!xv || !yv || (op == ArithOp::div && *yv == 0)) {
            REQUIRE(r.is_nar());
            continue;
          }
          mpq_class exact;
          switch (op) {
            case ArithOp::add: exact = *xv + *yv; break;
            case ArithOp::sub: exact = *xv - *yv; break;
            case ArithOp::mul: exact = *xv * *yv; break;
            case ArithOp::div: exact = *xv / *yv; break;
          }
          REQUIRE(r.bits() == oracle::round_posit(exact, 8, es));
        }
      }
    }
  }
}

TEST_CASE("posit32 arith on random operands matches the oracle") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t a = oracle::random_posit_bits(rng, 32);
    const std::uint64_t b = oracle::random_posit_bits(rng, 32);
    const Posit x = Posit::from_bits(a, kPosit32);
    const Posit y = Posit::from_bits(b, kPosit32);
    const mpq_class xv = *oracle::posit_value(a, 32, 2);
    const mpq_class yv = *oracle::posit_value(b, 32, 2);
    REQUIRE((x + y).bits() == oracle::round_posit(xv + yv, 32, 2));
    REQUIRE((x - y).bits() == oracle::round_posit(xv - yv, 32, 2));
    REQUIRE((x * y).bits() == oracle::round_posit(xv * yv, 32, 2));
    if (yv != 0) REQUIRE((x / y).bits() == oracle::round_posit(xv / yv, 32, 2));
  }
}

TEST_CASE("arith identities") {
  const Posit one = Posit::one(kPosit32);
  const Posit zero = Posit::zero(kPosit32);
  const Posit nar = Posit::nar(kPosit32);
  CHECK(one + zero == one);
  CHECK((nar * one).is_nar());
  CHECK((one / zero).is_nar());
  CHECK((zero / zero).is_nar());
  CHECK((one - one).is_zero());
}

TEST_CASE("compare follows signed pattern order") {
  for (int n : {8, 12}) {
    const PositConfig c(n, 2);
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t a = 0; a < count; a += (n == 12 ? 7 : 1)) {
      for (std::uint64_t b = 0; b < count; b += (n == 12 ? 5 : 1)) {
        const Posit x = Posit::from_bits(a, c);
        const Posit y = Posit::from_bits(b, c);
        const auto got = compare(x, y);
        if (x.is_nar() || y.is_nar()) {
          REQUIRE(got == std::partial_ordering::unordered);
          continue;
        }
        const mpq_class xv = to_rational(x);
        const mpq_class yv = to_rational(y);
        const auto want = xv < yv ? std::partial_ordering::less
                                  : (xv > yv ? std::partial_ordering::greater : std::partial_ordering::equivalent);
        REQUIRE(got == want);
        REQUIRE(got == (x.signed_bits() <=> y.signed_bits()));
      }
    }
  }
  CHECK(compare(Posit::minpos(kPosit32), Posit::one(kPosit32)) == std::partial_ordering::less);
}

TEST_CASE("binary64 conversions") {
  CHECK(to_double(Posit::one(kPosit32)) == 1.0);
  CHECK(from_double(0.1, kPosit32).bits() == oracle::round_posit(mpq_class(0.1), 32, 2));
  CHECK(from_double(std::nan(""), kPosit32).is_nar());
  const PositConfig c16(16, 2);
  for (std::uint64_t b = 0; b < (1u << 16); ++b) {
    const Posit p = Posit::from_bits(b, c16);
    if (p.is_nar()) continue;
    const auto d = to_double(p);
    REQUIRE(d);
    REQUIRE(from_double(*d, c16) == p);
  }
  // 1 + 2^-59 needs more fraction bits than binary64 has.
  const Posit fine = Posit::from_bits(0x4000000000000001, PositConfig(64, 2));
  CHECK_FALSE(to_double(fine).has_value());
  CHECK(to_double_lossy(fine) == 1.0);
  CHECK(to_double(Posit::maxpos(PositConfig(64, 2))) == std::ldexp(1.0, 248));
}

TEST_CASE("hex and decimal renderings") {
  CHECK(to_hex(Posit::one(kPosit32)) == "0x40000000");
  CHECK(to_hex(Posit::from_bits(0x1, PositConfig(12, 2))) == "0x001");
  CHECK(parse_hex("0x40000000", kPosit32) == Posit::one(kPosit32));
  CHECK_THROWS_AS(parse_hex("0x4000000", kPosit32), std::invalid_argument);
  CHECK_THROWS_AS(parse_hex("40000000", kPosit32), std::invalid_argument);
  CHECK_THROWS_AS(parse_hex("0x4000000g", kPosit32), std::invalid_argument);
  CHECK(to_decimal_string(Posit::one(kPosit32)) == "1.0");
  CHECK(to_decimal_string(Posit::nar(kPosit32)) == "NaR");
  CHECK(to_decimal_string(encode_round(mpq_class(-3, 4), kPosit32)) == "-0.75");
}

TEST_CASE("wide formats") {
  const PositConfig c(64, 2);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Posit p = Posit::from_bits(oracle::random_posit_bits(rng, 64), c);
    REQUIRE(encode_round(to_rational(p), c) == p);
  }
  const PositConfig c40(40, 3);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t a = oracle::random_posit_bits(rng, 40);
    const std::uint64_t b = oracle::random_posit_bits(rng, 40);
    const mpq_class exact = *oracle::posit_value(a, 40, 3) * *oracle::posit_value(b, 40, 3);
    REQUIRE((Posit::from_bits(a, c40) * Posit::from_bits(b, c40)).bits() == oracle::round_posit(exact, 40, 3));
  }
}
