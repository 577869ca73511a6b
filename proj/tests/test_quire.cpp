#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracle/oracle.hpp"
#include "tensorcore/quire.hpp"
#include "tensorcore/rational.hpp"

using namespace tc;

namespace {

std::vector<Posit> random_posits(std::mt19937_64& rng, std::size_t n, PositConfig c) {
  std::vector<Posit> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(Posit::from_bits(oracle::random_posit_bits(rng, c.nbits()), c));
  return v;
}

mpq_class oracle_dot(const std::vector<Posit>& x, const std::vector<Posit>& y) {
  mpq_class s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const PositConfig c = x[i].config();
    s += *oracle::posit_value(x[i].bits(), c.nbits(), c.es()) * *oracle::posit_value(y[i].bits(), c.nbits(), c.es());
  }
  return s;
}

}  // namespace

TEST_CASE("quire geometry") {
  for (int n : {8, 16, 32, 64}) {
    const QuireConfig q = QuireConfig::for_posit(PositConfig(n, 2));
    CHECK(q.total_width == 16 * n);
    CHECK(q.carry_bits == 31);
    CHECK(q.lsb_scale == -2 * (n - 2) * 4);
  }
  const QuireConfig q0 = QuireConfig::for_posit(PositConfig(8, 0));
  CHECK(q0.total_width == 4 * 6 + 1 + 31);
}

TEST_CASE("fresh quires") {
  const Quire a = quire_new(kPosit32);
  const Quire b = quire_new(kPosit32);
  CHECK(a == b);
  CHECK(a.is_zero());
  CHECK(quire_to_posit(a).is_zero());
  CHECK(a.to_hex() == "0x" + std::string(128, '0'));
}

TEST_CASE("single products") {
  const Posit one = Posit::one(kPosit32);
  const Quire q = quire_fma(quire_new(kPosit32), one, one);
  CHECK(to_rational(q) == 1);
  CHECK(quire_to_posit(q) == one);

  const Posit minpos = Posit::minpos(kPosit32);
  const Quire lsb = quire_fma(quire_new(kPosit32), minpos, minpos);
  CHECK(lsb.bit(0));
  for (int i = 1; i < lsb.config().total_width; ++i) REQUIRE_FALSE(lsb.bit(i));

  const Posit maxpos = Posit::maxpos(kPosit32);
  Quire big = quire_fma(quire_new(kPosit32), maxpos, maxpos);
  big = quire_add_quire(big, big);
  CHECK(to_rational(big) == 2 * to_rational(maxpos) * to_rational(maxpos));
  CHECK(quire_to_posit(big) == maxpos);

  const Quire neg = quire_fma(quire_new(kPosit32), -one, one);
  CHECK(neg.is_negative());
  CHECK(quire_to_posit(neg) == -one);
  // -1 = -2^240 with 512 bits: 272 set high bits, 240 clear low bits.
  CHECK(neg.to_hex() == "0x" + std::string(68, 'f') + std::string(60, '0'));
}

TEST_CASE("NaR handling") {
  const Posit nar = Posit::nar(kPosit32);
  const Posit one = Posit::one(kPosit32);
  const Quire q = quire_fma(quire_new(kPosit32), nar, one);
  CHECK(q.is_nar());
  CHECK(quire_to_posit(q).is_nar());
  CHECK(quire_fma(q, one, one).is_nar());
  CHECK(quire_add_quire(quire_new(kPosit32), q).is_nar());
  CHECK(q.to_hex() == "0x8" + std::string(127, '0'));
}

TEST_CASE("carry overflow poisons the quire") {
  const PositConfig c(8, 2);
  const Posit maxpos = Posit::maxpos(c);
  Quire q = quire_fma(quire_new(c), maxpos, maxpos);
  // maxpos^2 = 2^48 sits at bit 96; the 128-bit register holds 31 more bits.
  for (int i = 0; i < 30; ++i) {
    q = quire_add_quire(q, q);
    REQUIRE_FALSE(q.is_nar());
  }
  CHECK(to_rational(q) == pow2(48 + 30));
  q = quire_add_quire(q, q);
  CHECK(q.is_nar());

  Quire neg = quire_fma(quire_new(c), -maxpos, maxpos);
  for (int i = 0; i < 31; ++i) neg = quire_add_quire(neg, neg);
  CHECK_FALSE(neg.is_nar());
  CHECK(to_rational(neg) == -pow2(48 + 31));
  neg = quire_add_quire(neg, neg);
  CHECK(neg.is_nar());
}

TEST_CASE("random posit8 accumulations are exact") {
  std::mt19937_64 rng(1);
  const PositConfig c(8, 2);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng() % 16;
    const auto x = random_posits(rng, n, c);
    const auto y = random_posits(rng, n, c);
    Quire q = quire_new(c);
    for (std::size_t i = 0; i < n; ++i) q = quire_fma(q, x[i], y[i]);
    const mpq_class exact = oracle_dot(x, y);
    REQUIRE(to_rational(q) == exact);
    REQUIRE(quire_to_posit(q).bits() == oracle::round_posit(exact, 8, 2));
  }
}

TEST_CASE("exact_dot examples") {
  const auto v = [](long x) { return encode_round(mpq_class(x), kPosit32); };
  const std::vector<Posit> xs{encode_round(pow2(24), kPosit32), v(1), encode_round(-pow2(24), kPosit32)};
  const std::vector<Posit> ones(3, v(1));
  CHECK(exact_dot(xs, ones) == v(1));
  Posit naive = Posit::zero(kPosit32);
  for (std::size_t i = 0; i < 3; ++i) naive = naive + xs[i] * ones[i];
  CHECK(naive.is_zero());

  CHECK(exact_dot(std::vector<Posit>{}, std::vector<Posit>{}, kPosit32).is_zero());
  const std::vector<Posit> x{v(3), v(-7), v(11)};
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<Posit> e(3, Posit::zero(kPosit32));
    e[k] = v(1);
    CHECK(exact_dot(x, e) == x[k]);
  }
  CHECK_THROWS_AS(exact_dot(x, std::vector<Posit>(2, v(1))), std::invalid_argument);
}

TEST_CASE("split and merge equals one pass; merge is commutative and associative") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    const auto x = random_posits(rng, n, kPosit32);
    const auto y = random_posits(rng, n, kPosit32);
    Quire whole = quire_new(kPosit32);
    for (std::size_t i = 0; i < n; ++i) whole = quire_fma(whole, x[i], y[i]);
    const std::size_t cut1 = rng() % (n + 1);
    const std::size_t cut2 = cut1 + rng() % (n - cut1 + 1);
    Quire a = quire_new(kPosit32);
    Quire b = quire_new(kPosit32);
    Quire c = quire_new(kPosit32);
    for (std::size_t i = 0; i < cut1; ++i) a = quire_fma(a, x[i], y[i]);
    for (std::size_t i = cut1; i < cut2; ++i) b = quire_fma(b, x[i], y[i]);
    for (std::size_t i = cut2; i < n; ++i) c = quire_fma(c, x[i], y[i]);
    REQUIRE(quire_add_quire(quire_add_quire(a, b), c) == whole);
    REQUIRE(quire_add_quire(a, quire_add_quire(b, c)) == whole);
    REQUIRE(quire_add_quire(a, b) == quire_add_quire(b, a));
    REQUIRE(quire_add_quire(a, quire_new(kPosit32)) == a);
  }
}

TEST_CASE("exact_dot matches encode_round of the exact sum and ignores permutation") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    auto x = random_posits(rng, n, kPosit32);
    auto y = random_posits(rng, n, kPosit32);
    const Posit got = exact_dot(x, y);
    REQUIRE(got.bits() == oracle::round_posit(oracle_dot(x, y), 32, 2));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Posit> px;
    std::vector<Posit> py;
    for (auto i : perm) {
      px.push_back(x[i]);
      py.push_back(y[i]);
    }
    REQUIRE(exact_dot(px, py) == got);
  }
}
