#include "tensorcore/rational.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tc {

namespace {

long bit_length(const mpz_class& z) { return z == 0 ? 0 : static_cast<long>(mpz_sizeinbase(z.get_mpz_t(), 2)); }

// floor(log2(num/den)) for positive num, den.
long floor_log2(const mpz_class& num, const mpz_class& den) {
  long s = bit_length(num) - bit_length(den);
  mpz_class lhs = num;
  mpz_class rhs = den;
  if (s >= 0) rhs <<= s; else lhs <<= -s;
  if (lhs < rhs) --s;
  return s;
}

mpz_class shifted(const mpz_class& z, long by) {
  mpz_class r = z;
  if (by > 0) mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), by);
  return r;
}

// Nearest-even integer m with |x| ~ m * 2^q, for positive num/den.
mpz_class round_scaled(const mpz_class& num, const mpz_class& den, long q) {
  const mpz_class n = shifted(num, q < 0 ? -q : 0);
  const mpz_class d = shifted(den, q > 0 ? q : 0);
  mpz_class m, r;
  mpz_fdiv_qr(m.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
  const int cmp = ::cmp(mpz_class(r * 2), d);
  if (cmp > 0 || (cmp == 0 && mpz_odd_p(m.get_mpz_t()))) ++m;
  return m;
}

template <class T>
T to_ieee(const mpq_class& x) {
  using lim = std::numeric_limits<T>;
  if (x == 0) return T(0);
  const bool negative = x < 0;
  const mpz_class num = abs(x.get_num());
  const mpz_class& den = x.get_den();
  const long s = floor_log2(num, den);
  const long emin = lim::min_exponent - 1;
  const long p = lim::digits;
  if (s > lim::max_exponent) return negative ? -lim::infinity() : lim::infinity();
  const long q = (s > emin ? s : emin) - (p - 1);
  const mpz_class m = round_scaled(num, den, q);
  // m <= 2^p so the conversion and scaling below are exact (or overflow to inf).
  const T mag = std::ldexp(static_cast<T>(m.get_d()), static_cast<int>(q));
  return negative ? -mag : mag;
}

}  // namespace

mpq_class pow2(long exponent) {
  mpq_class r(1);
  if (exponent >= 0) {
    mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(), exponent);
  } else {
    mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), -exponent);
  }
  return r;
}

mpq_class to_rational(const Posit& p) {
  const DecodedReal d = decode(p);
  if (d.kind == DecodedReal::Kind::nar) throw std::domain_error("NaR has no real value");
  if (d.kind == DecodedReal::Kind::zero) return 0;
  mpz_class sig;
  mpz_import(sig.get_mpz_t(), 1, -1, sizeof(std::uint64_t), 0, 0, &d.significand);
  mpq_class r(sig);
  r *= pow2(d.scale - d.fraction_width);
  if (d.sign < 0) r = -r;
  return r;
}

mpq_class to_rational(const Quire& q) {
  if (q.is_nar()) throw std::domain_error("NaR quire has no real value");
  const auto limbs = q.limbs();
  mpz_class v;
  mpz_import(v.get_mpz_t(), limbs.size(), -1, sizeof(std::uint64_t), 0, 0, limbs.data());
  if (q.is_negative()) {
    mpz_class wrap;
    mpz_setbit(wrap.get_mpz_t(), limbs.size() * 64);
    v -= wrap;
  }
  mpq_class r(v);
  r *= pow2(q.config().lsb_scale);
  r.canonicalize();
  return r;
}

mpq_class to_rational(double x) {
  if (!std::isfinite(x)) throw std::domain_error("non-finite binary64 value");
  mpq_class r(x);  // exact
  return r;
}

mpq_class to_rational(float x) { return to_rational(static_cast<double>(x)); }

Posit encode_round(const mpq_class& x, PositConfig cfg) {
  if (x == 0) return Posit::zero(cfg);
  const bool negative = x < 0;
  const mpz_class num = abs(x.get_num());
  const mpz_class& den = x.get_den();
  const long s = floor_log2(num, den);
  if (s > cfg.max_scale()) return negative ? -Posit::maxpos(cfg) : Posit::maxpos(cfg);
  if (s < cfg.min_scale()) return negative ? -Posit::minpos(cfg) : Posit::minpos(cfg);
  // window = floor(|x| * 2^(63 - s)), leading one at bit 63.
  const long q = s - 63;
  const mpz_class n = shifted(num, q < 0 ? -q : 0);
  const mpz_class d = shifted(den, q > 0 ? q : 0);
  mpz_class w, r;
  mpz_fdiv_qr(w.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
  std::uint64_t window = 0;
  mpz_export(&window, nullptr, -1, sizeof(window), 0, 0, w.get_mpz_t());
  return round_to_posit(negative, s, window, r != 0, cfg);
}

float to_binary32(const mpq_class& x) { return to_ieee<float>(x); }
double to_binary64(const mpq_class& x) { return to_ieee<double>(x); }

mpq_class parse_decimal(std::string_view text) {
  auto fail = [&]() -> mpq_class { throw std::invalid_argument("malformed decimal value: " + std::string(text)); };
  if (text.empty()) return fail();
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const mpq_class n = parse_decimal(text.substr(0, slash));
    const mpq_class d = parse_decimal(text.substr(slash + 1));
    if (d == 0) return fail();
    return n / d;
  }
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') negative = text[i++] == '-';
  mpz_class digits = 0;
  long frac_digits = 0;
  bool any = false;
  bool dot = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      any = true;
      if (dot) ++frac_digits;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!any) return fail();
  long exp10 = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return fail();
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
    if (i >= text.size()) return fail();
    for (; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) return fail();
      exp10 = exp10 * 10 + (text[i] - '0');
      if (exp10 > 100000) return fail();
    }
    if (eneg) exp10 = -exp10;
  }
  exp10 -= frac_digits;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
  mpq_class r = exp10 >= 0 ? mpq_class(digits * scale) : mpq_class(digits, scale);
  r.canonicalize();
  return negative ? mpq_class(-r) : r;
}

}  // namespace tc
