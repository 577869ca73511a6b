#include "tensorcore/posit.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tc {

namespace {

using u128 = unsigned __int128;

// Collects the leading `capacity` bits of a bit string appended piecewise;
// anything beyond capacity only contributes to `sticky`.
class BitSink {
 public:
  explicit BitSink(int capacity) : capacity_(capacity) {}

  void put(std::uint64_t value, int width) {
    if (width <= 0) return;
    const int room = capacity_ - filled_;
    const int take = room < width ? room : width;
    if (take > 0) {
      const std::uint64_t head = take == width ? value : value >> (width - take);
      acc_ = (take == 64 ? 0 : acc_ << take) | head;
      filled_ += take;
    }
    if (take < width) {
      const int rest = width - take;
      const std::uint64_t tail = rest == 64 ? value : value & ((std::uint64_t{1} << rest) - 1);
      sticky_ = sticky_ || tail != 0;
    }
  }

  void put_run(bool ones, std::int64_t count) {
    while (count > 0) {
      const int chunk = count > 64 ? 64 : static_cast<int>(count);
      const std::uint64_t v = ones ? (chunk == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << chunk) - 1) : 0;
      put(v, chunk);
      count -= chunk;
    }
  }

  // Left-aligns whatever was collected to exactly `capacity_` bits.
  std::uint64_t bits() const {
    const int missing = capacity_ - filled_;
    return missing >= 64 ? 0 : acc_ << missing;
  }
  bool sticky() const { return sticky_; }

 private:
  int capacity_;
  int filled_ = 0;
  std::uint64_t acc_ = 0;
  bool sticky_ = false;
};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Finite operand normalized so that bit 63 of `window` is the leading one.
struct Unpacked {
  bool negative = false;
  std::int64_t scale = 0;
  std::uint64_t window = 0;
};

Unpacked unpack(const DecodedReal& d) {
  const int lead = std::bit_width(d.significand) - 1;
  return {d.sign < 0, static_cast<std::int64_t>(d.scale) - d.fraction_width + lead,
          d.significand << (63 - lead)};
}

// Rounds an exact 128-bit magnitude with leading-one exponent `scale`.
Posit round_u128(bool negative, std::int64_t scale, u128 mag, bool sticky, PositConfig cfg) {
  const int top = 127 - (static_cast<std::uint64_t>(mag >> 64) != 0
                             ? std::countl_zero(static_cast<std::uint64_t>(mag >> 64))
                             : 64 + std::countl_zero(static_cast<std::uint64_t>(mag)));
  std::uint64_t window;
  if (top >= 63) {
    const int drop = top - 63;
    window = static_cast<std::uint64_t>(mag >> drop);
    if (drop > 0) sticky = sticky || (mag & ((u128{1} << drop) - 1)) != 0;
  } else {
    window = static_cast<std::uint64_t>(mag) << (63 - top);
  }
  return round_to_posit(negative, scale, window, sticky, cfg);
}

Posit add_finite(Unpacked x, Unpacked y, PositConfig cfg) {
  if (y.scale > x.scale || (y.scale == x.scale && y.window > x.window)) std::swap(x, y);
  const std::int64_t shift = x.scale - y.scale;
  // Leading one of the larger operand sits at bit 125, leaving a carry bit.
  const u128 big = u128{x.window} << 62;
  const u128 small_full = u128{y.window} << 62;
  u128 small = 0;
  bool sticky = false;
  if (shift >= 126) {
    sticky = true;
  } else {
    small = small_full >> shift;
    sticky = shift > 0 && (small_full & ((u128{1} << shift) - 1)) != 0;
  }
  u128 sum;
  if (x.negative == y.negative) {
    sum = big + small;
  } else {
    sum = big - small - (sticky ? 1 : 0);
  }
  if (sum == 0) return Posit::zero(cfg);
  const int top = 127 - (static_cast<std::uint64_t>(sum >> 64) != 0
                             ? std::countl_zero(static_cast<std::uint64_t>(sum >> 64))
                             : 64 + std::countl_zero(static_cast<std::uint64_t>(sum)));
  return round_u128(x.negative, x.scale + (top - 125), sum, sticky, cfg);
}

}  // namespace

PositConfig::PositConfig(int nbits, int es) : nbits_(nbits), es_(es) {
  if (nbits < 3 || nbits > 64) throw std::invalid_argument("posit width must be in 3..64");
  if (es < 0 || es > nbits - 3) throw std::invalid_argument("posit es must be in 0..nbits-3");
  if (es > 24) throw std::invalid_argument("posit es above 24 is not supported");
}

std::int64_t Posit::signed_bits() const {
  const int n = cfg_.nbits();
  if (n == 64) return static_cast<std::int64_t>(bits_);
  const std::uint64_t sign = std::uint64_t{1} << (n - 1);
  return static_cast<std::int64_t>((bits_ ^ sign)) - static_cast<std::int64_t>(sign);
}

DecodedReal decode(std::uint64_t bits, PositConfig cfg) {
  bits &= cfg.mask();
  if (bits == 0) return {};
  if (bits == cfg.nar_bits()) return {DecodedReal::Kind::nar};
  const int n = cfg.nbits();
  const int es = cfg.es();
  const bool negative = ((bits >> (n - 1)) & 1) != 0;
  const std::uint64_t mag = negative ? (~bits + 1) & cfg.mask() : bits;

  // Body (everything after the sign bit) left-aligned in a 64-bit word.
  const int body_len = n - 1;
  std::uint64_t body = mag << (64 - body_len);
  const bool ones = (body >> 63) != 0;
  int run = ones ? std::countl_one(body) : std::countl_zero(body);
  if (run > body_len) run = body_len;
  const int k = ones ? run - 1 : -run;
  const int consumed = run + 1 < body_len ? run + 1 : body_len;
  int rest = body_len - consumed;
  body = consumed >= 64 ? 0 : body << consumed;

  const int exp_bits = rest < es ? rest : es;
  int exponent = exp_bits == 0 ? 0 : static_cast<int>(body >> (64 - exp_bits));
  exponent <<= (es - exp_bits);
  rest -= exp_bits;
  body = exp_bits == 0 ? body : body << exp_bits;

  const std::uint64_t fraction = rest == 0 ? 0 : body >> (64 - rest);
  DecodedReal d;
  d.kind = DecodedReal::Kind::finite;
  d.sign = negative ? -1 : 1;
  d.scale = k * (1 << es) + exponent;
  d.fraction_width = rest;
  d.significand = (std::uint64_t{1} << rest) | fraction;
  return d;
}

Posit round_to_posit(bool negative, std::int64_t scale, std::uint64_t window, bool sticky,
                     PositConfig cfg) {
  const int n = cfg.nbits();
  std::uint64_t body;
  if (scale > cfg.max_scale()) {
    body = cfg.maxpos_bits();
  } else if (scale < cfg.min_scale()) {
    body = cfg.minpos_bits();
  } else {
    const std::int64_t useed_log = std::int64_t{1} << cfg.es();
    const std::int64_t k = floor_div(scale, useed_log);
    const std::uint64_t exponent = static_cast<std::uint64_t>(scale - k * useed_log);

    // n-1 body bits plus one guard bit.
    BitSink sink(n);
    if (k >= 0) {
      sink.put_run(true, k + 1);
      sink.put_run(false, 1);
    } else {
      sink.put_run(false, -k);
      sink.put_run(true, 1);
    }
    sink.put(exponent, cfg.es());
    sink.put(window & ~(std::uint64_t{1} << 63), 63);

    const std::uint64_t kept = sink.bits() & cfg.mask();
    const bool guard = (kept & 1) != 0;
    sticky = sticky || sink.sticky();
    body = kept >> 1;
    if (guard && (sticky || (body & 1) != 0)) ++body;
    if (body == 0) body = cfg.minpos_bits();
    if (body > cfg.maxpos_bits()) body = cfg.maxpos_bits();
  }
  const std::uint64_t bits = negative ? (~body + 1) & cfg.mask() : body;
  return Posit::from_bits(bits, cfg);
}

Posit encode_round(const DecodedReal& x, PositConfig cfg) {
  switch (x.kind) {
    case DecodedReal::Kind::zero:
      return Posit::zero(cfg);
    case DecodedReal::Kind::nar:
      return Posit::nar(cfg);
    case DecodedReal::Kind::finite:
      break;
  }
  if (x.significand == 0) return Posit::zero(cfg);
  const Unpacked u = unpack(x);
  return round_to_posit(u.negative, u.scale, u.window, false, cfg);
}

Posit arith(ArithOp op, const Posit& a, const Posit& b) {
  if (a.config() != b.config()) throw std::invalid_argument("posit operands have different formats");
  const PositConfig cfg = a.config();
  if (a.is_nar() || b.is_nar()) return Posit::nar(cfg);

  switch (op) {
    case ArithOp::sub:
      return arith(ArithOp::add, a, -b);
    case ArithOp::add: {
      if (a.is_zero()) return b;
      if (b.is_zero()) return a;
      return add_finite(unpack(decode(a)), unpack(decode(b)), cfg);
    }
    case ArithOp::mul: {
      if (a.is_zero() || b.is_zero()) return Posit::zero(cfg);
      const Unpacked x = unpack(decode(a));
      const Unpacked y = unpack(decode(b));
      // Product of two [2^63, 2^64) windows lies in [2^126, 2^128).
      const u128 prod = u128{x.window} * y.window;
      const bool carry = (prod >> 127) != 0;
      return round_u128(x.negative != y.negative, x.scale + y.scale + (carry ? 1 : 0), prod, false, cfg);
    }
    case ArithOp::div: {
      if (b.is_zero()) return Posit::nar(cfg);
      if (a.is_zero()) return Posit::zero(cfg);
      const Unpacked x = unpack(decode(a));
      const Unpacked y = unpack(decode(b));
      const u128 num = u128{x.window} << 64;
      const u128 q = num / y.window;
      const bool rem = (num % y.window) != 0;
      // q lies in (2^63, 2^65): leading one at bit 64 iff x.window >= y.window.
      const bool high = (q >> 64) != 0;
      return round_u128(x.negative != y.negative, x.scale - y.scale + (high ? 0 : -1), q, rem, cfg);
    }
  }
  return Posit::nar(cfg);
}

Posit operator-(const Posit& a) {
  return Posit::from_bits(~a.bits() + 1, a.config());
}

std::partial_ordering compare(const Posit& a, const Posit& b) {
  if (a.config() != b.config()) throw std::invalid_argument("posit operands have different formats");
  if (a.is_nar() || b.is_nar()) return std::partial_ordering::unordered;
  return a.signed_bits() <=> b.signed_bits();
}

std::optional<double> to_double(const Posit& p) {
  const DecodedReal d = decode(p);
  if (d.kind == DecodedReal::Kind::nar) return std::nullopt;
  if (d.kind == DecodedReal::Kind::zero) return 0.0;
  std::uint64_t sig = d.significand;
  int lsb_exp = d.scale - d.fraction_width;
  const int tz = std::countr_zero(sig);
  sig >>= tz;
  lsb_exp += tz;
  const int width = std::bit_width(sig);
  const int lead_exp = lsb_exp + width - 1;
  if (width > std::numeric_limits<double>::digits) return std::nullopt;
  if (lead_exp > std::numeric_limits<double>::max_exponent - 1) return std::nullopt;
  if (lsb_exp < std::numeric_limits<double>::min_exponent - std::numeric_limits<double>::digits) {
    return std::nullopt;
  }
  return d.sign * std::ldexp(static_cast<double>(sig), lsb_exp);
}

double to_double_lossy(const Posit& p) {
  if (p.is_nar()) return std::numeric_limits<double>::quiet_NaN();
  if (auto exact = to_double(p)) return *exact;
  const DecodedReal d = decode(p);
  return d.sign * std::ldexp(static_cast<double>(d.significand), d.scale - d.fraction_width);
}

Posit from_double(double x, PositConfig cfg) {
  if (!std::isfinite(x)) return Posit::nar(cfg);
  if (x == 0.0) return Posit::zero(cfg);
  const auto raw = std::bit_cast<std::uint64_t>(x);
  const bool negative = (raw >> 63) != 0;
  const int biased = static_cast<int>((raw >> 52) & 0x7ff);
  std::uint64_t frac = raw & ((std::uint64_t{1} << 52) - 1);
  DecodedReal d;
  d.kind = DecodedReal::Kind::finite;
  d.sign = negative ? -1 : 1;
  if (biased == 0) {
    d.significand = frac;
    d.fraction_width = 52;
    d.scale = -1022;
  } else {
    d.significand = frac | (std::uint64_t{1} << 52);
    d.fraction_width = 52;
    d.scale = biased - 1023;
  }
  return encode_round(d, cfg);
}

std::string to_hex(const Posit& p) {
  static constexpr char kDigits[] = "0123456789abcdef";
  const int digits = p.config().hex_digits();
  std::string out = "0x";
  out.resize(2 + digits);
  std::uint64_t v = p.bits();
  for (int i = digits - 1; i >= 0; --i) {
    out[2 + i] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

Posit parse_hex(std::string_view text, PositConfig cfg) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
    throw std::invalid_argument("expected 0x-prefixed hex pattern: " + std::string(text));
  }
  const std::string_view digits = text.substr(2);
  if (static_cast<int>(digits.size()) != cfg.hex_digits()) {
    throw std::invalid_argument("hex pattern " + std::string(text) + " does not have " +
                                std::to_string(cfg.hex_digits()) + " digits");
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, 16);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw std::invalid_argument("malformed hex pattern: " + std::string(text));
  }
  if ((v & ~cfg.mask()) != 0) throw std::invalid_argument("hex pattern exceeds posit width: " + std::string(text));
  return Posit::from_bits(v, cfg);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string to_decimal_string(const Posit& p) {
  if (p.is_nar()) return "NaR";
  return format_double(to_double_lossy(p));
}

}  // namespace tc
