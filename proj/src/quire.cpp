#include "tensorcore/quire.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace tc {

namespace {

using u128 = unsigned __int128;

constexpr int kCarryBits = 31;
constexpr int kMaxQuireWidth = 1 << 16;

}  // namespace

QuireConfig QuireConfig::for_posit(PositConfig cfg) {
  QuireConfig q;
  q.carry_bits = kCarryBits;
  q.lsb_scale = 2 * cfg.min_scale();
  const long long width = 4LL * cfg.max_scale() + 1 + kCarryBits;
  if (width > kMaxQuireWidth) throw std::invalid_argument("quire for this posit format is too wide");
  q.total_width = static_cast<int>(width);
  return q;
}

Quire::Quire(PositConfig cfg)
    : cfg_(cfg), qcfg_(QuireConfig::for_posit(cfg)), limbs_(qcfg_.total_width / 64 + 1, 0) {}

bool Quire::is_zero() const {
  if (nar_) return false;
  for (auto l : limbs_) {
    if (l != 0) return false;
  }
  return true;
}

bool Quire::is_negative() const { return !nar_ && (limbs_.back() >> 63) != 0; }

bool Quire::bit(int i) const {
  if (nar_) return i == qcfg_.total_width - 1;
  return ((limbs_[i / 64] >> (i % 64)) & 1) != 0;
}

void Quire::poison() {
  nar_ = true;
  std::fill(limbs_.begin(), limbs_.end(), 0);
}

void Quire::add_shifted(u128 magnitude, int offset, bool negative) {
  const std::size_t first = static_cast<std::size_t>(offset / 64);
  const int shift = offset % 64;
  std::uint64_t parts[3] = {
      static_cast<std::uint64_t>(magnitude << shift),
      static_cast<std::uint64_t>((magnitude << shift) >> 64),
      shift == 0 ? 0 : static_cast<std::uint64_t>(magnitude >> (128 - shift)),
  };
  const std::size_t n = limbs_.size();
  if (!negative) {
    std::uint64_t carry = 0;
    for (std::size_t i = first; i < n; ++i) {
      const std::uint64_t add = i - first < 3 ? parts[i - first] : 0;
      if (i - first >= 3 && carry == 0) break;
      const u128 s = u128{limbs_[i]} + add + carry;
      limbs_[i] = static_cast<std::uint64_t>(s);
      carry = static_cast<std::uint64_t>(s >> 64);
    }
  } else {
    std::uint64_t borrow = 0;
    for (std::size_t i = first; i < n; ++i) {
      const std::uint64_t sub = i - first < 3 ? parts[i - first] : 0;
      if (i - first >= 3 && borrow == 0) break;
      const std::uint64_t before = limbs_[i];
      const std::uint64_t r = before - sub - borrow;
      borrow = (u128{sub} + borrow > before) ? 1 : 0;
      limbs_[i] = r;
    }
  }
}

// The value must stay within total_width-bit two's complement; the spare high
// bits of the limb vector have to be copies of the sign bit.
void Quire::check_overflow() {
  const int w = qcfg_.total_width;
  const bool sign = (limbs_.back() >> 63) != 0;
  for (int i = w - 1; i < static_cast<int>(limbs_.size()) * 64;) {
    const int limb = i / 64;
    const int lo = i % 64;
    const std::uint64_t mask = ~std::uint64_t{0} << lo;
    const std::uint64_t bits = limbs_[limb] & mask;
    if (bits != (sign ? mask : 0)) {
      poison();
      return;
    }
    i = (limb + 1) * 64;
  }
}

Quire& Quire::accumulate(const Posit& a, const Posit& b) {
  if (a.config() != cfg_ || b.config() != cfg_) throw std::invalid_argument("quire operand has a different posit format");
  if (nar_) return *this;
  if (a.is_nar() || b.is_nar()) {
    poison();
    return *this;
  }
  if (a.is_zero() || b.is_zero()) return *this;
  const DecodedReal x = decode(a);
  const DecodedReal y = decode(b);
  const u128 product = u128{x.significand} * y.significand;
  const int offset = (x.scale - x.fraction_width) + (y.scale - y.fraction_width) - qcfg_.lsb_scale;
  if (offset < 0) throw std::logic_error("posit product below quire resolution");
  add_shifted(product, offset, (x.sign < 0) != (y.sign < 0));
  check_overflow();
  return *this;
}

Quire& Quire::accumulate(const Posit& a) { return accumulate(a, Posit::one(cfg_)); }

Quire& Quire::merge(const Quire& other) {
  if (other.cfg_ != cfg_) throw std::invalid_argument("cannot merge quires of different formats");
  if (nar_) return *this;
  if (other.nar_) {
    poison();
    return *this;
  }
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < limbs_.size(); ++i) {
    const u128 s = u128{limbs_[i]} + other.limbs_[i] + carry;
    limbs_[i] = static_cast<std::uint64_t>(s);
    carry = static_cast<std::uint64_t>(s >> 64);
  }
  check_overflow();
  return *this;
}

Posit Quire::to_posit() const {
  if (nar_) return Posit::nar(cfg_);
  if (is_zero()) return Posit::zero(cfg_);
  const bool negative = is_negative();
  std::vector<std::uint64_t> mag = limbs_;
  if (negative) {
    std::uint64_t carry = 1;
    for (auto& l : mag) {
      const u128 s = u128{~l} + carry;
      l = static_cast<std::uint64_t>(s);
      carry = static_cast<std::uint64_t>(s >> 64);
    }
  }
  int top_limb = static_cast<int>(mag.size()) - 1;
  while (mag[top_limb] == 0) --top_limb;
  const int top = top_limb * 64 + 63 - std::countl_zero(mag[top_limb]);

  // 64 bits [lo, lo + 64) of the magnitude; positions below zero read as zero.
  auto bits_at = [&](int lo) -> std::uint64_t {
    if (lo < 0) return -lo >= 64 ? 0 : mag[0] << -lo;
    const int limb = lo / 64;
    const int sh = lo % 64;
    std::uint64_t out = mag[limb] >> sh;
    if (sh != 0 && limb + 1 < static_cast<int>(mag.size())) out |= mag[limb + 1] << (64 - sh);
    return out;
  };
  const int lo = top - 63;
  const std::uint64_t window = bits_at(lo);
  bool sticky = false;
  if (lo > 0) {
    const int full = lo / 64;
    for (int i = 0; i < full && !sticky; ++i) sticky = mag[i] != 0;
    const int rem = lo % 64;
    if (!sticky && rem != 0) sticky = (mag[full] & ((std::uint64_t{1} << rem) - 1)) != 0;
  }
  return round_to_posit(negative, static_cast<std::int64_t>(top) + qcfg_.lsb_scale, window, sticky, cfg_);
}

std::string Quire::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const int w = qcfg_.total_width;
  const int digits = (w + 3) / 4;
  std::string out = "0x";
  out.reserve(2 + digits);
  for (int d = digits - 1; d >= 0; --d) {
    int nibble = 0;
    for (int b = 3; b >= 0; --b) {
      const int i = d * 4 + b;
      nibble = (nibble << 1) | (i < w && bit(i) ? 1 : 0);
    }
    out.push_back(kDigits[nibble]);
  }
  return out;
}

Quire quire_new(PositConfig cfg) { return Quire(cfg); }

Quire quire_fma(Quire q, const Posit& a, const Posit& b) {
  q.accumulate(a, b);
  return q;
}

Quire quire_add_quire(Quire q1, const Quire& q2) {
  q1.merge(q2);
  return q1;
}

Posit quire_to_posit(const Quire& q) { return q.to_posit(); }

Posit exact_dot(std::span<const Posit> xs, std::span<const Posit> ys) {
  return exact_dot(xs, ys, xs.empty() ? kPosit32 : xs.front().config());
}

Posit exact_dot(std::span<const Posit> xs, std::span<const Posit> ys, PositConfig cfg) {
  if (xs.size() != ys.size()) throw std::invalid_argument("exact_dot: length mismatch");
  Quire q(cfg);
  for (std::size_t i = 0; i < xs.size(); ++i) q.accumulate(xs[i], ys[i]);
  return q.to_posit();
}

}  // namespace tc
