#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tc {

/// Format parameters of an n-bit posit with `es` exponent bits.
///
/// Any width from 3 to 64 bits is accepted so that exhaustive tests can run
/// on tiny formats such as (8,0); the standard working format is es = 2.
class PositConfig {
 public:
  constexpr PositConfig() = default;
  PositConfig(int nbits, int es = 2);

  constexpr int nbits() const { return nbits_; }
  constexpr int es() const { return es_; }

  /// Power-of-two scale of maxpos; minpos has the negated scale.
  constexpr int max_scale() const { return (nbits_ - 2) << es_; }
  constexpr int min_scale() const { return -max_scale(); }

  constexpr std::uint64_t mask() const {
    return nbits_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << nbits_) - 1;
  }
  constexpr std::uint64_t nar_bits() const { return std::uint64_t{1} << (nbits_ - 1); }
  constexpr std::uint64_t maxpos_bits() const { return nar_bits() - 1; }
  constexpr std::uint64_t minpos_bits() const { return 1; }

  /// Digits in the canonical hex rendering.
  constexpr int hex_digits() const { return (nbits_ + 3) / 4; }

  friend constexpr bool operator==(const PositConfig&, const PositConfig&) = default;

 private:
  int nbits_ = 32;
  int es_ = 2;
};

inline constexpr PositConfig kPosit32{};

/// A posit bit pattern together with the format it is read in.
class Posit {
 public:
  constexpr Posit() = default;

  static Posit from_bits(std::uint64_t bits, PositConfig cfg) { return Posit(bits & cfg.mask(), cfg); }
  static Posit zero(PositConfig cfg) { return Posit(0, cfg); }
  static Posit one(PositConfig cfg) { return Posit(std::uint64_t{1} << (cfg.nbits() - 2), cfg); }
  static Posit nar(PositConfig cfg) { return Posit(cfg.nar_bits(), cfg); }
  static Posit maxpos(PositConfig cfg) { return Posit(cfg.maxpos_bits(), cfg); }
  static Posit minpos(PositConfig cfg) { return Posit(cfg.minpos_bits(), cfg); }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr const PositConfig& config() const { return cfg_; }

  bool is_zero() const { return bits_ == 0; }
  bool is_nar() const { return bits_ == cfg_.nar_bits(); }
  bool is_negative() const { return !is_nar() && ((bits_ >> (cfg_.nbits() - 1)) & 1) != 0; }

  /// Bit pattern sign-extended to 64 bits; orders exactly like the values.
  std::int64_t signed_bits() const;

  /// Bitwise identity (NaR == NaR). Use compare() for numeric ordering.
  friend bool operator==(const Posit&, const Posit&) = default;

 private:
  constexpr Posit(std::uint64_t bits, PositConfig cfg) : bits_(bits), cfg_(cfg) {}

  std::uint64_t bits_ = 0;
  PositConfig cfg_{};
};

/// Exact value of a posit pattern.
///
/// For finite values: value = sign * significand * 2^(scale - fraction_width),
/// with the hidden bit of the significand at position fraction_width, so
/// `scale` is the exponent of the leading one.
struct DecodedReal {
  enum class Kind { zero, nar, finite };

  Kind kind = Kind::zero;
  int sign = 1;
  int scale = 0;
  std::uint64_t significand = 0;
  int fraction_width = 0;

  friend bool operator==(const DecodedReal&, const DecodedReal&) = default;
};

DecodedReal decode(std::uint64_t bits, PositConfig cfg);
inline DecodedReal decode(const Posit& p) { return decode(p.bits(), p.config()); }

/// Rounds an exact finite value (any significand, need not be normalized) to
/// the nearest posit, ties to even pattern, saturating at minpos/maxpos.
Posit encode_round(const DecodedReal& x, PositConfig cfg);

/// Core rounding step shared by every conversion into posit format.
///
/// The magnitude is window * 2^(scale - 63) plus a tail strictly smaller than
/// 2^(scale - 63) that is nonzero iff `sticky`. The window must have bit 63 set.
Posit round_to_posit(bool negative, std::int64_t scale, std::uint64_t window, bool sticky,
                     PositConfig cfg);

enum class ArithOp { add, sub, mul, div };

Posit arith(ArithOp op, const Posit& a, const Posit& b);

inline Posit operator+(const Posit& a, const Posit& b) { return arith(ArithOp::add, a, b); }
inline Posit operator-(const Posit& a, const Posit& b) { return arith(ArithOp::sub, a, b); }
inline Posit operator*(const Posit& a, const Posit& b) { return arith(ArithOp::mul, a, b); }
inline Posit operator/(const Posit& a, const Posit& b) { return arith(ArithOp::div, a, b); }

/// Two's complement of the pattern; NaR and zero map to themselves.
Posit operator-(const Posit& a);

/// Numeric comparison; unordered iff either operand is NaR.
std::partial_ordering compare(const Posit& a, const Posit& b);

/// Exact conversion to binary64, or nullopt when the value is not representable.
std::optional<double> to_double(const Posit& p);
/// Nearest binary64 value (NaR maps to quiet NaN).
double to_double_lossy(const Posit& p);
/// Rounds a binary64 value to posit; NaN and infinities map to NaR.
Posit from_double(double x, PositConfig cfg);

/// Lowercase `0x`-prefixed hex, zero-padded to the config's digit count.
std::string to_hex(const Posit& p);
/// Parses the canonical hex form; the digit count must match the width exactly.
Posit parse_hex(std::string_view text, PositConfig cfg);

/// Shortest decimal that round-trips through binary64, e.g. "1.0", "NaR".
std::string to_decimal_string(const Posit& p);

/// Shortest round-trip rendering of a double; integral values get a ".0" suffix.
std::string format_double(double v);

}  // namespace tc
