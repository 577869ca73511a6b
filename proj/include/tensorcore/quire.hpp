#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tensorcore/posit.hpp"

namespace tc {

/// Geometry of the exact accumulator for one posit format.
///
/// The least significant bit weighs minpos^2, the integer part reaches
/// maxpos^2, and `carry_bits` extra bits absorb 2^(carry_bits - 1) worst-case
/// products. For es = 2 the total is exactly 16 * nbits bits.
struct QuireConfig {
  int total_width = 0;
  int lsb_scale = 0;
  int carry_bits = 0;

  static QuireConfig for_posit(PositConfig cfg);

  friend bool operator==(const QuireConfig&, const QuireConfig&) = default;
};

/// Fixed-width two's-complement fixed-point register holding exact sums of
/// posit products. Overflowing the carry headroom poisons the quire to NaR.
class Quire {
 public:
  explicit Quire(PositConfig cfg = kPosit32);

  const PositConfig& posit_config() const { return cfg_; }
  const QuireConfig& config() const { return qcfg_; }
  bool is_nar() const { return nar_; }
  bool is_zero() const;
  bool is_negative() const;

  /// Accumulates the exact product a*b.
  Quire& accumulate(const Posit& a, const Posit& b);
  /// Accumulates the exact value of a.
  Quire& accumulate(const Posit& a);
  /// Exact integer addition of another accumulator.
  Quire& merge(const Quire& other);

  /// The single rounding step back to the working format.
  Posit to_posit() const;

  /// Two's-complement accumulator, little-endian 64-bit limbs, sign-extended.
  std::span<const std::uint64_t> limbs() const { return limbs_; }
  /// Bit `i` of the accumulator, i in [0, total_width).
  bool bit(int i) const;

  /// All total_width bits as `0x`-prefixed hex; NaR renders as 1 followed by zeros.
  std::string to_hex() const;

  friend bool operator==(const Quire&, const Quire&) = default;

 private:
  void add_shifted(unsigned __int128 magnitude, int offset, bool negative);
  void check_overflow();
  void poison();

  PositConfig cfg_;
  QuireConfig qcfg_;
  std::vector<std::uint64_t> limbs_;
  bool nar_ = false;
};

Quire quire_new(PositConfig cfg);
Quire quire_fma(Quire q, const Posit& a, const Posit& b);
Quire quire_add_quire(Quire q1, const Quire& q2);
Posit quire_to_posit(const Quire& q);

/// Dot product with a single rounding at the end.
Posit exact_dot(std::span<const Posit> xs, std::span<const Posit> ys);
/// As above; `cfg` fixes the format of an empty sum.
Posit exact_dot(std::span<const Posit> xs, std::span<const Posit> ys, PositConfig cfg);

}  // namespace tc
