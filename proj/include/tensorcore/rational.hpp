#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "tensorcore/posit.hpp"
#include "tensorcore/quire.hpp"

namespace tc {

/// Exact value of a finite posit. Throws std::domain_error for NaR.
mpq_class to_rational(const Posit& p);
/// Exact value held by a quire. Throws std::domain_error for a NaR quire.
mpq_class to_rational(const Quire& q);
mpq_class to_rational(float x);
mpq_class to_rational(double x);

/// Rounds an exact rational to the nearest posit (ties to even pattern,
/// saturating at minpos/maxpos).
Posit encode_round(const mpq_class& x, PositConfig cfg);

/// Correctly rounded (nearest, ties to even) conversion into binary32/binary64,
/// including subnormals and overflow to infinity.
float to_binary32(const mpq_class& x);
double to_binary64(const mpq_class& x);

/// Exact parse of a decimal literal such as "-12.5e-3", "7", "1/3".
mpq_class parse_decimal(std::string_view text);

/// Power of two as an exact rational.
mpq_class pow2(long exponent);

}  // namespace tc
