#include "tensorcore/census.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace tc {

IeeeFormat parse_ieee_format(const std::string& name) {
  if (name == "binary16") return IeeeFormat::binary16;
  if (name == "binary32") return IeeeFormat::binary32;
  throw std::invalid_argument("unknown format: " + name + " (expected binary16 or binary32)");
}

std::string to_string(IeeeFormat format) { return format == IeeeFormat::binary16 ? "binary16" : "binary32"; }

namespace {

// binary16 has no native type here; classify by fields.
bool half_is_nan(std::uint16_t bits) {
  const unsigned exponent = (bits >> 10) & 0x1Fu;
  const unsigned fraction = bits & 0x3FFu;
  return exponent == 0x1Fu && fraction != 0;
}

}  // namespace

NanCensus nan_census(IeeeFormat format) {
  NanCensus c;
  c.format = format;
  if (format == IeeeFormat::binary16) {
    c.total_patterns = 1u << 16;
    for (std::uint32_t b = 0; b < (1u << 16); ++b) c.nan_patterns += half_is_nan(static_cast<std::uint16_t>(b)) ? 1 : 0;
    c.method = "enumeration";
    return c;
  }

  c.total_patterns = std::uint64_t{1} << 32;
  const std::uint64_t formula = 2 * ((std::uint64_t{1} << 23) - 1);
  // Only patterns with an all-ones exponent can be NaN: sign x 2^23 fractions.
  std::uint64_t counted = 0;
  for (std::uint32_t sign = 0; sign < 2; ++sign) {
    for (std::uint32_t fraction = 0; fraction < (1u << 23); ++fraction) {
      const std::uint32_t bits = (sign << 31) | (0xFFu << 23) | fraction;
      counted += std::isnan(std::bit_cast<float>(bits)) ? 1 : 0;
    }
  }
  if (counted != formula) throw std::logic_error("binary32 NaN census: enumeration disagrees with formula");
  c.nan_patterns = counted;
  c.method = "formula+enumeration";
  return c;
}

}  // namespace tc
