#pragma once

#include <cstdint>
#include <string>

namespace tc {

enum class IeeeFormat { binary16, binary32 };

IeeeFormat parse_ieee_format(const std::string& name);
std::string to_string(IeeeFormat format);

struct NanCensus {
  IeeeFormat format = IeeeFormat::binary16;
  std::uint64_t total_patterns = 0;
  std::uint64_t nan_patterns = 0;
  /// How the count was obtained: "enumeration" or "formula+enumeration".
  std::string method;
};

/// Counts bit patterns that encode NaN. binary16 walks all 2^16 patterns;
/// binary32 uses 2 * (2^23 - 1) and confirms it by classifying every pattern
/// of the all-ones exponent slab.
NanCensus nan_census(IeeeFormat format);

}  // namespace tc
