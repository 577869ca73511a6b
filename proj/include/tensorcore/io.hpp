#pragma once

#include <gmpxx.h>

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "tensorcore/backend.hpp"
#include "tensorcore/moa.hpp"

namespace tc {

/// Input that is well formed as a command line but unusable as data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueFormat { posit32, posit16, binary32, binary64, decimal };

ValueFormat parse_value_format(const std::string& name);
std::string to_string(ValueFormat format);

/// A value read from an array file, before it meets a backend.
struct FileValue {
  enum class Kind { finite, nar, nan, pos_inf, neg_inf };
  Kind kind = Kind::finite;
  mpq_class value;  // exact, when finite
};

/// Text array file:
///   shape d0 d1 ...
///   format posit32|posit16|binary32|binary64|decimal
///   v0 v1 ...        (row-major, whitespace separated)
/// Bit formats take 0x-prefixed hex of exactly the format's width; decimal
/// takes literals such as -1.25e-3 or 1/3.
struct ArrayFile {
  Shape shape;
  ValueFormat format = ValueFormat::decimal;
  std::vector<FileValue> values;

  /// Throws DataError with `origin` in the message.
  static ArrayFile parse(std::string_view text, const std::string& origin = "<input>");
  static ArrayFile load(const std::string& path);
};

std::string format_array_file(const Shape& shape, ValueFormat format, const std::vector<std::string>& tokens);

/// Converts file values into a backend's number type. Every finite value goes
/// through the exact rational and a single from_rational rounding; bit-format
/// inputs already in the backend's format come back unchanged.
template <Backend B>
DenseArray<typename B::value_type> realize(const ArrayFile& file, const B& be) {
  using V = typename B::value_type;
  std::vector<V> out;
  out.reserve(file.values.size());
  for (std::size_t i = 0; i < file.values.size(); ++i) {
    const FileValue& fv = file.values[i];
    if (fv.kind == FileValue::Kind::finite) {
      out.push_back(be.from_rational(fv.value));
      continue;
    }
    if constexpr (std::is_same_v<V, Posit>) {
      out.push_back(Posit::nar(be.zero().config()));
    } else if constexpr (std::is_floating_point_v<V>) {
      switch (fv.kind) {
        case FileValue::Kind::pos_inf: out.push_back(std::numeric_limits<V>::infinity()); break;
        case FileValue::Kind::neg_inf: out.push_back(-std::numeric_limits<V>::infinity()); break;
        default: out.push_back(std::numeric_limits<V>::quiet_NaN()); break;
      }
    } else {
      throw DataError("value " + std::to_string(i) + " is not a real number; the rational backend needs finite inputs");
    }
  }
  return DenseArray<V>(file.shape, std::move(out));
}

}  // namespace tc
