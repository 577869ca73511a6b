#include "tensorcore/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tensorcore/rational.hpp"

namespace tc {

ValueFormat parse_value_format(const std::string& name) {
  if (name == "posit32") return ValueFormat::posit32;
  if (name == "posit16") return ValueFormat::posit16;
  if (name == "binary32") return ValueFormat::binary32;
  if (name == "binary64") return ValueFormat::binary64;
  if (name == "decimal") return ValueFormat::decimal;
  throw DataError("unknown value format: " + name);
}

std::string to_string(ValueFormat format) {
  switch (format) {
    case ValueFormat::posit32: return "posit32";
    case ValueFormat::posit16: return "posit16";
    case ValueFormat::binary32: return "binary32";
    case ValueFormat::binary64: return "binary64";
    case ValueFormat::decimal: return "decimal";
  }
  return "unknown";
}

namespace {

std::uint64_t parse_bits(std::string_view token, int digits) {
  if (token.size() != static_cast<std::size_t>(digits) + 2 || token[0] != '0' || (token[1] != 'x' && token[1] != 'X')) {
    throw std::invalid_argument("expected 0x-prefixed hex with " + std::to_string(digits) + " digits, got " +
                                std::string(token));
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data() + 2, token.data() + token.size(), v, 16);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw std::invalid_argument("malformed hex pattern " + std::string(token));
  }
  return v;
}

template <class F>
FileValue from_float(F f) {
  if (std::isnan(f)) return {FileValue::Kind::nan, 0};
  if (std::isinf(f)) return {f > 0 ? FileValue::Kind::pos_inf : FileValue::Kind::neg_inf, 0};
  return {FileValue::Kind::finite, to_rational(f)};
}

FileValue parse_value(std::string_view token, ValueFormat format) {
  switch (format) {
    case ValueFormat::posit32:
    case ValueFormat::posit16: {
      const PositConfig cfg(format == ValueFormat::posit32 ? 32 : 16, 2);
      const Posit p = parse_hex(token, cfg);
      if (p.is_nar()) return {FileValue::Kind::nar, 0};
      return {FileValue::Kind::finite, to_rational(p)};
    }
    case ValueFormat::binary32:
      return from_float(std::bit_cast<float>(static_cast<std::uint32_t>(parse_bits(token, 8))));
    case ValueFormat::binary64:
      return from_float(std::bit_cast<double>(parse_bits(token, 16)));
    case ValueFormat::decimal:
      return {FileValue::Kind::finite, parse_decimal(token)};
  }
  throw std::logic_error("bad value format");
}

}  // namespace

ArrayFile ArrayFile::parse(std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  auto fail = [&](const std::string& what) -> ArrayFile { throw DataError(origin + ": " + what); };

  std::string line;
  if (!std::getline(in, line)) return fail("empty file");
  std::istringstream header(line);
  std::string word;
  header >> word;
  if (word != "shape") return fail("first line must be `shape d0 d1 ...`");
  std::vector<std::size_t> dims;
  while (header >> word) {
    std::size_t d = 0;
    auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), d);
    if (ec != std::errc{} || ptr != word.data() + word.size() || d == 0) return fail("bad dimension " + word);
    dims.push_back(d);
  }

  ArrayFile file;
  file.shape = Shape(std::move(dims));
  if (!std::getline(in, line)) return fail("missing format line");
  std::istringstream fmt(line);
  std::string name;
  std::string extra;
  fmt >> word >> name;
  if (word != "format" || name.empty() || (fmt >> extra)) return fail("second line must be `format <name>`");
  file.format = parse_value_format(name);

  std::size_t index = 0;
  while (in >> word) {
    try {
      file.values.push_back(parse_value(word, file.format));
    } catch (const std::invalid_argument& e) {
      return fail("value " + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  if (file.values.size() != file.shape.count()) {
    return fail("shape " + file.shape.to_string() + " needs " + std::to_string(file.shape.count()) + " values, found " +
                std::to_string(file.values.size()));
  }
  return file;
}

ArrayFile ArrayFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read array file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

std::string format_array_file(const Shape& shape, ValueFormat format, const std::vector<std::string>& tokens) {
  std::string s = "shape";
  for (std::size_t d : shape.dims()) s += " " + std::to_string(d);
  s += "\nformat " + to_string(format) + "\n";
  const std::size_t per_line = shape.rank() >= 2 ? shape.dims().back() : tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    s += tokens[i];
    s += (i + 1 == tokens.size() || (per_line && (i + 1) % per_line == 0)) ? "\n" : " ";
  }
  return s;
}

}  // namespace tc
