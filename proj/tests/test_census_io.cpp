#include <doctest.h>

#include <cmath>
#include <fstream>

#include "tensorcore/census.hpp"
#include "tensorcore/io.hpp"

using namespace tc;

TEST_CASE("NaN census") {
  const NanCensus h = nan_census(IeeeFormat::binary16);
  CHECK(h.total_patterns == 65536);
  CHECK(h.nan_patterns == 2046);
  CHECK(h.method == "enumeration");
  const NanCensus s = nan_census(parse_ieee_format("binary32"));
  CHECK(s.nan_patterns == 16777214);
  CHECK(s.total_patterns == (std::uint64_t{1} << 32));
  CHECK(to_string(IeeeFormat::binary16) == "binary16");
  CHECK_THROWS_AS(parse_ieee_format("binary8"), std::invalid_argument);
}

TEST_CASE("array files: decimal") {
  const ArrayFile f = ArrayFile::parse("shape 2 2\nformat decimal\n1 -2.5\n1/3 1e-3\n");
  CHECK(f.shape == Shape{2, 2});
  REQUIRE(f.values.size() == 4);
  CHECK(f.values[1].value == mpq_class(-5, 2));
  CHECK(f.values[2].value == mpq_class(1, 3));
  CHECK(f.values[3].value == mpq_class(1, 1000));
  RationalBackend rb;
  CHECK(realize(f, rb).data()[2] == mpq_class(1, 3));
  QuireBackend q;
  CHECK(realize(f, q).data()[0] == Posit::one(kPosit32));
}

TEST_CASE("array files: bit formats") {
  const ArrayFile p = ArrayFile::parse("shape 3\nformat posit32\n0x40000000 0x80000000 0x00000000\n");
  CHECK(p.values[0].value == 1);
  CHECK(p.values[1].kind == FileValue::Kind::nar);
  QuireBackend q;
  const auto pv = realize(p, q);
  CHECK(pv[1].is_nar());
  CHECK_THROWS_AS(realize(p, RationalBackend()), DataError);
  Binary32Backend f;
  CHECK(std::isnan(realize(p, f)[1]));

  const ArrayFile b = ArrayFile::parse("shape 3\nformat binary32\n0x3f800000 0x7f800000 0x7fc00000\n");
  CHECK(b.values[0].value == 1);
  CHECK(b.values[1].kind == FileValue::Kind::pos_inf);
  CHECK(b.values[2].kind == FileValue::Kind::nan);
  CHECK(std::isinf(realize(b, f)[1]));
  CHECK(realize(b, q)[1].is_nar());

  const ArrayFile d = ArrayFile::parse("shape 1\nformat binary64\n0xbff0000000000000\n");
  CHECK(d.values[0].value == -1);
  const ArrayFile h = ArrayFile::parse("shape 1\nformat posit16\n0x4000\n");
  CHECK(h.values[0].value == 1);
}

TEST_CASE("array file errors") {
  CHECK_THROWS_AS(ArrayFile::parse("format decimal\n1\n"), DataError);
  CHECK_THROWS_AS(ArrayFile::parse("shape 2\nformat decimal\n1\n"), DataError);
  CHECK_THROWS_AS(ArrayFile::parse("shape 1\nformat decimal\n1 2\n"), DataError);
  CHECK_THROWS_AS(ArrayFile::parse("shape 1\nformat decimal\nabc\n"), DataError);
  CHECK_THROWS_AS(ArrayFile::parse("shape 1\nformat posit32\n0x4000\n"), DataError);
  CHECK_THROWS_AS(ArrayFile::parse("shape 1\nformat hex\n0x4000\n"), DataError);
  CHECK_THROWS_AS(ArrayFile::parse("shape x\nformat decimal\n1\n"), DataError);
  CHECK_THROWS_AS(ArrayFile::parse("shape 1\nformat decimal\n1/0\n"), DataError);
  CHECK_THROWS_AS(ArrayFile::load("/nonexistent/array.txt"), DataError);
  try {
    ArrayFile::parse("shape 2\nformat decimal\n1\n", "vec.txt");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("vec.txt") != std::string::npos);
  }
}

TEST_CASE("array files round-trip through the writer") {
  const std::string text = format_array_file(Shape{2, 2}, ValueFormat::posit32,
                                             {"0x40000000", "0x48000000", "0x00000000", "0xc0000000"});
  const ArrayFile f = ArrayFile::parse(text);
  CHECK(f.shape == Shape{2, 2});
  CHECK(f.format == ValueFormat::posit32);
  CHECK(f.values[1].value == 2);
  CHECK(f.values[3].value == -1);
  const ArrayFile a = ArrayFile::load(std::string(TC_DATA_DIR) + "/arrays/a2.txt");
  CHECK(a.values[3].value == 4);
  CHECK(parse_value_format("binary64") == ValueFormat::binary64);
  CHECK(to_string(ValueFormat::posit16) == "posit16");
}
