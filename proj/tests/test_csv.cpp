#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "voltsev/csv.hpp"

using namespace voltsev;

TEST_CASE("split_line handles empties and separators") {
  CHECK(csv::split_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(csv::split_line("") == std::vector<std::string>{""});
  CHECK(csv::split_line(",") == std::vector<std::string>{"", ""});
  CHECK(csv::split_line("x,,z") == std::vector<std::string>{"x", "", "z"});
  CHECK(csv::split_line("one") == std::vector<std::string>{"one"});
}

TEST_CASE("format_double round-trips exactly") {
  const double cases[] = {0.0,
                          1.0,
                          -1.0,
                          0.1,
                          1.0 / 3.0,
                          2.5,
                          1e-300,
                          1e300,
                          -123456.789,
                          3.141592653589793,
                          std::nextafter(1.0, 2.0),
                          5e-324};
  for (double x : cases) {
    const std::string s = csv::format_double(x);
    auto back = csv::parse_double(s);
    REQUIRE(back.has_value());
    CHECK(*back == x);
  }
}

TEST_CASE("format_double of integers has no exponent noise") {
  CHECK(csv::format_double(3.0) == "3");
  CHECK(csv::format_double(-7.0) == "-7");
  CHECK(csv::format_double(0.5) == "0.5");
}

TEST_CASE("parse_double is strict") {
  CHECK(csv::parse_double("1.5").value() == 1.5);
  CHECK(csv::parse_double("-2e3").value() == -2000.0);
  CHECK_FALSE(csv::parse_double("").has_value());
  CHECK_FALSE(csv::parse_double("1.5x").has_value());
  CHECK_FALSE(csv::parse_double("abc").has_value());
  CHECK_FALSE(csv::parse_double("1 .5").has_value());
  // surrounding whitespace is trimmed (CRLF files, padded fields)
  CHECK(csv::parse_double(" 1.5 \r").value() == 1.5);
  // nan/inf parse (validation layers reject them with context)
  auto nan = csv::parse_double("nan");
  REQUIRE(nan.has_value());
  CHECK(std::isnan(*nan));
  auto inf = csv::parse_double("inf");
  REQUIRE(inf.has_value());
  CHECK(std::isinf(*inf));
}

TEST_CASE("trim strips ascii whitespace") {
  CHECK(csv::trim("  a b  ") == "a b");
  CHECK(csv::trim("\t x\r") == "x");
  CHECK(csv::trim("") == "");
  CHECK(csv::trim("   ") == "");
}

TEST_CASE("write_row joins with commas and newline") {
  std::ostringstream out;
  csv::write_row(out, {"a", "", "c"});
  CHECK(out.str() == "a,,c\n");
}
