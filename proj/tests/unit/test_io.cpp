#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "fracdyn/io.hpp"
#include "instances.hpp"

using namespace fracdyn;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fracdyn_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("csv parsing") {
  const io::TimeSeries ts = io::parse_csv("# sample_rate=160\nx1, x2\n1,2\n\n-3.5,4e-3\n");
  CHECK(ts.channels == std::vector<std::string>{"x1", "x2"});
  REQUIRE(ts.values.rows() == 2);
  CHECK(ts.values(1, 0) == -3.5);
  CHECK(ts.values(1, 1) == 4e-3);
  REQUIRE(ts.sample_rate.has_value());
  CHECK(*ts.sample_rate == 160.0);
  CHECK(io::parse_csv("a\r\n1\r\n").values(0, 0) == 1.0);
  CHECK(io::parse_csv("a\n+2\n").values(0, 0) == 2.0);
}

TEST_CASE("csv errors name the offending line") {
  try {
    (void)io::parse_csv("a,b\n1,2\n3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    (void)io::parse_csv("a,b\n1,2\n3,x\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(io::parse_csv("a\nnan\n"), ParseError);
  CHECK_THROWS_AS(io::parse_csv("a\ninf\n"), ParseError);
  CHECK_THROWS_AS(io::parse_csv(""), ParseError);
  CHECK_THROWS_AS(io::parse_csv("a,,b\n1,2,3\n"), ParseError);
  CHECK_THROWS_AS(io::parse_csv("a\n1\n", 2), ParseError);
  CHECK_THROWS_AS(io::parse_csv("a\n1\n# late comment\n"), ParseError);
}

TEST_CASE("csv round trip is byte exact") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> exponent(-300.0, 300.0);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m(30, 4);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = normal(rng) * std::pow(10.0, exponent(rng));
    m(0, 0) = std::numeric_limits<double>::denorm_min();
    m(1, 1) = std::numeric_limits<double>::max();
    m(2, 2) = -0.0;
    m(3, 3) = 0.1;
    io::TimeSeries ts = io::labelled(m, "x");
    if (trial % 2) ts.sample_rate = 256.0;
    const std::string first = io::format_csv(ts);
    const io::TimeSeries back = io::parse_csv(first);
    CHECK(back.values == m);
    CHECK(io::format_csv(back) == first);
  }
}

TEST_CASE("csv files") {
  const auto path = scratch("nested/series.csv");
  std::filesystem::remove_all(path.parent_path());
  const io::TimeSeries ts = io::labelled(Matrix::Identity(3, 2), "u");
  io::write_csv(path, ts);
  CHECK(io::read_csv(path).values == ts.values);
  CHECK(io::read_text(path) == "u1,u2\n1,0\n0,1\n0,0\n");
  CHECK_THROWS_AS(io::read_csv(scratch("missing.csv")), ParseError);
}

TEST_CASE("model file round trip") {
  std::mt19937_64 rng(2);
  const SystemModel m = testing::random_real_model(4, 2, rng);
  const io::ModelFile file = io::ModelFile::from_model(m, "seeded");
  const std::string text = io::format_model(file);
  const io::ModelFile back = io::parse_model(text);
  CHECK(back.schema_version == io::kModelSchemaVersion);
  CHECK(back.provenance == "seeded");
  CHECK(back.a == m.a());
  CHECK(back.b == m.b());
  CHECK(back.alpha.values() == m.orders().values());
  CHECK(io::format_model(back) == text);

  const auto path = scratch("model.json");
  io::write_model(path, file);
  CHECK(io::format_model(io::read_model(path)) == text);
  CHECK(back.to_model().n() == 4);
}

TEST_CASE("model file errors") {
  const std::string good =
      R"({"schema_version":"fracdyn-model/1","n":2,"p":1,"alpha":[1,1],)"
      R"("A":[[0,0],[0,0]],"B":[[1],[0]]})";
  CHECK_NOTHROW(io::parse_model(good));
  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  CHECK_THROWS_AS(io::parse_model("{"), ParseError);
  CHECK_THROWS_AS(io::parse_model(replaced("fracdyn-model/1", "fracdyn-model/9")), ParseError);
  CHECK_THROWS_AS(io::parse_model(replaced("\"p\":1", "\"p\":2")), ParseError);
  CHECK_THROWS_AS(io::parse_model(replaced("[1,1]", "[1]")), ParseError);
  CHECK_THROWS_AS(io::parse_model(replaced("[1,1]", "[1,-1]")), ParseError);
  CHECK_THROWS_AS(io::parse_model(replaced("[[0,0],[0,0]]", "[[0,0]]")), ParseError);
  CHECK_THROWS_AS(io::parse_model(replaced("[[1],[0]]", "[[1],[\"x\"]]")), ParseError);
  CHECK_THROWS_AS(io::parse_model(replaced("\"n\":2,", "")), ParseError);
}

TEST_CASE("sensor lists are one-based") {
  const SensorSet s = io::parse_sensor_list("3, 1", 4);
  CHECK(s.indices() == std::vector<std::size_t>{0, 2});
  CHECK(io::format_sensor_list(s) == "1,3");
  CHECK(io::parse_sensor_list("", 4).empty());
  CHECK_THROWS_AS(io::parse_sensor_list("0", 4), ParseError);
  CHECK_THROWS_AS(io::parse_sensor_list("5", 4), ParseError);
  CHECK_THROWS_AS(io::parse_sensor_list("1,1", 4), ParseError);
  CHECK_THROWS_AS(io::parse_sensor_list("1,a", 4), ParseError);
}

TEST_CASE("shortest round-trip number format") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.0) == "2");
  CHECK(io::format_double(-1e-300) == "-1e-300");
}
