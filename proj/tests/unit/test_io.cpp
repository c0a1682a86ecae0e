#include <stdexcept>
#include <sstream>

#include "doctest.h"
#include "ullreg/io.hpp"

using namespace ullreg;

TEST_SUITE("io") {

TEST_CASE("xy CSV with and without header") {
  std::istringstream with("z,x\n0.5,1\n\n0.25, 2.5\r\n");
  const auto a = read_xy_csv(with);
  CHECK(a.z == std::vector<double>{0.5, 0.25});
  CHECK(a.x == std::vector<double>{1, 2.5});
  std::istringstream without("1e-3,-4\n2,+3\n");
  const auto b = read_xy_csv(without);
  CHECK(b.z == std::vector<double>{0.001, 2});
  CHECK(b.x == std::vector<double>{-4, 3});
}

TEST_CASE("malformed rows name their position") {
  std::istringstream bad("z,x\n0.1,1\n0.2,abc\n");
  try {
    read_xy_csv(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream fields("0.1,1,2\n");
  CHECK_THROWS_AS(read_xy_csv(fields), ParseError);
  std::istringstream empty("z,x\n");
  CHECK_THROWS_AS(read_xy_csv(empty), ParseError);
  std::istringstream inf("0.1,inf\n");
  CHECK_THROWS_AS(read_xy_csv(inf), ParseError);
}

TEST_CASE("batch CSV") {
  std::istringstream in("x,copy_id,z\n1,b,0.1\n2,a,0.2\n3,b,0.3\n");
  const auto copies = read_batch_csv(in);
  REQUIRE(copies.size() == 2);
  CHECK(copies[0].z == std::vector<double>{0.1, 0.3});
  CHECK(copies[1].x == std::vector<double>{2});
  std::istringstream missing("z,x\n0.1,1\n");
  CHECK_THROWS_AS(read_batch_csv(missing), ParseError);
}

TEST_CASE("domain resolution") {
  CHECK(resolve_domain({0.3, 0.1, 0.7}, std::nullopt).lo == 0.1);
  CHECK(resolve_domain({0.3, 0.1, 0.7}, std::nullopt).hi == 0.7);
  CHECK(resolve_domain({0.3}, Domain{0, 1}).hi == 1);
  CHECK_THROWS_AS(resolve_domain({2.0}, Domain{0, 1}), std::invalid_argument);
}

TEST_CASE("curve and surface writers") {
  FittedCurve c;
  c.grid = {0, 0.5};
  c.values = {1.25, 0};
  c.valid = {1, 0};
  std::ostringstream os;
  write_curve_csv(os, c);
  CHECK(os.str() == "t,estimate,valid\n0,1.25,1\n0.5,nan,0\n");
  Surface s;
  s.grid1 = {0, 1};
  s.grid2 = {0, 1};
  s.values = {1, 2, 2, 4};
  s.counts = {3, 3, 3, 3};
  std::ostringstream ss;
  write_surface_csv(ss, s);
  CHECK(ss.str() == "t1,t2,value,count\n0,0,1,3\n0,1,2,3\n1,0,2,3\n1,1,4,3\n");
}

TEST_CASE("scenario JSON round trip") {
  for (const char* id : {"example1", "example2", "example3", "example4", "example5"}) {
    const Scenario s = preset_scenario(id);
    const Scenario back = parse_scenario_json(scenario_to_json(s));
    CHECK(scenario_to_json(back) == scenario_to_json(s));
  }
  const auto t = parse_scenario_json(R"({"preset": "example2", "n": 1000, "sigma": 1.5})");
  CHECK(t.n == 1000);
  CHECK(t.sigma == 1.5);
  CHECK(t.mixture.size() == 2);
  CHECK_THROWS_AS(parse_scenario_json(R"({"n": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_json(R"({"colour": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_json(R"({"n": "many"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_json(R"({"design_law": "brownian"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario_json("{\n  \"n\": ,\n}"), ParseError);
  CHECK(load_scenario("example4").target == TargetId::chirp);
  CHECK_THROWS_AS(load_scenario("example7"), std::invalid_argument);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), std::invalid_argument);
}

}  // TEST_SUITE
