#include <doctest.h>

#include "aqc/config.hpp"
#include "aqc/errors.hpp"

using namespace aqc;

TEST_SUITE_BEGIN("config");

TEST_CASE("minimal envelope configuration fills defaults") {
  const RunConfig cfg = parse_config(
      "command = envelope\n"
      "seed = 42\n"
      "[operator]\n"
      "name = div2d\n"
      "[density]\n"
      "name = quad\n"
      "[envelope]\n"
      "xi = 1,0\n");
  CHECK(cfg.command == "envelope");
  CHECK(cfg.seed == 42);
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.get("operator", "name", "") == "div2d");
  const std::vector<int> ladder = cfg.get_ints("envelope", "ladder", {8, 16, 32});
  CHECK(ladder == std::vector<int>{8, 16, 32});
}

TEST_CASE("unresolvable labels are named in the error") {
  try {
    parse_config(
        "command = envelope\nseed = 1\n[operator]\nname = div3d\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("div3d") != std::string::npos);
  }
}

TEST_CASE("ladder override is reflected") {
  const RunConfig cfg = parse_config(
      "command = envelope\nseed = 3\n[envelope]\nladder = 8,16\nxi = 0,0\n");
  CHECK(cfg.get_ints("envelope", "ladder", {}) == std::vector<int>{8, 16});
}

TEST_CASE("seed is mandatory") {
  try {
    parse_config("command = envelope\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("seed") != std::string::npos);
  }
}

TEST_CASE("unknown keys and sections carry line numbers") {
  try {
    parse_config("seed = 1\n[operator]\nnome = div2d\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("nome") != std::string::npos);
  }
  try {
    parse_config("seed = 1\n[operators]\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("inline comments and blank lines are tolerated") {
  const RunConfig cfg = parse_config(
      "# run\n"
      "seed = 9   # the seed\n"
      "\n"
      "[density]\n"
      "name = dwell\n");
  CHECK(cfg.seed == 9);
  CHECK(cfg.get("density", "name", "") == "dwell");
}

TEST_CASE("axis specs") {
  const auto specs = parse_axis_specs("-2:2:9,0:1:5");
  REQUIRE(specs.size() == 2);
  CHECK(std::get<0>(specs[0]) == -2.0);
  CHECK(std::get<1>(specs[0]) == 2.0);
  CHECK(std::get<2>(specs[1]) == 5);
  CHECK_THROWS_AS(parse_axis_specs("1:2"), ConfigError);
}

TEST_CASE("canonical form is stable") {
  const RunConfig a = parse_config("seed = 5\n[density]\nname = quad\n[operator]\nname = div2d\n");
  const RunConfig b = parse_config("seed = 5\n[operator]\nname = div2d\n[density]\nname = quad\n");
  CHECK(a.canonical() == b.canonical());
}

TEST_SUITE_END();
