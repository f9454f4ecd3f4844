#include <doctest.h>

#include "qsync/config.hpp"

using namespace qsync;

TEST_SUITE("config") {

TEST_CASE("defaults parse from an empty object") {
  RunConfig c = parse_config_text("{}");
  CHECK(c.model_kind == "ring");
  CHECK(c.J == 250);
  CHECK(c.M == 50);
  CHECK(c.dt == 0.002);
  CHECK(c.grid_dt == 2e-4);
  CHECK(c.window == "hann");
  CHECK(c.formats == std::vector<std::string>{"csv"});
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_WITH_AS(parse_config_text("{\"modell\": {}}"),
                       doctest::Contains("unknown key 'modell'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("{\"model\": {\"omeg\": 2}}"),
                       doctest::Contains("model.omeg"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("{\"solver\": {\"j\": 10}}"),
                       doctest::Contains("solver.j"), ConfigError);
}

TEST_CASE("type errors carry the key name") {
  CHECK_THROWS_WITH_AS(parse_config_text("{\"model\": {\"omega\": \"two\"}}"),
                       doctest::Contains("omega"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("not json"), ConfigError);
}

TEST_CASE("model construction and validation") {
  RunConfig c = parse_config_text(
      "{\"model\": {\"kind\": \"discrete9\", \"omega\": 2.0, \"tau\": 0.5, \"kappa\": 0.4}}");
  CoupledModel m = c.make_model();
  CHECK(m.kind == ModelKind::Discrete9D);
  RunConfig bad = parse_config_text("{\"model\": {\"kind\": \"pendulum\"}}");
  CHECK_THROWS_AS(bad.make_model(), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{\"spectra\": {\"window\": \"boxcar\"}}"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{\"output\": {\"formats\": [\"yaml\"]}}"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("{\"sweep\": {\"kappa_min\": -0.5}}"), ConfigError);
}

TEST_CASE("grids are inclusive linspaces") {
  RunConfig c = parse_config_text(
      "{\"sweep\": {\"tau_min\": -1, \"tau_max\": 1, \"tau_count\": 5,"
      " \"kappa_min\": 0, \"kappa_max\": 1, \"kappa_count\": 3}}");
  auto t = c.tau_grid();
  REQUIRE(t.size() == 5);
  CHECK(t.front() == -1.0);
  CHECK(t.back() == 1.0);
  CHECK(t[2] == 0.0);
  auto k = c.kappa_grid();
  REQUIRE(k.size() == 3);
  CHECK(k[1] == 0.5);
}

TEST_CASE("echo is a parseable configuration with all defaults materialized") {
  RunConfig c = parse_config_text("{\"model\": {\"kind\": \"linear4d\", \"eta\": 0.2}}");
  RunConfig back = parse_config_text(c.echo());
  CHECK(back.model_kind == "linear4d");
  CHECK(back.eta == 0.2);
  CHECK(back.J == c.J);
  CHECK(back.seed == c.seed);
  CHECK(back.echo() == c.echo());
}

}  // TEST_SUITE
