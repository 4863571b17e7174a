#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lipbesov/config.hpp"
#include "lipbesov/errors.hpp"
#include "lipbesov/io.hpp"

using namespace testing;

TEST_CASE("space documents round-trip") {
  for (auto kind : {SpaceKind::grid2d, SpaceKind::graph, SpaceKind::snowflake}) {
    SpaceParams p;
    p.kind = kind;
    p.size = kind == SpaceKind::grid2d ? 7 : 40;
    p.exponent = kind == SpaceKind::snowflake ? 2.0 : 1.0;
    const Space a = generate_space(p);
    const Json doc = Json::parse(dump_json(space_to_json(a)));
    const Space b = space_from_json(doc);
    REQUIRE(b.size() == a.size());
    CHECK((a.dist() - b.dist()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((a.weight() - b.weight()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(a.a0() == b.a0());
    CHECK(a.label() == b.label());
    CHECK(dump_json(space_to_json(b)) == dump_json(doc));
  }
}

TEST_CASE("points alone give Euclidean distances") {
  Json doc = {{"n", 3}, {"weights", {1, 2, 3}}, {"points", {{0, 0}, {3, 4}, {0, 1}}}};
  const Space s = space_from_json(doc);
  CHECK(s.dist(0, 1) == 5.0);
  CHECK(s.dist(0, 2) == 1.0);
  CHECK(s.a0() == 1.0);
}

TEST_CASE("cube dumps round-trip") {
  const auto pl = pipeline(grid(65), Flavor::homogeneous);
  const Json doc = cubes_to_json(pl.cubes);
  CubeSystem back = cubes_from_json(Json::parse(dump_json(doc)));
  CHECK(verify_cube_structure(back, 65).exact_ok());
  attach_assignments(back, 65);
  CHECK(back.assign == pl.cubes.assign);
  CHECK(back.nets.nets == pl.cubes.nets.nets);
  CHECK(back.refpoints == pl.cubes.refpoints);
  for (int k = back.k_min(); k <= back.k_max(); ++k) {
    REQUIRE(back.level(k).size() == pl.cubes.level(k).size());
    for (std::size_t a = 0; a < back.level(k).size(); ++a) {
      CHECK(back.level(k)[a].members == pl.cubes.level(k)[a].members);
      CHECK(back.level(k)[a].parent == pl.cubes.level(k)[a].parent);
    }
  }
  Json bad = doc;
  bad["extra"] = 1;
  CHECK_THROWS_AS(cubes_from_json(bad), FormatError);
}

TEST_CASE("reals and fields") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(real_to_json(INFINITY) == "inf");
  CHECK(std::isinf(real_from_json(Json("inf"), "x")));
  CHECK(real_from_json(Json(2.5), "x") == 2.5);
  CHECK_THROWS_AS(real_from_json(Json("big"), "x"), FormatError);
  const Field f = random_field(9, 4);
  const Field g = field_from_json(Json::parse(dump_json(field_to_json(f))), 9);
  CHECK(f == g);
  CHECK_THROWS_AS(field_from_json(field_to_json(f), 10), FormatError);
}

TEST_CASE("config merge and overrides") {
  const Json defaults = default_config();
  CHECK(merge_config(Json::object()) == defaults);

  Json user = {{"norm", {{"p", 1.5}}}};
  const Json merged = merge_config(user);
  CHECK(merged["norm"]["p"] == 1.5);
  CHECK(merged["norm"]["q"] == defaults["norm"]["q"]);

  CHECK_THROWS_AS(merge_config(Json{{"nrom", Json::object()}}), FormatError);
  CHECK_THROWS_AS(merge_config(Json{{"norm", {{"bogus", 1}}}}), FormatError);
  CHECK_THROWS_AS(merge_config(Json{{"norm", {{"p", "two"}}}}), FormatError);
  CHECK_NOTHROW(merge_config(Json{{"norm", {{"q", "inf"}}}}));

  Json doc = default_config();
  apply_override(doc, "norm.s=0.25");
  apply_override(doc, "space.kind=circle");
  apply_override(doc, "dyadic.j0=3");
  CHECK(doc["norm"]["s"] == 0.25);
  CHECK(doc["space"]["kind"] == "circle");
  CHECK(doc["dyadic"]["j0"] == 3);
  CHECK_THROWS_AS(apply_override(doc, "space.bogus=1"), FormatError);
  CHECK_THROWS_AS(apply_override(doc, "norm.s=abc"), FormatError);
  CHECK_THROWS_AS(apply_override(doc, "norm.s"), FormatError);

  const RunConfig rc = parse_config(doc);
  CHECK(rc.norm.s == 0.25);
  CHECK(rc.space.kind == SpaceKind::circle);
  REQUIRE(rc.dyadic.j0);
  CHECK(*rc.dyadic.j0 == 3);
  CHECK(rc.norm.delta == rc.dyadic.delta);
}

TEST_CASE("effective config reloads to itself") {
  Json doc = default_config();
  apply_override(doc, "norm.p=3");
  apply_override(doc, "lab.band_cap=50");
  const std::string text = dump_json(doc);
  const Json again = merge_config(Json::parse(text));
  CHECK(dump_json(again) == text);
}
