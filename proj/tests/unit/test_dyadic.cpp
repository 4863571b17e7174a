#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "lipbesov/errors.hpp"
#include "lipbesov/io.hpp"

using namespace testing;

namespace {

// Direct measurement of separation and covering for one net.
void net_constants(const Space& s, const std::vector<int>& net, double& sep, double& cover) {
  sep = INFINITY;
  for (std::size_t a = 0; a < net.size(); ++a)
    for (std::size_t b = a + 1; b < net.size(); ++b) sep = std::min(sep, s.dist(net[a], net[b]));
  cover = 0;
  for (std::size_t x = 0; x < s.size(); ++x) {
    double best = INFINITY;
    for (int z : net) best = std::min(best, s.dist(x, z));
    cover = std::max(cover, best);
  }
}

CubeSystem cubes_for(const Space& s, int j0 = -1, Sampler sampler = Sampler::center,
                     std::uint64_t seed = 0) {
  const auto lr = auto_levels(s, 0.5);
  const auto nets = build_nets(s, 0.5, lr.k_min, lr.k_max);
  auto c = build_cubes(nets, s);
  if (j0 >= 0) c = refine_subcubes(c, j0, sampler, seed);
  return c;
}

}  // namespace

TEST_CASE("one-point nets") {
  const Space s = line_space({0.0});
  const auto nets = build_nets(s, 0.5, 0, 5);
  for (int k = 0; k <= 5; ++k) CHECK(nets.level(k) == std::vector<int>{0});
  CHECK(std::isinf(nets.c0));
  CHECK(nets.C0 == 0.0);
  const auto cubes = build_cubes(nets, s);
  CHECK(verify_cubes(cubes, s).exact_ok());
}

TEST_CASE("grid1d 257 nets at levels 0..8") {
  const Space s = grid(257);
  const auto nets = build_nets(s, 0.5, 0, 8);
  double c0 = INFINITY, C0 = 0;
  for (int k = 0; k <= 8; ++k) {
    const auto& net = nets.level(k);
    const double scale = std::pow(0.5, k);
    CHECK(net.size() >= std::size_t{1} << k);
    CHECK(net.size() <= (std::size_t{2} << k) + 1);
    double sep, cover;
    net_constants(s, net, sep, cover);
    if (net.size() > 1) c0 = std::min(c0, sep / scale);
    C0 = std::max(C0, cover / scale);
    if (k > 0) {
      const auto& coarse = nets.level(k - 1);
      CHECK(std::equal(coarse.begin(), coarse.end(), net.begin()));
    }
  }
  CHECK(nets.c0 == doctest::Approx(c0).epsilon(1e-14));
  CHECK(nets.C0 == doctest::Approx(C0).epsilon(1e-14));
  CHECK(nets.c0 >= 0.5);
  CHECK(nets.C0 <= 1.0);
}

TEST_CASE("nets saturate below the minimum gap") {
  const Space s = grid(65);
  const auto lr = auto_levels(s, 0.5);
  REQUIRE(std::pow(0.5, lr.k_max) < s.min_gap());
  const auto nets = build_nets(s, 0.5, lr.k_min, lr.k_max);
  CHECK(nets.level(lr.k_max).size() == s.size());
  CHECK(nets.level(lr.k_min).size() == 1);
}

TEST_CASE("cubes partition, nest and sandwich on grid1d") {
  const Space s = grid(257);
  const auto cubes = cubes_for(s);
  const auto v = verify_cubes(cubes, s);
  CHECK(v.partition);
  CHECK(v.nesting);
  CHECK(v.center_membership);
  CHECK(v.min_inner >= 0.2);
  // Independent partition check: every point in exactly one cube per level.
  for (int k = cubes.k_min(); k <= cubes.k_max(); ++k) {
    std::vector<int> seen(s.size(), 0);
    for (const auto& c : cubes.level(k))
      for (int p : c.members) ++seen[p];
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
  const auto& top = cubes.level(cubes.k_min());
  REQUIRE(top.size() == 1);
  CHECK(top[0].members.size() == s.size());
}

TEST_CASE("grid2d outer radius") {
  SpaceParams p;
  p.kind = SpaceKind::grid2d;
  p.size = 33;
  const Space s = generate_space(p);
  const auto cubes = cubes_for(s);
  const auto v = verify_cubes(cubes, s);
  CHECK(v.exact_ok());
  // Circumradius about the center, recomputed here.
  double worst = 0;
  for (int k = cubes.k_min(); k <= cubes.k_max(); ++k) {
    for (const auto& c : cubes.level(k)) {
      if (c.members.size() == s.size()) continue;
      double r = 0;
      for (int x : c.members) r = std::max(r, s.dist(c.center, x));
      worst = std::max(worst, r / std::pow(0.5, k));
    }
  }
  CHECK(v.max_outer == doctest::Approx(worst).epsilon(1e-12));
  CHECK(v.max_outer <= 4.0);
}

TEST_CASE("reference points are the new centers") {
  const Space s = grid(129);
  const auto cubes = cubes_for(s);
  for (int k = cubes.k_min(); k < cubes.k_max(); ++k) {
    const auto& coarse = cubes.nets.level(k);
    const auto& fine = cubes.nets.level(k + 1);
    std::vector<int> fresh(fine.begin() + static_cast<long>(coarse.size()), fine.end());
    CHECK(cubes.reference_points(k) == fresh);
  }
  CHECK(cubes.reference_points(cubes.k_max()).empty());
}

TEST_CASE("j0 = 0 gives one self subcube per cube") {
  const Space s = grid(65);
  const auto cubes = cubes_for(s, 0);
  for (int k = cubes.k_min(); k <= cubes.refined_k_max(); ++k) {
    const auto& subs = cubes.subcubes_at(k);
    for (std::size_t a = 0; a < subs.size(); ++a) {
      REQUIRE(subs[a].size() == 1);
      CHECK(subs[a][0].cube == static_cast<int>(a));
      CHECK(subs[a][0].sample == cubes.level(k)[a].center);
      CHECK(subs[a][0].center == cubes.level(k)[a].center);
    }
  }
}

TEST_CASE("j0 = 2 subcube counts") {
  const Space s = grid(257);
  const auto cubes = cubes_for(s, 2);
  std::size_t worst = 0;
  for (int k = cubes.k_min(); k <= cubes.refined_k_max(); ++k) {
    const auto& level = cubes.level(k);
    for (std::size_t a = 0; a < level.size(); ++a) {
      if (level[a].members.size() == s.size()) continue;
      // Grandchildren counted through the tree.
      std::size_t count = 0;
      for (int c : level[a].children) count += cubes.level(k + 1)[c].children.size();
      CHECK(cubes.subcubes_at(k)[a].size() == count);
      worst = std::max(worst, count);
    }
  }
  CHECK(worst <= 8);
  CHECK_THROWS_AS(refine_subcubes(cubes, 1000, Sampler::center), RangeError);
}

TEST_CASE("samplers share subcubes and differ only in samples") {
  const Space s = grid(129);
  const auto a = cubes_for(s, 2, Sampler::center);
  const auto b = cubes_for(s, 2, Sampler::seeded_random, 5);
  const auto c = cubes_for(s, 2, Sampler::lowest_index);
  bool differs = false;
  for (int k = a.k_min(); k <= a.refined_k_max(); ++k) {
    const auto& sa = a.subcubes_at(k);
    const auto& sb = b.subcubes_at(k);
    const auto& sc = c.subcubes_at(k);
    REQUIRE(sa.size() == sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i) {
      REQUIRE(sa[i].size() == sb[i].size());
      for (std::size_t m = 0; m < sa[i].size(); ++m) {
        CHECK(sa[i][m].cube == sb[i][m].cube);
        CHECK(sa[i][m].cube == sc[i][m].cube);
        CHECK(sa[i][m].mass == sb[i][m].mass);
        const auto& mem = a.level(k + a.j0)[sa[i][m].cube].members;
        CHECK(std::binary_search(mem.begin(), mem.end(), sb[i][m].sample));
        CHECK(sc[i][m].sample == mem.front());
        differs |= sa[i][m].sample != sb[i][m].sample;
      }
    }
  }
  CHECK(differs);
}

TEST_CASE("planted defect names the point") {
  const Space s = grid(65);
  auto cubes = cubes_for(s);
  const int k = cubes.k_min() + 3;
  auto& level = cubes.cubes[k - cubes.k_min()];
  REQUIRE(level.size() >= 2);
  // Move a non-center point of cube 0 into cube 1, leaving assignments alone.
  auto& from = level[0].members;
  auto it = std::find_if(from.begin(), from.end(), [&](int p) { return p != level[0].center; });
  REQUIRE(it != from.end());
  const int moved = *it;
  from.erase(it);
  level[1].members.push_back(moved);
  std::sort(level[1].members.begin(), level[1].members.end());
  const auto v = verify_cube_structure(cubes, s.size());
  CHECK_FALSE(v.partition);
  CHECK(v.offending_point == moved);
  REQUIRE_FALSE(v.failures.empty());
  CHECK(v.failures.front().find("point " + std::to_string(moved)) != std::string::npos);
}

TEST_CASE("construction is deterministic") {
  const Space s = generate_space(SpaceParams{SpaceKind::graph, 80});
  const auto a = cubes_for(s, 2, Sampler::seeded_random, 9);
  const auto b = cubes_for(s, 2, Sampler::seeded_random, 9);
  CHECK(dump_json(cubes_to_json(a)) == dump_json(cubes_to_json(b)));
  CHECK(a.assign == b.assign);
}

TEST_CASE("quasi-metric spaces") {
  SpaceParams p;
  p.kind = SpaceKind::snowflake;
  p.size = 129;
  p.exponent = 2.0;
  const Space s = generate_space(p);
  const auto cubes = cubes_for(s);
  const auto v = verify_cubes(cubes, s);
  CHECK(v.exact_ok());
  CHECK(v.min_inner >= 0.1);
  CHECK(v.max_outer <= 8.0);
}
