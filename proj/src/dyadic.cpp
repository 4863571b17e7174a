#include "lipbesov/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lipbesov/errors.hpp"
#include "lipbesov/rng.hpp"

namespace lipbesov {

LevelRange auto_levels(const Space& space, double delta, int extra) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
  LevelRange r;
  if (space.size() == 1) return {0, extra};
  const double ld = std::log(delta);
  r.k_min = static_cast<int>(std::ceil(std::log(space.diam()) / ld)) - 1;
  r.k_max = static_cast<int>(std::floor(std::log(space.min_gap()) / ld)) + 1 + extra;
  return r;
}

NetSystem build_nets(const Space& space, double delta, int k_min, int k_max, bool strict) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
  if (k_max < k_min) throw ParameterError("net level range is empty");
  const std::size_t n = space.size();
  NetSystem nets;
  nets.delta = delta;
  nets.k_min = k_min;
  nets.k_max = k_max;
  nets.c0 = std::numeric_limits<double>::infinity();
  nets.C0 = 0.0;

  std::vector<int> current;
  std::vector<double> to_net(n, std::numeric_limits<double>::infinity());
  auto add = [&](int p) {
    current.push_back(p);
    for (std::size_t x = 0; x < n; ++x) to_net[x] = std::min(to_net[x], space.dist(x, p));
  };
  for (int k = k_min; k <= k_max; ++k) {
    const double scale = std::pow(delta, k);
    if (current.empty()) add(0);
    for (;;) {
      int arg = -1;
      double far = -1.0;
      for (std::size_t x = 0; x < n; ++x) {
        if (to_net[x] > far) {
          far = to_net[x];
          arg = static_cast<int>(x);
        }
      }
      if (arg < 0 || !(far >= scale)) break;
      add(arg);
    }
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < current.size(); ++a) {
      for (std::size_t b = a + 1; b < current.size(); ++b) {
        sep = std::min(sep, space.dist(current[a], current[b]));
      }
    }
    nets.c0 = std::min(nets.c0, sep / scale);
    nets.C0 = std::max(nets.C0, *std::max_element(to_net.begin(), to_net.end()) / scale);
    nets.nets.push_back(current);
  }
  if (strict) {
    const double a0 = space.a0();
    if (!(12.0 * a0 * a0 * a0 * nets.C0 * delta <= nets.c0)) {
      std::ostringstream os;
      os << "strict mode: 12 A0^3 C0 delta = " << 12.0 * a0 * a0 * a0 * nets.C0 * delta
         << " exceeds c0 = " << nets.c0;
      throw ParameterError(os.str());
    }
  }
  return nets;
}

Sampler parse_sampler(const std::string& name) {
  if (name == "center") return Sampler::center;
  if (name == "lowest_index") return Sampler::lowest_index;
  if (name == "seeded_random") return Sampler::seeded_random;
  throw ParameterError("unknown sampler '" + name + "'");
}

std::string to_string(Sampler sampler) {
  switch (sampler) {
    case Sampler::center: return "center";
    case Sampler::lowest_index: return "lowest_index";
    case Sampler::seeded_random: return "seeded_random";
  }
  return "unknown";
}

const std::vector<std::vector<SubCube>>& CubeSystem::subcubes_at(int k) const {
  if (!refined()) throw RangeError("cube system has not been refined");
  if (k < k_min() || k > refined_k_max()) {
    std::ostringstream os;
    os << "level " << k << " has no subcubes (refined range " << k_min() << ".."
       << refined_k_max() << ")";
    throw RangeError(os.str());
  }
  return subcubes[k - k_min()];
}

double CubeSystem::dist_to_refpoints(const Space& space, int k, std::size_t x) const {
  double best = std::numeric_limits<double>::infinity();
  for (int y : reference_points(k)) best = std::min(best, space.dist(x, y));
  return best;
}

namespace {

// Nearest center among the first `count`; ties go to the earliest net entry,
// i.e. the center that appeared at the coarsest level.
int nearest_of(const Space& space, std::size_t x, const std::vector<int>& centers,
               std::size_t count) {
  int arg = -1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < count; ++a) {
    const double d = space.dist(x, centers[a]);
    if (d < best) {
      best = d;
      arg = static_cast<int>(a);
    }
  }
  return arg;
}

}  // namespace

CubeSystem build_cubes(const NetSystem& nets, const Space& space) {
  const std::size_t n = space.size();
  const int levels = nets.levels();
  CubeSystem cs;
  cs.nets = nets;
  cs.assign.assign(levels, std::vector<int>(n, -1));
  cs.cubes.resize(levels);
  cs.refpoints.resize(levels);

  // parent_of[l][beta] = cube index at level l-1 of center beta at level l.
  std::vector<std::vector<int>> parent_of(levels);
  for (int l = 1; l < levels; ++l) {
    const auto& fine = nets.nets[l];
    const auto& coarse = nets.nets[l - 1];
    parent_of[l].resize(fine.size());
    for (std::size_t b = 0; b < fine.size(); ++b) {
      parent_of[l][b] = b < coarse.size()
                            ? static_cast<int>(b)
                            : nearest_of(space, fine[b], coarse, coarse.size());
    }
  }
  const auto& finest = nets.nets[levels - 1];
  for (std::size_t x = 0; x < n; ++x) {
    cs.assign[levels - 1][x] = nearest_of(space, x, finest, finest.size());
  }
  for (int l = levels - 2; l >= 0; --l) {
    for (std::size_t x = 0; x < n; ++x) {
      cs.assign[l][x] = parent_of[l + 1][cs.assign[l + 1][x]];
    }
  }
  for (int l = 0; l < levels; ++l) {
    auto& level = cs.cubes[l];
    level.resize(nets.nets[l].size());
    for (std::size_t a = 0; a < level.size(); ++a) {
      level[a].center = nets.nets[l][a];
      level[a].parent = l > 0 ? parent_of[l][a] : -1;
    }
    for (std::size_t x = 0; x < n; ++x) {
      auto& cube = level[cs.assign[l][x]];
      cube.members.push_back(static_cast<int>(x));
      cube.mass += space.weight(x);
    }
    if (l > 0) {
      for (std::size_t a = 0; a < level.size(); ++a) {
        cs.cubes[l - 1][level[a].parent].children.push_back(static_cast<int>(a));
      }
    }
    if (l + 1 < levels) {
      const auto& next = nets.nets[l + 1];
      cs.refpoints[l].assign(next.begin() + static_cast<long>(nets.nets[l].size()), next.end());
    }
  }
  // Centers sit in their own cube, so an empty cube means the nets were not
  // nested.
  for (int l = 0; l < levels; ++l) {
    for (const auto& cube : cs.cubes[l]) {
      if (cube.members.empty()) {
        throw ExactInvariantError("empty cube produced; nets are not nested");
      }
    }
  }
  return cs;
}

CubeSystem refine_subcubes(const CubeSystem& cubes, int j0, Sampler sampler,
                           std::uint64_t seed) {
  if (j0 < 0) throw ParameterError("j0 must be nonnegative");
  if (j0 > cubes.k_max() - cubes.k_min()) {
    std::ostringstream os;
    os << "j0=" << j0 << " exceeds the built level range " << cubes.k_min() << ".."
       << cubes.k_max();
    throw RangeError(os.str());
  }
  CubeSystem out = cubes;
  out.j0 = j0;
  out.sampler = sampler;
  out.sampler_seed = seed;
  out.subcubes.clear();
  for (int k = cubes.k_min(); k + j0 <= cubes.k_max(); ++k) {
    const auto& level = cubes.level(k);
    const auto& fine = cubes.level(k + j0);
    std::vector<std::vector<SubCube>> per_cube(level.size());
    for (std::size_t a = 0; a < level.size(); ++a) {
      std::vector<int> frontier = {static_cast<int>(a)};
      for (int d = 0; d < j0; ++d) {
        std::vector<int> next;
        for (int c : frontier) {
          const auto& ch = cubes.level(k + d)[c].children;
          next.insert(next.end(), ch.begin(), ch.end());
        }
        frontier = std::move(next);
      }
      for (std::size_t m = 0; m < frontier.size(); ++m) {
        const Cube& sub = fine[frontier[m]];
        SubCube sc;
        sc.cube = frontier[m];
        sc.center = sub.center;
        sc.mass = sub.mass;
        switch (sampler) {
          case Sampler::center: sc.sample = sub.center; break;
          case Sampler::lowest_index: sc.sample = sub.members.front(); break;
          case Sampler::seeded_random: {
            Rng rng(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(k + 1000)),
                             mix_seed(a, m)));
            sc.sample = sub.members[rng.index(sub.members.size())];
            break;
          }
        }
        per_cube[a].push_back(sc);
      }
    }
    out.subcubes.push_back(std::move(per_cube));
  }
  return out;
}

int default_j0(const NetSystem& nets, double a0) {
  const double target = nets.C0 / std::pow(2.0 * a0, 3);
  if (!(target > 0.0)) return 0;
  int j0 = 0;
  while (std::pow(nets.delta, j0) > target) ++j0;
  return j0;
}

CubeVerification verify_cube_structure(const CubeSystem& cubes, std::size_t n) {
  CubeVerification v;
  auto fail = [&](bool& flag, int point, const std::string& msg) {
    if (flag && v.offending_point < 0) v.offending_point = point;
    flag = false;
    v.failures.push_back(msg);
  };
  for (int l = 0; l < static_cast<int>(cubes.cubes.size()); ++l) {
    const int k = cubes.k_min() + l;
    const auto& level = cubes.cubes[l];
    std::vector<int> owner(n, -1);
    for (std::size_t a = 0; a < level.size(); ++a) {
      for (int p : level[a].members) {
        if (p < 0 || static_cast<std::size_t>(p) >= n) {
          std::ostringstream os;
          os << "partition: level " << k << " cube " << a << " lists invalid point " << p;
          fail(v.partition, p, os.str());
          continue;
        }
        if (owner[p] >= 0) {
          std::ostringstream os;
          os << "partition: point " << p << " lies in cubes " << owner[p] << " and " << a
             << " at level " << k;
          fail(v.partition, p, os.str());
        }
        owner[p] = static_cast<int>(a);
      }
      const auto& mem = level[a].members;
      if (std::find(mem.begin(), mem.end(), level[a].center) == mem.end()) {
        std::ostringstream os;
        os << "center membership: center " << level[a].center << " of cube " << a
           << " at level " << k << " is not a member";
        fail(v.center_membership, level[a].center, os.str());
      }
    }
    for (std::size_t p = 0; p < n; ++p) {
      if (owner[p] < 0) {
        std::ostringstream os;
        os << "partition: point " << p << " is in no cube at level " << k;
        fail(v.partition, static_cast<int>(p), os.str());
      } else if (l < static_cast<int>(cubes.assign.size()) &&
                 cubes.assign[l].size() == n && cubes.assign[l][p] != owner[p]) {
        std::ostringstream os;
        os << "partition: point " << p << " is listed in cube " << owner[p]
           << " but assigned to cube " << cubes.assign[l][p] << " at level " << k;
        fail(v.partition, static_cast<int>(p), os.str());
      }
    }
    if (l == 0) continue;
    const auto& coarse = cubes.cubes[l - 1];
    std::vector<int> coarse_owner(n, -1);
    for (std::size_t a = 0; a < coarse.size(); ++a) {
      for (int p : coarse[a].members) {
        if (p >= 0 && static_cast<std::size_t>(p) < n) coarse_owner[p] = static_cast<int>(a);
      }
    }
    for (std::size_t b = 0; b < level.size(); ++b) {
      const int parent = level[b].parent;
      for (int p : level[b].members) {
        if (p < 0 || static_cast<std::size_t>(p) >= n) continue;
        if (coarse_owner[p] != parent) {
          std::ostringstream os;
          os << "nesting: point " << p << " of level-" << k << " cube " << b
             << " is not in its parent cube " << parent << " at level " << k - 1;
          fail(v.nesting, p, os.str());
        }
      }
    }
  }
  return v;
}

CubeVerification verify_cubes(const CubeSystem& cubes, const Space& space, double omega) {
  const std::size_t n = space.size();
  CubeVerification v = verify_cube_structure(cubes, n);
  const double a0 = space.a0();
  const double c0 = cubes.nets.c0;
  const double C0 = cubes.nets.C0;
  v.min_inner = std::numeric_limits<double>::infinity();
  v.max_outer = 0.0;
  for (int k = cubes.k_min(); k <= cubes.k_max(); ++k) {
    const auto& level = cubes.level(k);
    const auto& own = cubes.assignment(k);
    const double scale = std::pow(cubes.delta(), k);
    LevelSandwich ls;
    ls.k = k;
    ls.cubes = level.size();
    ls.min_inner = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < level.size(); ++a) {
      const int z = level[a].center;
      double r_in = std::numeric_limits<double>::infinity();
      for (int p : space.by_distance(z)) {
        if (own[p] != static_cast<int>(a)) {
          r_in = space.dist(z, p);
          break;
        }
      }
      double r_out = 0.0;
      for (int p : level[a].members) r_out = std::max(r_out, space.dist(z, p));
      if (!std::isfinite(r_in)) continue;
      ++ls.interior_cubes;
      ls.min_inner = std::min(ls.min_inner, r_in / scale);
      ls.max_outer = std::max(ls.max_outer, r_out / scale);
      if (std::isfinite(c0) && r_in < c0 * scale / (3.0 * a0 * a0)) ++ls.nominal_inner_fail;
      if (!(r_out < 2.0 * a0 * C0 * scale)) ++ls.nominal_outer_fail;
    }
    if (ls.interior_cubes > 0) {
      v.min_inner = std::min(v.min_inner, ls.min_inner);
      v.max_outer = std::max(v.max_outer, ls.max_outer);
    }
    v.levels.push_back(ls);
  }
  if (cubes.refined()) {
    for (int k = cubes.k_min(); k <= cubes.refined_k_max(); ++k) {
      const auto& level = cubes.level(k);
      const auto& fine_own = cubes.assignment(k + cubes.j0);
      for (std::size_t a = 0; a < level.size(); ++a) {
        const auto& subs = cubes.subcubes_at(k)[a];
        std::vector<int> sub_ids;
        for (const auto& s : subs) sub_ids.push_back(s.cube);
        std::sort(sub_ids.begin(), sub_ids.end());
        std::size_t covered = 0;
        for (const auto& s : subs) covered += cubes.level(k + cubes.j0)[s.cube].members.size();
        bool ok = covered == level[a].members.size();
        for (int p : level[a].members) {
          if (!std::binary_search(sub_ids.begin(), sub_ids.end(), fine_own[p])) ok = false;
        }
        if (!ok) {
          v.subcube_consistency = false;
          std::ostringstream os;
          os << "subcubes of level-" << k << " cube " << a << " do not tile it";
          v.failures.push_back(os.str());
        }
        const int count = static_cast<int>(subs.size());
        v.max_subcubes = std::max(v.max_subcubes, count);
        if (omega >= 0.0) {
          v.subcube_count_const = std::max(
              v.subcube_count_const,
              count * std::pow(cubes.delta(), cubes.j0 * omega));
        }
      }
    }
  }
  return v;
}

}  // namespace lipbesov
