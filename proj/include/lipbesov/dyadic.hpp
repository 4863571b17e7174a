#ifndef LIPBESOV_DYADIC_HPP_
#define LIPBESOV_DYADIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lipbesov/space.hpp"

namespace lipbesov {

// Nested delta^k-nets. nets[k - k_min] lists point indices; the first
// |nets[k-1]| entries of level k are exactly the level k-1 net, in order.
struct NetSystem {
  double delta = 0.5;
  int k_min = 0;
  int k_max = 0;
  std::vector<std::vector<int>> nets;
  // Measured constants: min separation / delta^k (+inf for single-point
  // nets) and max covering distance / delta^k.
  double c0 = 0.0;
  double C0 = 0.0;

  int levels() const { return k_max - k_min + 1; }
  const std::vector<int>& level(int k) const { return nets.at(k - k_min); }
};

struct LevelRange {
  int k_min = 0;
  int k_max = 0;
};

// Coarsest level whose net is a single point (delta^k > diam) through
// `extra` levels past net saturation (delta^k < min gap).
LevelRange auto_levels(const Space& space, double delta, int extra = 4);

// Greedy farthest-point nets, each level seeded with the coarser one. Ties
// go to the lowest point index. With strict = true, throws ParameterError
// unless 12 A0^3 C0 delta <= c0 holds for the measured constants.
NetSystem build_nets(const Space& space, double delta, int k_min, int k_max,
                     bool strict = false);

struct Cube {
  int center = -1;       // point index z_alpha^k
  int parent = -1;       // cube index at level k-1 (-1 at the coarsest level)
  std::vector<int> children;  // cube indices at level k+1
  std::vector<int> members;   // point indices, ascending
  double mass = 0.0;
};

enum class Sampler { center, lowest_index, seeded_random };

Sampler parse_sampler(const std::string& name);
std::string to_string(Sampler sampler);

// Q_alpha^{k,m}: a level-(k+j0) cube inside Q_alpha^k.
struct SubCube {
  int cube = -1;    // index at level k + j0
  int sample = -1;  // y_alpha^{k,m}
  int center = -1;  // z_alpha^{k,m}
  double mass = 0.0;
};

class CubeSystem {
 public:
  NetSystem nets;
  // assign[k - k_min][x] = index of the level-k cube containing x.
  std::vector<std::vector<int>> assign;
  std::vector<std::vector<Cube>> cubes;
  // Y^k: centers new at level k+1 (empty at k_max).
  std::vector<std::vector<int>> refpoints;

  // Filled by refine_subcubes; subcubes[k - k_min][alpha] for
  // k in [k_min, k_max - j0].
  int j0 = -1;
  Sampler sampler = Sampler::center;
  std::uint64_t sampler_seed = 0;
  std::vector<std::vector<std::vector<SubCube>>> subcubes;

  int k_min() const { return nets.k_min; }
  int k_max() const { return nets.k_max; }
  double delta() const { return nets.delta; }
  bool refined() const { return j0 >= 0; }
  int refined_k_max() const { return nets.k_max - j0; }

  const std::vector<Cube>& level(int k) const { return cubes.at(k - k_min()); }
  const std::vector<int>& assignment(int k) const { return assign.at(k - k_min()); }
  const std::vector<int>& reference_points(int k) const {
    return refpoints.at(k - k_min());
  }
  const std::vector<std::vector<SubCube>>& subcubes_at(int k) const;
  // d(x, Y^k); +inf when Y^k is empty.
  double dist_to_refpoints(const Space& space, int k, std::size_t x) const;
};

// Builds cubes from the center tree: a level-(k+1) center that is already a
// level-k center is its own parent, any other center takes its nearest
// level-k center (ties to the center listed first, which is the oldest);
// points join their nearest finest-level center and inherit cubes up the
// tree.
CubeSystem build_cubes(const NetSystem& nets, const Space& space);

// Enumerates subcubes N(k, alpha) at depth j0 and picks sample points.
// Throws RangeError when j0 exceeds the built level range.
CubeSystem refine_subcubes(const CubeSystem& cubes, int j0, Sampler sampler,
                           std::uint64_t seed = 0);

// Smallest j0 with delta^j0 <= (2 A0)^-3 C0.
int default_j0(const NetSystem& nets, double a0);

struct LevelSandwich {
  int k = 0;
  std::size_t cubes = 0;
  std::size_t interior_cubes = 0;
  // Over interior cubes (cubes that are not the whole space).
  double min_inner = 0.0;  // min r_in / delta^k
  double max_outer = 0.0;  // max r_out / delta^k
  std::size_t nominal_inner_fail = 0;
  std::size_t nominal_outer_fail = 0;
};

struct CubeVerification {
  bool partition = true;
  bool nesting = true;
  bool center_membership = true;
  bool subcube_consistency = true;
  std::vector<std::string> failures;
  int offending_point = -1;
  std::vector<LevelSandwich> levels;
  // Global extremes over interior cubes.
  double min_inner = 0.0;
  double max_outer = 0.0;
  // Max over (k, alpha) of N(k, alpha) * delta^(j0 omega) when refined
  // and omega is supplied.
  double subcube_count_const = 0.0;
  int max_subcubes = 0;

  bool exact_ok() const {
    return partition && nesting && center_membership && subcube_consistency;
  }
};

// Read-only. Sandwich radii need the space; pass omega >= 0 to measure the
// subcube count constant.
CubeVerification verify_cubes(const CubeSystem& cubes, const Space& space,
                              double omega = -1.0);

// Partition, nesting and center membership only; works on dumps.
CubeVerification verify_cube_structure(const CubeSystem& cubes, std::size_t n);

}  // namespace lipbesov

#endif  // LIPBESOV_DYADIC_HPP_
