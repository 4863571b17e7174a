#ifndef LIPBESOV_TEST_HELPERS_HPP_
#define LIPBESOV_TEST_HELPERS_HPP_

#include <cmath>
#include <vector>

#include "lipbesov/dyadic.hpp"
#include "lipbesov/kernels.hpp"
#include "lipbesov/rng.hpp"
#include "lipbesov/space.hpp"

namespace testing {

using namespace lipbesov;

// Points on a line with d = |x - y|^power and the given (or unit) weights.
inline Space line_space(const std::vector<double>& xs, double power = 1.0,
                        std::vector<double> weights = {}) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::pow(std::abs(xs[i] - xs[j]), power);
  }
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!weights.empty()) w = Eigen::Map<Eigen::VectorXd>(weights.data(), n);
  const auto cert = certify_a0(d);
  return Space(d, w, cert, "line");
}

inline Space grid(int n) {
  SpaceParams p;
  p.kind = SpaceKind::grid1d;
  p.size = n;
  return generate_space(p);
}

struct Pipeline {
  Space space;
  CubeSystem cubes;
  KernelStack stack;
};

inline Pipeline pipeline(const Space& space, Flavor flavor, int j0 = -1) {
  const auto lr = auto_levels(space, 0.5);
  const auto nets = build_nets(space, 0.5, lr.k_min, lr.k_max);
  auto cubes = build_cubes(nets, space);
  cubes = refine_subcubes(cubes, j0 >= 0 ? j0 : default_j0(nets, space.a0()), Sampler::center);
  auto stack = flavor == Flavor::homogeneous ? build_exp_ati(space, cubes)
                                             : build_exp_iati(space, cubes);
  return {space, std::move(cubes), std::move(stack)};
}

inline Field random_field(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Field f(static_cast<Eigen::Index>(n));
  for (auto& v : f) v = rng.normal();
  return f;
}

}  // namespace testing

#endif  // LIPBESOV_TEST_HELPERS_HPP_
