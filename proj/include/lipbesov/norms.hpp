#ifndef LIPBESOV_NORMS_HPP_
#define LIPBESOV_NORMS_HPP_

#include <limits>
#include <string>
#include <vector>

#include "lipbesov/dyadic.hpp"
#include "lipbesov/kernels.hpp"
#include "lipbesov/space.hpp"

namespace lipbesov {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct NormSpec {
  double s = 0.5;
  double p = 2.0;  // kInf allowed
  double q = 2.0;  // kInf allowed
  double u = 1.0;
  double beta = 0.9;
  double gamma = 0.9;
  double delta = 0.5;
  double c_tilde = 1.0;
  Flavor flavor = Flavor::homogeneous;
};

double lebesgue_norm(const Space& space, const Field& f, double p);

// (sum_i v_i^q)^(1/q), or max_i v_i at q = inf. Entries are nonnegative.
double lq_aggregate(const std::vector<double>& v, double q);

// Q_k f for every level of the stack, indexed by k - stack.k_min. The
// homogeneous flavor applies the stack to f minus its mean.
std::vector<Field> level_responses(const KernelStack& stack, const Space& space,
                                   const Field& f);

// Throw FlavorMismatch when the stack and spec disagree.
double besov_norm(const Field& f, const NormSpec& spec, const KernelStack& stack,
                  const Space& space, const CubeSystem& cubes);

// p = inf takes the dyadic Carleson supremum over the cube system.
double triebel_lizorkin_norm(const Field& f, const NormSpec& spec, const KernelStack& stack,
                             const Space& space, const CubeSystem& cubes);

// Besov-type sum with ||Q_k f||_p replaced by the sampled sequence norm
// (sum_{alpha,m} mu(Q_alpha^{k,m}) |Q_k f(y_alpha^{k,m})|^p)^(1/p); the only
// norm here that depends on the subcube sampler.
double sampled_besov_norm(const Field& f, const NormSpec& spec, const KernelStack& stack,
                          const Space& space, const CubeSystem& cubes);

// Inf of the admissible C in the size and regularity conditions.
double test_function_norm(const Space& space, const Field& f, std::size_t x1, double r,
                          double beta, double gamma);

struct Admissibility {
  double threshold = 0.0;  // p(s, beta ^ gamma)
  bool besov = true;
  bool triebel_lizorkin = true;
  std::vector<std::string> besov_violations;
  std::vector<std::string> tl_violations;
};

Admissibility admissible_range(const NormSpec& spec, double omega, double eta);

}  // namespace lipbesov

#endif  // LIPBESOV_NORMS_HPP_
