#ifndef LIPBESOV_DIFFERENCE_NORMS_HPP_
#define LIPBESOV_DIFFERENCE_NORMS_HPP_

#include <string>
#include <vector>

#include "lipbesov/norms.hpp"
#include "lipbesov/space.hpp"

namespace lipbesov {

// J(f; x, r_k) at r_k = c_tilde * delta^k for k in [k_lo, k_hi]:
// [mu(B)^-1 sum_{y in B(x, r_k)} |f(x) - f(y)|^u mu_y]^(1/u), or the max of
// |f(x) - f(y)| over the ball when u = inf.
struct DifferenceProfile {
  double c_tilde = 1.0;
  double delta = 0.5;
  double u = 1.0;
  int k_lo = 0;
  int k_hi = -1;
  std::vector<Field> j;  // j[k - k_lo]

  const Field& at(int k) const { return j.at(k - k_lo); }
};

DifferenceProfile difference_profile(const Field& f, const Space& space, double c_tilde,
                                     double delta, int k_lo, int k_hi, double u);

enum class LipVariant { Ldot, L, Lb_dot, Lb, Lt_dot, Lt };
enum class TruncVariant { L_tilde, Lb_tilde };

LipVariant parse_lip_variant(const std::string& name);
std::string to_string(LipVariant v);
TruncVariant parse_trunc_variant(const std::string& name);
std::string to_string(TruncVariant v);

// Levels where the balls B(x, c_tilde delta^k) are neither all of X nor all
// singletons. Below `whole` every ball is X; from `single` on every ball is
// {x}.
struct ScaleWindow {
  int whole = 0;   // largest k with c_tilde delta^k > diam
  int single = 0;  // smallest k with c_tilde delta^k <= min gap
};
ScaleWindow scale_window(const Space& space, double c_tilde, double delta);

// Full scale sums over k in Z. The levels k <= whole contribute a geometric
// series in closed form; levels k >= single contribute nothing.
double lipschitz_norm(const Field& f, const NormSpec& spec, LipVariant variant,
                      const Space& space);

// k >= 0 part of the Ldot or Lb_dot sum.
double truncated_norm(const Field& f, const NormSpec& spec, TruncVariant variant,
                      const Space& space);

}  // namespace lipbesov

#endif  // LIPBESOV_DIFFERENCE_NORMS_HPP_
