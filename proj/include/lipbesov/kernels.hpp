#ifndef LIPBESOV_KERNELS_HPP_
#define LIPBESOV_KERNELS_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lipbesov/dyadic.hpp"
#include "lipbesov/space.hpp"

namespace lipbesov {

enum class Flavor { homogeneous, inhomogeneous };

Flavor parse_flavor(const std::string& name);
std::string to_string(Flavor flavor);

struct ScalingOptions {
  double tol = 1e-12;
  int max_sweeps = 10'000;
};

// Symmetric mu-stochastic table P_t = D K D with K = exp(-(d/t)^a), so that
// sum_y P(x,y) mu_y = 1 for every x. Throws ConvergenceError when the
// diagonal scaling does not settle within max_sweeps.
Eigen::MatrixXd build_semigroup(const Space& space, double t, double a = 1.0,
                                const ScalingOptions& options = {});

struct GammaConst {
  double gamma = 0.0;
  double value = 0.0;
};

struct AtiValidationReport {
  double nu = 0.0;
  double size_const = 0.0;       // with h_k
  double size_const_no_h = 0.0;  // without h_k
  double eta_fit = 0.0;
  double reg_const = 0.0;
  double second_diff_const = 0.0;
  double cancel_resid = 0.0;
  // Inhomogeneous only: max |sum_y Q_0(x,y) mu_y - 1|.
  double unit_resid = 0.0;
  double identity_resid = 0.0;
  std::vector<GammaConst> rgamma;
  bool regularity_sampled = false;
  bool second_diff_sampled = false;
};

struct KernelOptions {
  double a = 1.0;
  // Q_0 = P_sigma in the inhomogeneous flavor.
  double sigma = 1.0;
  int n_low = 1;
  ScalingOptions scaling;
};

struct KernelStack {
  Flavor flavor = Flavor::homogeneous;
  int k_min = 0;
  int k_max = 0;
  double delta = 0.5;
  double a = 1.0;
  double sigma = 1.0;
  int n_low = 1;
  double nu = 0.0;
  double eta = 0.0;
  // q[k - k_min](x, y); (Q_k f)(x) = sum_y Q_k(x,y) f(y) mu_y.
  std::vector<Eigen::MatrixXd> q;
  AtiValidationReport report;

  int levels() const { return k_max - k_min + 1; }
  bool has_level(int k) const { return k >= k_min && k <= k_max; }
  const Eigen::MatrixXd& level(int k) const;
};

// Q_k = P_{delta^k} - P_{delta^(k-1)} over the cube level range, with the
// coarsest level taking the mean projection in place of P_{delta^(k_min-1)}.
KernelStack build_exp_ati(const Space& space, const CubeSystem& cubes,
                          const KernelOptions& options = {});

// Q_0 = P_sigma, Q_1 = P_delta - P_sigma, Q_k = P_{delta^k} - P_{delta^(k-1)}.
// Needs cubes with k_min <= 0 < k_max.
KernelStack build_exp_iati(const Space& space, const CubeSystem& cubes,
                           const KernelOptions& options = {});

struct ValidationOptions {
  std::vector<double> gammas;
  // Per-level caps on (x, x') pairs for the regularity and second
  // difference scans; exceeding them switches to a deterministic stride.
  std::size_t pair_budget = 2000;
  std::size_t second_pair_budget = 200;
  int probe_count = 4;
  std::uint64_t seed = 7;
};

// Read-only; fills a report. Also used by the builders with default
// options.
AtiValidationReport validate_ati(const KernelStack& stack, const Space& space,
                                 const CubeSystem& cubes,
                                 const ValidationOptions& options = {});

// Probe fields for the identity residual: Q_j g for interior j (homogeneous)
// or white noise (inhomogeneous).
std::vector<Field> identity_probes(const KernelStack& stack, const Space& space, int count,
                                   std::uint64_t seed);

// max over probes of ||f - sum_k Q_k f||_2 / ||f||_2 (mean removed first in
// the homogeneous flavor).
double identity_residual(const KernelStack& stack, const Space& space,
                         const std::vector<Field>& probes);

// h_k(x, y); identically 1 when Y^k is empty.
double h_factor(const CubeSystem& cubes, const Space& space, int k, double nu, double a,
                std::size_t x, std::size_t y);

}  // namespace lipbesov

#endif  // LIPBESOV_KERNELS_HPP_
