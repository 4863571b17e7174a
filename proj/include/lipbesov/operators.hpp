#ifndef LIPBESOV_OPERATORS_HPP_
#define LIPBESOV_OPERATORS_HPP_

#include <vector>

#include "lipbesov/dyadic.hpp"
#include "lipbesov/kernels.hpp"
#include "lipbesov/space.hpp"

namespace lipbesov {

// (Q_k f)(x) = sum_y Q_k(x,y) f(y) mu_y.
Field apply_level(const KernelStack& stack, const Space& space, int k, const Field& f);

// Centered Hardy-Littlewood maximal function; the sup over radii is a max
// over the balls that end just past each distinct distance from x.
Field hl_maximal(const Space& space, const Field& f);

struct Coefficient {
  int k = 0;
  int alpha = 0;
  int m = 0;
  int sample = -1;
  double weight = 0.0;  // mu(Q_alpha^{k,m})
  double value = 0.0;   // Q_k f(y) or, for averaged levels, the cell mean
  bool averaged = false;
};

struct CoefficientGrid {
  int k_lo = 0;
  int k_hi = -1;
  std::vector<Coefficient> entries;  // ordered by (k, alpha, m)
};

// Levels shared by the stack and the refined cube system.
struct FrameLevels {
  int lo = 0;
  int hi = -1;
};
FrameLevels frame_levels(const KernelStack& stack, const CubeSystem& cubes);

// Q_k f at every sample point; inhomogeneous levels k <= N carry cell
// averages of Q_k f over the subcube instead.
CoefficientGrid analyze(const KernelStack& stack, const Space& space, const CubeSystem& cubes,
                        const Field& f);

// S f = sum mu(Q) Q_k(., y) Q_k f(y), with cell-averaged atoms on the
// inhomogeneous levels k <= N. Self-adjoint in L^2(mu).
Field frame_operator(const KernelStack& stack, const Space& space, const CubeSystem& cubes,
                     const Field& f);

// Synthesis half of frame_operator: sum of coefficient * mu(Q) * atom.
Field synthesize(const KernelStack& stack, const Space& space, const CubeSystem& cubes,
                 const CoefficientGrid& grid);

struct ReconstructOptions {
  double tol = 1e-8;
  int max_iter = 1000;
};

struct ReconstructReport {
  int iterations = 0;
  double residual = 0.0;  // ||f - R f|| / ||f|| in L^2(mu)
  double frame_lower = 0.0;  // extreme Ritz values of S
  double frame_upper = 0.0;
  bool trivial = false;      // f had no component in the working subspace
};

struct Reconstruction {
  Field rf;
  ReconstructReport report;
};

// Solves S g = f by conjugate gradients in L^2(mu) (mean-zero subspace for
// the homogeneous flavor) and returns R f = S g. Throws IllConditionedFrame
// if the tolerance is not reached within max_iter.
Reconstruction reconstruct(const KernelStack& stack, const Space& space,
                           const CubeSystem& cubes, const Field& f,
                           const ReconstructOptions& options = {});

}  // namespace lipbesov

#endif  // LIPBESOV_OPERATORS_HPP_
