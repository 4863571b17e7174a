#include "lipbesov/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lipbesov/errors.hpp"
#include "lipbesov/parallel.hpp"

namespace lipbesov {

Field apply_level(const KernelStack& stack, const Space& space, int k, const Field& f) {
  return stack.level(k) * f.cwiseProduct(space.weight());
}

Field hl_maximal(const Space& space, const Field& f) {
  const std::size_t n = space.size();
  Field out(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t x) {
    const auto order = space.by_distance(x);
    const auto dist = space.sorted_dist(x);
    // The smallest ball is {x}; its average is |f(x)| without rounding.
    double mass = space.weight(x), sum = std::abs(f[x]) * mass;
    double best = std::abs(f[x]);
    for (std::size_t i = 1; i < n; ++i) {
      const int y = order[i];
      mass += space.weight(y);
      sum += std::abs(f[y]) * space.weight(y);
      if (i + 1 == n || dist[i + 1] != dist[i]) best = std::max(best, sum / mass);
    }
    out[static_cast<Eigen::Index>(x)] = best;
  });
  return out;
}

FrameLevels frame_levels(const KernelStack& stack, const CubeSystem& cubes) {
  if (!cubes.refined()) throw RangeError("cube system has not been refined");
  if (cubes.delta() != stack.delta) {
    throw ParameterError("stack and cube system use different delta");
  }
  FrameLevels lv;
  lv.lo = std::max(stack.k_min, cubes.k_min());
  lv.hi = std::min(stack.k_max, cubes.refined_k_max());
  if (lv.hi < lv.lo) {
    std::ostringstream os;
    os << "no level is shared by the stack (" << stack.k_min << ".." << stack.k_max
       << ") and the refined cubes (" << cubes.k_min() << ".." << cubes.refined_k_max() << ")";
    throw RangeError(os.str());
  }
  return lv;
}

namespace {

bool averaged_level(const KernelStack& stack, int k) {
  return stack.flavor == Flavor::inhomogeneous && k <= stack.n_low;
}

// Cell mean of g over the subcube's members.
double cell_mean(const Space& space, const Cube& cell, const Field& g) {
  double s = 0.0;
  for (int u : cell.members) s += g[u] * space.weight(u);
  return s / cell.mass;
}

}  // namespace

CoefficientGrid analyze(const KernelStack& stack, const Space& space, const CubeSystem& cubes,
                        const Field& f) {
  const FrameLevels lv = frame_levels(stack, cubes);
  CoefficientGrid grid;
  grid.k_lo = lv.lo;
  grid.k_hi = lv.hi;
  for (int k = lv.lo; k <= lv.hi; ++k) {
    const Field qf = apply_level(stack, space, k, f);
    const bool avg = averaged_level(stack, k);
    const auto& fine = cubes.level(k + cubes.j0);
    const auto& subs = cubes.subcubes_at(k);
    for (std::size_t a = 0; a < subs.size(); ++a) {
      for (std::size_t m = 0; m < subs[a].size(); ++m) {
        const SubCube& sc = subs[a][m];
        Coefficient c;
        c.k = k;
        c.alpha = static_cast<int>(a);
        c.m = static_cast<int>(m);
        c.sample = sc.sample;
        c.weight = sc.mass;
        c.averaged = avg;
        c.value = avg ? cell_mean(space, fine[sc.cube], qf) : qf[sc.sample];
        grid.entries.push_back(c);
      }
    }
  }
  return grid;
}

Field synthesize(const KernelStack& stack, const Space& space, const CubeSystem& cubes,
                 const CoefficientGrid& grid) {
  const Eigen::Index n = static_cast<Eigen::Index>(space.size());
  Field out = Field::Zero(n);
  std::size_t i = 0;
  for (int k = grid.k_lo; k <= grid.k_hi; ++k) {
    const auto& q = stack.level(k);
    const auto& fine = cubes.level(k + cubes.j0);
    const auto& subs = cubes.subcubes_at(k);
    for (std::size_t a = 0; a < subs.size(); ++a) {
      for (std::size_t m = 0; m < subs[a].size(); ++m, ++i) {
        const Coefficient& c = grid.entries.at(i);
        if (c.value == 0.0) continue;
        if (c.averaged) {
          // mu(Q) * mean_u Q_k(., u) = sum_u Q_k(., u) mu_u.
          for (int u : fine[subs[a][m].cube].members) {
            out += (c.value * space.weight(u)) * q.col(u);
          }
        } else {
          out += (c.value * c.weight) * q.col(c.sample);
        }
      }
    }
  }
  return out;
}

Field frame_operator(const KernelStack& stack, const Space& space, const CubeSystem& cubes,
                     const Field& f) {
  return synthesize(stack, space, cubes, analyze(stack, space, cubes, f));
}

namespace {

double dot_mu(const Space& space, const Field& a, const Field& b) {
  return a.cwiseProduct(b).dot(space.weight());
}

void ritz_bounds(const std::vector<double>& alpha, const std::vector<double>& beta,
                 ReconstructReport& rep) {
  const int m = static_cast<int>(alpha.size());
  if (m == 0) return;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    t(i, i) = 1.0 / alpha[i] + (i > 0 ? beta[i - 1] / alpha[i - 1] : 0.0);
    if (i + 1 < m) {
      t(i, i + 1) = std::sqrt(beta[i]) / alpha[i];
      t(i + 1, i) = t(i, i + 1);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
  rep.frame_lower = es.eigenvalues().minCoeff();
  rep.frame_upper = es.eigenvalues().maxCoeff();
}

}  // namespace

Reconstruction reconstruct(const KernelStack& stack, const Space& space,
                           const CubeSystem& cubes, const Field& f,
                           const ReconstructOptions& options) {
  frame_levels(stack, cubes);
  const bool homogeneous = stack.flavor == Flavor::homogeneous;
  auto project = [&](Field v) {
    if (homogeneous) v.array() -= space.mean(v);
    return v;
  };
  Reconstruction out;
  const Field b = project(f);
  const double bnorm = std::sqrt(dot_mu(space, b, b));
  if (bnorm == 0.0) {
    out.rf = Field::Zero(f.size());
    out.report.trivial = true;
    return out;
  }
  Field x = Field::Zero(f.size());
  Field r = b;
  Field p = r;
  double rr = dot_mu(space, r, r);
  std::vector<double> alphas, betas;
  int it = 0;
  while (std::sqrt(rr) > options.tol * bnorm && it < options.max_iter) {
    const Field sp = project(frame_operator(stack, space, cubes, p));
    const double curv = dot_mu(space, p, sp);
    if (!(curv > 0.0)) break;
    const double alpha = rr / curv;
    x += alpha * p;
    r -= alpha * sp;
    const double rr_new = dot_mu(space, r, r);
    const double beta = rr_new / rr;
    alphas.push_back(alpha);
    betas.push_back(beta);
    p = r + beta * p;
    rr = rr_new;
    ++it;
  }
  ritz_bounds(alphas, betas, out.report);
  out.report.iterations = it;
  out.rf = project(frame_operator(stack, space, cubes, x));
  out.report.residual = std::sqrt(dot_mu(space, b - out.rf, b - out.rf)) / bnorm;
  if (!(out.report.residual <= 10.0 * options.tol)) {
    std::ostringstream os;
    os << "frame solve stopped at relative residual " << out.report.residual << " after " << it
       << " iterations; measured lower frame bound " << out.report.frame_lower;
    throw IllConditionedFrame(os.str(), out.report.frame_lower);
  }
  return out;
}

}  // namespace lipbesov
