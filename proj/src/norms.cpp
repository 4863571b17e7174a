#include "lipbesov/norms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lipbesov/errors.hpp"

namespace lipbesov {

double lebesgue_norm(const Space& space, const Field& f, double p) {
  if (!(p > 0.0)) throw ParameterError("Lebesgue exponent must be positive");
  if (std::isinf(p)) return f.size() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
  double s = 0.0;
  for (Eigen::Index x = 0; x < f.size(); ++x) s += std::pow(std::abs(f[x]), p) * space.weight(x);
  return std::pow(s, 1.0 / p);
}

double lq_aggregate(const std::vector<double>& v, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(x, q);
  return std::pow(s, 1.0 / q);
}

std::vector<Field> level_responses(const KernelStack& stack, const Space& space,
                                   const Field& f) {
  // Homogeneous stacks kill constants; drop the mean so roundoff cannot
  // leak through the delta^{-ks} weights. Shifting by f(0) first makes a
  // constant field exactly zero.
  Field g = f;
  if (stack.flavor == Flavor::homogeneous && g.size() > 0) {
    g.array() -= f[0];
    g.array() -= space.mean(g);
  }
  const Field fm = g.cwiseProduct(space.weight());
  std::vector<Field> out;
  out.reserve(stack.q.size());
  for (const auto& q : stack.q) out.push_back(q * fm);
  return out;
}

namespace {

void check_spec(const NormSpec& spec, const KernelStack& stack) {
  if (spec.flavor != stack.flavor) {
    throw FlavorMismatch("norm spec is " + to_string(spec.flavor) + " but the stack is " +
                         to_string(stack.flavor));
  }
  if (!(spec.p > 0.0) || !(spec.q > 0.0)) throw ParameterError("p and q must be positive");
}

// Low block of the inhomogeneous norms: cell means of |Q_k f| over the
// subcubes of levels 0..N, aggregated in l^p (or max at p = inf).
double low_block(const std::vector<Field>& resp, const NormSpec& spec,
                 const KernelStack& stack, const Space& space, const CubeSystem& cubes) {
  const int top = std::min(stack.n_low, stack.k_max);
  if (top >= 0 && (!cubes.refined() || top > cubes.refined_k_max())) {
    throw RangeError("inhomogeneous low block needs subcubes through level N");
  }
  double acc = 0.0;
  for (int k = 0; k <= top; ++k) {
    const Field& g = resp[k - stack.k_min];
    const auto& fine = cubes.level(k + cubes.j0);
    for (const auto& subs : cubes.subcubes_at(k)) {
      for (const SubCube& sc : subs) {
        double mean = 0.0;
        for (int u : fine[sc.cube].members) mean += std::abs(g[u]) * space.weight(u);
        mean /= sc.mass;
        if (std::isinf(spec.p)) {
          acc = std::max(acc, mean);
        } else {
          acc += sc.mass * std::pow(mean, spec.p);
        }
      }
    }
  }
  return std::isinf(spec.p) ? acc : std::pow(acc, 1.0 / spec.p);
}

int first_high_level(const NormSpec& spec, const KernelStack& stack) {
  return spec.flavor == Flavor::inhomogeneous ? std::max(stack.n_low + 1, stack.k_min)
                                              : stack.k_min;
}

}  // namespace

double besov_norm(const Field& f, const NormSpec& spec, const KernelStack& stack,
                  const Space& space, const CubeSystem& cubes) {
  check_spec(spec, stack);
  const auto resp = level_responses(stack, space, f);
  std::vector<double> terms;
  for (int k = first_high_level(spec, stack); k <= stack.k_max; ++k) {
    terms.push_back(std::pow(spec.delta, -k * spec.s) *
                    lebesgue_norm(space, resp[k - stack.k_min], spec.p));
  }
  double value = lq_aggregate(terms, spec.q);
  if (spec.flavor == Flavor::inhomogeneous) value += low_block(resp, spec, stack, space, cubes);
  return value;
}

double triebel_lizorkin_norm(const Field& f, const NormSpec& spec, const KernelStack& stack,
                             const Space& space, const CubeSystem& cubes) {
  check_spec(spec, stack);
  const auto resp = level_responses(stack, space, f);
  const std::size_t n = space.size();
  const int k0 = first_high_level(spec, stack);
  const bool qinf = std::isinf(spec.q);
  // term(k, x) = delta^{-ks} |Q_k f(x)|, raised to q unless q = inf.
  auto term = [&](int k, std::size_t x) {
    const double t = std::pow(spec.delta, -k * spec.s) * std::abs(resp[k - stack.k_min][x]);
    return qinf ? t : std::pow(t, spec.q);
  };
  double high = 0.0;
  if (!std::isinf(spec.p)) {
    Field agg(static_cast<Eigen::Index>(n));
    for (std::size_t x = 0; x < n; ++x) {
      double a = 0.0;
      for (int k = k0; k <= stack.k_max; ++k) a = qinf ? std::max(a, term(k, x)) : a + term(k, x);
      agg[x] = qinf ? a : std::pow(a, 1.0 / spec.q);
    }
    high = lebesgue_norm(space, agg, spec.p);
  } else {
    const int lo = std::max(k0, cubes.k_min());
    const int hi = std::min(stack.k_max, cubes.k_max());
    if (hi < lo) throw RangeError("no cube level overlaps the stack for the p = inf norm");
    // tail[x] over k >= l, built from the finest level down.
    std::vector<double> tail(n, 0.0);
    for (int k = stack.k_max; k > hi; --k) {
      for (std::size_t x = 0; x < n; ++x) {
        tail[x] = qinf ? std::max(tail[x], term(k, x)) : tail[x] + term(k, x);
      }
    }
    for (int l = hi; l >= lo; --l) {
      for (std::size_t x = 0; x < n; ++x) {
        tail[x] = qinf ? std::max(tail[x], term(l, x)) : tail[x] + term(l, x);
      }
      for (const Cube& cube : cubes.level(l)) {
        double v = 0.0;
        for (int x : cube.members) {
          v = qinf ? std::max(v, tail[x]) : v + tail[x] * space.weight(x);
        }
        if (!qinf) v = std::pow(v / cube.mass, 1.0 / spec.q);
        high = std::max(high, v);
      }
    }
  }
  if (spec.flavor == Flavor::homogeneous) return high;
  const double low = low_block(resp, spec, stack, space, cubes);
  return std::isinf(spec.p) ? std::max(low, high) : low + high;
}

double sampled_besov_norm(const Field& f, const NormSpec& spec, const KernelStack& stack,
                          const Space& space, const CubeSystem& cubes) {
  check_spec(spec, stack);
  if (!cubes.refined()) throw RangeError("sampled norm needs a refined cube system");
  const auto resp = level_responses(stack, space, f);
  const int lo = std::max(stack.k_min, cubes.k_min());
  const int hi = std::min(stack.k_max, cubes.refined_k_max());
  std::vector<double> terms;
  for (int k = lo; k <= hi; ++k) {
    const Field& g = resp[k - stack.k_min];
    double acc = 0.0;
    for (const auto& subs : cubes.subcubes_at(k)) {
      for (const SubCube& sc : subs) {
        const double v = std::abs(g[sc.sample]);
        acc = std::isinf(spec.p) ? std::max(acc, v) : acc + sc.mass * std::pow(v, spec.p);
      }
    }
    if (!std::isinf(spec.p)) acc = std::pow(acc, 1.0 / spec.p);
    terms.push_back(std::pow(spec.delta, -k * spec.s) * acc);
  }
  return lq_aggregate(terms, spec.q);
}

double test_function_norm(const Space& space, const Field& f, std::size_t x1, double r,
                          double beta, double gamma) {
  if (!(r > 0.0)) throw ParameterError("test-function radius must be positive");
  if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in (0,1]");
  const std::size_t n = space.size();
  const double vr = space.ball_mass(x1, r);
  std::vector<double> rhs(n);
  double best = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double d1 = space.dist(x1, x);
    rhs[x] = std::pow(r / (r + d1), gamma) / (vr + space.v(x1, x));
    best = std::max(best, std::abs(f[x]) / rhs[x]);
  }
  const double a0 = space.a0();
  for (std::size_t x = 0; x < n; ++x) {
    const double scale = r + space.dist(x1, x);
    const double reach = scale / (2.0 * a0);
    for (std::size_t y = 0; y < n; ++y) {
      const double dxy = space.dist(x, y);
      if (y == x || dxy > reach) continue;
      const double diff = std::abs(f[x] - f[y]);
      if (diff == 0.0) continue;
      best = std::max(best, diff / (std::pow(dxy / scale, beta) * rhs[x]));
    }
  }
  return best;
}

Admissibility admissible_range(const NormSpec& spec, double omega, double eta) {
  Admissibility rep;
  const double bg = std::min(spec.beta, spec.gamma);
  const double excess = std::isinf(spec.p) ? 0.0 : std::max(0.0, omega * (1.0 / spec.p - 1.0));
  rep.threshold = std::max(omega / (omega + bg), omega / (omega + bg + spec.s));
  std::vector<std::string> common;
  auto fmt = [](const std::string& what, double v) {
    std::ostringstream os;
    os << what << " (" << v << ")";
    return os.str();
  };
  if (!(spec.beta > 0.0 && spec.beta < eta)) common.push_back(fmt("beta in (0, eta)", spec.beta));
  if (!(spec.gamma > 0.0 && spec.gamma < eta)) {
    common.push_back(fmt("gamma in (0, eta)", spec.gamma));
  }
  if (!(spec.s > -bg && spec.s < bg)) {
    common.push_back(fmt("s in (-(beta^gamma), beta^gamma)", spec.s));
  }
  if (!(spec.beta > std::max(0.0, -spec.s + excess))) {
    common.push_back(fmt("beta > max{0, -s + omega(1/p-1)_+}", spec.beta));
  }
  const double gamma_floor =
      spec.flavor == Flavor::homogeneous ? std::max(spec.s, excess) : excess;
  if (!(spec.gamma > gamma_floor)) {
    common.push_back(spec.flavor == Flavor::homogeneous
                         ? fmt("gamma > max{s, omega(1/p-1)_+}", spec.gamma)
                         : fmt("gamma > omega(1/p-1)_+", spec.gamma));
  }
  if (!(spec.p > rep.threshold)) common.push_back(fmt("p > p(s, beta^gamma)", spec.p));
  rep.besov_violations = common;
  rep.tl_violations = common;
  if (!(spec.q > rep.threshold)) rep.tl_violations.push_back(fmt("q > p(s, beta^gamma)", spec.q));
  rep.besov = rep.besov_violations.empty();
  rep.triebel_lizorkin = rep.tl_violations.empty();
  return rep;
}

}  // namespace lipbesov
