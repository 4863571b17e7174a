#include "lipbesov/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lipbesov/errors.hpp"
#include "lipbesov/parallel.hpp"
#include "lipbesov/rng.hpp"

namespace lipbesov {

Flavor parse_flavor(const std::string& name) {
  if (name == "homogeneous") return Flavor::homogeneous;
  if (name == "inhomogeneous") return Flavor::inhomogeneous;
  throw ParameterError("unknown flavor '" + name + "'");
}

std::string to_string(Flavor flavor) {
  return flavor == Flavor::homogeneous ? "homogeneous" : "inhomogeneous";
}

const Eigen::MatrixXd& KernelStack::level(int k) const {
  if (!has_level(k)) {
    std::ostringstream os;
    os << "level " << k << " outside the stack range " << k_min << ".." << k_max;
    throw RangeError(os.str());
  }
  return q[k - k_min];
}

Eigen::MatrixXd build_semigroup(const Space& space, double t, double a,
                                const ScalingOptions& options) {
  if (!(t > 0.0)) throw ParameterError("semigroup scale must be positive");
  if (!(a > 0.0)) throw ParameterError("decay exponent must be positive");
  const Eigen::Index n = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index y = 0; y < n; ++y) {
    for (Eigen::Index x = 0; x < n; ++x) k(x, y) = std::exp(-std::pow(space.dist(x, y) / t, a));
  }
  const Eigen::VectorXd& mu = space.weight();
  // Symmetric scaling: find d > 0 with d .* (K (d .* mu)) = 1, damped by a
  // geometric mean so the iteration does not oscillate.
  Eigen::VectorXd d = (k * mu).cwiseInverse().cwiseSqrt();
  double err = std::numeric_limits<double>::infinity();
  int sweep = 0;
  for (; sweep < options.max_sweeps; ++sweep) {
    const Eigen::VectorXd row = d.cwiseProduct(k * d.cwiseProduct(mu));
    err = (row.array() - 1.0).abs().maxCoeff();
    if (err <= 0.25 * options.tol) break;
    d = d.cwiseProduct(row.cwiseInverse().cwiseSqrt());
  }
  if (!(err <= 0.25 * options.tol)) {
    std::ostringstream os;
    os << "symmetric scaling at t=" << t << " stalled at row error " << err << " after "
       << sweep << " sweeps";
    throw ConvergenceError(os.str());
  }
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index y = 0; y < n; ++y) {
    for (Eigen::Index x = 0; x <= y; ++x) {
      p(x, y) = d[x] * k(x, y) * d[y];
      p(y, x) = p(x, y);
    }
  }
  return p;
}

namespace {

void attach_report(KernelStack& stack, const Space& space, const CubeSystem& cubes) {
  ValidationOptions vo;
  vo.gammas = {1.0, 2.0};
  stack.report = validate_ati(stack, space, cubes, vo);
  stack.nu = stack.report.nu;
  stack.eta = stack.report.eta_fit;
}

}  // namespace

KernelStack build_exp_ati(const Space& space, const CubeSystem& cubes,
                          const KernelOptions& options) {
  KernelStack stack;
  stack.flavor = Flavor::homogeneous;
  stack.k_min = cubes.k_min();
  stack.k_max = cubes.k_max();
  stack.delta = cubes.delta();
  stack.a = options.a;
  stack.sigma = options.sigma;
  stack.n_low = options.n_low;
  const Eigen::Index n = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd prev = Eigen::MatrixXd::Constant(n, n, 1.0 / space.total_mass());
  for (int k = stack.k_min; k <= stack.k_max; ++k) {
    Eigen::MatrixXd cur = build_semigroup(space, std::pow(stack.delta, k), options.a,
                                          options.scaling);
    stack.q.push_back(cur - prev);
    prev = std::move(cur);
  }
  attach_report(stack, space, cubes);
  return stack;
}

KernelStack build_exp_iati(const Space& space, const CubeSystem& cubes,
                           const KernelOptions& options) {
  if (cubes.k_min() > 0 || cubes.k_max() < 1) {
    throw RangeError("inhomogeneous stacks need cube levels covering 0 and 1");
  }
  if (!(options.sigma > 0.0)) throw ParameterError("sigma must be positive");
  if (options.n_low < 0) throw ParameterError("N must be nonnegative");
  KernelStack stack;
  stack.flavor = Flavor::inhomogeneous;
  stack.k_min = 0;
  stack.k_max = cubes.k_max();
  stack.delta = cubes.delta();
  stack.a = options.a;
  stack.sigma = options.sigma;
  stack.n_low = options.n_low;
  Eigen::MatrixXd prev = build_semigroup(space, options.sigma, options.a, options.scaling);
  stack.q.push_back(prev);
  for (int k = 1; k <= stack.k_max; ++k) {
    Eigen::MatrixXd cur = build_semigroup(space, std::pow(stack.delta, k), options.a,
                                          options.scaling);
    stack.q.push_back(cur - prev);
    prev = std::move(cur);
  }
  attach_report(stack, space, cubes);
  return stack;
}

double h_factor(const CubeSystem& cubes, const Space& space, int k, double nu, double a,
                std::size_t x, std::size_t y) {
  if (cubes.reference_points(k).empty()) return 1.0;
  const double m = std::max(cubes.dist_to_refpoints(space, k, x),
                            cubes.dist_to_refpoints(space, k, y));
  return std::exp(-nu * std::pow(m / std::pow(cubes.delta(), k), a));
}

std::vector<Field> identity_probes(const KernelStack& stack, const Space& space, int count,
                                   std::uint64_t seed) {
  std::vector<Field> probes;
  const Eigen::Index n = static_cast<Eigen::Index>(space.size());
  const int lo = std::min(stack.k_min + 2, stack.k_max);
  const int hi = std::max(lo, std::min(stack.k_min + 5, stack.k_max));
  for (int i = 0; i < count; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    Field g(n);
    for (Eigen::Index x = 0; x < n; ++x) g[x] = rng.normal();
    if (stack.flavor == Flavor::homogeneous) {
      const int j = lo + i % (hi - lo + 1);
      probes.push_back(stack.level(j) * g.cwiseProduct(space.weight()));
    } else {
      probes.push_back(g);
    }
  }
  return probes;
}

double identity_residual(const KernelStack& stack, const Space& space,
                         const std::vector<Field>& probes) {
  double worst = 0.0;
  for (const Field& probe : probes) {
    Field f = probe;
    if (stack.flavor == Flavor::homogeneous) f.array() -= space.mean(f);
    const Field fm = f.cwiseProduct(space.weight());
    Field sum = Field::Zero(f.size());
    for (const auto& q : stack.q) sum += q * fm;
    const double num = std::sqrt(space.integrate((f - sum).cwiseAbs2()));
    const double den = std::sqrt(space.integrate(f.cwiseAbs2()));
    if (den > 0.0) worst = std::max(worst, num / den);
  }
  return worst;
}

namespace {

struct LevelGeometry {
  Eigen::VectorXd log_v;  // log V_{delta^k}(x)
  Eigen::VectorXd v;
  Eigen::VectorXd ref;    // d(x, Y^k) / delta^k, or 0 when the h factor is off
  double scale = 1.0;
};

LevelGeometry level_geometry(const KernelStack& stack, const Space& space,
                             const CubeSystem& cubes, int k) {
  const std::size_t n = space.size();
  LevelGeometry g;
  g.scale = std::pow(stack.delta, k);
  g.log_v.resize(static_cast<Eigen::Index>(n));
  g.v.resize(static_cast<Eigen::Index>(n));
  g.ref = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  const bool use_h = !(stack.flavor == Flavor::inhomogeneous && k == 0) &&
                     k >= cubes.k_min() && k <= cubes.k_max() &&
                     !cubes.reference_points(k).empty();
  for (std::size_t x = 0; x < n; ++x) {
    g.v[x] = space.ball_mass(x, g.scale);
    g.log_v[x] = std::log(g.v[x]);
    if (use_h) g.ref[x] = cubes.dist_to_refpoints(space, k, x) / g.scale;
  }
  return g;
}

// Exponent of the decay factor: (d/delta^k)^a + (max ref distance)^a.
double decay_arg(const LevelGeometry& g, double d, double a, std::size_t x, std::size_t y,
                 bool with_h) {
  double z = std::pow(d / g.scale, a);
  if (with_h) z += std::pow(std::max(g.ref[x], g.ref[y]), a);
  return z;
}

double median_minus_max(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double top = *std::max_element(v.begin(), v.end());
  auto mid = v.begin() + static_cast<long>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid - top;
}

// Pairs (x, x') with 0 < d(x, x') <= r, in (x, by_distance) order, thinned
// to at most `budget` by a fixed stride.
std::vector<std::pair<int, int>> close_pairs(const Space& space, double r, std::size_t budget,
                                             bool& sampled) {
  std::vector<std::pair<int, int>> all;
  for (std::size_t x = 0; x < space.size(); ++x) {
    const auto order = space.by_distance(x);
    const auto dist = space.sorted_dist(x);
    for (std::size_t i = 1; i < order.size() && dist[i] <= r; ++i) {
      all.emplace_back(static_cast<int>(x), order[i]);
    }
  }
  if (all.size() <= budget) return all;
  sampled = true;
  std::vector<std::pair<int, int>> out;
  const double stride = static_cast<double>(all.size()) / static_cast<double>(budget);
  for (std::size_t i = 0; i < budget; ++i) {
    out.push_back(all[static_cast<std::size_t>(static_cast<double>(i) * stride)]);
  }
  return out;
}

}  // namespace

AtiValidationReport validate_ati(const KernelStack& stack, const Space& space,
                                 const CubeSystem& cubes, const ValidationOptions& options) {
  AtiValidationReport rep;
  const std::size_t n = space.size();
  const Eigen::VectorXd& mu = space.weight();
  const double a = stack.a;

  for (int k = stack.k_min; k <= stack.k_max; ++k) {
    const Eigen::VectorXd rows = stack.level(k) * mu;
    if (stack.flavor == Flavor::inhomogeneous && k == 0) {
      rep.unit_resid = std::max(rep.unit_resid, (rows.array() - 1.0).abs().maxCoeff());
    } else {
      rep.cancel_resid = std::max(rep.cancel_resid, rows.cwiseAbs().maxCoeff());
    }
  }

  std::vector<LevelGeometry> geo;
  for (int k = stack.k_min; k <= stack.k_max; ++k) {
    geo.push_back(level_geometry(stack, space, cubes, k));
  }
  double qmax = 0.0;
  for (const auto& q : stack.q) qmax = std::max(qmax, q.cwiseAbs().maxCoeff());
  const double floor = 1e-13 * qmax;

  // nu: maximize median(log ratio) - max(log ratio) over a fixed grid, on a
  // strided sample of the nonnegligible entries.
  std::vector<double> lq, zz;
  {
    const std::size_t total = static_cast<std::size_t>(stack.levels()) * n * n;
    const std::size_t stride = std::max<std::size_t>(1, total / 200'000);
    std::size_t idx = 0;
    for (int k = stack.k_min; k <= stack.k_max; ++k) {
      const auto& q = stack.level(k);
      const auto& g = geo[k - stack.k_min];
      for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y, ++idx) {
          if (idx % stride != 0) continue;
          const double v = std::abs(q(x, y));
          if (v <= floor) continue;
          lq.push_back(std::log(v) + 0.5 * (g.log_v[x] + g.log_v[y]));
          zz.push_back(decay_arg(g, space.dist(x, y), a, x, y, true));
        }
      }
    }
  }
  double best_nu = 0.05, best_t = -std::numeric_limits<double>::infinity();
  std::vector<double> vals(lq.size());
  for (double nu = 0.01; nu <= 4.0; nu *= 1.1) {
    for (std::size_t i = 0; i < lq.size(); ++i) vals[i] = lq[i] + nu * zz[i];
    const double t = median_minus_max(vals);
    if (t > best_t) {
      best_t = t;
      best_nu = nu;
    }
  }
  rep.nu = best_nu;
  const double nu = best_nu;

  // Size constants and R_Gamma constants, exhaustive.
  rep.rgamma.clear();
  for (double gm : options.gammas) rep.rgamma.push_back({gm, 0.0});
  double log_size = -std::numeric_limits<double>::infinity();
  double log_size_no_h = log_size;
  std::vector<double> log_rg(options.gammas.size(), log_size);
  for (int k = stack.k_min; k <= stack.k_max; ++k) {
    const auto& q = stack.level(k);
    const auto& g = geo[k - stack.k_min];
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        const double v = std::abs(q(x, y));
        if (v == 0.0) continue;
        const double d = space.dist(x, y);
        const double base = std::log(v) + 0.5 * (g.log_v[x] + g.log_v[y]);
        log_size = std::max(log_size, base + nu * decay_arg(g, d, a, x, y, true));
        log_size_no_h = std::max(log_size_no_h, base + nu * decay_arg(g, d, a, x, y, false));
        const double lr = std::log(v) + std::log(g.v[x] + space.v(x, y));
        const double lt = std::log((g.scale + d) / g.scale);
        for (std::size_t i = 0; i < log_rg.size(); ++i) {
          log_rg[i] = std::max(log_rg[i], lr + options.gammas[i] * lt);
        }
      }
    }
  }
  rep.size_const = std::exp(log_size);
  rep.size_const_no_h = std::exp(log_size_no_h);
  for (std::size_t i = 0; i < log_rg.size(); ++i) rep.rgamma[i].value = std::exp(log_rg[i]);

  // Regularity: per pair, D = max_y 2|Q(x,y) - Q(x',y)| / bound(x,y).
  std::vector<double> log_rho, log_d;
  std::vector<std::vector<std::pair<int, int>>> pairs_by_level;
  for (int k = stack.k_min; k <= stack.k_max; ++k) {
    const auto& q = stack.level(k);
    const auto& g = geo[k - stack.k_min];
    auto pairs = close_pairs(space, g.scale, options.pair_budget, rep.regularity_sampled);
    for (auto [x, xp] : pairs) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t y = 0; y < n; ++y) {
        const double diff = 2.0 * std::abs(q(x, y) - q(xp, y));
        if (diff == 0.0) continue;
        best = std::max(best, std::log(diff) + 0.5 * (g.log_v[x] + g.log_v[y]) +
                                  nu * decay_arg(g, space.dist(x, y), a, x, y, true));
      }
      if (std::isfinite(best)) {
        log_rho.push_back(std::log(space.dist(x, xp) / g.scale));
        log_d.push_back(best);
      }
    }
    pairs_by_level.push_back(std::move(pairs));
  }
  // eta: least-squares slope of the per-bin upper envelope of log D against
  // log rho, clamped into (0, 1).
  double eta = 0.999;
  if (!log_rho.empty()) {
    const double lo = *std::min_element(log_rho.begin(), log_rho.end());
    const double hi = *std::max_element(log_rho.begin(), log_rho.end());
    const int bins = 16;
    std::vector<double> env(bins, -std::numeric_limits<double>::infinity());
    std::vector<double> center(bins, 0.0);
    const double width = (hi - lo) / bins;
    for (std::size_t i = 0; i < log_rho.size(); ++i) {
      int b = width > 0.0 ? static_cast<int>((log_rho[i] - lo) / width) : 0;
      b = std::clamp(b, 0, bins - 1);
      env[b] = std::max(env[b], log_d[i]);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int b = 0; b < bins; ++b) {
      if (!std::isfinite(env[b])) continue;
      center[b] = lo + (b + 0.5) * width;
      sx += center[b];
      sy += env[b];
      sxx += center[b] * center[b];
      sxy += center[b] * env[b];
      ++m;
    }
    const double den = m * sxx - sx * sx;
    if (m >= 2 && den > 0.0) eta = std::clamp((m * sxy - sx * sy) / den, 0.01, 0.999);
  }
  rep.eta_fit = eta;
  double log_reg = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log_rho.size(); ++i) {
    log_reg = std::max(log_reg, log_d[i] - eta * log_rho[i]);
  }
  rep.reg_const = std::isfinite(log_reg) ? std::exp(log_reg) : 0.0;

  // Second differences over a thinned product of close pairs.
  double log_sd = -std::numeric_limits<double>::infinity();
  for (int k = stack.k_min; k <= stack.k_max; ++k) {
    const auto& q = stack.level(k);
    const auto& g = geo[k - stack.k_min];
    const auto& all = pairs_by_level[k - stack.k_min];
    std::vector<std::pair<int, int>> pairs;
    if (all.size() <= options.second_pair_budget) {
      pairs = all;
    } else {
      rep.second_diff_sampled = true;
      const double stride =
          static_cast<double>(all.size()) / static_cast<double>(options.second_pair_budget);
      for (std::size_t i = 0; i < options.second_pair_budget; ++i) {
        pairs.push_back(all[static_cast<std::size_t>(static_cast<double>(i) * stride)]);
      }
    }
    for (auto [x, xp] : pairs) {
      const double rx = std::log(space.dist(x, xp) / g.scale);
      for (auto [y, yp] : pairs) {
        const double v = std::abs(q(x, y) - q(xp, y) - q(x, yp) + q(xp, yp));
        if (v == 0.0) continue;
        const double ry = std::log(space.dist(y, yp) / g.scale);
        log_sd = std::max(log_sd, std::log(v) + 0.5 * (g.log_v[x] + g.log_v[y]) +
                                      nu * decay_arg(g, space.dist(x, y), a, x, y, true) -
                                      eta * (rx + ry));
      }
    }
  }
  rep.second_diff_const = std::isfinite(log_sd) ? std::exp(log_sd) : 0.0;

  rep.identity_resid = identity_residual(
      stack, space, identity_probes(stack, space, options.probe_count, options.seed));
  return rep;
}

}  // namespace lipbesov
