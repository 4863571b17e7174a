#include "lipbesov/space.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include "lipbesov/errors.hpp"
#include "lipbesov/parallel.hpp"
#include "lipbesov/rng.hpp"

namespace lipbesov {

Space::Space(Eigen::MatrixXd dist, Eigen::VectorXd weight, A0Certificate a0,
             std::string label, std::vector<std::vector<double>> coords)
    : dist_(std::move(dist)),
      weight_(std::move(weight)),
      a0_(a0),
      label_(std::move(label)),
      coords_(std::move(coords)) {
  const auto n = static_cast<std::size_t>(weight_.size());
  if (n == 0) throw FormatError("space must contain at least one point");
  if (static_cast<std::size_t>(dist_.rows()) != n ||
      static_cast<std::size_t>(dist_.cols()) != n) {
    throw FormatError("distance table shape does not match point count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weight_[i] > 0.0) || !std::isfinite(weight_[i])) {
      std::ostringstream os;
      os << "weight of point " << i << " must be positive, got " << weight_[i];
      throw FormatError(os.str());
    }
    if (dist_(i, i) != 0.0) {
      std::ostringstream os;
      os << "dist(" << i << "," << i << ") must be 0";
      throw FormatError(os.str());
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist_(i, j) != dist_(j, i)) {
        std::ostringstream os;
        os << "distance table is not symmetric at (" << i << "," << j
           << "): " << dist_(i, j) << " vs " << dist_(j, i);
        throw FormatError(os.str());
      }
      if (!(dist_(i, j) > 0.0) || !std::isfinite(dist_(i, j))) {
        std::ostringstream os;
        os << "dist(" << i << "," << j << ") must be positive and finite";
        throw FormatError(os.str());
      }
    }
  }
  if (a0_.a0 < 1.0) a0_.a0 = 1.0;
  total_mass_ = weight_.sum();
  diam_ = dist_.maxCoeff();

  order_.resize(n * n);
  sorted_.resize(n * n);
  cum_mass_.resize(n * (n + 1));
  parallel_for(n, [&](std::size_t x) {
    int* ord = order_.data() + x * n;
    std::iota(ord, ord + n, 0);
    std::stable_sort(ord, ord + n, [&](int a, int b) {
      return dist_(x, a) < dist_(x, b);
    });
    double* cum = cum_mass_.data() + x * (n + 1);
    cum[0] = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      sorted_[x * n + c] = dist_(x, ord[c]);
      cum[c + 1] = cum[c] + weight_[ord[c]];
    }
  });
  if (n == 1) {
    min_gap_ = std::numeric_limits<double>::infinity();
    max_gap_ = 0.0;
  } else {
    min_gap_ = std::numeric_limits<double>::infinity();
    max_gap_ = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      min_gap_ = std::min(min_gap_, sorted_[x * n + 1]);
      max_gap_ = std::max(max_gap_, sorted_[x * n + 1]);
    }
  }
}

std::span<const int> Space::by_distance(std::size_t x) const {
  return {order_.data() + x * size(), size()};
}

std::span<const double> Space::sorted_dist(std::size_t x) const {
  return {sorted_.data() + x * size(), size()};
}

std::size_t Space::ball_count(std::size_t x, double r) const {
  const auto row = sorted_dist(x);
  return static_cast<std::size_t>(
      std::lower_bound(row.begin(), row.end(), r) - row.begin());
}

double Space::ball_mass(std::size_t x, double r) const {
  return prefix_mass(x, ball_count(x, r));
}

double Space::v(std::size_t x, std::size_t y) const {
  return ball_mass(x, dist_(x, y));
}

double Space::prefix_mass(std::size_t x, std::size_t c) const {
  return cum_mass_[x * (size() + 1) + c];
}

SpaceKind parse_space_kind(const std::string& name) {
  static const std::map<std::string, SpaceKind> kinds = {
      {"grid1d", SpaceKind::grid1d},       {"grid2d", SpaceKind::grid2d},
      {"circle", SpaceKind::circle},       {"graph", SpaceKind::graph},
      {"sierpinski", SpaceKind::sierpinski},
      {"sierpinski_level", SpaceKind::sierpinski},
      {"snowflake", SpaceKind::snowflake},
      {"snowflake_power", SpaceKind::snowflake}};
  auto it = kinds.find(name);
  if (it == kinds.end()) throw ParameterError("unknown space kind '" + name + "'");
  return it->second;
}

std::string to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::grid1d: return "grid1d";
    case SpaceKind::grid2d: return "grid2d";
    case SpaceKind::circle: return "circle";
    case SpaceKind::graph: return "graph";
    case SpaceKind::sierpinski: return "sierpinski";
    case SpaceKind::snowflake: return "snowflake";
  }
  return "unknown";
}

namespace {

Eigen::MatrixXd euclidean(const std::vector<std::vector<double>>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < pts[i].size(); ++c) {
        const double diff = pts[i][c] - pts[j][c];
        s += diff * diff;
      }
      d(i, j) = d(j, i) = std::sqrt(s);
    }
  }
  return d;
}

std::vector<std::vector<double>> grid1d_points(int n) {
  std::vector<std::vector<double>> pts(n);
  for (int i = 0; i < n; ++i) {
    pts[i] = {n == 1 ? 0.0 : static_cast<double>(i) / (n - 1)};
  }
  return pts;
}

Eigen::MatrixXd grid1d_dist(int n) {
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d(i, j) = n == 1 ? 0.0 : std::abs(static_cast<double>(i - j)) / (n - 1);
    }
  }
  return d;
}

std::vector<std::vector<double>> sierpinski_points(int level) {
  // Vertices of the level-L gasket: corners of the 3^L smallest triangles.
  std::vector<std::array<double, 2>> corners = {
      {{0.0, 0.0}}, {{1.0, 0.0}}, {{0.5, std::sqrt(3.0) / 2.0}}};
  std::vector<std::array<std::array<double, 2>, 3>> tris = {
      {corners[0], corners[1], corners[2]}};
  for (int l = 0; l < level; ++l) {
    std::vector<std::array<std::array<double, 2>, 3>> next;
    next.reserve(tris.size() * 3);
    for (const auto& t : tris) {
      auto mid = [](const std::array<double, 2>& a, const std::array<double, 2>& b) {
        return std::array<double, 2>{{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])}};
      };
      const auto m01 = mid(t[0], t[1]);
      const auto m12 = mid(t[1], t[2]);
      const auto m02 = mid(t[0], t[2]);
      next.push_back({t[0], m01, m02});
      next.push_back({m01, t[1], m12});
      next.push_back({m02, m12, t[2]});
    }
    tris = std::move(next);
  }
  // Dedupe on a lattice key; coordinates are exact dyadic multiples of the
  // side and sqrt(3)/2 up to rounding.
  const double scale = std::ldexp(1.0, level + 2);
  std::map<std::pair<long long, long long>, std::array<double, 2>> unique;
  for (const auto& t : tris) {
    for (const auto& p : t) {
      const auto key = std::make_pair(std::llround(p[1] / (std::sqrt(3.0) / 2.0) * scale),
                                      std::llround(p[0] * scale));
      unique.emplace(key, p);
    }
  }
  std::vector<std::vector<double>> pts;
  pts.reserve(unique.size());
  for (const auto& [key, p] : unique) pts.push_back({p[0], p[1]});
  return pts;
}

// Cycle of n nodes plus n/8 seeded chords, unit edges, hop distance / n.
Eigen::MatrixXd small_world_dist(int n, std::uint64_t seed) {
  std::vector<std::vector<int>> adj(n);
  auto link = [&](int a, int b) {
    if (a == b) return;
    if (std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end()) return;
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
  if (n > 2) link(n - 1, 0);
  Rng rng(mix_seed(seed, 0x67726170ULL));
  for (int c = 0; c < n / 8; ++c) {
    link(static_cast<int>(rng.index(n)), static_cast<int>(rng.index(n)));
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  Eigen::MatrixXd d(n, n);
  for (int s = 0; s < n; ++s) {
    std::vector<int> hops(n, -1);
    std::queue<int> frontier;
    hops[s] = 0;
    frontier.push(s);
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int w : adj[u]) {
        if (hops[w] < 0) {
          hops[w] = hops[u] + 1;
          frontier.push(w);
        }
      }
    }
    for (int t = 0; t < n; ++t) d(s, t) = static_cast<double>(hops[t]) / n;
  }
  return d;
}

}  // namespace

Space generate_space(const SpaceParams& params) {
  if (params.size < 1 && params.kind != SpaceKind::sierpinski) {
    throw ParameterError("space size must be at least 1");
  }
  if (params.kind == SpaceKind::sierpinski && params.size < 0) {
    throw ParameterError("sierpinski level must be nonnegative");
  }
  if (!(params.exponent > 0.0)) {
    throw ParameterError("snowflake exponent must be positive");
  }
  Eigen::MatrixXd dist;
  std::vector<std::vector<double>> coords;
  std::string label = params.label;
  switch (params.kind) {
    case SpaceKind::grid1d:
    case SpaceKind::snowflake:
      coords = grid1d_points(params.size);
      dist = grid1d_dist(params.size);
      break;
    case SpaceKind::grid2d: {
      const int m = params.size;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          const double h = m == 1 ? 0.0 : 1.0 / (m - 1);
          coords.push_back({i * h, j * h});
        }
      }
      dist = euclidean(coords);
      break;
    }
    case SpaceKind::circle: {
      const int n = params.size;
      dist.resize(n, n);
      for (int i = 0; i < n; ++i) {
        const double angle = 2.0 * M_PI * i / n;
        coords.push_back({std::cos(angle) / (2.0 * M_PI), std::sin(angle) / (2.0 * M_PI)});
        for (int j = 0; j < n; ++j) {
          const int gap = std::abs(i - j);
          dist(i, j) = static_cast<double>(std::min(gap, n - gap)) / n;
        }
      }
      break;
    }
    case SpaceKind::graph:
      dist = small_world_dist(params.size, params.seed);
      break;
    case SpaceKind::sierpinski:
      coords = sierpinski_points(params.size);
      dist = euclidean(coords);
      break;
  }
  if (params.kind == SpaceKind::snowflake && params.exponent != 1.0) {
    dist = dist.array().pow(params.exponent).matrix();
  }
  const auto n = dist.rows();
  Eigen::VectorXd weight(n);
  if (!params.custom_weights.empty()) {
    if (static_cast<Eigen::Index>(params.custom_weights.size()) != n) {
      throw ParameterError("custom weight count does not match point count");
    }
    for (Eigen::Index i = 0; i < n; ++i) weight[i] = params.custom_weights[i];
  } else {
    weight.setConstant(1.0 / static_cast<double>(n));
  }
  if (label.empty()) {
    std::ostringstream os;
    os << to_string(params.kind) << "(" << params.size;
    if (params.kind == SpaceKind::snowflake) os << ", a=" << params.exponent;
    os << ")";
    label = os.str();
  }
  auto cert = certify_a0(dist, params.certify_cap, params.sampled_triples, params.seed);
  return Space(std::move(dist), std::move(weight), cert, std::move(label),
               std::move(coords));
}

A0Certificate certify_a0(const Eigen::MatrixXd& dist, std::size_t cap,
                         std::uint64_t samples, std::uint64_t seed) {
  A0Certificate cert;
  const auto n = static_cast<std::size_t>(dist.rows());
  if (n < 3) return cert;
  auto consider = [](A0Certificate& c, double ratio, int i, int k, int j) {
    if (ratio > c.a0 || (c.i < 0 && ratio >= c.a0)) {
      c.a0 = ratio;
      c.i = i;
      c.k = k;
      c.j = j;
    }
  };
  if (n <= cap) {
    std::vector<A0Certificate> rows(n);
    parallel_for(n, [&](std::size_t i) {
      A0Certificate local;
      local.a0 = 0.0;
      for (std::size_t k = i + 1; k < n; ++k) {
        const double dik = dist(i, k);
        double best = std::numeric_limits<double>::infinity();
        int arg = -1;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || j == k) continue;
          const double s = dist(i, j) + dist(j, k);
          if (s < best) {
            best = s;
            arg = static_cast<int>(j);
          }
        }
        consider(local, dik / best, static_cast<int>(i), static_cast<int>(k), arg);
      }
      rows[i] = local;
    });
    cert.a0 = 0.0;
    for (const auto& r : rows) {
      if (r.i >= 0) consider(cert, r.a0, r.i, r.k, r.j);
    }
  } else {
    cert.sampled = true;
    cert.a0 = 0.0;
    Rng rng(mix_seed(seed, 0x613043ULL));
    for (std::uint64_t s = 0; s < samples; ++s) {
      const auto i = rng.index(n), k = rng.index(n), j = rng.index(n);
      if (i == k || j == i || j == k) continue;
      consider(cert, dist(i, k) / (dist(i, j) + dist(j, k)), static_cast<int>(i),
               static_cast<int>(k), static_cast<int>(j));
    }
  }
  if (cert.a0 < 1.0) cert.a0 = 1.0;
  return cert;
}

void verify_a0(const Eigen::MatrixXd& dist, double a0, std::size_t cap,
               std::uint64_t samples, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(dist.rows());
  const double slack = 1.0 + 1e-12;
  auto fail = [&](std::size_t i, std::size_t k, std::size_t j) {
    std::ostringstream os;
    os << "quasi-triangle inequality violated for declared a0=" << a0
       << " by triple (" << i << "," << k << "," << j << "): d(" << i << ","
       << k << ")=" << dist(i, k) << " > a0*(d(" << i << "," << j << ")+d("
       << j << "," << k << "))=" << a0 * (dist(i, j) + dist(j, k));
    throw CertificationError(os.str(), static_cast<int>(i), static_cast<int>(k),
                             static_cast<int>(j));
  };
  if (n <= cap) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i + 1; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || j == k) continue;
          if (dist(i, k) > a0 * (dist(i, j) + dist(j, k)) * slack) fail(i, k, j);
        }
      }
    }
    return;
  }
  Rng rng(mix_seed(seed, 0x613043ULL));
  for (std::uint64_t s = 0; s < samples; ++s) {
    const auto i = rng.index(n), k = rng.index(n), j = rng.index(n);
    if (i == k || j == i || j == k) continue;
    if (dist(i, k) > a0 * (dist(i, j) + dist(j, k)) * slack) {
      fail(std::min(i, k), std::max(i, k), j);
    }
  }
}

namespace {

struct PowerFit {
  double slope = 0.0;
  double constant = 0.0;
  bool ok = false;
};

// Least-squares slope of log(mass) on log(r); constant is the worst-case
// (minimum) intercept so that mass >= constant * r^slope on every sample.
PowerFit fit_lower_power(const std::vector<double>& log_r,
                         const std::vector<double>& log_m) {
  PowerFit fit;
  const std::size_t m = log_r.size();
  if (m < 2) return fit;
  const double mean_x = std::accumulate(log_r.begin(), log_r.end(), 0.0) / m;
  const double mean_y = std::accumulate(log_m.begin(), log_m.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (log_r[i] - mean_x) * (log_r[i] - mean_x);
    sxy += (log_r[i] - mean_x) * (log_m[i] - mean_y);
  }
  if (sxx <= 0.0) return fit;
  fit.slope = sxy / sxx;
  double intercept = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    intercept = std::min(intercept, log_m[i] - fit.slope * log_r[i]);
  }
  fit.constant = std::exp(intercept);
  fit.ok = true;
  return fit;
}

}  // namespace

GeometryReport geometry_report(const Space& space,
                               const std::vector<double>& radius_grid,
                               const GeometryOptions& options) {
  if (radius_grid.empty()) throw ParameterError("radius grid must be nonempty");
  for (std::size_t i = 0; i < radius_grid.size(); ++i) {
    if (!(radius_grid[i] > 0.0)) throw ParameterError("radii must be positive");
    if (i > 0 && radius_grid[i] < radius_grid[i - 1]) {
      throw ParameterError("radius grid must be sorted");
    }
  }
  const std::size_t n = space.size();
  GeometryReport report;
  report.diam = space.diam();

  std::vector<double> row_cmu(n, 1.0);
  parallel_for(n, [&](std::size_t x) {
    double best = 1.0;
    for (double r : radius_grid) {
      best = std::max(best, space.ball_mass(x, 2.0 * r) / space.ball_mass(x, r));
    }
    row_cmu[x] = best;
  });
  for (double c : row_cmu) report.c_mu = std::max(report.c_mu, c);
  report.omega = std::log2(report.c_mu);

  // The bound is uniform in x, so fit the lower envelope min_x mu(B(x, r)).
  std::vector<double> lr_all, lm_all, lr_loc, lm_loc;
  for (double r : radius_grid) {
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < n; ++x) lowest = std::min(lowest, space.ball_mass(x, r));
    const double lr = std::log(r), lm = std::log(lowest);
    lr_all.push_back(lr);
    lm_all.push_back(lm);
    if (r <= 1.0) {
      lr_loc.push_back(lr);
      lm_loc.push_back(lm);
    }
  }
  if (auto fit = fit_lower_power(lr_all, lm_all); fit.ok) {
    report.q_global = fit.slope;
    report.q_global_const = fit.constant;
  }
  if (auto fit = fit_lower_power(lr_loc, lm_loc); fit.ok) {
    report.q_local = fit.slope;
    report.q_local_const = fit.constant;
  }

  if (options.fit_kappa) {
    // Reverse doubling: ratios mu(B(x, l r)) / mu(B(x, r)) for grid pairs
    // r < l r < diam / 2, fitted through the origin in log-log.
    double sxx = 0.0, sxy = 0.0;
    std::vector<std::pair<double, double>> samples;
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t a = 0; a < radius_grid.size(); ++a) {
        for (std::size_t b = a + 1; b < radius_grid.size(); ++b) {
          const double r = radius_grid[a], R = radius_grid[b];
          if (!(R < space.diam() / 2.0)) continue;
          const double ll = std::log(R / r);
          const double lq = std::log(space.ball_mass(x, R) / space.ball_mass(x, r));
          sxx += ll * ll;
          sxy += ll * lq;
          samples.emplace_back(ll, lq);
        }
      }
    }
    if (sxx > 0.0) {
      const double kappa = sxy / sxx;
      double c = std::numeric_limits<double>::infinity();
      for (const auto& [ll, lq] : samples) c = std::min(c, lq - kappa * ll);
      report.kappa = kappa;
      report.kappa_const = std::min(1.0, std::exp(c));
    }
  }

  double vsym = 1.0;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const double a = space.v(x, y), b = space.v(y, x);
      vsym = std::max(vsym, std::max(a / b, b / a));
    }
  }
  report.v_symmetry = vsym;
  return report;
}

std::vector<double> resolved_radius_grid(const Space& space, double resolution_multiple) {
  std::vector<double> grid;
  if (space.size() == 1) {
    grid.push_back(1.0);
    return grid;
  }
  for (double r = resolution_multiple * space.max_gap(); r <= space.diam(); r *= 2.0) {
    grid.push_back(r);
  }
  if (grid.empty()) grid.push_back(space.diam());
  return grid;
}

}  // namespace lipbesov
