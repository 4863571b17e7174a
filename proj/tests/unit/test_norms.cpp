#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lipbesov/errors.hpp"
#include "lipbesov/lab.hpp"
#include "lipbesov/norms.hpp"

using namespace testing;

namespace {

// Q_k f(x) summed straight from the kernel table; homogeneous fields are
// taken modulo constants.
double qf(const KernelStack& st, const Space& s, const Field& f, int k, std::size_t x,
          double shift) {
  double acc = 0;
  for (std::size_t y = 0; y < s.size(); ++y)
    acc += st.level(k)(x, y) * (f[y] - shift) * s.weight(y);
  return acc;
}

double shift_of(const KernelStack& st, const Space& s, const Field& f) {
  if (st.flavor == Flavor::inhomogeneous) return 0.0;
  double a = 0, m = 0;
  for (std::size_t y = 0; y < s.size(); ++y) {
    a += f[y] * s.weight(y);
    m += s.weight(y);
  }
  return a / m;
}

double low_block_oracle(const Pipeline& pl, const Field& f, double p) {
  double acc = 0;
  for (int k = 0; k <= pl.stack.n_low; ++k) {
    for (const auto& subs : pl.cubes.subcubes_at(k)) {
      for (const auto& sc : subs) {
        double m = 0, a = 0;
        for (int u : pl.cubes.level(k + pl.cubes.j0)[sc.cube].members) {
          m += pl.space.weight(u);
          a += std::abs(qf(pl.stack, pl.space, f, k, u, 0.0)) * pl.space.weight(u);
        }
        acc += m * std::pow(a / m, p);
      }
    }
  }
  return std::pow(acc, 1 / p);
}

double besov_oracle(const Pipeline& pl, const Field& f, double s, double p, double q) {
  const auto& st = pl.stack;
  const double c = shift_of(st, pl.space, f);
  const int k0 = st.flavor == Flavor::homogeneous ? st.k_min : st.n_low + 1;
  double sum = 0;
  for (int k = k0; k <= st.k_max; ++k) {
    double lp = 0;
    for (std::size_t x = 0; x < pl.space.size(); ++x)
      lp += std::pow(std::abs(qf(st, pl.space, f, k, x, c)), p) * pl.space.weight(x);
    sum += std::pow(std::pow(0.5, -k * s) * std::pow(lp, 1 / p), q);
  }
  double v = std::pow(sum, 1 / q);
  if (st.flavor == Flavor::inhomogeneous) v += low_block_oracle(pl, f, p);
  return v;
}

double tl_oracle(const Pipeline& pl, const Field& f, double s, double p, double q) {
  const auto& st = pl.stack;
  const double c = shift_of(st, pl.space, f);
  const int k0 = st.flavor == Flavor::homogeneous ? st.k_min : st.n_low + 1;
  double lp = 0;
  for (std::size_t x = 0; x < pl.space.size(); ++x) {
    double a = 0;
    for (int k = k0; k <= st.k_max; ++k)
      a += std::pow(std::pow(0.5, -k * s) * std::abs(qf(st, pl.space, f, k, x, c)), q);
    lp += std::pow(a, p / q) * pl.space.weight(x);
  }
  double v = std::pow(lp, 1 / p);
  if (st.flavor == Flavor::inhomogeneous) v += low_block_oracle(pl, f, p);
  return v;
}

// Homogeneous p = inf: sup over cubes Q at level l of
// (mu(Q)^-1 sum_{x in Q} sum_{k >= l} (delta^-ks |Q_k f(x)|)^q mu_x)^(1/q).
double tl_inf_oracle(const Pipeline& pl, const Field& f, double s, double q, int* best_l,
                     int* best_a) {
  const auto& st = pl.stack;
  const double c = shift_of(st, pl.space, f);
  double best = 0;
  for (int l = std::max(st.k_min, pl.cubes.k_min()); l <= std::min(st.k_max, pl.cubes.k_max());
       ++l) {
    const auto& level = pl.cubes.level(l);
    for (std::size_t a = 0; a < level.size(); ++a) {
      double acc = 0, m = 0;
      for (int x : level[a].members) {
        m += pl.space.weight(x);
        for (int k = l; k <= st.k_max; ++k)
          acc += std::pow(std::pow(0.5, -k * s) * std::abs(qf(st, pl.space, f, k, x, c)), q) *
                 pl.space.weight(x);
      }
      const double v = std::pow(acc / m, 1 / q);
      if (v > best) {
        best = v;
        *best_l = l;
        *best_a = static_cast<int>(a);
      }
    }
  }
  return best;
}

NormSpec spec_for(Flavor fl, double s, double p, double q) {
  NormSpec sp;
  sp.flavor = fl;
  sp.s = s;
  sp.p = p;
  sp.q = q;
  return sp;
}

}  // namespace

TEST_CASE("Lebesgue norms") {
  const Space s = grid(65);
  const Field one = Field::Ones(65);
  for (double p : {0.5, 1.0, 2.0, 7.0, kInf}) CHECK(lebesgue_norm(s, one, p) == doctest::Approx(1.0).epsilon(1e-14));
  const Field f = random_field(65, 2);
  double acc = 0;
  for (int x = 0; x < 65; ++x) acc += f[x] * f[x] * s.weight(x);
  CHECK(std::abs(lebesgue_norm(s, f, 2.0) - std::sqrt(acc)) <= 1e-14 * std::sqrt(acc));
  CHECK(lebesgue_norm(s, -3.0 * f, 1.5) == doctest::Approx(3.0 * lebesgue_norm(s, f, 1.5)).epsilon(1e-14));
}

TEST_CASE("Besov and Triebel-Lizorkin norms against re-summation oracles") {
  const auto pl = pipeline(grid(65), Flavor::homogeneous);
  const Field f = random_field(65, 31);
  for (auto [s, p, q] : {std::tuple{0.5, 2.0, 2.0}, {0.3, 1.5, 3.0}, {-0.2, 3.0, 1.0}}) {
    const auto sp = spec_for(Flavor::homogeneous, s, p, q);
    const double b = besov_norm(f, sp, pl.stack, pl.space, pl.cubes);
    CHECK(std::abs(b - besov_oracle(pl, f, s, p, q)) <= 1e-12 * b);
    const double t = triebel_lizorkin_norm(f, sp, pl.stack, pl.space, pl.cubes);
    CHECK(std::abs(t - tl_oracle(pl, f, s, p, q)) <= 1e-12 * t);
  }
  const auto sp = spec_for(Flavor::homogeneous, 0.5, 2.0, 2.0);
  const double b = besov_norm(f, sp, pl.stack, pl.space, pl.cubes);
  const double t = triebel_lizorkin_norm(f, sp, pl.stack, pl.space, pl.cubes);
  CHECK(std::abs(b - t) <= 1e-12 * b);
}

TEST_CASE("inhomogeneous norms against re-summation oracles") {
  const auto pl = pipeline(grid(65), Flavor::inhomogeneous);
  const Field f = random_field(65, 32);
  const auto sp = spec_for(Flavor::inhomogeneous, 0.5, 2.0, 2.0);
  const double b = besov_norm(f, sp, pl.stack, pl.space, pl.cubes);
  CHECK(std::abs(b - besov_oracle(pl, f, 0.5, 2, 2)) <= 1e-12 * b);
  const double t = triebel_lizorkin_norm(f, sp, pl.stack, pl.space, pl.cubes);
  CHECK(std::abs(t - tl_oracle(pl, f, 0.5, 2, 2)) <= 1e-12 * t);
  CHECK_THROWS_AS(besov_norm(f, spec_for(Flavor::homogeneous, 0.5, 2, 2), pl.stack, pl.space, pl.cubes),
                  FlavorMismatch);
}

TEST_CASE("snowflake function on grid1d 257") {
  const auto pl = pipeline(grid(257), Flavor::homogeneous);
  const Field f = holder_field(pl.space, 0, 0.7);
  const auto sp = spec_for(Flavor::homogeneous, 0.5, 2.0, 2.0);
  const double b = besov_norm(f, sp, pl.stack, pl.space, pl.cubes);
  CHECK(std::abs(b - besov_oracle(pl, f, 0.5, 2, 2)) <= 1e-12 * b);
}

TEST_CASE("p = inf Triebel-Lizorkin on a localized field") {
  const auto pl = pipeline(grid(65), Flavor::homogeneous);
  const int fine = pl.cubes.k_min() + 5;
  const auto& cube = pl.cubes.level(fine)[3];
  Field f = Field::Zero(65);
  for (int x : cube.members) f[x] = 1.0 + 0.1 * x;
  const auto sp = spec_for(Flavor::homogeneous, 0.4, kInf, 2.0);
  int l = 0, a = 0;
  const double oracle = tl_inf_oracle(pl, f, 0.4, 2.0, &l, &a);
  const double v = triebel_lizorkin_norm(f, sp, pl.stack, pl.space, pl.cubes);
  CHECK(std::abs(v - oracle) <= 1e-12 * oracle);
  // The maximizing cube is an ancestor of (or equal to) the support cube.
  if (l <= fine) {
    int idx = 3;
    for (int k = fine; k > l; --k) idx = pl.cubes.level(k)[idx].parent;
    CHECK(idx == a);
  }
}

TEST_CASE("trivial and exact norm properties") {
  const auto pl = pipeline(grid(65), Flavor::homogeneous);
  const auto sp = spec_for(Flavor::homogeneous, 0.5, 2.0, 2.0);
  const Field zero = Field::Zero(65);
  CHECK(besov_norm(zero, sp, pl.stack, pl.space, pl.cubes) == 0.0);
  CHECK(triebel_lizorkin_norm(zero, sp, pl.stack, pl.space, pl.cubes) == 0.0);
  CHECK(besov_norm(Field::Constant(65, 7.0), sp, pl.stack, pl.space, pl.cubes) == 0.0);
  const Field f = random_field(65, 41);
  const double b = besov_norm(f, sp, pl.stack, pl.space, pl.cubes);
  CHECK(besov_norm(2.0 * f, sp, pl.stack, pl.space, pl.cubes) == doctest::Approx(2 * b).epsilon(1e-13));
  double prev = INFINITY;
  for (double q : {0.5, 1.0, 2.0, 4.0, kInf}) {
    auto s2 = sp;
    s2.q = q;
    const double v = besov_norm(f, s2, pl.stack, pl.space, pl.cubes);
    CHECK(v <= prev * (1 + 1e-13));
    prev = v;
  }
}

TEST_CASE("sampled Besov norm barely depends on the sampler") {
  const Space s = grid(129);
  const auto lr = auto_levels(s, 0.5);
  const auto nets = build_nets(s, 0.5, lr.k_min, lr.k_max);
  const auto base = build_cubes(nets, s);
  const int j0 = default_j0(nets, s.a0());
  const auto a = refine_subcubes(base, j0, Sampler::center);
  const auto b = refine_subcubes(base, j0, Sampler::seeded_random, 17);
  const auto stack = build_exp_ati(s, a);
  const auto sp = spec_for(Flavor::homogeneous, 0.5, 2.0, 2.0);
  for (int t = 0; t < 5; ++t) {
    const Field f = random_field(129, 70 + t);
    const double va = sampled_besov_norm(f, sp, stack, s, a);
    const double vb = sampled_besov_norm(f, sp, stack, s, b);
    CHECK(std::max(va / vb, vb / va) <= 2.0);
    // The full Besov norm ignores the sampler entirely.
    CHECK(besov_norm(f, sp, stack, s, a) == besov_norm(f, sp, stack, s, b));
  }
}

TEST_CASE("test-function norm") {
  const Space s = grid(129);
  const std::size_t x1 = 40;
  const double r = 0.1, beta = 0.7, gamma = 0.6;
  CHECK(test_function_norm(s, Field::Zero(129), x1, r, beta, gamma) == 0.0);

  // Brute force over all pairs.
  auto rhs = [&](std::size_t x) {
    double vr = 0, vx = 0;
    for (std::size_t z = 0; z < s.size(); ++z) {
      if (s.dist(x1, z) < r) vr += s.weight(z);
      if (x != x1 && s.dist(x1, z) < s.dist(x1, x)) vx += s.weight(z);
    }
    return std::pow(r / (r + s.dist(x1, x)), gamma) / (vr + vx);
  };
  Field bump(129), size_rhs(129);
  for (std::size_t x = 0; x < s.size(); ++x) {
    bump[x] = std::exp(-std::pow(s.dist(x, x1) / r, 2));
    size_rhs[x] = rhs(x);
  }
  double oracle = 0;
  for (std::size_t x = 0; x < s.size(); ++x) {
    oracle = std::max(oracle, std::abs(bump[x]) / size_rhs[x]);
    const double scale = r + s.dist(x1, x);
    for (std::size_t y = 0; y < s.size(); ++y) {
      if (y == x || s.dist(x, y) > scale / (2 * s.a0())) continue;
      oracle = std::max(oracle, std::abs(bump[x] - bump[y]) /
                                    (std::pow(s.dist(x, y) / scale, beta) * size_rhs[x]));
    }
  }
  const double v = test_function_norm(s, bump, x1, r, beta, gamma);
  CHECK(std::isfinite(v));
  CHECK(std::abs(v - oracle) <= 1e-12 * oracle);
  CHECK(test_function_norm(s, size_rhs, x1, r, beta, gamma) >= 1.0);
}

TEST_CASE("admissible ranges") {
  NormSpec sp;
  sp.s = 0.5;
  sp.beta = sp.gamma = 0.9;
  sp.p = 2.0;
  const auto ok = admissible_range(sp, 1.0, 0.95);
  CHECK(ok.besov);
  CHECK(ok.triebel_lizorkin);
  CHECK(ok.threshold < 1.0);

  sp.p = 1.0 / (1.0 + 0.9);
  CHECK_FALSE(admissible_range(sp, 1.0, 0.95).besov);

  sp.p = 2.0;
  sp.s = 0.8;
  sp.beta = 0.5;
  const auto bad = admissible_range(sp, 1.0, 0.95);
  CHECK_FALSE(bad.besov);
  bool named = false;
  for (const auto& v : bad.besov_violations) named |= v.find("s in") != std::string::npos;
  CHECK(named);
}
