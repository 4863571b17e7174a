#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lipbesov/difference_norms.hpp"
#include "lipbesov/lab.hpp"

using namespace testing;

namespace {

// mu(B(x,r))^-1 sum_{y in B(x,r)} |f(x) - f(y)|^u mu_y, to the power 1/u.
double j_oracle(const Space& s, const Field& f, std::size_t x, double r, double u) {
  double m = 0, a = 0;
  for (std::size_t y = 0; y < s.size(); ++y) {
    if (s.dist(x, y) < r) {
      m += s.weight(y);
      a += std::pow(std::abs(f[x] - f[y]), u) * s.weight(y);
    }
  }
  return std::pow(a / m, 1 / u);
}

// Scale sums run over k from far below the diameter scale until every ball
// is a singleton; the geometric tail below k_far is under 1e-30.
double lip_oracle(const Space& s, const Field& f, double sm, double p, double q, double c_tilde,
                  bool inner_p, bool truncated) {
  const int k_far = truncated ? 0 : -120;
  double sum = 0;
  for (int k = k_far;; ++k) {
    const double r = c_tilde * std::pow(0.5, k);
    if (r <= s.min_gap()) break;
    double lp = 0;
    for (std::size_t x = 0; x < s.size(); ++x)
      lp += std::pow(j_oracle(s, f, x, r, inner_p ? p : 1.0), p) * s.weight(x);
    sum += std::pow(std::pow(0.5, -k * sm) * std::pow(lp, 1 / p), q);
  }
  return std::pow(sum, 1 / q);
}

double lt_oracle(const Space& s, const Field& f, double sm, double p, double q, double u) {
  double lp = 0;
  for (std::size_t x = 0; x < s.size(); ++x) {
    double a = 0;
    for (int k = -120;; ++k) {
      const double r = std::pow(0.5, k);
      if (r <= s.min_gap()) break;
      a += std::pow(std::pow(0.5, -k * sm) * j_oracle(s, f, x, r, u), q);
    }
    lp += std::pow(a, p / q) * s.weight(x);
  }
  return std::pow(lp, 1 / p);
}

NormSpec spec(double s, double p, double q, double u = 1.0) {
  NormSpec sp;
  sp.s = s;
  sp.p = p;
  sp.q = q;
  sp.u = u;
  return sp;
}

}  // namespace

TEST_CASE("difference profile") {
  const int n = 1025;
  const Space s = grid(n);
  Field f(n);
  for (int i = 0; i < n; ++i) f[i] = static_cast<double>(i) / (n - 1);
  // r = 1/4 = c_tilde delta^k with c_tilde = 1, k = 2.
  const auto prof = difference_profile(f, s, 1.0, 0.5, 2, 2, 1.0);
  CHECK(std::abs(prof.at(2)[512] - 0.125) <= 2.0 / n);
  CHECK(prof.at(2)[512] == doctest::Approx(j_oracle(s, f, 512, 0.25, 1.0)).epsilon(1e-13));

  const auto flat = difference_profile(Field::Constant(n, 3.0), s, 1.0, 0.5, 0, 12, 2.0);
  for (const auto& j : flat.j) CHECK(j.cwiseAbs().maxCoeff() == 0.0);

  const auto tiny = difference_profile(f, s, 1.0, 0.5, 12, 12, 1.0);
  CHECK(std::pow(0.5, 12) < s.min_gap());
  CHECK(tiny.at(12).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scale window") {
  const Space s = grid(65);
  const auto w = scale_window(s, 1.0, 0.5);
  CHECK(std::pow(0.5, w.whole) > s.diam());
  CHECK_FALSE(std::pow(0.5, w.whole + 1) > s.diam());
  CHECK(std::pow(0.5, w.single) <= s.min_gap());
  CHECK_FALSE(std::pow(0.5, w.single - 1) <= s.min_gap());
}

TEST_CASE("Ldot against a triple-loop oracle on grid1d 513") {
  const Space s = grid(513);
  const Field f = holder_field(s, 0, 0.7);
  const double v = lipschitz_norm(f, spec(0.5, 2, 2), LipVariant::Ldot, s);
  const double o = lip_oracle(s, f, 0.5, 2, 2, 1.0, true, false);
  CHECK(std::abs(v - o) <= 1e-12 * o);
}

TEST_CASE("all variants against oracles on n = 65") {
  const Space s = grid(65);
  const Field f = random_field(65, 51);
  const double lp = lebesgue_norm(s, f, 1.5);
  for (auto [sm, p, q] : {std::tuple{0.5, 2.0, 2.0}, {0.4, 1.5, 3.0}}) {
    const auto sp = spec(sm, p, q);
    const double fp = lebesgue_norm(s, f, p);
    const double ldot = lip_oracle(s, f, sm, p, q, 1.0, true, false);
    const double lbdot = lip_oracle(s, f, sm, p, q, 1.0, false, false);
    CHECK(std::abs(lipschitz_norm(f, sp, LipVariant::Ldot, s) - ldot) <= 1e-12 * ldot);
    CHECK(std::abs(lipschitz_norm(f, sp, LipVariant::L, s) - (fp + ldot)) <= 1e-12 * ldot);
    CHECK(std::abs(lipschitz_norm(f, sp, LipVariant::Lb_dot, s) - lbdot) <= 1e-12 * lbdot);
    CHECK(std::abs(lipschitz_norm(f, sp, LipVariant::Lb, s) - (fp + lbdot)) <= 1e-12 * lbdot);
    const double ltdot = lt_oracle(s, f, sm, p, q, sp.u);
    CHECK(std::abs(lipschitz_norm(f, sp, LipVariant::Lt_dot, s) - ltdot) <= 1e-12 * ltdot);
    const double tr = lip_oracle(s, f, sm, p, q, 1.0, true, true);
    CHECK(std::abs(truncated_norm(f, sp, TruncVariant::L_tilde, s) - tr) <= 1e-12 * tr);
  }
  CHECK(lp > 0);
}

TEST_CASE("constants and exact identities") {
  const Space s = grid(65);
  const Field c = Field::Constant(65, -2.0);
  const auto sp = spec(0.5, 2, 2);
  for (auto v : {LipVariant::Ldot, LipVariant::Lb_dot, LipVariant::Lt_dot})
    CHECK(lipschitz_norm(c, sp, v, s) == 0.0);
  for (auto v : {LipVariant::L, LipVariant::Lb, LipVariant::Lt})
    CHECK(lipschitz_norm(c, sp, v, s) == doctest::Approx(lebesgue_norm(s, c, 2)).epsilon(1e-15));
  CHECK(truncated_norm(c, sp, TruncVariant::L_tilde, s) == 0.0);
  CHECK(truncated_norm(c, sp, TruncVariant::Lb_tilde, s) == 0.0);

  for (int t = 0; t < 10; ++t) {
    const Field f = random_field(65, 200 + t);
    for (double p : {1.0, 2.0, 3.0}) {
      const auto e = spec(0.5, p, p, 1.0);
      const double b = lipschitz_norm(f, e, LipVariant::Lb_dot, s);
      const double tt = lipschitz_norm(f, e, LipVariant::Lt_dot, s);
      CHECK(std::abs(b - tt) <= 1e-12 * b);
    }
    CHECK(truncated_norm(f, sp, TruncVariant::L_tilde, s) <= lipschitz_norm(f, sp, LipVariant::Ldot, s));
    CHECK(truncated_norm(f, sp, TruncVariant::Lb_tilde, s) <= lipschitz_norm(f, sp, LipVariant::Lb_dot, s));
  }
}

TEST_CASE("one-point space") {
  const Space s = line_space({0.0});
  const Field f = Field::Constant(1, 2.0);
  CHECK(lipschitz_norm(f, spec(0.5, 2, 2), LipVariant::Ldot, s) == 0.0);
  CHECK(lipschitz_norm(f, spec(0.5, 2, 2), LipVariant::L, s) == doctest::Approx(2.0));
}
