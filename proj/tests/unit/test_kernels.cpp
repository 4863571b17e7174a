#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lipbesov/operators.hpp"

using namespace testing;

TEST_CASE("two-point semigroup") {
  const Space s = line_space({0, 1});
  const auto wide = build_semigroup(s, 1e6);
  for (int i = 0; i < 2; ++i) {
    CHECK(wide(i, 0) + wide(i, 1) == doctest::Approx(1.0).epsilon(1e-15));
    for (int j = 0; j < 2; ++j) CHECK(wide(i, j) == doctest::Approx(0.5).epsilon(1e-5));
  }
  const Space heavy = line_space({0, 1}, 1.0, {1.0, 3.0});
  const auto narrow = build_semigroup(heavy, 1e-3);
  CHECK(narrow(0, 1) < 1e-100);
  CHECK(narrow(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(narrow(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("grid1d 65 semigroup at t = 1/8") {
  const Space s = grid(65);
  const auto p = build_semigroup(s, 0.125);
  double row = 0, sym = 0;
  for (Eigen::Index x = 0; x < p.rows(); ++x) {
    double acc = 0;
    for (Eigen::Index y = 0; y < p.cols(); ++y) {
      acc += p(x, y) * s.weight(y);
      sym = std::max(sym, std::abs(p(x, y) - p(y, x)));
    }
    row = std::max(row, std::abs(acc - 1.0));
  }
  CHECK(row <= 1e-12);
  CHECK(sym <= 1e-15);
}

TEST_CASE("homogeneous exp-ATI on grid1d 257") {
  const auto pl = pipeline(grid(257), Flavor::homogeneous);
  const Field one = Field::Ones(257);
  double worst = 0;
  for (int k = pl.stack.k_min; k <= pl.stack.k_max; ++k) {
    // No mean removal here: the kernel itself must cancel constants.
    worst = std::max(worst, apply_level(pl.stack, pl.space, k, 3.0 * one).cwiseAbs().maxCoeff());
    const auto& q = pl.stack.level(k);
    CHECK((q - q.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK(worst <= 1e-10);

  const auto& rep = pl.stack.report;
  CHECK(rep.cancel_resid <= 1e-10);
  CHECK(std::isfinite(rep.size_const));
  CHECK(rep.size_const > 0);
  CHECK(rep.eta_fit >= 0.5);
  CHECK(rep.identity_resid <= 1e-3);

  const auto g = geometry_report(pl.space, resolved_radius_grid(pl.space));
  ValidationOptions opt;
  opt.gammas = {2.0 * g.omega};
  const auto v = validate_ati(pl.stack, pl.space, pl.cubes, opt);
  REQUIRE(v.rgamma.size() == 1);
  CHECK(std::isfinite(v.rgamma[0].value));
  CHECK(v.rgamma[0].value > 0);
}

TEST_CASE("identity residual on band-limited probes") {
  const Space s = grid(257);
  const auto lr = auto_levels(s, 0.5);
  const auto nets = build_nets(s, 0.5, lr.k_min, lr.k_max);
  const auto cubes = build_cubes(nets, s);
  const auto stack = build_exp_ati(s, cubes);
  // Probes Q_j g for j in 2..5, mean removed.
  std::vector<Field> probes;
  for (int j = 2; j <= 5; ++j) {
    Field f = apply_level(stack, s, j, random_field(257, 40 + j));
    f.array() -= s.mean(f);
    probes.push_back(f);
  }
  CHECK(identity_residual(stack, s, probes) <= 1e-3);
}

TEST_CASE("inhomogeneous exp-IATI") {
  const auto pl = pipeline(grid(129), Flavor::inhomogeneous);
  REQUIRE(pl.stack.k_min == 0);
  const Field c = Field::Constant(129, 2.5);
  CHECK((apply_level(pl.stack, pl.space, 0, c).array() - 2.5).abs().maxCoeff() <= 1e-12);
  for (int k = 1; k <= pl.stack.k_max; ++k) {
    CHECK(apply_level(pl.stack, pl.space, k, c).cwiseAbs().maxCoeff() <= 1e-10);
  }
  // Row sums of Q_0 against mu, recomputed.
  const auto& q0 = pl.stack.level(0);
  double unit = 0;
  for (Eigen::Index x = 0; x < q0.rows(); ++x) unit = std::max(unit, std::abs(q0.row(x).dot(pl.space.weight()) - 1.0));
  CHECK(unit <= 1e-12);
  CHECK(pl.stack.report.unit_resid <= 1e-12);

  std::vector<Field> probes;
  for (int i = 0; i < 4; ++i) probes.push_back(random_field(129, 90 + i).array() + 1.0);
  CHECK(identity_residual(pl.stack, pl.space, probes) <= 1e-3);
}

TEST_CASE("h factor") {
  const auto pl = pipeline(grid(65), Flavor::homogeneous);
  const int k = pl.cubes.k_max();
  CHECK(pl.cubes.reference_points(k).empty());
  CHECK(h_factor(pl.cubes, pl.space, k, 1.0, 1.0, 3, 40) == 1.0);
  const int k1 = pl.cubes.k_min() + 2;
  const auto& y = pl.cubes.reference_points(k1);
  REQUIRE_FALSE(y.empty());
  const std::size_t x = static_cast<std::size_t>(y.front());
  const double at_ref = h_factor(pl.cubes, pl.space, k1, 1.0, 1.0, x, x);
  CHECK(at_ref == doctest::Approx(1.0));
}
