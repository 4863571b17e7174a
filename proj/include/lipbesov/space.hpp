#ifndef LIPBESOV_SPACE_HPP_
#define LIPBESOV_SPACE_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lipbesov {

// A real-valued function on the points of a space.
using Field = Eigen::VectorXd;

// Triple-enumeration cap for exhaustive quasi-triangle certification.
inline constexpr std::size_t kExhaustiveCertifyCap = 512;
inline constexpr std::uint64_t kSampledTriples = 10'000'000;

struct A0Certificate {
  double a0 = 1.0;
  bool sampled = false;
  // Triple attaining the maximum ratio d(i,k) / (d(i,j) + d(j,k)).
  int i = -1, k = -1, j = -1;
};

// Finite quasi-metric measure space. Immutable after construction; the
// constructor checks every invariant and builds the sorted-neighbour index
// used for all ball queries. Balls are open: B(x, r) = {y : d(x, y) < r}.
class Space {
 public:
  // Validates symmetry, zero diagonal, positive off-diagonal distances and
  // positive weights (FormatError otherwise). The caller supplies a0; use
  // certify_a0 to compute it.
  Space(Eigen::MatrixXd dist, Eigen::VectorXd weight, A0Certificate a0,
        std::string label, std::vector<std::vector<double>> coords = {});

  std::size_t size() const { return static_cast<std::size_t>(weight_.size()); }
  const Eigen::MatrixXd& dist() const { return dist_; }
  double dist(std::size_t x, std::size_t y) const { return dist_(x, y); }
  const Eigen::VectorXd& weight() const { return weight_; }
  double weight(std::size_t x) const { return weight_[x]; }
  double a0() const { return a0_.a0; }
  const A0Certificate& a0_certificate() const { return a0_; }
  const std::string& label() const { return label_; }
  const std::vector<std::vector<double>>& coords() const { return coords_; }
  double diam() const { return diam_; }
  double total_mass() const { return total_mass_; }
  // min over x of the distance to its nearest other point (+inf if n = 1).
  double min_gap() const { return min_gap_; }
  // max over x of the distance to its nearest other point (0 if n = 1).
  double max_gap() const { return max_gap_; }

  // Points ordered by distance from x (x first), ties by index.
  std::span<const int> by_distance(std::size_t x) const;
  std::span<const double> sorted_dist(std::size_t x) const;
  // Number of points in the open ball B(x, r).
  std::size_t ball_count(std::size_t x, double r) const;
  // mu(B(x, r)).
  double ball_mass(std::size_t x, double r) const;
  // V(x, y) = mu(B(x, d(x, y))); zero when x == y.
  double v(std::size_t x, std::size_t y) const;
  // Mass of the first c points of by_distance(x).
  double prefix_mass(std::size_t x, std::size_t c) const;

  double integrate(const Field& f) const { return f.dot(weight_); }
  double mean(const Field& f) const { return integrate(f) / total_mass_; }

 private:
  Eigen::MatrixXd dist_;
  Eigen::VectorXd weight_;
  A0Certificate a0_;
  std::string label_;
  std::vector<std::vector<double>> coords_;
  double diam_ = 0.0;
  double total_mass_ = 0.0;
  double min_gap_ = 0.0;
  double max_gap_ = 0.0;
  // Row-major n x n tables.
  std::vector<int> order_;
  std::vector<double> sorted_;
  std::vector<double> cum_mass_;  // cum_mass_[x*(n+1) + c]
};

enum class SpaceKind { grid1d, grid2d, circle, graph, sierpinski, snowflake };

struct SpaceParams {
  SpaceKind kind = SpaceKind::grid1d;
  // Point count (grid1d, circle, graph, snowflake base), side length
  // (grid2d) or level (sierpinski).
  int size = 65;
  // Snowflake exponent a: d -> d^a.
  double exponent = 1.0;
  // Optional explicit weights; empty means uniform with total mass 1.
  std::vector<double> custom_weights;
  std::uint64_t seed = 1;
  std::size_t certify_cap = kExhaustiveCertifyCap;
  std::uint64_t sampled_triples = kSampledTriples;
  std::string label;
};

SpaceKind parse_space_kind(const std::string& name);
std::string to_string(SpaceKind kind);

Space generate_space(const SpaceParams& params);

// Maximum of d(i,k) / (d(i,j) + d(j,k)) over triples, clamped below at 1.
// Exhaustive when n <= cap, otherwise over `samples` uniform random triples.
A0Certificate certify_a0(const Eigen::MatrixXd& dist,
                         std::size_t cap = kExhaustiveCertifyCap,
                         std::uint64_t samples = kSampledTriples,
                         std::uint64_t seed = 1);

// Throws CertificationError naming the first violating triple (i, k, j),
// enumerated with i < k and then j ascending.
void verify_a0(const Eigen::MatrixXd& dist, double a0,
               std::size_t cap = kExhaustiveCertifyCap,
               std::uint64_t samples = kSampledTriples, std::uint64_t seed = 1);

struct GeometryReport {
  double c_mu = 1.0;
  double omega = 0.0;
  std::optional<double> q_global;
  std::optional<double> q_global_const;
  std::optional<double> q_local;
  std::optional<double> q_local_const;
  std::optional<double> kappa;
  std::optional<double> kappa_const;
  double diam = 0.0;
  // max over pairs of V(x,y) / V(y,x).
  double v_symmetry = 1.0;
};

struct GeometryOptions {
  bool fit_kappa = false;
};

GeometryReport geometry_report(const Space& space,
                               const std::vector<double>& radius_grid,
                               const GeometryOptions& options = {});

// Dyadic radii resolution_multiple * max_gap * 2^j up to diam. Below a few
// point spacings the doubling ratio of a lattice measures the lattice, not
// the space it samples.
std::vector<double> resolved_radius_grid(const Space& space,
                                         double resolution_multiple = 8.0);

}  // namespace lipbesov

#endif  // LIPBESOV_SPACE_HPP_
