#include "lipbesov/difference_norms.hpp"

#include <algorithm>
#include <cmath>

#include "lipbesov/errors.hpp"
#include "lipbesov/parallel.hpp"

namespace lipbesov {

LipVariant parse_lip_variant(const std::string& name) {
  if (name == "Ldot") return LipVariant::Ldot;
  if (name == "L") return LipVariant::L;
  if (name == "Lb_dot") return LipVariant::Lb_dot;
  if (name == "Lb") return LipVariant::Lb;
  if (name == "Lt_dot") return LipVariant::Lt_dot;
  if (name == "Lt") return LipVariant::Lt;
  throw ParameterError("unknown Lipschitz variant '" + name + "'");
}

std::string to_string(LipVariant v) {
  switch (v) {
    case LipVariant::Ldot: return "Ldot";
    case LipVariant::L: return "L";
    case LipVariant::Lb_dot: return "Lb_dot";
    case LipVariant::Lb: return "Lb";
    case LipVariant::Lt_dot: return "Lt_dot";
    case LipVariant::Lt: return "Lt";
  }
  return "unknown";
}

TruncVariant parse_trunc_variant(const std::string& name) {
  if (name == "L_tilde") return TruncVariant::L_tilde;
  if (name == "Lb_tilde") return TruncVariant::Lb_tilde;
  throw ParameterError("unknown truncated variant '" + name + "'");
}

std::string to_string(TruncVariant v) {
  return v == TruncVariant::L_tilde ? "L_tilde" : "Lb_tilde";
}

DifferenceProfile difference_profile(const Field& f, const Space& space, double c_tilde,
                                     double delta, int k_lo, int k_hi, double u) {
  if (!(u > 0.0)) throw ParameterError("inner exponent u must be positive");
  if (!(c_tilde > 0.0)) throw ParameterError("c_tilde must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
  const std::size_t n = space.size();
  DifferenceProfile prof;
  prof.c_tilde = c_tilde;
  prof.delta = delta;
  prof.u = u;
  prof.k_lo = k_lo;
  prof.k_hi = k_hi;
  const int levels = std::max(0, k_hi - k_lo + 1);
  prof.j.assign(levels, Field::Zero(static_cast<Eigen::Index>(n)));
  const bool uinf = std::isinf(u);
  parallel_for(n, [&](std::size_t x) {
    const auto order = space.by_distance(x);
    std::vector<double> acc(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = std::abs(f[x] - f[order[i]]);
      acc[i + 1] = uinf ? std::max(acc[i], diff)
                        : acc[i] + std::pow(diff, u) * space.weight(order[i]);
    }
    for (int l = 0; l < levels; ++l) {
      const double r = c_tilde * std::pow(delta, k_lo + l);
      const std::size_t c = space.ball_count(x, r);
      const double v = uinf ? acc[c] : std::pow(acc[c] / space.prefix_mass(x, c), 1.0 / u);
      prof.j[l][static_cast<Eigen::Index>(x)] = v;
    }
  });
  return prof;
}

ScaleWindow scale_window(const Space& space, double c_tilde, double delta) {
  ScaleWindow w;
  auto r = [&](int k) { return c_tilde * std::pow(delta, k); };
  const double diam = space.diam();
  const double gap = space.min_gap();
  w.whole = static_cast<int>(std::ceil(std::log(diam / c_tilde) / std::log(delta))) - 1;
  while (r(w.whole + 1) > diam) ++w.whole;
  while (!(r(w.whole) > diam)) --w.whole;
  w.single = static_cast<int>(std::ceil(std::log(gap / c_tilde) / std::log(delta)));
  while (r(w.single - 1) <= gap) --w.single;
  while (!(r(w.single) <= gap)) ++w.single;
  return w;
}

namespace {

struct ScaleTerm {
  int k = 0;
  double wq = 0.0;    // weight on inner^q
  double winf = 0.0;  // weight on inner for q = inf
};

// Weighted levels for sum_{k >= k_floor} delta^{-ksq} inner_k^q, with the
// ball-equals-X levels folded into a single term at w.whole.
std::vector<ScaleTerm> scale_terms(const ScaleWindow& w, double s, double q, double delta,
                                   bool truncated) {
  std::vector<ScaleTerm> terms;
  const bool qinf = std::isinf(q);
  const int first = truncated ? std::max(0, w.whole + 1) : w.whole + 1;
  if (!truncated || w.whole >= 0) {
    ScaleTerm t;
    t.k = w.whole;
    t.winf = std::pow(delta, -w.whole * s);
    if (!qinf) {
      const double ratio = std::pow(delta, s * q);
      const double top = std::pow(delta, -w.whole * s * q);
      t.wq = truncated ? top * (1.0 - std::pow(ratio, w.whole + 1)) / (1.0 - ratio)
                       : top / (1.0 - ratio);
    }
    terms.push_back(t);
  }
  for (int k = first; k < w.single; ++k) {
    ScaleTerm t;
    t.k = k;
    t.winf = std::pow(delta, -k * s);
    t.wq = qinf ? 0.0 : std::pow(delta, -k * s * q);
    terms.push_back(t);
  }
  return terms;
}

double combine(const std::vector<ScaleTerm>& terms, const std::vector<double>& inner, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) m = std::max(m, terms[i].winf * inner[i]);
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) s += terms[i].wq * std::pow(inner[i], q);
  return std::pow(s, 1.0 / q);
}

void check(const NormSpec& spec) {
  if (!(spec.s > 0.0)) throw ParameterError("difference norms need s > 0");
  if (!(spec.p > 0.0) || !(spec.q > 0.0)) throw ParameterError("p and q must be positive");
  if (!(spec.u > 0.0)) throw ParameterError("inner exponent u must be positive");
}

// Sum over scales of the "b" or plain inner quantity, L^p in x inside.
double integrated_sum(const Field& f, const NormSpec& spec, const Space& space, bool plain,
                      bool truncated) {
  const ScaleWindow w = scale_window(space, spec.c_tilde, spec.delta);
  const auto terms = scale_terms(w, spec.s, spec.q, spec.delta, truncated);
  if (terms.empty()) return 0.0;
  const double u = plain ? spec.p : 1.0;
  const DifferenceProfile prof =
      difference_profile(f, space, spec.c_tilde, spec.delta, terms.front().k, terms.back().k, u);
  std::vector<double> inner;
  for (const auto& t : terms) inner.push_back(lebesgue_norm(space, prof.at(t.k), spec.p));
  return combine(terms, inner, spec.q);
}

double pointwise_sum(const Field& f, const NormSpec& spec, const Space& space, bool truncated) {
  const ScaleWindow w = scale_window(space, spec.c_tilde, spec.delta);
  const auto terms = scale_terms(w, spec.s, spec.q, spec.delta, truncated);
  if (terms.empty()) return 0.0;
  const DifferenceProfile prof = difference_profile(f, space, spec.c_tilde, spec.delta,
                                                    terms.front().k, terms.back().k, spec.u);
  Field agg(f.size());
  std::vector<double> inner(terms.size());
  for (Eigen::Index x = 0; x < f.size(); ++x) {
    for (std::size_t i = 0; i < terms.size(); ++i) inner[i] = prof.at(terms[i].k)[x];
    agg[x] = combine(terms, inner, spec.q);
  }
  return lebesgue_norm(space, agg, spec.p);
}

}  // namespace

double lipschitz_norm(const Field& f, const NormSpec& spec, LipVariant variant,
                      const Space& space) {
  check(spec);
  const bool undotted =
      variant == LipVariant::L || variant == LipVariant::Lb || variant == LipVariant::Lt;
  const double base = undotted ? lebesgue_norm(space, f, spec.p) : 0.0;
  if (space.size() == 1) return base;
  switch (variant) {
    case LipVariant::Ldot:
    case LipVariant::L:
      return base + integrated_sum(f, spec, space, true, false);
    case LipVariant::Lb_dot:
    case LipVariant::Lb:
      return base + integrated_sum(f, spec, space, false, false);
    case LipVariant::Lt_dot:
      return pointwise_sum(f, spec, space, false);
    case LipVariant::Lt:
      return base + pointwise_sum(f, spec, space, true);
  }
  return 0.0;
}

double truncated_norm(const Field& f, const NormSpec& spec, TruncVariant variant,
                      const Space& space) {
  check(spec);
  if (space.size() == 1) return 0.0;
  return integrated_sum(f, spec, space, variant == TruncVariant::L_tilde, true);
}

}  // namespace lipbesov
