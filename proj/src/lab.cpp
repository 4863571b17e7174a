#include "lipbesov/lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lipbesov/errors.hpp"
#include "lipbesov/operators.hpp"
#include "lipbesov/parallel.hpp"
#include "lipbesov/rng.hpp"

namespace lipbesov {

EnsembleKind parse_ensemble_kind(const std::string& name) {
  if (name == "bandlimited") return EnsembleKind::bandlimited;
  if (name == "holder") return EnsembleKind::holder;
  if (name == "smoothed_indicator") return EnsembleKind::smoothed_indicator;
  if (name == "gaussian_field") return EnsembleKind::gaussian_field;
  throw ParameterError("unknown ensemble kind '" + name + "'");
}

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::bandlimited: return "bandlimited";
    case EnsembleKind::holder: return "holder";
    case EnsembleKind::smoothed_indicator: return "smoothed_indicator";
    case EnsembleKind::gaussian_field: return "gaussian_field";
  }
  return "unknown";
}

EnsembleSpec standard_ensemble(std::uint64_t seed, bool mean_zero) {
  EnsembleSpec spec;
  spec.counts = {{EnsembleKind::bandlimited, 13},
                 {EnsembleKind::holder, 13},
                 {EnsembleKind::smoothed_indicator, 12},
                 {EnsembleKind::gaussian_field, 12}};
  spec.seed = seed;
  spec.mean_zero = mean_zero;
  return spec;
}

Field holder_field(const Space& space, std::size_t x0, double theta) {
  Field f(static_cast<Eigen::Index>(space.size()));
  for (std::size_t x = 0; x < space.size(); ++x) f[x] = std::pow(space.dist(x, x0), theta);
  return f;
}

std::vector<EnsembleMember> generate_ensemble(const Space& space, const KernelStack& stack,
                                              const EnsembleSpec& spec) {
  if (spec.counts.empty()) throw ParameterError("ensemble kind set is empty");
  const std::size_t n = space.size();
  const Eigen::Index ni = static_cast<Eigen::Index>(n);
  const int lo = std::min(stack.k_min + 2, stack.k_max);
  const int hi = std::min(lo + 3, stack.k_max);
  std::map<int, Eigen::MatrixXd> smoothers;
  auto smoother = [&](int j) -> const Eigen::MatrixXd& {
    auto it = smoothers.find(j);
    if (it == smoothers.end()) {
      it = smoothers.emplace(j, build_semigroup(space, std::pow(stack.delta, j), stack.a)).first;
    }
    return it->second;
  };
  std::vector<EnsembleMember> out;
  for (const auto& [kind, count] : spec.counts) {
    if (count < 1) throw ParameterError("ensemble counts must be at least 1");
    for (int i = 0; i < count; ++i) {
      Rng rng(mix_seed(mix_seed(spec.seed, static_cast<std::uint64_t>(kind)),
                       static_cast<std::uint64_t>(i)));
      auto level = [&] { return lo + static_cast<int>(rng.index(hi - lo + 1)); };
      EnsembleMember m;
      m.kind = kind;
      std::ostringstream label;
      label << to_string(kind) << "#" << i;
      m.f = Field::Zero(ni);
      switch (kind) {
        case EnsembleKind::bandlimited: {
          for (int t = 0; t < 2; ++t) {
            const int j = level();
            const double c = rng.normal();
            Field g(ni);
            for (Eigen::Index x = 0; x < ni; ++x) g[x] = rng.normal();
            m.f += c * (stack.level(j) * g.cwiseProduct(space.weight()));
            label << " j" << j;
          }
          break;
        }
        case EnsembleKind::holder: {
          const std::size_t x0 = rng.index(n);
          const double theta = rng.uniform(0.3, 1.0);
          m.f = holder_field(space, x0, theta);
          label << " x0=" << x0 << " theta=" << theta;
          break;
        }
        case EnsembleKind::smoothed_indicator: {
          const std::size_t x0 = rng.index(n);
          const double r = rng.uniform(0.1, 0.4) * space.diam();
          const int j = level();
          Field ind(ni);
          for (std::size_t x = 0; x < n; ++x) ind[x] = space.dist(x0, x) < r ? 1.0 : 0.0;
          m.f = smoother(j) * ind.cwiseProduct(space.weight());
          label << " x0=" << x0 << " r=" << r << " j" << j;
          break;
        }
        case EnsembleKind::gaussian_field: {
          const int j = level();
          Field g(ni);
          for (Eigen::Index x = 0; x < ni; ++x) g[x] = rng.normal();
          m.f = smoother(j) * g.cwiseProduct(space.weight());
          label << " j" << j;
          break;
        }
      }
      if (spec.mean_zero) m.f.array() -= space.mean(m.f);
      m.label = label.str();
      out.push_back(std::move(m));
    }
  }
  return out;
}

Pairing parse_pairing(const std::string& name) {
  if (name == "B_vs_L") return Pairing::B_vs_L;
  if (name == "B_vs_Lb") return Pairing::B_vs_Lb;
  if (name == "F_vs_Lt") return Pairing::F_vs_Lt;
  if (name == "F_vs_Lt_u") return Pairing::F_vs_Lt_u;
  if (name == "inhomog_B_vs_L") return Pairing::inhomog_B_vs_L;
  if (name == "inhomog_F_vs_Lt") return Pairing::inhomog_F_vs_Lt;
  throw ParameterError("unknown pairing '" + name + "'");
}

std::string to_string(Pairing pairing) {
  switch (pairing) {
    case Pairing::B_vs_L: return "B_vs_L";
    case Pairing::B_vs_Lb: return "B_vs_Lb";
    case Pairing::F_vs_Lt: return "F_vs_Lt";
    case Pairing::F_vs_Lt_u: return "F_vs_Lt_u";
    case Pairing::inhomog_B_vs_L: return "inhomog_B_vs_L";
    case Pairing::inhomog_F_vs_Lt: return "inhomog_F_vs_Lt";
  }
  return "unknown";
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

bool gate_open(const GateInfo& gate, std::string& why) {
  if (!gate.enabled) return true;
  if (!gate.q_global) {
    why = "lower bound omega: no global lower-bound exponent was fitted";
    return false;
  }
  if (std::abs(*gate.q_global - gate.omega) > gate.tolerance * gate.omega) {
    why = "lower bound omega: fitted q_global=" + num(*gate.q_global) + " is not within " +
          num(100.0 * gate.tolerance) + "% of omega=" + num(gate.omega);
    return false;
  }
  return true;
}

bool is_besov_pairing(Pairing p) {
  return p == Pairing::B_vs_L || p == Pairing::B_vs_Lb || p == Pairing::inhomog_B_vs_L;
}

bool is_inhomogeneous(Pairing p) {
  return p == Pairing::inhomog_B_vs_L || p == Pairing::inhomog_F_vs_Lt;
}

void check_hypotheses(const NormSpec& spec, Pairing pairing, const GateInfo& gate) {
  const double bg = std::min(spec.beta, spec.gamma);
  auto reject = [&](const std::string& what) {
    throw InadmissibleParams(to_string(pairing) + ": hypothesis violated: " + what);
  };
  if (!(spec.beta > 0.0 && spec.beta < gate.eta && spec.gamma > 0.0 && spec.gamma < gate.eta)) {
    reject("beta, gamma in (0, eta) with eta=" + num(gate.eta));
  }
  if (!(spec.s > 0.0 && spec.s < bg)) reject("s in (0, beta^gamma)");
  if ((spec.flavor == Flavor::inhomogeneous) != is_inhomogeneous(pairing)) {
    reject("spec flavor " + to_string(spec.flavor) + " does not match the pairing");
  }
  const double low = gate.omega / (gate.omega + spec.s);
  std::string why;
  if (is_besov_pairing(pairing)) {
    if (spec.p >= 1.0) return;
    if (pairing != Pairing::B_vs_Lb) reject("p in [1, inf]");
    if (!(spec.p > low)) reject("p in (omega/(omega+s), 1]");
    if (!gate_open(gate, why)) reject(why);
    return;
  }
  if (!(spec.q > 1.0)) reject("q in (1, inf]");
  if (std::isinf(spec.p)) reject("p < inf");
  if (spec.p > 1.0) return;
  if (pairing != Pairing::F_vs_Lt_u) reject("p in (1, inf)");
  if (!(spec.p > low)) reject("p in (omega/(omega+s), 1]");
  if (!gate_open(gate, why)) reject(why);
}

}  // namespace

EquivalenceReport equivalence_experiment(const Space& space, const KernelStack& stack,
                                         const CubeSystem& cubes, const NormSpec& spec,
                                         Pairing pairing,
                                         const std::vector<EnsembleMember>& ensemble,
                                         const GateInfo& gate, double band_cap) {
  check_hypotheses(spec, pairing, gate);
  const Admissibility adm = admissible_range(spec, gate.omega, gate.eta);
  const bool besov = is_besov_pairing(pairing);
  const auto& viol = besov ? adm.besov_violations : adm.tl_violations;
  if (!viol.empty()) {
    throw InadmissibleParams(to_string(pairing) + ": inadmissible norm parameters: " + viol[0]);
  }
  EquivalenceReport rep;
  rep.pairing = pairing;
  rep.band_cap = band_cap;
  rep.rows.resize(ensemble.size());
  parallel_for(ensemble.size(), [&](std::size_t i) {
    Field f = ensemble[i].f;
    if (spec.flavor == Flavor::homogeneous) f.array() -= space.mean(f);
    NormSpec ls = spec;
    double left = 0.0, right = 0.0;
    switch (pairing) {
      case Pairing::B_vs_L:
        left = lipschitz_norm(f, ls, LipVariant::Ldot, space);
        break;
      case Pairing::B_vs_Lb:
        left = lipschitz_norm(f, ls, LipVariant::Lb_dot, space);
        break;
      case Pairing::F_vs_Lt:
        ls.u = 1.0;
        left = lipschitz_norm(f, ls, LipVariant::Lt_dot, space);
        break;
      case Pairing::F_vs_Lt_u:
        left = lipschitz_norm(f, ls, LipVariant::Lt_dot, space);
        break;
      case Pairing::inhomog_B_vs_L:
        left = lipschitz_norm(f, ls, LipVariant::L, space);
        break;
      case Pairing::inhomog_F_vs_Lt:
        ls.u = 1.0;
        left = lipschitz_norm(f, ls, LipVariant::Lt, space);
        break;
    }
    right = besov ? besov_norm(f, spec, stack, space, cubes)
                  : triebel_lizorkin_norm(f, spec, stack, space, cubes);
    EquivalenceRow& row = rep.rows[i];
    row.label = ensemble[i].label;
    row.left = left;
    row.right = right;
    const double scale = ensemble[i].f.cwiseAbs().maxCoeff();
    const double tiny = 1e-9 * scale;
    row.degenerate = scale == 0.0 || (left <= tiny && right <= tiny) || !(right > 0.0);
    row.ratio = row.degenerate ? 0.0 : left / right;
  });
  std::vector<double> ratios;
  for (const auto& row : rep.rows) {
    if (row.degenerate) {
      ++rep.degenerate;
    } else {
      ratios.push_back(row.ratio);
    }
  }
  if (ratios.empty()) {
    rep.pass = false;
    rep.message = "every ensemble field is degenerate";
    return rep;
  }
  std::sort(ratios.begin(), ratios.end());
  rep.min_ratio = ratios.front();
  rep.max_ratio = ratios.back();
  const std::size_t m = ratios.size();
  rep.median_ratio = m % 2 ? ratios[m / 2] : 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]);
  double lsum = 0.0;
  for (double r : ratios) lsum += std::log(r);
  rep.geo_mean = std::exp(lsum / static_cast<double>(m));
  rep.band = rep.max_ratio / rep.min_ratio;
  rep.pass = std::isfinite(rep.band) && rep.band <= band_cap;
  rep.message = rep.pass ? "band within cap" : "band " + num(rep.band) + " exceeds cap " +
                                                   num(band_cap);
  return rep;
}

double drift(double geo_a, double geo_b) { return std::max(geo_a / geo_b, geo_b / geo_a); }

bool SuiteReport::exact_ok() const {
  for (const auto& r : rows) {
    if (r.exact && !r.skipped && !r.pass) return false;
  }
  return true;
}

bool SuiteReport::bands_ok() const {
  for (const auto& r : rows) {
    if (!r.exact && !r.skipped && !r.pass) return false;
  }
  return true;
}

namespace {

// a <= b up to floating slack.
bool leq(double a, double b) { return a <= b * (1.0 + 1e-12) + 1e-300; }

bool near_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)) + 1e-300;
}

struct ExactRow {
  SuiteRow row;
  explicit ExactRow(const std::string& name) {
    row.name = name;
    row.exact = true;
  }
  void check(bool ok) {
    ++row.checks;
    if (!ok) ++row.violations;
  }
  SuiteRow done() {
    row.pass = row.violations == 0;
    return row;
  }
};

struct BandRow {
  SuiteRow row;
  std::vector<double> values;
  BandRow(const std::string& name, double cap) {
    row.name = name;
    row.cap = cap;
  }
  void add(double v) {
    ++row.checks;
    values.push_back(v);
  }
  // Inclusion rows bound the ratio from above; spread rows bound max / min.
  SuiteRow done(bool spread) {
    if (values.empty()) {
      row.skipped = true;
      row.note = row.note.empty() ? "no nondegenerate samples" : row.note;
      return row;
    }
    row.band_min = *std::min_element(values.begin(), values.end());
    row.band_max = *std::max_element(values.begin(), values.end());
    const double stat = spread ? row.band_max / row.band_min : row.band_max;
    row.pass = std::isfinite(stat) && stat <= row.cap;
    if (!row.pass) ++row.violations;
    return row;
  }
};

SuiteRow skipped_row(const std::string& name, const std::string& why) {
  SuiteRow r;
  r.name = name;
  r.skipped = true;
  r.note = why;
  return r;
}

}  // namespace

SuiteReport embedding_suite(const Space& space, const KernelStack& stack,
                            const CubeSystem& cubes, const NormSpec& spec,
                            const std::vector<EnsembleMember>& ensemble,
                            const EmbeddingOptions& options) {
  if (spec.flavor != stack.flavor) {
    throw FlavorMismatch("embedding suite spec flavor does not match the stack");
  }
  SuiteReport rep;
  rep.suite = "embeddings";
  const std::vector<double> qs = {1.0, 2.0, 4.0, kInf};
  std::vector<Field> fields;
  for (const auto& m : ensemble) {
    Field f = m.f;
    if (spec.flavor == Flavor::homogeneous) f.array() -= space.mean(f);
    if (f.cwiseAbs().maxCoeff() > 0.0) fields.push_back(f);
  }

  auto q_rows = [&](const std::string& name, auto&& eval) {
    ExactRow row(name + " q-monotonicity");
    for (const Field& f : fields) {
      double prev = kInf;
      for (double q : qs) {
        const double v = eval(f, q);
        row.check(leq(v, prev));
        prev = v;
      }
    }
    rep.rows.push_back(row.done());
  };
  q_rows("besov", [&](const Field& f, double q) {
    NormSpec s = spec;
    s.q = q;
    return besov_norm(f, s, stack, space, cubes);
  });
  if (!std::isinf(spec.p)) {
    q_rows("triebel_lizorkin", [&](const Field& f, double q) {
      NormSpec s = spec;
      s.q = q;
      return triebel_lizorkin_norm(f, s, stack, space, cubes);
    });
  }
  for (LipVariant v : {LipVariant::Ldot, LipVariant::Lb_dot, LipVariant::Lt_dot, LipVariant::L,
                       LipVariant::Lb}) {
    q_rows(to_string(v), [&](const Field& f, double q) {
      NormSpec s = spec;
      s.q = q;
      return lipschitz_norm(f, s, v, space);
    });
  }

  {
    ExactRow row("Jensen Lb_dot <= Ldot (p >= 1)");
    for (double p : {1.0, 2.0, 4.0}) {
      NormSpec s = spec;
      s.p = p;
      for (const Field& f : fields) {
        row.check(leq(lipschitz_norm(f, s, LipVariant::Lb_dot, space),
                      lipschitz_norm(f, s, LipVariant::Ldot, space)));
      }
    }
    rep.rows.push_back(row.done());
  }
  {
    ExactRow row("Lb_dot(s,p,p) = Lt_dot(s,p,p,u=1) at p = q");
    NormSpec s = spec;
    s.q = s.p;
    s.u = 1.0;
    for (const Field& f : fields) {
      row.check(near_equal(lipschitz_norm(f, s, LipVariant::Lb_dot, space),
                           lipschitz_norm(f, s, LipVariant::Lt_dot, space)));
    }
    rep.rows.push_back(row.done());
  }
  if (!std::isinf(spec.p)) {
    ExactRow row("F = B at p = q");
    NormSpec s = spec;
    s.q = s.p;
    for (const Field& f : fields) {
      row.check(near_equal(besov_norm(f, s, stack, space, cubes),
                           triebel_lizorkin_norm(f, s, stack, space, cubes)));
    }
    rep.rows.push_back(row.done());
  }
  {
    ExactRow row("eps-shift termwise, truncated L_tilde and Lb_tilde");
    NormSpec hi = spec;
    hi.s = spec.s + options.eps;
    for (const Field& f : fields) {
      for (TruncVariant v : {TruncVariant::L_tilde, TruncVariant::Lb_tilde}) {
        row.check(leq(truncated_norm(f, spec, v, space), truncated_norm(f, hi, v, space)));
      }
    }
    rep.rows.push_back(row.done());
  }
  {
    BandRow row("L(s+eps) into L(s): ||f||_L(s) / ||f||_L(s+eps)", options.band_cap);
    NormSpec hi = spec;
    hi.s = spec.s + options.eps;
    for (const Field& f : fields) {
      const double src = lipschitz_norm(f, hi, LipVariant::L, space);
      if (src > 0.0) row.add(lipschitz_norm(f, spec, LipVariant::L, space) / src);
    }
    rep.rows.push_back(row.done(false));
  }
  {
    BandRow row("||f||_p + L_tilde vs L, max(ratio, 1/ratio)", options.truncation_cap);
    for (const Field& f : fields) {
      const double full = lipschitz_norm(f, spec, LipVariant::L, space);
      const double cut = lebesgue_norm(space, f, spec.p) +
                         truncated_norm(f, spec, TruncVariant::L_tilde, space);
      if (full > 0.0 && cut > 0.0) row.add(std::max(full / cut, cut / full));
    }
    rep.rows.push_back(row.done(false));
  }
  for (LipVariant v : {LipVariant::Ldot, LipVariant::Lb_dot, LipVariant::Lt_dot}) {
    BandRow row("C_tilde robustness " + to_string(v) + ", max(ratio, 1/ratio)",
                options.c_tilde_cap);
    NormSpec wide = spec;
    wide.c_tilde = 2.0 * spec.c_tilde;
    for (const Field& f : fields) {
      const double a = lipschitz_norm(f, spec, v, space);
      const double b = lipschitz_norm(f, wide, v, space);
      if (a > 0.0 && b > 0.0) row.add(std::max(a / b, b / a));
    }
    rep.rows.push_back(row.done(false));
  }
  {
    BandRow lo_row("Lt_dot(s,p,q) / Lb_dot(s,p,min(p,q))", options.band_cap);
    BandRow hi_row("Lb_dot(s,p,max(p,q)) / Lt_dot(s,p,q)", options.band_cap);
    NormSpec t = spec;
    t.u = 1.0;
    NormSpec bmin = spec, bmax = spec;
    bmin.q = std::min(spec.p, spec.q);
    bmax.q = std::max(spec.p, spec.q);
    for (const Field& f : fields) {
      const double lt = lipschitz_norm(f, t, LipVariant::Lt_dot, space);
      const double b0 = lipschitz_norm(f, bmin, LipVariant::Lb_dot, space);
      const double b1 = lipschitz_norm(f, bmax, LipVariant::Lb_dot, space);
      if (b0 > 0.0) lo_row.add(lt / b0);
      if (lt > 0.0) hi_row.add(b1 / lt);
    }
    rep.rows.push_back(lo_row.done(false));
    rep.rows.push_back(hi_row.done(false));
  }

  // Sobolev-type embeddings need a lower bound omega and p in
  // (omega/(omega+s), 1].
  const std::string bname = "Besov p<1 into p=1 (s - omega(1/p-1))";
  const std::string fname = "Triebel-Lizorkin p<1 into p=1 (s - omega(1/p-1))";
  std::string why;
  const double omega = options.gate.omega;
  if (spec.flavor != Flavor::homogeneous) {
    rep.rows.push_back(skipped_row(bname, "homogeneous stack required"));
    rep.rows.push_back(skipped_row(fname, "homogeneous stack required"));
  } else if (!gate_open(options.gate, why)) {
    rep.rows.push_back(skipped_row(bname, why));
    rep.rows.push_back(skipped_row(fname, why));
  } else if (!(options.low_p > omega / (omega + options.low_s) && options.low_p <= 1.0)) {
    rep.rows.push_back(skipped_row(bname, "p outside (omega/(omega+s), 1]"));
    rep.rows.push_back(skipped_row(fname, "p outside (omega/(omega+s), 1]"));
  } else {
    NormSpec src = spec, dst = spec;
    src.p = options.low_p;
    src.s = options.low_s;
    dst.p = 1.0;
    dst.s = options.low_s - omega * (1.0 / options.low_p - 1.0);
    BandRow brow(bname, options.band_cap);
    BandRow frow(fname, options.band_cap);
    for (const Field& f : fields) {
      const double bs = besov_norm(f, src, stack, space, cubes);
      if (bs > 0.0) brow.add(besov_norm(f, dst, stack, space, cubes) / bs);
      const double fs = triebel_lizorkin_norm(f, src, stack, space, cubes);
      if (fs > 0.0) frow.add(triebel_lizorkin_norm(f, dst, stack, space, cubes) / fs);
    }
    rep.rows.push_back(brow.done(false));
    rep.rows.push_back(frow.done(false));
  }
  return rep;
}

double fefferman_stein_constant(const Space& space, double p, double q,
                                const LemmaOptions& options) {
  const std::size_t n = space.size();
  Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(100 * p + q)));
  double worst = 0.0;
  for (int t = 0; t < options.fs_trials; ++t) {
    std::vector<Field> family;
    for (int j = 0; j < options.fs_family; ++j) {
      const std::size_t x0 = rng.index(n);
      const double r = rng.uniform(0.02, 0.3) * std::max(space.diam(), 1e-300);
      const double amp = rng.uniform(0.5, 2.0);
      Field f(static_cast<Eigen::Index>(n));
      for (std::size_t x = 0; x < n; ++x) f[x] = space.dist(x0, x) < r ? amp : 0.0;
      family.push_back(f);
    }
    worst = std::max(worst, fefferman_stein_ratio(space, family, p, q));
  }
  return worst;
}

double fefferman_stein_ratio(const Space& space, const std::vector<Field>& family, double p,
                             double q) {
  const Eigen::Index n = static_cast<Eigen::Index>(space.size());
  Field top = Field::Zero(n), bottom = Field::Zero(n);
  for (const Field& f : family) {
    const Field mf = hl_maximal(space, f);
    if (std::isinf(q)) {
      top = top.cwiseMax(mf);
      bottom = bottom.cwiseMax(f.cwiseAbs());
    } else {
      top += mf.array().pow(q).matrix();
      bottom += f.cwiseAbs().array().pow(q).matrix();
    }
  }
  if (!std::isinf(q)) {
    top = top.array().pow(1.0 / q).matrix();
    bottom = bottom.array().pow(1.0 / q).matrix();
  }
  return lebesgue_norm(space, top, p) / lebesgue_norm(space, bottom, p);
}

LemmaReport lemma_suite(const Space& space, const KernelStack& stack, const CubeSystem& cubes,
                        const LemmaOptions& options) {
  LemmaReport out;
  SuiteReport& rep = out.suite;
  rep.suite = "lemmas";
  const std::size_t n = space.size();

  {
    ExactRow row("theta-power inequality");
    Rng rng(mix_seed(options.seed, 1));
    for (std::size_t t = 0; t < options.theta_sequences; ++t) {
      const std::size_t len = 1 + rng.index(20);
      const double theta = 1.0 - rng.uniform();
      double sum = 0.0, powsum = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const double u = rng.uniform();
        const double a = u * u * u * std::pow(10.0, rng.uniform(-3.0, 3.0));
        sum += a;
        powsum += std::pow(a, theta);
      }
      row.check(leq(std::pow(sum, theta), powsum));
    }
    rep.rows.push_back(row.done());
  }

  // Geometric estimate: sup_x1 sum_y R_gamma(x1, y; r) mu_y across dyadic r.
  // Below a few spacings the self atom dominates; past diam the space ends.
  for (double gamma : {0.5, 1.0, 2.0}) {
    BandRow row("geometric estimate sum_y R_gamma(x1,y;r) mu_y, gamma=" + num(gamma),
                options.geometric_cap);
    if (n > 1) {
      for (double r : resolved_radius_grid(space)) {
        std::vector<double> per(n);
        parallel_for(n, [&](std::size_t x1) {
          const double vr = space.ball_mass(x1, r);
          double s = 0.0;
          for (std::size_t y = 0; y < n; ++y) {
            const double d = space.dist(x1, y);
            s += space.weight(y) * std::pow(r / (r + d), gamma) / (vr + space.v(x1, y));
          }
          per[x1] = s;
        });
        row.add(*std::max_element(per.begin(), per.end()));
      }
    }
    rep.rows.push_back(row.done(true));
  }

  const double gamma = 1.0;
  const double pr = 0.5 * (options.omega / (options.omega + gamma) + 1.0);
  std::vector<std::size_t> points;
  {
    const std::size_t stride = std::max<std::size_t>(1, (n + options.point_budget - 1) /
                                                           options.point_budget);
    for (std::size_t x = 0; x < n; x += stride) points.push_back(x);
  }
  FrameLevels lv{0, -1};
  bool have_levels = cubes.refined();
  if (have_levels) {
    lv.lo = std::max(stack.k_min, cubes.k_min());
    lv.hi = std::min(stack.k_max, cubes.refined_k_max());
    have_levels = lv.hi >= lv.lo;
  }
  const std::string two_name = "two-sided discrete sum, p=" + num(pr) + " gamma=1";
  const std::string dom_name = "maximal domination, r=" + num(pr) + " gamma=1";
  if (!have_levels) {
    rep.rows.push_back(skipped_row(two_name, "needs refined cubes overlapping the stack"));
    rep.rows.push_back(skipped_row(dom_name, "needs refined cubes overlapping the stack"));
  } else {
    BandRow two(two_name, options.two_sided_cap);
    for (int k = lv.lo; k <= lv.hi; ++k) {
      std::vector<const SubCube*> subs;
      for (const auto& per : cubes.subcubes_at(k)) {
        for (const auto& sc : per) subs.push_back(&sc);
      }
      for (int kp = lv.lo; kp <= lv.hi; ++kp) {
        const double r = std::pow(cubes.delta(), std::min(k, kp));
        for (std::size_t x : points) {
          const double vr = space.ball_mass(x, r);
          double s = 0.0;
          for (const SubCube* sc : subs) {
            const double d = space.dist(x, sc->sample);
            s += sc->mass * std::pow(1.0 / (vr + space.v(x, sc->sample)), pr) *
                 std::pow(r / (r + d), gamma * pr);
          }
          two.add(s / std::pow(vr, 1.0 - pr));
        }
      }
    }
    rep.rows.push_back(two.done(true));

    BandRow dom(dom_name, options.domination_cap);
    Rng rng(mix_seed(options.seed, 2));
    for (int k = lv.lo; k <= lv.hi; ++k) {
      const auto& fine = cubes.level(k + cubes.j0);
      std::vector<const SubCube*> subs;
      std::vector<double> coef;
      Field pc = Field::Zero(static_cast<Eigen::Index>(n));
      for (const auto& per : cubes.subcubes_at(k)) {
        for (const auto& sc : per) {
          subs.push_back(&sc);
          coef.push_back(std::abs(rng.normal()));
          for (int u : fine[sc.cube].members) pc[u] = std::pow(coef.back(), pr);
        }
      }
      const Field mpc = hl_maximal(space, pc);
      double level_const = 0.0;
      for (int kp = lv.lo; kp <= lv.hi; ++kp) {
        const int kk = std::min(k, kp);
        const double r = std::pow(cubes.delta(), kk);
        const double factor =
            std::pow(cubes.delta(), (k - kk) * options.omega * (1.0 - 1.0 / pr));
        for (std::size_t x : points) {
          const double vr = space.ball_mass(x, r);
          double lhs = 0.0;
          for (std::size_t i = 0; i < subs.size(); ++i) {
            const double d = space.dist(x, subs[i]->sample);
            lhs += subs[i]->mass / (vr + space.v(x, subs[i]->sample)) *
                   std::pow(r / (r + d), gamma) * coef[i];
          }
          const double rhs = factor * std::pow(mpc[static_cast<Eigen::Index>(x)], 1.0 / pr);
          if (rhs > 0.0) level_const = std::max(level_const, lhs / rhs);
        }
      }
      if (level_const > 0.0) dom.add(level_const);
    }
    rep.rows.push_back(dom.done(true));
  }

  for (auto [p, q] : std::vector<std::pair<double, double>>{{1.5, 2.0}, {2.0, 2.0}, {4.0, 4.0}}) {
    const double worst = fefferman_stein_constant(space, p, q, options);
    out.fefferman_stein.push_back({p, q, worst});
    SuiteRow row;
    row.name = "Fefferman-Stein constant p=" + num(p) + " q=" + num(q);
    row.checks = static_cast<std::size_t>(options.fs_trials);
    row.band_min = row.band_max = worst;
    row.pass = std::isfinite(worst) && worst >= 1.0;
    row.note = "compare across resolutions for drift";
    rep.rows.push_back(row);
  }
  return out;
}

}  // namespace lipbesov
