#include "lipbesov/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <ostream>

#include <CLI11.hpp>

#include "lipbesov/difference_norms.hpp"
#include "lipbesov/errors.hpp"
#include "lipbesov/parallel.hpp"
#include "lipbesov/rng.hpp"

namespace lipbesov {

namespace fs = std::filesystem;

Space make_space(const RunConfig& rc) {
  if (!rc.space_file.empty()) {
    return space_from_json(read_json(rc.space_file), rc.space.certify_cap,
                           rc.space.sampled_triples);
  }
  return generate_space(rc.space);
}

CubeSystem make_cubes(const RunConfig& rc, const Space& space) {
  const double delta = rc.dyadic.delta;
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("dyadic.delta must lie in (0,1)");
  LevelRange lr = auto_levels(space, delta, rc.dyadic.extra_levels);
  if (rc.dyadic.k_min) lr.k_min = *rc.dyadic.k_min;
  if (rc.dyadic.k_max) lr.k_max = *rc.dyadic.k_max;
  const NetSystem nets = build_nets(space, delta, lr.k_min, lr.k_max);
  CubeSystem cubes = build_cubes(nets, space);
  const int j0 = rc.dyadic.j0 ? *rc.dyadic.j0 : default_j0(nets, space.a0());
  if (j0 <= nets.k_max - nets.k_min) {
    cubes = refine_subcubes(cubes, j0, rc.dyadic.sampler, rc.dyadic.sampler_seed);
  } else if (rc.dyadic.j0) {
    throw RangeError("dyadic.j0 exceeds the level range");
  }
  return cubes;
}

KernelStack make_stack(const RunConfig& rc, const Space& space, const CubeSystem& cubes) {
  return rc.flavor == Flavor::homogeneous ? build_exp_ati(space, cubes, rc.kernel)
                                          : build_exp_iati(space, cubes, rc.kernel);
}

Field make_field(const RunConfig& rc, const Space& space, const KernelStack& stack) {
  const Json& fj = rc.field;
  const std::string kind = fj.at("kind").get<std::string>();
  const auto n = static_cast<Eigen::Index>(space.size());
  if (kind == "constant") return Field::Constant(n, real_from_json(fj.at("value"), "field.value"));
  if (kind == "holder") {
    const auto x0 = fj.at("x0").get<std::size_t>();
    if (x0 >= space.size()) throw ParameterError("field.x0 is out of range");
    return holder_field(space, x0, real_from_json(fj.at("theta"), "field.theta"));
  }
  if (kind == "file") {
    return field_from_json(read_json(fj.at("file").get<std::string>()), space.size());
  }
  Rng rng(fj.at("seed").get<std::uint64_t>());
  Field g(n);
  for (Eigen::Index x = 0; x < n; ++x) g[x] = rng.normal();
  if (kind == "noise") return g;
  if (kind == "bandlimited") {
    const int j = fj.at("level").is_null() ? std::min(stack.k_min + 3, stack.k_max)
                                           : fj.at("level").get<int>();
    if (!stack.has_level(j)) throw RangeError("field.level is outside the stack");
    return stack.level(j) * g.cwiseProduct(space.weight());
  }
  throw ParameterError("unknown field kind '" + kind +
                       "' (constant, holder, noise, bandlimited, file)");
}

GateInfo make_gate(const RunConfig& rc, const Space& space, const KernelStack& stack) {
  GateInfo g = rc.gate;
  const GeometryReport geo = geometry_report(space, resolved_radius_grid(space));
  g.omega = geo.omega;
  g.q_global = rc.flavor == Flavor::homogeneous ? geo.q_global : geo.q_local;
  g.eta = stack.eta;
  return g;
}

namespace {

struct Context {
  RunConfig rc;
  std::ostream& out;
  std::ostream& err;

  fs::path path(const std::string& name) const { return fs::path(rc.output_dir) / name; }
  void write(const std::string& name, const std::string& content) const {
    write_atomic(path(name).string(), content);
  }
  void write_json(const std::string& name, const Json& j) const { write(name, dump_json(j)); }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string summary_line(const SuiteRow& r) {
  std::string s = (r.skipped ? "SKIP " : r.pass ? "PASS " : "FAIL ") + r.name;
  if (r.exact) {
    s += "  violations " + std::to_string(r.violations) + "/" + std::to_string(r.checks);
  } else if (!r.skipped) {
    s += "  band [" + format_double(r.band_min) + ", " + format_double(r.band_max) + "]";
    if (r.cap > 0.0) s += " cap " + format_double(r.cap);
  }
  if (!r.note.empty()) s += "  (" + r.note + ")";
  return s;
}

int cmd_space_build(Context& c, const std::string& out_path) {
  const Space space = make_space(c.rc);
  const std::string target = out_path.empty() ? c.path("space.json").string() : out_path;
  write_atomic(target, dump_json(space_to_json(space)));
  c.out << "space " << space.label() << " n=" << space.size()
        << " a0=" << format_double(space.a0())
        << (space.a0_certificate().sampled ? " (sampled)" : "") << " -> " << target << "\n";
  return kExitOk;
}

int cmd_space_report(Context& c) {
  const Space space = make_space(c.rc);
  GeometryOptions go;
  go.fit_kappa = true;
  const GeometryReport geo = geometry_report(space, resolved_radius_grid(space), go);
  Json j;
  j["label"] = space.label();
  j["n"] = space.size();
  j["a0"] = space.a0();
  j["a0_sampled"] = space.a0_certificate().sampled;
  j["geometry"] = to_json(geo);
  c.write_json("geometry.json", j);
  c.out << "n=" << space.size() << " a0=" << format_double(space.a0())
        << " c_mu=" << format_double(geo.c_mu) << " omega=" << format_double(geo.omega)
        << " q_global=" << (geo.q_global ? format_double(*geo.q_global) : "none") << "\n";
  return kExitOk;
}

int report_verification(Context& c, const CubeVerification& v, const std::string& name) {
  c.write_json(name, to_json(v));
  if (!v.exact_ok()) {
    for (const auto& f : v.failures) c.err << "violation: " << f << "\n";
    if (v.offending_point >= 0) c.err << "offending point " << v.offending_point << "\n";
    return kExitViolation;
  }
  c.out << "partition, nesting, center membership: ok; r_in/delta^k >= "
        << format_double(v.min_inner) << ", r_out/delta^k <= " << format_double(v.max_outer)
        << "\n";
  return kExitOk;
}

int cmd_cubes_build(Context& c, const std::string& out_path) {
  const Space space = make_space(c.rc);
  const CubeSystem cubes = make_cubes(c.rc, space);
  const std::string target = out_path.empty() ? c.path("cubes.json").string() : out_path;
  write_atomic(target, dump_json(cubes_to_json(cubes)));
  c.out << "levels " << cubes.k_min() << ".." << cubes.k_max() << " j0=" << cubes.j0
        << " -> " << target << "\n";
  const double omega = geometry_report(space, resolved_radius_grid(space)).omega;
  return report_verification(c, verify_cubes(cubes, space, omega), "cube_verification.json");
}

int cmd_cubes_verify(Context& c, const std::string& dump) {
  if (dump.empty()) throw FormatError("cubes verify needs --dump <file>");
  const Space space = make_space(c.rc);
  const Json raw = read_json(dump);
  CubeSystem cubes = cubes_from_json(raw);
  const CubeVerification structure = verify_cube_structure(cubes, space.size());
  if (!structure.exact_ok()) return report_verification(c, structure, "cube_verification.json");
  attach_assignments(cubes, space.size());
  const int j0 = raw.value("j0", -1);
  if (j0 >= 0) cubes = refine_subcubes(cubes, j0, cubes.sampler, cubes.sampler_seed);
  const double omega = geometry_report(space, resolved_radius_grid(space)).omega;
  return report_verification(c, verify_cubes(cubes, space, omega), "cube_verification.json");
}

int cmd_ati(Context& c, bool validate, bool dump_kernels) {
  const Space space = make_space(c.rc);
  const CubeSystem cubes = make_cubes(c.rc, space);
  KernelStack stack = make_stack(c.rc, space, cubes);
  if (validate) {
    ValidationOptions vo;
    vo.gammas = {0.5, 1.0, 2.0};
    stack.report = validate_ati(stack, space, cubes, vo);
  }
  const auto& r = stack.report;
  Json j;
  j["flavor"] = to_string(stack.flavor);
  j["k_min"] = stack.k_min;
  j["k_max"] = stack.k_max;
  j["delta"] = stack.delta;
  j["a"] = stack.a;
  j["sigma"] = stack.sigma;
  j["n_low"] = stack.n_low;
  j["report"] = to_json(r);
  c.write_json("ati_report.json", j);
  if (dump_kernels) {
    Json levels = Json::array();
    for (int k = stack.k_min; k <= stack.k_max; ++k) {
      const auto& q = stack.level(k);
      Json rows = Json::array();
      for (Eigen::Index x = 0; x < q.rows(); ++x) rows.push_back(field_to_json(q.row(x)));
      levels.push_back({{"k", k}, {"q", rows}});
    }
    c.write_json("kernels.json", levels);
  }
  c.out << "levels " << stack.k_min << ".." << stack.k_max << " nu=" << format_double(r.nu)
        << " eta=" << format_double(r.eta_fit) << " size=" << format_double(r.size_const)
        << " cancel=" << format_double(r.cancel_resid)
        << " identity=" << format_double(r.identity_resid) << "\n";
  int status = kExitOk;
  if (!(r.cancel_resid <= 1e-10)) {
    c.err << "violation: cancellation residual " << format_double(r.cancel_resid)
          << " exceeds 1e-10\n";
    status = kExitViolation;
  }
  if (stack.flavor == Flavor::inhomogeneous && !(r.unit_resid <= 1e-12)) {
    c.err << "violation: Q_0 unit-integral residual " << format_double(r.unit_resid)
          << " exceeds 1e-12\n";
    status = kExitViolation;
  }
  return status;
}

int cmd_norm(Context& c, const std::string& variant) {
  if (variant.empty()) throw FormatError("norm compute needs --variant");
  const Space space = make_space(c.rc);
  const CubeSystem cubes = make_cubes(c.rc, space);
  const KernelStack stack = make_stack(c.rc, space, cubes);
  Field f = make_field(c.rc, space, stack);
  const NormSpec& spec = c.rc.norm;
  double value = 0.0;
  if (variant == "besov") {
    value = besov_norm(f, spec, stack, space, cubes);
  } else if (variant == "triebel_lizorkin") {
    value = triebel_lizorkin_norm(f, spec, stack, space, cubes);
  } else if (variant == "sampled_besov") {
    value = sampled_besov_norm(f, spec, stack, space, cubes);
  } else if (variant == "L_tilde" || variant == "Lb_tilde") {
    value = truncated_norm(f, spec, parse_trunc_variant(variant), space);
  } else {
    LipVariant lv;
    try {
      lv = parse_lip_variant(variant);
    } catch (const ParameterError&) {
      throw FormatError("unknown norm variant '" + variant +
                        "' (besov, triebel_lizorkin, sampled_besov, Ldot, L, Lb_dot, Lb, "
                        "Lt_dot, Lt, L_tilde, Lb_tilde)");
    }
    value = lipschitz_norm(f, spec, lv, space);
  }
  c.write_json("norm.json", {{"variant", variant}, {"value", real_to_json(value)}});
  c.out << format_double(value) << "\n";
  return kExitOk;
}

int cmd_frame(Context& c) {
  const Space space = make_space(c.rc);
  const CubeSystem cubes = make_cubes(c.rc, space);
  const KernelStack stack = make_stack(c.rc, space, cubes);
  const Field f = make_field(c.rc, space, stack);
  const Reconstruction rec = reconstruct(stack, space, cubes, f, c.rc.frame);
  c.write_json("frame.json", to_json(rec.report));
  if (c.rc.write_csv) c.write("reconstruction.csv", field_csv(rec.rf));
  c.out << "iterations " << rec.report.iterations << " residual "
        << format_double(rec.report.residual) << " frame bounds ["
        << format_double(rec.report.frame_lower) << ", "
        << format_double(rec.report.frame_upper) << "]\n";
  return kExitOk;
}

struct Built {
  Space space;
  CubeSystem cubes;
  KernelStack stack;
  std::vector<EnsembleMember> ensemble;
  GateInfo gate;
};

Built build_all(const RunConfig& rc) {
  Space space = make_space(rc);
  CubeSystem cubes = make_cubes(rc, space);
  KernelStack stack = make_stack(rc, space, cubes);
  auto ensemble = generate_ensemble(space, stack, rc.ensemble);
  GateInfo gate = make_gate(rc, space, stack);
  return {std::move(space), std::move(cubes), std::move(stack), std::move(ensemble), gate};
}

RunConfig resized(const RunConfig& rc, int size) {
  if (!rc.space_file.empty()) throw ParameterError("lab.drift_sizes needs a generated space");
  RunConfig other = rc;
  other.space.size = size;
  return other;
}

int cmd_equivalence(Context& c) {
  const Built b = build_all(c.rc);
  const EquivalenceReport rep = equivalence_experiment(
      b.space, b.stack, b.cubes, c.rc.norm, c.rc.pairing, b.ensemble, b.gate, c.rc.band_cap);
  Json j = to_json(rep);
  j["n"] = b.space.size();
  bool pass = rep.pass;
  Json drifts = Json::array();
  for (int size : c.rc.drift_sizes) {
    const RunConfig other = resized(c.rc, size);
    const Built ob = build_all(other);
    const EquivalenceReport orep = equivalence_experiment(
        ob.space, ob.stack, ob.cubes, other.norm, other.pairing, ob.ensemble, ob.gate,
        other.band_cap);
    const double d = drift(rep.geo_mean, orep.geo_mean);
    const bool ok = orep.pass && d <= c.rc.drift_cap;
    pass = pass && ok;
    drifts.push_back({{"size", size},
                      {"n", ob.space.size()},
                      {"geo_mean", orep.geo_mean},
                      {"band", real_to_json(orep.band)},
                      {"drift", d},
                      {"drift_cap", c.rc.drift_cap},
                      {"pass", ok}});
    c.out << "n=" << ob.space.size() << " band " << format_double(orep.band) << " drift "
          << format_double(d) << (ok ? "" : "  FAIL") << "\n";
  }
  j["resolutions"] = drifts;
  j["pass"] = pass;
  c.write_json("equivalence.json", j);
  if (c.rc.write_csv) c.write("equivalence.csv", equivalence_csv(rep));
  c.out << to_string(rep.pairing) << " n=" << b.space.size() << " ratio min "
        << format_double(rep.min_ratio) << " median " << format_double(rep.median_ratio)
        << " max " << format_double(rep.max_ratio) << " band " << format_double(rep.band)
        << " (cap " << format_double(rep.band_cap) << "), degenerate " << rep.degenerate
        << "\n";
  if (!pass) {
    c.err << "equivalence failed: " << rep.message << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

int finish_suite(Context& c, const SuiteReport& rep, const std::string& name, Json extra = {}) {
  Json j = to_json(rep);
  if (!extra.is_null()) {
    for (const auto& [k, v] : extra.items()) j[k] = v;
  }
  c.write_json(name + ".json", j);
  if (c.rc.write_csv) c.write(name + ".csv", suite_csv(rep));
  for (const auto& r : rep.rows) c.out << summary_line(r) << "\n";
  if (!rep.exact_ok() || !rep.bands_ok()) {
    c.err << rep.suite << ": "
          << (!rep.exact_ok() ? "exact rows violated" : "band rows exceed their caps") << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_embeddings(Context& c) {
  const Built b = build_all(c.rc);
  EmbeddingOptions eo = c.rc.embedding;
  eo.gate = b.gate;
  const SuiteReport rep = embedding_suite(b.space, b.stack, b.cubes, c.rc.norm, b.ensemble, eo);
  return finish_suite(c, rep, "embeddings");
}

int cmd_lemmas(Context& c) {
  const Space space = make_space(c.rc);
  const CubeSystem cubes = make_cubes(c.rc, space);
  const KernelStack stack = make_stack(c.rc, space, cubes);
  LemmaOptions lo = c.rc.lemmas;
  lo.omega = geometry_report(space, resolved_radius_grid(space)).omega;
  LemmaReport rep = lemma_suite(space, stack, cubes, lo);
  Json fsj = Json::array();
  for (const auto& f : rep.fefferman_stein) {
    fsj.push_back({{"p", f.p}, {"q", f.q}, {"constant", f.constant}});
  }
  for (int size : c.rc.drift_sizes) {
    const RunConfig other = resized(c.rc, size);
    const Space os = make_space(other);
    for (const auto& base : rep.fefferman_stein) {
      const double worst = fefferman_stein_constant(os, base.p, base.q, lo);
      SuiteRow row;
      row.name = "Fefferman-Stein drift p=" + format_double(base.p) +
                 " q=" + format_double(base.q) + " n=" + std::to_string(os.size());
      row.checks = 1;
      row.band_min = row.band_max = drift(base.constant, worst);
      row.cap = c.rc.drift_cap;
      row.pass = row.band_max <= row.cap;
      if (!row.pass) row.violations = 1;
      rep.suite.rows.push_back(row);
    }
  }
  return finish_suite(c, rep.suite, "lemmas", Json{{"fefferman_stein", fsj}});
}

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Besov, Triebel-Lizorkin and difference norms on finite quasi-metric spaces"};
  app.require_subcommand(1);
  std::string config_path, out_dir, variant, dump, out_path;
  std::vector<std::string> overrides;
  int threads = 0;
  bool dump_kernels = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--set", overrides, "override a config leaf, e.g. norm.p=1.5")
        ->take_all();
    sub->add_option("--threads", threads, "worker cap (0 = hardware)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out-dir", out_dir, "report directory (output.dir)");
  };
  std::string chosen;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help) {
    CLI::App* sub = parent->add_subcommand(name, help);
    common(sub);
    sub->callback([&chosen, parent, name] { chosen = parent->get_name() + " " + name; });
    return sub;
  };
  CLI::App* space = app.add_subcommand("space", "build or describe a space");
  space->require_subcommand(1);
  leaf(space, "build", "write the space document")
      ->add_option("--out", out_path, "space document path");
  leaf(space, "report", "doubling and lower-bound fits");
  CLI::App* cubes = app.add_subcommand("cubes", "dyadic cube systems");
  cubes->require_subcommand(1);
  leaf(cubes, "build", "build, dump and verify cubes")
      ->add_option("--out", out_path, "cube dump path");
  leaf(cubes, "verify", "verify a cube dump")->add_option("--dump", dump, "cube dump");
  CLI::App* ati = app.add_subcommand("ati", "exp-ATI / exp-IATI kernels");
  ati->require_subcommand(1);
  leaf(ati, "build", "build the stack")
      ->add_flag("--dump-kernels", dump_kernels, "also write kernels.json");
  leaf(ati, "validate", "measure the kernel constants");
  CLI::App* norm = app.add_subcommand("norm", "norms of one field");
  norm->require_subcommand(1);
  leaf(norm, "compute", "compute one norm")->add_option("--variant", variant, "norm variant");
  CLI::App* frame = app.add_subcommand("frame", "frame reconstruction");
  frame->require_subcommand(1);
  leaf(frame, "reconstruct", "reconstruct the configured field");
  CLI::App* lab = app.add_subcommand("lab", "experiment suites");
  lab->require_subcommand(1);
  leaf(lab, "equivalence", "difference vs Littlewood-Paley norms");
  leaf(lab, "embeddings", "embedding and inequality suite");
  leaf(lab, "lemmas", "auxiliary lemma suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  const Stopwatch watch;
  const std::string started = now_utc();
  try {
    Json doc = config_path.empty() ? default_config() : merge_config(read_json(config_path));
    for (const auto& o : overrides) apply_override(doc, o);
    if (!out_dir.empty()) doc["output"]["dir"] = out_dir;
    Context c{parse_config(doc), out, err};
    set_thread_count(threads);
    c.write_json("effective_config.json", doc);

    int status = kExitUsage;
    if (chosen == "space build") status = cmd_space_build(c, out_path);
    else if (chosen == "space report") status = cmd_space_report(c);
    else if (chosen == "cubes build") status = cmd_cubes_build(c, out_path);
    else if (chosen == "cubes verify") status = cmd_cubes_verify(c, dump);
    else if (chosen == "ati build") status = cmd_ati(c, false, dump_kernels);
    else if (chosen == "ati validate") status = cmd_ati(c, true, false);
    else if (chosen == "norm compute") status = cmd_norm(c, variant);
    else if (chosen == "frame reconstruct") status = cmd_frame(c);
    else if (chosen == "lab equivalence") status = cmd_equivalence(c);
    else if (chosen == "lab embeddings") status = cmd_embeddings(c);
    else if (chosen == "lab lemmas") status = cmd_lemmas(c);

    c.write_json("timing.json", {{"command", chosen},
                                 {"started_utc", started},
                                 {"wall_seconds", watch.seconds()},
                                 {"threads", thread_count()},
                                 {"exit", status}});
    return status;
  } catch (const CertificationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitViolation;
  } catch (const ExactInvariantError& e) {
    err << "error: " << e.what() << "\n";
    return kExitViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace lipbesov
