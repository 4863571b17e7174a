#include "lipbesov/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lipbesov/errors.hpp"

namespace lipbesov {

namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out << content;
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json real_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

double real_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw FormatError(what + ": expected a number or \"inf\"");
}

namespace {

template <typename T>
T get_as(const Json& doc, const char* key, const std::string& where) {
  if (!doc.contains(key)) throw FormatError(where + ": missing field '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where + ": field '" + key + "': " + e.what());
  }
}

void reject_unknown(const Json& doc, const std::set<std::string>& known, const std::string& where) {
  if (!doc.is_object()) throw FormatError(where + ": expected an object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw FormatError(where + ": unknown field '" + key + "'");
  }
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json space_to_json(const Space& space) {
  const std::size_t n = space.size();
  Json doc;
  doc["n"] = n;
  doc["label"] = space.label();
  doc["a0"] = space.a0();
  doc["a0_sampled"] = space.a0_certificate().sampled;
  Json w = Json::array();
  for (std::size_t x = 0; x < n; ++x) w.push_back(space.weight(x));
  doc["weights"] = w;
  if (!space.coords().empty()) doc["points"] = space.coords();
  Json d = Json::array();
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) d.push_back(space.dist(i, j));
  }
  doc["dist"] = d;
  return doc;
}

Space space_from_json(const Json& doc, std::size_t certify_cap, std::uint64_t samples) {
  const std::string where = "space document";
  reject_unknown(doc, {"n", "label", "a0", "a0_sampled", "weights", "points", "dist"}, where);
  const auto n = get_as<std::size_t>(doc, "n", where);
  if (n == 0) throw FormatError(where + ": n must be positive");
  const auto weights = get_as<std::vector<double>>(doc, "weights", where);
  if (weights.size() != n) throw FormatError(where + ": weights must have n entries");
  std::vector<std::vector<double>> coords;
  if (doc.contains("points")) {
    coords = get_as<std::vector<std::vector<double>>>(doc, "points", where);
    if (coords.size() != n) throw FormatError(where + ": points must have n entries");
  }
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                               static_cast<Eigen::Index>(n));
  if (doc.contains("dist") && !doc["dist"].empty() && doc["dist"][0].is_array()) {
    const auto d = get_as<std::vector<std::vector<double>>>(doc, "dist", where);
    if (d.size() != n) throw FormatError(where + ": dist matrix must have n rows");
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i].size() != n) throw FormatError(where + ": dist matrix must have n columns");
      for (std::size_t j = 0; j < n; ++j) dist(i, j) = d[i][j];
    }
  } else if (doc.contains("dist")) {
    const auto d = get_as<std::vector<double>>(doc, "dist", where);
    if (d.size() != n * (n - 1) / 2) {
      throw FormatError(where + ": dist must hold n(n-1)/2 lower-triangle entries");
    }
    std::size_t t = 0;
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j, ++t) dist(i, j) = dist(j, i) = d[t];
    }
  } else if (!coords.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (coords[i].size() != coords[j].size()) {
          throw FormatError(where + ": points have mixed dimensions");
        }
        double s = 0.0;
        for (std::size_t c = 0; c < coords[i].size(); ++c) {
          s += (coords[i][c] - coords[j][c]) * (coords[i][c] - coords[j][c]);
        }
        dist(i, j) = std::sqrt(s);
      }
    }
  } else {
    throw FormatError(where + ": needs dist or points");
  }
  A0Certificate cert;
  if (doc.contains("a0")) {
    cert.a0 = get_as<double>(doc, "a0", where);
    if (!(cert.a0 >= 1.0)) throw FormatError(where + ": a0 must be at least 1");
    verify_a0(dist, cert.a0, certify_cap, samples);
    cert.sampled = doc.value("a0_sampled", n > certify_cap);
  } else {
    cert = certify_a0(dist, certify_cap, samples);
  }
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                                        static_cast<Eigen::Index>(n));
  return Space(std::move(dist), std::move(w), cert, doc.value("label", std::string()),
               std::move(coords));
}

Json cubes_to_json(const CubeSystem& cubes) {
  Json doc;
  doc["delta"] = cubes.delta();
  doc["k_min"] = cubes.k_min();
  doc["k_max"] = cubes.k_max();
  doc["c0"] = real_to_json(cubes.nets.c0);
  doc["C0"] = cubes.nets.C0;
  doc["j0"] = cubes.j0;
  doc["sampler"] = to_string(cubes.sampler);
  doc["sampler_seed"] = cubes.sampler_seed;
  Json levels = Json::array();
  for (int k = cubes.k_min(); k <= cubes.k_max(); ++k) {
    Json lv;
    lv["k"] = k;
    Json list = Json::array();
    for (const Cube& c : cubes.level(k)) {
      Json cj;
      cj["center"] = c.center;
      cj["parent"] = c.parent;
      cj["members"] = c.members;
      list.push_back(cj);
    }
    lv["cubes"] = list;
    levels.push_back(lv);
  }
  doc["levels"] = levels;
  return doc;
}

CubeSystem cubes_from_json(const Json& doc) {
  const std::string where = "cube dump";
  reject_unknown(doc, {"delta", "k_min", "k_max", "c0", "C0", "j0", "sampler", "sampler_seed",
                       "levels"},
                 where);
  CubeSystem cs;
  cs.nets.delta = get_as<double>(doc, "delta", where);
  cs.nets.k_min = get_as<int>(doc, "k_min", where);
  cs.nets.k_max = get_as<int>(doc, "k_max", where);
  if (cs.nets.k_max < cs.nets.k_min) throw FormatError(where + ": k_max < k_min");
  if (doc.contains("c0")) cs.nets.c0 = real_from_json(doc["c0"], where + ": c0");
  cs.nets.C0 = doc.value("C0", 0.0);
  const auto& levels = doc.at("levels");
  if (!levels.is_array() || static_cast<int>(levels.size()) != cs.nets.levels()) {
    throw FormatError(where + ": levels must list k_min..k_max");
  }
  for (int l = 0; l < cs.nets.levels(); ++l) {
    const Json& lv = levels[l];
    if (get_as<int>(lv, "k", where) != cs.nets.k_min + l) {
      throw FormatError(where + ": levels out of order");
    }
    std::vector<int> centers;
    std::vector<Cube> list;
    for (const Json& cj : lv.at("cubes")) {
      Cube c;
      c.center = get_as<int>(cj, "center", where);
      c.parent = get_as<int>(cj, "parent", where);
      c.members = get_as<std::vector<int>>(cj, "members", where);
      centers.push_back(c.center);
      list.push_back(std::move(c));
    }
    cs.nets.nets.push_back(std::move(centers));
    cs.cubes.push_back(std::move(list));
  }
  for (int l = 1; l < cs.nets.levels(); ++l) {
    for (std::size_t b = 0; b < cs.cubes[l].size(); ++b) {
      const int parent = cs.cubes[l][b].parent;
      if (parent >= 0 && parent < static_cast<int>(cs.cubes[l - 1].size())) {
        cs.cubes[l - 1][parent].children.push_back(static_cast<int>(b));
      }
    }
  }
  for (int l = 0; l < cs.nets.levels(); ++l) {
    std::vector<int> ref;
    if (l + 1 < cs.nets.levels()) {
      const auto& next = cs.nets.nets[l + 1];
      const std::size_t keep = std::min(next.size(), cs.nets.nets[l].size());
      ref.assign(next.begin() + static_cast<std::ptrdiff_t>(keep), next.end());
    }
    cs.refpoints.push_back(std::move(ref));
  }
  cs.sampler = parse_sampler(doc.value("sampler", std::string("center")));
  cs.sampler_seed = doc.value("sampler_seed", std::uint64_t{0});
  // Subcubes are rebuilt by the caller when j0 >= 0.
  cs.j0 = -1;
  return cs;
}

void attach_assignments(CubeSystem& cubes, std::size_t n) {
  cubes.assign.assign(cubes.cubes.size(), std::vector<int>(n, -1));
  for (std::size_t l = 0; l < cubes.cubes.size(); ++l) {
    for (std::size_t a = 0; a < cubes.cubes[l].size(); ++a) {
      for (int p : cubes.cubes[l][a].members) cubes.assign[l][p] = static_cast<int>(a);
    }
  }
}

Json to_json(const GeometryReport& g) {
  Json j;
  j["c_mu"] = g.c_mu;
  j["omega"] = g.omega;
  j["q_global"] = opt(g.q_global);
  j["q_global_const"] = opt(g.q_global_const);
  j["q_local"] = opt(g.q_local);
  j["q_local_const"] = opt(g.q_local_const);
  j["kappa"] = opt(g.kappa);
  j["kappa_const"] = opt(g.kappa_const);
  j["diam"] = g.diam;
  j["v_symmetry"] = g.v_symmetry;
  return j;
}

Json to_json(const CubeVerification& v) {
  Json j;
  j["partition"] = v.partition;
  j["nesting"] = v.nesting;
  j["center_membership"] = v.center_membership;
  j["subcube_consistency"] = v.subcube_consistency;
  j["offending_point"] = v.offending_point;
  j["failures"] = v.failures;
  j["min_inner"] = real_to_json(v.min_inner);
  j["max_outer"] = v.max_outer;
  j["subcube_count_const"] = v.subcube_count_const;
  j["max_subcubes"] = v.max_subcubes;
  Json levels = Json::array();
  for (const auto& l : v.levels) {
    Json lj;
    lj["k"] = l.k;
    lj["cubes"] = l.cubes;
    lj["interior_cubes"] = l.interior_cubes;
    lj["min_inner"] = real_to_json(l.min_inner);
    lj["max_outer"] = l.max_outer;
    lj["nominal_inner_fail"] = l.nominal_inner_fail;
    lj["nominal_outer_fail"] = l.nominal_outer_fail;
    levels.push_back(lj);
  }
  j["levels"] = levels;
  return j;
}

Json to_json(const AtiValidationReport& r) {
  Json j;
  j["nu"] = r.nu;
  j["size_const"] = real_to_json(r.size_const);
  j["size_const_no_h"] = real_to_json(r.size_const_no_h);
  j["eta_fit"] = r.eta_fit;
  j["reg_const"] = real_to_json(r.reg_const);
  j["second_diff_const"] = real_to_json(r.second_diff_const);
  j["cancel_resid"] = r.cancel_resid;
  j["unit_resid"] = r.unit_resid;
  j["identity_resid"] = r.identity_resid;
  Json g = Json::array();
  for (const auto& gc : r.rgamma) g.push_back({{"gamma", gc.gamma}, {"value", real_to_json(gc.value)}});
  j["rgamma"] = g;
  j["regularity_sampled"] = r.regularity_sampled;
  j["second_diff_sampled"] = r.second_diff_sampled;
  return j;
}

Json to_json(const ReconstructReport& r) {
  Json j;
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["frame_lower"] = r.frame_lower;
  j["frame_upper"] = r.frame_upper;
  j["trivial"] = r.trivial;
  return j;
}

Json to_json(const EquivalenceReport& r) {
  Json j;
  j["pairing"] = to_string(r.pairing);
  j["fields"] = r.rows.size();
  j["degenerate"] = r.degenerate;
  j["min_ratio"] = r.min_ratio;
  j["median_ratio"] = r.median_ratio;
  j["max_ratio"] = r.max_ratio;
  j["geo_mean"] = r.geo_mean;
  j["band"] = real_to_json(r.band);
  j["band_cap"] = r.band_cap;
  j["pass"] = r.pass;
  j["message"] = r.message;
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"label", row.label},
                    {"left", row.left},
                    {"right", row.right},
                    {"ratio", row.ratio},
                    {"degenerate", row.degenerate}});
  }
  j["rows"] = rows;
  return j;
}

Json to_json(const SuiteRow& r) {
  Json j;
  j["name"] = r.name;
  j["exact"] = r.exact;
  j["checks"] = r.checks;
  j["violations"] = r.violations;
  j["band_min"] = real_to_json(r.band_min);
  j["band_max"] = real_to_json(r.band_max);
  j["cap"] = r.cap;
  j["skipped"] = r.skipped;
  j["pass"] = r.pass;
  j["note"] = r.note;
  return j;
}

Json to_json(const SuiteReport& r) {
  Json j;
  j["suite"] = r.suite;
  j["exact_ok"] = r.exact_ok();
  j["bands_ok"] = r.bands_ok();
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  j["rows"] = rows;
  return j;
}

namespace {

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string equivalence_csv(const EquivalenceReport& r) {
  std::ostringstream os;
  os << "label,left,right,ratio,degenerate\n";
  for (const auto& row : r.rows) {
    os << csv_text(row.label) << ',' << format_double(row.left) << ','
       << format_double(row.right) << ',' << format_double(row.ratio) << ','
       << (row.degenerate ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string suite_csv(const SuiteReport& r) {
  std::ostringstream os;
  os << "name,exact,checks,violations,band_min,band_max,cap,skipped,pass,note\n";
  for (const auto& row : r.rows) {
    os << csv_text(row.name) << ',' << (row.exact ? 1 : 0) << ',' << row.checks << ','
       << row.violations << ',' << format_double(row.band_min) << ','
       << format_double(row.band_max) << ',' << format_double(row.cap) << ','
       << (row.skipped ? 1 : 0) << ',' << (row.pass ? 1 : 0) << ',' << csv_text(row.note)
       << '\n';
  }
  return os.str();
}

std::string field_csv(const Field& f) {
  std::ostringstream os;
  os << "x,value\n";
  for (Eigen::Index x = 0; x < f.size(); ++x) os << x << ',' << format_double(f[x]) << '\n';
  return os.str();
}

Json field_to_json(const Field& f) {
  Json j = Json::array();
  for (Eigen::Index x = 0; x < f.size(); ++x) j.push_back(f[x]);
  return j;
}

Field field_from_json(const Json& j, std::size_t n) {
  if (!j.is_array() || j.size() != n) {
    throw FormatError("field must be an array of " + std::to_string(n) + " numbers");
  }
  Field f(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    if (!j[x].is_number()) throw FormatError("field entries must be numbers");
    f[static_cast<Eigen::Index>(x)] = j[x].get<double>();
  }
  return f;
}

}  // namespace lipbesov
