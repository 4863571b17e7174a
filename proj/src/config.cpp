#include "lipbesov/config.hpp"

#include "lipbesov/errors.hpp"

namespace lipbesov {

Json default_config() {
  return Json::parse(R"({
  "space": {
    "file": "",
    "kind": "grid1d",
    "size": 257,
    "exponent": 1.0,
    "seed": 1,
    "label": "",
    "certify_cap": 512,
    "sampled_triples": 10000000
  },
  "dyadic": {
    "delta": 0.5,
    "k_min": null,
    "k_max": null,
    "extra_levels": 4,
    "j0": null,
    "sampler": "center",
    "seed": 0
  },
  "kernel": {
    "flavor": "homogeneous",
    "a": 1.0,
    "sigma": 1.0,
    "n_low": 1,
    "scaling_tol": 1e-12,
    "max_sweeps": 10000
  },
  "norm": {
    "s": 0.5,
    "p": 2.0,
    "q": 2.0,
    "u": 1.0,
    "beta": 0.9,
    "gamma": 0.9,
    "c_tilde": 1.0
  },
  "field": {
    "kind": "holder",
    "value": 1.0,
    "x0": 0,
    "theta": 1.0,
    "level": null,
    "seed": 1,
    "file": ""
  },
  "frame": {
    "tol": 1e-8,
    "max_iter": 1000
  },
  "lab": {
    "ensemble": {
      "seed": 1,
      "counts": {
        "bandlimited": 13,
        "holder": 13,
        "smoothed_indicator": 12,
        "gaussian_field": 12
      }
    },
    "pairing": "B_vs_L",
    "band_cap": 100.0,
    "drift_cap": 2.0,
    "drift_sizes": [],
    "gate": {
      "enabled": true,
      "tolerance": 0.15
    },
    "embedding": {
      "eps": 0.2,
      "low_p": 0.8,
      "low_s": 0.8,
      "band_cap": 100.0,
      "truncation_cap": 4.0,
      "c_tilde_cap": 8.0
    },
    "lemmas": {
      "theta_sequences": 10000,
      "geometric_cap": 4.0,
      "two_sided_cap": 50.0,
      "domination_cap": 50.0,
      "seed": 11,
      "point_budget": 64,
      "fs_trials": 16,
      "fs_family": 8
    }
  },
  "output": {
    "dir": "out",
    "csv": true
  }
})");
}

namespace {

// Leaves whose default is null accept integers; real leaves accept "inf".
bool compatible(const Json& def, const Json& val) {
  if (def.is_null()) return val.is_null() || val.is_number_integer();
  if (def.is_number_float()) {
    return val.is_number() || (val.is_string() && val.get<std::string>() == "inf");
  }
  if (def.is_number_integer()) return val.is_number_integer() && val.get<double>() >= 0;
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_string()) return val.is_string();
  if (def.is_array()) return val.is_array();
  return false;
}

void overlay(Json& base, const Json& user, const std::string& path) {
  if (!user.is_object()) throw FormatError("config: '" + path + "' must be an object");
  for (const auto& [key, val] : user.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    // Ensemble counts name a subset of kinds.
    if (path == "lab.ensemble" && key == "counts") {
      if (!val.is_object()) throw FormatError("config: '" + here + "' must be an object");
      Json counts = Json::object();
      for (const auto& [kind, count] : val.items()) {
        parse_ensemble_kind(kind);
        if (!count.is_number_integer()) {
          throw FormatError("config: '" + here + "." + kind + "' must be an integer");
        }
        counts[kind] = count;
      }
      base[key] = counts;
      continue;
    }
    if (!base.contains(key)) throw FormatError("config: unknown key '" + here + "'");
    Json& slot = base[key];
    if (slot.is_object()) {
      overlay(slot, val, here);
    } else if (!compatible(slot, val)) {
      throw FormatError("config: '" + here + "' has the wrong type");
    } else {
      slot = val;
    }
  }
}

double real(const Json& j, const std::string& what) { return real_from_json(j, what); }

}  // namespace

Json merge_config(const Json& user) {
  Json base = default_config();
  overlay(base, user, "");
  return base;
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw FormatError("override '" + assignment + "' must look like path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  // Build {"a": {"b": value}} and overlay it so the same checks apply.
  Json patch = value;
  std::size_t end = path.size();
  while (true) {
    const auto dot = path.rfind('.', end - 1);
    const std::string key =
        dot == std::string::npos ? path.substr(0, end) : path.substr(dot + 1, end - dot - 1);
    if (key.empty()) throw FormatError("override path '" + path + "' is malformed");
    patch = Json{{key, patch}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  // Type-check against the defaults, then write the leaf.
  Json base = default_config();
  overlay(base, patch, "");
  std::string pointer = "/" + path;
  for (auto& c : pointer) {
    if (c == '.') c = '/';
  }
  config[Json::json_pointer(pointer)] = value;
}

RunConfig parse_config(const Json& merged) {
  RunConfig rc;
  rc.doc = merged;
  try {
    const Json& sp = merged.at("space");
    rc.space_file = sp.at("file").get<std::string>();
    rc.space.kind = parse_space_kind(sp.at("kind").get<std::string>());
    rc.space.size = sp.at("size").get<int>();
    rc.space.exponent = real(sp.at("exponent"), "space.exponent");
    rc.space.seed = sp.at("seed").get<std::uint64_t>();
    rc.space.label = sp.at("label").get<std::string>();
    rc.space.certify_cap = sp.at("certify_cap").get<std::size_t>();
    rc.space.sampled_triples = sp.at("sampled_triples").get<std::uint64_t>();

    const Json& dy = merged.at("dyadic");
    rc.dyadic.delta = real(dy.at("delta"), "dyadic.delta");
    if (!dy.at("k_min").is_null()) rc.dyadic.k_min = dy.at("k_min").get<int>();
    if (!dy.at("k_max").is_null()) rc.dyadic.k_max = dy.at("k_max").get<int>();
    rc.dyadic.extra_levels = dy.at("extra_levels").get<int>();
    if (!dy.at("j0").is_null()) rc.dyadic.j0 = dy.at("j0").get<int>();
    rc.dyadic.sampler = parse_sampler(dy.at("sampler").get<std::string>());
    rc.dyadic.sampler_seed = dy.at("seed").get<std::uint64_t>();

    const Json& ke = merged.at("kernel");
    rc.flavor = parse_flavor(ke.at("flavor").get<std::string>());
    rc.kernel.a = real(ke.at("a"), "kernel.a");
    rc.kernel.sigma = real(ke.at("sigma"), "kernel.sigma");
    rc.kernel.n_low = ke.at("n_low").get<int>();
    rc.kernel.scaling.tol = real(ke.at("scaling_tol"), "kernel.scaling_tol");
    rc.kernel.scaling.max_sweeps = ke.at("max_sweeps").get<int>();

    const Json& no = merged.at("norm");
    rc.norm.s = real(no.at("s"), "norm.s");
    rc.norm.p = real(no.at("p"), "norm.p");
    rc.norm.q = real(no.at("q"), "norm.q");
    rc.norm.u = real(no.at("u"), "norm.u");
    rc.norm.beta = real(no.at("beta"), "norm.beta");
    rc.norm.gamma = real(no.at("gamma"), "norm.gamma");
    rc.norm.c_tilde = real(no.at("c_tilde"), "norm.c_tilde");
    rc.norm.delta = rc.dyadic.delta;
    rc.norm.flavor = rc.flavor;

    rc.field = merged.at("field");

    const Json& fr = merged.at("frame");
    rc.frame.tol = real(fr.at("tol"), "frame.tol");
    rc.frame.max_iter = fr.at("max_iter").get<int>();

    const Json& lab = merged.at("lab");
    const Json& en = lab.at("ensemble");
    rc.ensemble.seed = en.at("seed").get<std::uint64_t>();
    for (const auto& [kind, count] : en.at("counts").items()) {
      rc.ensemble.counts[parse_ensemble_kind(kind)] = count.get<int>();
    }
    // Homogeneous experiments work modulo constants.
    rc.ensemble.mean_zero = rc.flavor == Flavor::homogeneous;
    rc.pairing = parse_pairing(lab.at("pairing").get<std::string>());
    rc.band_cap = real(lab.at("band_cap"), "lab.band_cap");
    rc.drift_cap = real(lab.at("drift_cap"), "lab.drift_cap");
    rc.drift_sizes = lab.at("drift_sizes").get<std::vector<int>>();
    rc.gate.enabled = lab.at("gate").at("enabled").get<bool>();
    rc.gate.tolerance = real(lab.at("gate").at("tolerance"), "lab.gate.tolerance");

    const Json& em = lab.at("embedding");
    rc.embedding.eps = real(em.at("eps"), "lab.embedding.eps");
    rc.embedding.low_p = real(em.at("low_p"), "lab.embedding.low_p");
    rc.embedding.low_s = real(em.at("low_s"), "lab.embedding.low_s");
    rc.embedding.band_cap = real(em.at("band_cap"), "lab.embedding.band_cap");
    rc.embedding.truncation_cap = real(em.at("truncation_cap"), "lab.embedding.truncation_cap");
    rc.embedding.c_tilde_cap = real(em.at("c_tilde_cap"), "lab.embedding.c_tilde_cap");

    const Json& le = lab.at("lemmas");
    rc.lemmas.theta_sequences = le.at("theta_sequences").get<std::size_t>();
    rc.lemmas.geometric_cap = real(le.at("geometric_cap"), "lab.lemmas.geometric_cap");
    rc.lemmas.two_sided_cap = real(le.at("two_sided_cap"), "lab.lemmas.two_sided_cap");
    rc.lemmas.domination_cap = real(le.at("domination_cap"), "lab.lemmas.domination_cap");
    rc.lemmas.seed = le.at("seed").get<std::uint64_t>();
    rc.lemmas.point_budget = le.at("point_budget").get<std::size_t>();
    rc.lemmas.fs_trials = le.at("fs_trials").get<int>();
    rc.lemmas.fs_family = le.at("fs_family").get<int>();

    rc.output_dir = merged.at("output").at("dir").get<std::string>();
    rc.write_csv = merged.at("output").at("csv").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return rc;
}

}  // namespace lipbesov
