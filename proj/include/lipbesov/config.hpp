#ifndef LIPBESOV_CONFIG_HPP_
#define LIPBESOV_CONFIG_HPP_

#include <optional>
#include <string>
#include <vector>

#include "lipbesov/io.hpp"
#include "lipbesov/lab.hpp"
#include "lipbesov/norms.hpp"
#include "lipbesov/operators.hpp"

namespace lipbesov {

// Every leaf with its default. Sections: space, dyadic, kernel, norm,
// field, frame, lab, output.
Json default_config();

// Overlays `user` on the defaults. Unknown keys and type mismatches throw
// FormatError with the dotted path.
Json merge_config(const Json& user);

// `path=value`; value parses as JSON, otherwise as a bare string.
void apply_override(Json& config, const std::string& assignment);

struct DyadicConfig {
  double delta = 0.5;
  std::optional<int> k_min;
  std::optional<int> k_max;
  int extra_levels = 4;
  std::optional<int> j0;
  Sampler sampler = Sampler::center;
  std::uint64_t sampler_seed = 0;
};

struct RunConfig {
  Json doc;  // the effective, fully populated config

  std::string space_file;
  SpaceParams space;
  DyadicConfig dyadic;
  Flavor flavor = Flavor::homogeneous;
  KernelOptions kernel;
  NormSpec norm;
  Json field;
  ReconstructOptions frame;
  EnsembleSpec ensemble;
  Pairing pairing = Pairing::B_vs_L;
  double band_cap = 100.0;
  double drift_cap = 2.0;
  std::vector<int> drift_sizes;
  GateInfo gate;  // omega, q_global and eta are filled at run time
  EmbeddingOptions embedding;
  LemmaOptions lemmas;
  std::string output_dir;
  bool write_csv = true;
};

RunConfig parse_config(const Json& merged);

}  // namespace lipbesov

#endif  // LIPBESOV_CONFIG_HPP_
