#ifndef LIPBESOV_LAB_HPP_
#define LIPBESOV_LAB_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lipbesov/difference_norms.hpp"
#include "lipbesov/dyadic.hpp"
#include "lipbesov/kernels.hpp"
#include "lipbesov/norms.hpp"
#include "lipbesov/space.hpp"

namespace lipbesov {

enum class EnsembleKind { bandlimited, holder, smoothed_indicator, gaussian_field };

EnsembleKind parse_ensemble_kind(const std::string& name);
std::string to_string(EnsembleKind kind);

struct EnsembleSpec {
  // Members per kind, generated in the enum's order.
  std::map<EnsembleKind, int> counts;
  std::uint64_t seed = 1;
  bool mean_zero = false;
};

// 13 bandlimited, 13 holder, 12 smoothed indicators, 12 gaussian fields.
EnsembleSpec standard_ensemble(std::uint64_t seed = 1, bool mean_zero = true);

struct EnsembleMember {
  EnsembleKind kind = EnsembleKind::holder;
  std::string label;
  Field f;
};

// d(., x0)^theta.
Field holder_field(const Space& space, std::size_t x0, double theta);

// Deterministic in (space, stack, spec). Throws ParameterError on an empty
// kind set or a nonpositive count.
std::vector<EnsembleMember> generate_ensemble(const Space& space, const KernelStack& stack,
                                              const EnsembleSpec& spec);

enum class Pairing { B_vs_L, B_vs_Lb, F_vs_Lt, F_vs_Lt_u, inhomog_B_vs_L, inhomog_F_vs_Lt };

Pairing parse_pairing(const std::string& name);
std::string to_string(Pairing pairing);

struct GateInfo {
  double omega = 1.0;
  std::optional<double> q_global;
  double eta = 0.9;
  double tolerance = 0.15;  // |q_global - omega| <= tolerance * omega
  bool enabled = true;
};

struct EquivalenceRow {
  std::string label;
  double left = 0.0;   // difference norm
  double right = 0.0;  // Besov / Triebel-Lizorkin norm
  double ratio = 0.0;
  bool degenerate = false;
};

struct EquivalenceReport {
  Pairing pairing = Pairing::B_vs_L;
  std::vector<EquivalenceRow> rows;
  std::size_t degenerate = 0;
  double min_ratio = 0.0;
  double median_ratio = 0.0;
  double max_ratio = 0.0;
  double geo_mean = 0.0;
  double band = 0.0;  // max / min
  double band_cap = 100.0;
  bool pass = false;
  std::string message;
};

// Throws InadmissibleParams naming the violated hypothesis.
EquivalenceReport equivalence_experiment(const Space& space, const KernelStack& stack,
                                         const CubeSystem& cubes, const NormSpec& spec,
                                         Pairing pairing,
                                         const std::vector<EnsembleMember>& ensemble,
                                         const GateInfo& gate, double band_cap = 100.0);

// max(g_a / g_b, g_b / g_a) of two geometric means.
double drift(double geo_a, double geo_b);

struct SuiteRow {
  std::string name;
  bool exact = false;  // exact rows need zero violations; band rows a cap
  std::size_t checks = 0;
  std::size_t violations = 0;
  double band_min = 0.0;
  double band_max = 0.0;
  double cap = 0.0;
  bool skipped = false;
  std::string note;
  bool pass = true;
};

struct SuiteReport {
  std::string suite;
  std::vector<SuiteRow> rows;
  bool exact_ok() const;
  bool bands_ok() const;
};

struct EmbeddingOptions {
  double eps = 0.2;
  double low_p = 0.8;   // Sobolev-embedding source exponent
  double low_s = 0.8;
  double band_cap = 100.0;
  // ||f||_p + truncated vs the full undotted norm, and C_tilde vs 2 C_tilde;
  // both rows record max(ratio, 1 / ratio).
  double truncation_cap = 4.0;
  double c_tilde_cap = 8.0;
  GateInfo gate;
};

SuiteReport embedding_suite(const Space& space, const KernelStack& stack,
                            const CubeSystem& cubes, const NormSpec& spec,
                            const std::vector<EnsembleMember>& ensemble,
                            const EmbeddingOptions& options = {});

struct LemmaOptions {
  std::size_t theta_sequences = 10'000;
  double geometric_cap = 4.0;
  double two_sided_cap = 50.0;
  double domination_cap = 50.0;
  double omega = 1.0;
  std::uint64_t seed = 11;
  std::size_t point_budget = 64;
  int fs_trials = 16;
  int fs_family = 8;
};

struct FeffermanStein {
  double p = 2.0;
  double q = 2.0;
  double constant = 0.0;
};

struct LemmaReport {
  SuiteReport suite;
  std::vector<FeffermanStein> fefferman_stein;
};

LemmaReport lemma_suite(const Space& space, const KernelStack& stack, const CubeSystem& cubes,
                        const LemmaOptions& options = {});

// Worst ratio over fs_trials families of fs_family scaled ball indicators.
double fefferman_stein_constant(const Space& space, double p, double q,
                                const LemmaOptions& options = {});

// The Fefferman-Stein ratio for one family.
double fefferman_stein_ratio(const Space& space, const std::vector<Field>& family, double p,
                             double q);

}  // namespace lipbesov

#endif  // LIPBESOV_LAB_HPP_
