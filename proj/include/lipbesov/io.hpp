#ifndef LIPBESOV_IO_HPP_
#define LIPBESOV_IO_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "lipbesov/dyadic.hpp"
#include "lipbesov/kernels.hpp"
#include "lipbesov/lab.hpp"
#include "lipbesov/operators.hpp"
#include "lipbesov/space.hpp"

namespace lipbesov {

using Json = nlohmann::ordered_json;

// Writes to a temporary sibling and renames it over path.
void write_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);
// Throws FormatError with the path and parser message.
Json read_json(const std::string& path);
// Two-space indented, trailing newline.
std::string dump_json(const Json& j);

// %.17g; "inf" / "-inf" / "nan" for non-finite values.
std::string format_double(double v);
// Reals that may be infinite are stored as the string "inf".
Json real_to_json(double v);
double real_from_json(const Json& j, const std::string& what);

// Space document: n, label, weights, a0, a0_sampled, dist (row-major lower
// triangle without the diagonal) and, when known, points. Loading also
// accepts dist as a full n x n matrix, which is checked for symmetry.
Json space_to_json(const Space& space);
// A declared a0 is verified (CertificationError names the triple); a
// missing one is certified. Distances come from dist, or Euclidean from
// points when dist is absent.
Space space_from_json(const Json& doc, std::size_t certify_cap = kExhaustiveCertifyCap,
                      std::uint64_t samples = kSampledTriples);

// Cube dump: per level the center, parent and members of each cube.
Json cubes_to_json(const CubeSystem& cubes);
// Structure only: nets come from the centers, assignments are left empty
// until attach_assignments.
CubeSystem cubes_from_json(const Json& doc);
// Rebuilds assignments from member lists; call after the structure check.
void attach_assignments(CubeSystem& cubes, std::size_t n);

Json to_json(const GeometryReport& g);
Json to_json(const CubeVerification& v);
Json to_json(const AtiValidationReport& r);
Json to_json(const ReconstructReport& r);
Json to_json(const EquivalenceReport& r);
Json to_json(const SuiteRow& r);
Json to_json(const SuiteReport& r);

// CSV contracts:
//   equivalence: label,left,right,ratio,degenerate
//   suite:       name,exact,checks,violations,band_min,band_max,cap,skipped,pass,note
//   field:       x,value
std::string equivalence_csv(const EquivalenceReport& r);
std::string suite_csv(const SuiteReport& r);
std::string field_csv(const Field& f);

Json field_to_json(const Field& f);
Field field_from_json(const Json& j, std::size_t n);

}  // namespace lipbesov

#endif  // LIPBESOV_IO_HPP_
