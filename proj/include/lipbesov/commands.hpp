#ifndef LIPBESOV_COMMANDS_HPP_
#define LIPBESOV_COMMANDS_HPP_

#include <iosfwd>

#include "lipbesov/config.hpp"

namespace lipbesov {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;      // usage, format and runtime errors
inline constexpr int kExitViolation = 2;  // exact invariants, failed suites

// Parses argv, runs one command, writes reports under output.dir. Reports
// carry no timestamps; wall times go to timing.json beside them.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Building blocks shared with the tests.
Space make_space(const RunConfig& rc);
CubeSystem make_cubes(const RunConfig& rc, const Space& space);
KernelStack make_stack(const RunConfig& rc, const Space& space, const CubeSystem& cubes);
Field make_field(const RunConfig& rc, const Space& space, const KernelStack& stack);
GateInfo make_gate(const RunConfig& rc, const Space& space, const KernelStack& stack);

}  // namespace lipbesov

#endif  // LIPBESOV_COMMANDS_HPP_
