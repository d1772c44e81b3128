#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gapsafe/path.hpp"
#include "gapsafe/solver.hpp"

namespace gapsafe {

inline constexpr int kReportSchemaVersion = 1;

/// "%.17g": enough digits for a lossless double round trip.
std::string format_real(double v);

/// Entry point behind the `gapsafe` executable. `args` excludes the program
/// name. Returns 0 on success (including non-converged solves, which are
/// reported as data), 2 on usage errors and 1 on input/output failures.
///
/// Subcommands: solve, path, sweep, repro-edpp, lambda-max.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// CSV writers shared by the CLI and the golden tests. With timing=false the
// wall-clock columns are left out so the output is byte-stable.
void write_path_csv(const PathResult& result, std::ostream& out, bool timing);
void write_trace_csv(const PathResult& result, std::ostream& out);
void write_coefficients_csv(const PathResult& result, std::ostream& out);
void write_sweep_csv(const SweepTable& table, std::ostream& out);
void write_repro_csv(const EdppReproResult& result, std::ostream& out);

}  // namespace gapsafe
