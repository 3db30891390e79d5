#pragma once

#include "ldp/harness.hpp"
#include "ldp/io.hpp"
#include "ldp/problem.hpp"
#include "ldp/rate.hpp"
#include "ldp/spde.hpp"

#include <filesystem>
#include <string>

namespace ldp {

/// Parses a JSON document from disk; I/O and syntax problems surface as
/// config_error with the file position.
Json load_json_file(const std::filesystem::path& path);

/// One run's assembled inputs. The document is validated strictly (unknown
/// keys rejected, types checked) and every complaint carries the JSON
/// pointer of the offending node.
struct RunSetup {
  Json doc;          // the validated document
  Problem problem;
  Control psi;       // /control; defaults to the unit control on 16 cells
  std::uint64_t seed = 1;
  int threads = 1;
  double eps = 0.1;  // /run/eps
  Index paths = 100;
  SimOptions sim{};
  SolveOptions solve{};
};

RunSetup make_run_setup(const Json& doc);

/// Section accessors; absent sections yield defaults wired to the run block.
AuditOptions audit_options(const RunSetup& rs);
Ldp1Options ldp1_options(const RunSetup& rs);
Ldp2Options ldp2_options(const RunSetup& rs);
DyadicOptions dyadic_options(const RunSetup& rs);
TailOptions tail_options(const RunSetup& rs);

/// /event is required for rate and tail runs.
bool has_event(const RunSetup& rs);
EventSpec event_spec(const RunSetup& rs);

MinimizeOptions minimize_options(const RunSetup& rs);
/// Uniform grid with /rate/grid_cells cells on [0, horizon].
Vector rate_time_grid(const RunSetup& rs);

/// True when /skeleton/oracle requests the closed-form comparison.
bool skeleton_oracle_requested(const RunSetup& rs);
/// Exact solution for the scalar linear drift with state-independent noise
/// and a constant control; throws config_error when the setup is not of
/// that shape.
Vector skeleton_oracle_terminal(const RunSetup& rs, double t);

}  // namespace ldp
