#pragma once

#include <stdexcept>
#include <string>

namespace covsim {

// Fault classes surfaced through the CLI exit status. Solver-level errors
// (foot point, geodesic, partition root find) indicate degenerate inputs;
// engine faults halt a run with diagnostics.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeodesicError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PoleHeadingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PartitionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpawnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulation faults: unrecoverable, the run stops and dumps state.
struct DomainFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SurfaceCollisionFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DeterminismFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace covsim
