#pragma once

#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "covsim/cov/mesh.hpp"
#include "covsim/cov/sensing.hpp"
#include "covsim/ctl/controllers.hpp"
#include "covsim/eng/scenario.hpp"
#include "covsim/est/decay.hpp"
#include "covsim/est/ekf.hpp"
#include "covsim/hsm/automaton.hpp"

namespace covsim::eng {

struct MetricsRow {
  double t = 0.0;
  double e_norm = 0.0;
  double min_pair_dist = 0.0;   // +inf while fewer than two agents deployed
  std::vector<std::string> modes;      // per agent ("-" if undeployed)
  std::vector<double> normal_length;   // per agent (0 if undeployed)
};

// Output hooks; any of them may be empty.
struct RunSinks {
  std::function<void(const nlohmann::ordered_json&)> event;
  std::function<void(const MetricsRow&)> metrics;
  std::function<void(double, const cov::CoverageField&, const cov::SurfaceMesh&)>
      snapshot;
};

struct ParticleOutcome {
  int id = -1;
  double spawn_time = 0.0;
  double detect_time = -1.0;
  double first_assign_time = -1.0;
  double impact_time = -1.0;   // truth; < 0 if still in flight at the end
  double dwell = 0.0;
  bool deferred = false;       // assignment was not immediate
  bool intercepted = false;
  bool in_flight_at_end = false;
};

struct RunResult {
  int steps = 0;
  double e_norm_final = 0.0;
  double min_pair_dist_ever = std::numeric_limits<double>::infinity();
  double min_normal_length_ever = std::numeric_limits<double>::infinity();
  bool definition1_violated = false;
  bool halted_on_fault = false;
  std::string fault_message;
  std::vector<ParticleOutcome> particles;
  cov::CoverageField field;
};

class Engine {
 public:
  explicit Engine(const Scenario& scenario);

  // Runs the full scenario. Faults (surface collision, domain violation)
  // stop the run; the partial result is returned with the fault recorded.
  RunResult run(const RunSinks& sinks);

  const cov::SurfaceMesh& mesh() const { return *mesh_; }

 private:
  Scenario scn_;
  std::unique_ptr<cov::SurfaceMesh> mesh_;
  geo::SurfaceFamily family_;
  std::vector<double> bounds_;
  double rtb_reserve_ = 0.0;
  double capacity_window_ = 0.0;
};

}  // namespace covsim::eng
