#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covsim/est/ekf.hpp"
#include "covsim/geo/spheroid.hpp"
#include "covsim/kin/kinematics.hpp"

namespace covsim::eng {

// Full run configuration; defaults follow the reference simulation setup.
struct Scenario {
  geo::Spheroid spheroid{80.0, 20.0};
  int n_agents = 4;
  double t_star = 792.0;  // power lifespan
  kin::AgentConfig agent;
  double eps1 = 10.0;   // arrival / interception bound
  double eps2 = 0.05;   // surface-transfer convergence (log-altitude units)

  // intruders
  bool spawning_enabled = true;
  double intruder_max_speed = 0.7;
  double detection_range = 80.0;  // R_det
  double spawn_period = 35.0;
  double first_spawn = 594.0;     // 3 T*/4
  double spawn_lead = 5.0;        // seconds of flight before detection
  double decay_lambda = 0.05;
  double decay_pad = 5.0;
  est::MeasurementNoise noise;

  // simulation
  double dt = 0.05;
  double duration = 6000.0;
  std::uint64_t seed = 1;
  int mesh_cells = 10000;
  double coverage_target = 20.0;  // C*
  double initial_coverage = 20.0;
  double dwell_min = 1.0;
  double snapshot_period = 0.0;   // 0 disables coverage snapshots
  std::string output_dir = "out";
};

// Hard validation errors throw ValidationError; soft issues (like the
// anti-anomaly time step rule) come back as warnings.
std::vector<std::string> validate(const Scenario& s);

}  // namespace covsim::eng
